"""Dense numerical kernels used by the estimators.

Symmetric eigendecomposition and SVD are delegated to LAPACK (via numpy)
behind the contracts below; inversion is a hand-rolled Gauss-Jordan with
partial pivoting so the singularity condition (pivot below 1e-12 * max|A|)
is explicit.  Everything here is desk scale (dims up to a few hundred).
"""

from dataclasses import dataclass

import numpy as np

from .core import ConvergenceError, DimensionMismatchError, NonSymmetricError, SingularMatrixError

_SYM_TOL = 1e-10
_PIVOT_REL_TOL = 1e-12


@dataclass(frozen=True)
class EigResult:
    """Eigenvalues in descending order, eigenvector columns paired with them."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def sym_eig(A: np.ndarray) -> EigResult:
    """Eigendecomposition of a symmetric matrix, eigenvalues descending."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {A.shape}")
    if A.size and np.max(np.abs(A - A.T)) > _SYM_TOL:
        raise NonSymmetricError(
            f"input is not symmetric: max|A - A^T| = {np.max(np.abs(A - A.T)):.3e}"
        )
    try:
        vals, vecs = np.linalg.eigh(A)
    except np.linalg.LinAlgError as e:  # pragma: no cover - LAPACK failure
        raise ConvergenceError(f"eigendecomposition did not converge: {e}") from e
    order = np.argsort(vals)[::-1]
    return EigResult(eigenvalues=vals[order], eigenvectors=vecs[:, order])


def svd(A: np.ndarray):
    """Thin SVD: returns (U, sigma descending, V) with A = U diag(sigma) V^T."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    try:
        U, s, Vh = np.linalg.svd(A, full_matrices=False)
    except np.linalg.LinAlgError as e:  # pragma: no cover - LAPACK failure
        raise ConvergenceError(f"SVD did not converge: {e}") from e
    return U, s, Vh.T


def inverse(A: np.ndarray) -> np.ndarray:
    """Gauss-Jordan inverse with partial pivoting.

    Raises SingularMatrixError when the best available pivot falls below
    1e-12 * max|A|.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {A.shape}")
    n = A.shape[0]
    amax = np.max(np.abs(A)) if A.size else 0.0
    if amax == 0.0:
        raise SingularMatrixError("zero matrix is singular")
    aug = np.hstack([A.astype(float, copy=True), np.eye(n)])
    for col in range(n):
        p = col + int(np.argmax(np.abs(aug[col:, col])))
        if np.abs(aug[p, col]) <= _PIVOT_REL_TOL * amax:
            raise SingularMatrixError(
                f"pivot {aug[p, col]:.3e} in column {col} below {_PIVOT_REL_TOL:g} * max|A|"
            )
        if p != col:
            aug[[col, p]] = aug[[p, col]]
        aug[col] /= aug[col, col]
        rows = np.arange(n) != col
        aug[rows] -= np.outer(aug[rows, col], aug[col])
    return aug[:, n:]


_NORM_KINDS = ("max", "fro", "nuclear", "spectral", "induced_1", "induced_inf", "l11")


def matrix_norm(A: np.ndarray, kind: str) -> float:
    """Named matrix norm; nuclear and spectral go through the SVD."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if kind == "max":
        return float(np.max(np.abs(A))) if A.size else 0.0
    if kind == "fro":
        return float(np.linalg.norm(A, "fro"))
    if kind == "nuclear":
        return float(np.sum(svd(A)[1]))
    if kind == "spectral":
        s = svd(A)[1]
        return float(s[0]) if s.size else 0.0
    if kind == "induced_1":
        return float(np.max(np.sum(np.abs(A), axis=0))) if A.size else 0.0
    if kind == "induced_inf":
        return float(np.max(np.sum(np.abs(A), axis=1))) if A.size else 0.0
    if kind == "l11":
        return float(np.sum(np.abs(A)))
    raise ValueError(f"unknown norm kind {kind!r}; expected one of {_NORM_KINDS}")


def random_orthogonal(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix, deterministic given the generator.

    QR of an i.i.d. standard-normal matrix, with column signs fixed so that R
    has a positive diagonal (which makes the draw Haar rather than biased by
    the QR sign convention).
    """
    if d < 1:
        raise DimensionMismatchError(f"d must be >= 1, got {d}")
    G = rng.standard_normal((d, d))
    Q, R = np.linalg.qr(G)
    signs = np.sign(np.diag(R))
    signs[signs == 0.0] = 1.0
    return Q * signs
