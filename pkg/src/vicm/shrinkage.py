"""Truncation and thresholding operators.

Hard truncation zeroes large coordinates; the odd soft-truncation function
``phi`` saturates logarithmically and lifts to rectangular matrices through
the eigenvalues of the Hermitian dilation; soft thresholding shrinks
coordinates or singular values toward zero.  All operators are pure.
"""

import numpy as np

from . import linalg


def hard_truncate(v: np.ndarray, tau: float) -> np.ndarray:
    """Keep entries with |v_i| <= tau (boundary kept), zero the rest.

    tau = inf is the identity.  Works on arrays of any shape.
    """
    if tau <= 0:
        raise ValueError(f"tau must be > 0, got {tau!r}")
    v = np.asarray(v, dtype=float)
    return np.where(np.abs(v) <= tau, v, 0.0)


def phi(x):
    """Odd soft-truncation function.

    phi(x) = -log(1 - x + x^2/2) for x <= 0, log(1 + x + x^2/2) for x > 0.
    Accepts scalars or arrays; log1p keeps small arguments accurate, where
    phi(x) ~ x.
    """
    x = np.asarray(x, dtype=float)
    neg = -np.log1p(-x + 0.5 * x * x)
    pos = np.log1p(x + 0.5 * x * x)
    out = np.where(x <= 0.0, neg, pos)
    return out if out.ndim else float(out)


def soft_truncate_matrix(V: np.ndarray, kappa: float) -> np.ndarray:
    """Matrix soft truncation of kappa*V via Hermitian dilation.

    Forms [[0, kappa*V], [kappa*V^T, 0]], applies phi to its eigenvalues and
    returns the upper-right d1 x d2 block of the reassembled matrix.  The
    caller divides the accumulated sum by n*kappa.  phi on eigenvalues is a
    continuous matrix function, so repeated eigenspaces are harmless.
    """
    V = np.atleast_2d(np.asarray(V, dtype=float))
    if kappa <= 0:
        raise ValueError(f"kappa must be > 0, got {kappa!r}")
    d1, d2 = V.shape
    D = np.zeros((d1 + d2, d1 + d2))
    D[:d1, d1:] = kappa * V
    D[d1:, :d1] = kappa * V.T
    res = linalg.sym_eig(D)
    M = (res.eigenvectors * phi(res.eigenvalues)) @ res.eigenvectors.T
    return M[:d1, d1:]


def soft_truncate_rank_one(coef: float, u: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Closed form of soft_truncate_matrix(coef * outer(u, w), 1).

    The dilation of c*u w^T has eigenvalues +-|c|*|u||w| with rank-two
    eigenstructure, so the block reduces to phi(c*|u||w|) * u w^T / (|u||w|);
    a zero factor gives the zero matrix (phi(0) = 0 limit).
    """
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    nu = np.linalg.norm(u)
    nw = np.linalg.norm(w)
    if nu == 0.0 or nw == 0.0 or coef == 0.0:
        return np.zeros((u.size, w.size))
    return (phi(coef * nu * nw) / (nu * nw)) * np.outer(u, w)


def soft_threshold_vector(a: np.ndarray, lam: float) -> np.ndarray:
    """Coordinatewise shrink toward 0 by lam, zeroing magnitudes <= lam."""
    if lam < 0:
        raise ValueError(f"lam must be >= 0, got {lam!r}")
    a = np.asarray(a, dtype=float)
    return np.where(np.abs(a) > lam, a - lam * np.sign(a), 0.0)


def soft_threshold_singular(A: np.ndarray, lam: float) -> np.ndarray:
    """Shrink singular values by lam: U diag((sigma_i - lam)_+) V^T."""
    if lam < 0:
        raise ValueError(f"lam must be >= 0, got {lam!r}")
    A = np.atleast_2d(np.asarray(A, dtype=float))
    U, s, V = linalg.svd(A)
    return (U * np.maximum(s - lam, 0.0)) @ V.T
