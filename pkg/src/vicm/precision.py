"""Covariance and precision-matrix estimation for heavy-tailed covariates.

Two plug-in routes: inverting a soft-truncated covariance (low-dimensional,
no structural assumptions) and constrained l1 minimization against a
hard-truncated covariance (high-dimensional, column-sparse precision).
"""

import math
from dataclasses import dataclass

import numpy as np

from . import linalg, lp, shrinkage
from .core import InfeasibleError, SingularMatrixError

_METHODS = ("identity", "inverse_soft", "clime")


@dataclass(frozen=True)
class PrecisionEstimate:
    """Estimated precision matrix with feasibility diagnostics.

    ``residual`` is ||Sigma_hat @ omega - I||_max against the covariance the
    estimate was built from (0 for method="identity").  ``asymmetry`` records
    ||omega - omega^T||_max; the constrained-l1 route is used as-is, without
    a symmetrization step, so this is pure observability.
    """

    omega: np.ndarray
    method: str
    residual: float = 0.0
    asymmetry: float = 0.0

    def __post_init__(self):
        if self.method not in _METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {_METHODS}")
        om = np.atleast_2d(np.asarray(self.omega, dtype=float))
        om.setflags(write=False)
        object.__setattr__(self, "omega", om)

    @property
    def d2(self) -> int:
        return self.omega.shape[0]


def identity_precision(d2: int) -> PrecisionEstimate:
    """The no-op plug-in for independent, unit-variance covariates."""
    return PrecisionEstimate(omega=np.eye(d2), method="identity", residual=0.0)


def soft_truncated_covariance(Z: np.ndarray, kappa2: float) -> np.ndarray:
    """(1/(n*kappa2)) sum_i Phi(kappa2 * Z_i Z_i^T), symmetrized.

    Each summand is symmetric rank one with eigenvalues {|Z_i|^2, 0}, so the
    matrix soft truncation reduces to scaling Z_i Z_i^T by
    phi(kappa2*|Z_i|^2)/|Z_i|^2 (zero row -> zero matrix).
    """
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    if kappa2 <= 0:
        raise ValueError(f"kappa2 must be > 0, got {kappa2!r}")
    n = Z.shape[0]
    q = np.einsum("ij,ij->i", Z, Z)
    w = np.zeros(n)
    nz = q > 0.0
    w[nz] = shrinkage.phi(kappa2 * q[nz]) / q[nz]
    S = (Z * w[:, None]).T @ Z / (n * kappa2)
    return 0.5 * (S + S.T)


def precision_inverse(Z: np.ndarray, kappa2: float) -> PrecisionEstimate:
    """Invert the soft-truncated covariance of Z.

    Raises SingularMatrixError when the truncated covariance is not
    invertible, which signals n too small relative to d2.
    """
    sigma = soft_truncated_covariance(Z, kappa2)
    try:
        omega = linalg.inverse(sigma)
    except SingularMatrixError as e:
        raise SingularMatrixError(
            f"soft-truncated covariance is singular (n={np.atleast_2d(Z).shape[0]}, "
            f"d2={sigma.shape[0]}): {e}"
        ) from e
    residual = linalg.matrix_norm(sigma @ omega - np.eye(sigma.shape[0]), "max")
    if residual > 1e-8:
        raise SingularMatrixError(
            f"soft-truncated covariance too ill-conditioned: inversion residual {residual:.3e}"
        )
    return PrecisionEstimate(omega=omega, method="inverse_soft", residual=residual)


def hard_truncated_covariance(Z: np.ndarray, tau: float) -> np.ndarray:
    """(1/n) sum_i trunc(Z_i) trunc(Z_i)^T with entrywise truncation at tau."""
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    Zt = shrinkage.hard_truncate(Z, tau)
    return Zt.T @ Zt / Z.shape[0]


def solve_column_lp(S: np.ndarray, j: int, gamma: float) -> np.ndarray:
    """Column problem: min |l|_1 s.t. |S l - e_j|_inf <= gamma (j is 1-based).

    l1 minimizers can be non-unique; any optimum is acceptable, and all
    downstream checks compare objective values and feasibility only.
    """
    S = np.atleast_2d(np.asarray(S, dtype=float))
    d2 = S.shape[1]
    if not 1 <= j <= d2:
        raise ValueError(f"column index {j} outside 1..{d2}")
    if gamma < 0:
        raise ValueError(f"gamma must be >= 0, got {gamma!r}")
    target = np.zeros(S.shape[0])
    target[j - 1] = 1.0
    try:
        l, _ = lp.solve_l1_under_linf_band(S, target, gamma)
    except InfeasibleError as e:
        raise InfeasibleError(f"column {j} LP infeasible at gamma={gamma!r}", column=j) from e
    return l


def clime(sigma_hat: np.ndarray, gamma: float) -> PrecisionEstimate:
    """Constrained l1 precision estimate: per column, min |l|_1 within the band.

    The joint ||.||_{1,1} problem decomposes into d2 independent column
    programs; the assembled matrix is not symmetrized.
    """
    sigma_hat = np.atleast_2d(np.asarray(sigma_hat, dtype=float))
    d2 = sigma_hat.shape[1]
    omega = np.column_stack([solve_column_lp(sigma_hat, j, gamma) for j in range(1, d2 + 1)])
    residual = linalg.matrix_norm(sigma_hat @ omega - np.eye(d2), "max")
    asymmetry = linalg.matrix_norm(omega - omega.T, "max")
    return PrecisionEstimate(omega=omega, method="clime", residual=residual, asymmetry=asymmetry)


# ---------------------------------------------------------------------------
# Prescribed tuning defaults
# ---------------------------------------------------------------------------


def clime_default_gamma(n: int, d2: int, m4: float, omega_l1_bound: float = 1.0) -> float:
    """Constraint level 12 * |Omega|_1-bound * sqrt(M4 log d2 / n).

    The true induced-1-norm of the precision matrix is unknowable in
    practice; callers pass a bound (default 1) or override gamma outright.
    """
    if min(n, d2) <= 0 or m4 <= 0 or omega_l1_bound <= 0:
        raise ValueError("all inputs must be positive")
    return 12.0 * omega_l1_bound * math.sqrt(m4 * math.log(d2) / n)


def covariance_tau_theory(n: int, d2: int, m4: float) -> float:
    """Truncation level (M4 n / log d2)^(1/4) / 2 for the covariance input."""
    return (m4 * n / math.log(d2)) ** 0.25 / 2.0


def covariance_tau_sim(n: int, d2: int) -> float:
    """Moment-free simulation variant 2 (n / log d2)^(1/4)."""
    return 2.0 * (n / math.log(d2)) ** 0.25


def sim_gamma(n: int, d2: int) -> float:
    """Moment-free simulation constraint level 10 sqrt(log d2 / n)."""
    return 10.0 * math.sqrt(math.log(d2) / n)


def precision_kappa2_theory(n: int, d2: int, m4: float) -> float:
    """Soft-truncation scale sqrt(2 log d2 / (n d2 sqrt(M4)))."""
    return math.sqrt(2.0 * math.log(d2) / (n * d2 * math.sqrt(m4)))


def precision_kappa2_sim(n: int, d2: int) -> float:
    """Moment-free simulation variant 2 sqrt(log d2 / (n d2))."""
    return 2.0 * math.sqrt(math.log(d2) / (n * d2))
