"""Synthetic data generation for the convergence studies.

Design matrices follow the named score distributions; the covariate z is
either independent Rademacher or a Gaussian copula with heavy-tailed t(7)
marginals; the coefficient matrix is column-sparse, low-rank, or fully
sparse by construction.  Every sampler is pure given an explicit generator,
and replication substreams derive from (master seed, key) so parallel runs
reproduce serial ones bit for bit.
"""

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import ndtr, ndtri, stdtrit

from .core import CoefficientMatrix, ConfigError, Dataset, DimensionMismatchError, ModelSpec, VicmError


def derive_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Independent, reproducible substream for (master seed, key...)."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=tuple(key)))


# ---------------------------------------------------------------------------
# Link function families
# ---------------------------------------------------------------------------


def _sigmoid(u):
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    pos = u >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-u[pos]))
    eu = np.exp(u[~pos])
    out[~pos] = eu / (1.0 + eu)
    return out


# family name -> (f(u, k), f'(u, k)); k >= 1 scales the fluctuation terms
LINK_FAMILIES = {
    "identity": (
        lambda u, k: np.asarray(u, dtype=float),
        lambda u, k: np.ones_like(np.asarray(u, dtype=float)),
    ),
    "linear_cosine": (
        lambda u, k: u + np.cos(u) / k,
        lambda u, k: 1.0 - np.sin(u) / k,
    ),
    "linear_gaussian": (
        lambda u, k: u + np.exp(-u * u) / k,
        lambda u, k: 1.0 - 2.0 * u * np.exp(-u * u) / k,
    ),
    "linear_sigmoid": (
        lambda u, k: u + _sigmoid(u) / k,
        lambda u, k: 1.0 + _sigmoid(u) * (1.0 - _sigmoid(u)) / k,
    ),
    "quadratic_cosine": (
        lambda u, k: u * u + k * u + np.cos(u) ** 2 / k,
        lambda u, k: 2.0 * u + k - np.sin(2.0 * u) / k,
    ),
    "quadratic_gaussian": (
        lambda u, k: u * u + math.sqrt(k) * u + np.exp(-u * u) / math.sqrt(k),
        lambda u, k: 2.0 * u + math.sqrt(k) - 2.0 * u * np.exp(-u * u) / math.sqrt(k),
    ),
    "quadratic_sigmoid": (
        lambda u, k: u * u + k ** 0.25 * u + _sigmoid(u) / k ** 2,
        lambda u, k: 2.0 * u + k ** 0.25 + _sigmoid(u) * (1.0 - _sigmoid(u)) / k ** 2,
    ),
}

# numeric ids for the six study families, in their conventional order
_LINK_IDS = {
    1: "linear_cosine",
    2: "linear_gaussian",
    3: "linear_sigmoid",
    4: "quadratic_cosine",
    5: "quadratic_gaussian",
    6: "quadratic_sigmoid",
}


def resolve_link(family) -> str:
    """Accept a family name or numeric id 1..6 and return the canonical name."""
    if isinstance(family, str):
        if family not in LINK_FAMILIES:
            raise ConfigError(f"unknown link family {family!r}; expected one of {sorted(LINK_FAMILIES)}")
        return family
    if family in _LINK_IDS:
        return _LINK_IDS[family]
    raise ConfigError(f"unknown link family id {family!r}; expected 1..6 or a name")


def link_eval(family, k: int, u):
    """Evaluate the k-th link of a family at u (k is 1-based)."""
    if k < 1:
        raise ConfigError(f"link index k must be >= 1, got {k}")
    f, _ = LINK_FAMILIES[resolve_link(family)]
    out = f(np.asarray(u, dtype=float), k)
    return float(out) if np.ndim(out) == 0 else out


def link_deriv(family, k: int, u):
    """Evaluate the derivative of the k-th link of a family at u."""
    if k < 1:
        raise ConfigError(f"link index k must be >= 1, got {k}")
    _, fp = LINK_FAMILIES[resolve_link(family)]
    out = fp(np.asarray(u, dtype=float), k)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# Design and covariate samplers
# ---------------------------------------------------------------------------


def sample_design(kind: str, n: int, d1: int, rng: np.random.Generator) -> np.ndarray:
    """n x d1 matrix of i.i.d. entries from a named design distribution."""
    if kind == "gaussian":
        return rng.standard_normal((n, d1))
    if kind == "beta":
        return rng.beta(8.0, 8.0, size=(n, d1))
    if kind == "gamma":
        return rng.gamma(8.0, 0.1, size=(n, d1))
    if kind == "student_t":
        return rng.standard_t(13.0, size=(n, d1))
    if kind == "rayleigh":
        return rng.rayleigh(1.0, size=(n, d1))
    if kind == "weibull":
        return rng.weibull(7.0, size=(n, d1))
    raise ConfigError(f"unknown design kind {kind!r}")


def sample_z_independent(n: int, d2: int, rng: np.random.Generator) -> np.ndarray:
    """Independent Rademacher entries (+1 or -1 with equal probability)."""
    return rng.integers(0, 2, size=(n, d2)).astype(float) * 2.0 - 1.0


@dataclass(frozen=True)
class CopulaSpec:
    """Gaussian copula with t-distributed marginals.

    ``correlation`` must be symmetric with unit diagonal and positive
    definite; each coordinate is mapped through the normal CDF and then the
    t(nu) quantile, so the marginals are exactly t(nu) but the covariance of
    the result is neither ``correlation`` nor known in closed form.
    """

    correlation: np.ndarray
    nu: int = 7

    def __post_init__(self):
        C = np.atleast_2d(np.asarray(self.correlation, dtype=float))
        if C.shape[0] != C.shape[1]:
            raise DimensionMismatchError(f"correlation must be square, got {C.shape}")
        if np.max(np.abs(C - C.T)) > 1e-10 or np.max(np.abs(np.diag(C) - 1.0)) > 1e-10:
            raise ConfigError("correlation must be symmetric with unit diagonal")
        C.setflags(write=False)
        object.__setattr__(self, "correlation", C)

    @property
    def d2(self) -> int:
        return self.correlation.shape[0]


def sample_z_copula(spec: CopulaSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """Dependent heavy-tailed covariates via the Gaussian copula."""
    try:
        L = np.linalg.cholesky(spec.correlation)
    except np.linalg.LinAlgError as e:
        raise ConfigError(f"copula correlation is not positive definite: {e}") from e
    G = rng.standard_normal((n, spec.d2)) @ L.T
    # ndtr saturates to exactly 1.0 beyond ~8.3 sigma; keep U in the open interval
    U = np.clip(ndtr(G), 1e-300, 1.0 - 1e-16)
    return t_quantile(U, spec.nu)


def equicorrelation(d2: int, rho: float = 0.2) -> np.ndarray:
    """Correlation matrix rho everywhere off the unit diagonal."""
    return rho * np.ones((d2, d2)) + (1.0 - rho) * np.eye(d2)


def tridiagonal_precision_correlation(d2: int, offdiag: float = 0.2) -> np.ndarray:
    """Correlation induced by a tridiagonal precision matrix.

    Builds Theta with unit diagonal and ``offdiag`` on the first off-diagonals,
    inverts it, and rescales the inverse to unit diagonal.  The precision of
    the result keeps Theta's sparsity pattern.
    """
    theta = np.eye(d2) + offdiag * (np.eye(d2, k=1) + np.eye(d2, k=-1))
    cov = np.linalg.inv(theta)
    d = 1.0 / np.sqrt(np.diag(cov))
    corr = cov * np.outer(d, d)
    return 0.5 * (corr + corr.T)


# ---------------------------------------------------------------------------
# Parameter generation
# ---------------------------------------------------------------------------

_STRUCTURES = ("column_sparse", "lowrank", "fully_sparse")


@dataclass(frozen=True)
class ParamGenSpec:
    """How to draw the true coefficient matrix: structure plus its size knob."""

    structure: str
    d1: int
    d2: int
    s: int = 0
    r: int = 0

    def __post_init__(self):
        if self.structure not in _STRUCTURES:
            raise ConfigError(f"unknown structure {self.structure!r}; expected one of {_STRUCTURES}")
        if self.d1 < 1 or self.d2 < 1:
            raise ConfigError("dims must be >= 1")
        if self.structure == "column_sparse" and not 1 <= self.s <= self.d1:
            raise ConfigError(f"need 1 <= s <= d1, got s={self.s}")
        if self.structure == "fully_sparse" and not 1 <= self.s <= self.d1 * self.d2:
            raise ConfigError(f"need 1 <= s <= d1*d2, got s={self.s}")
        if self.structure == "lowrank" and not 1 <= self.r <= min(self.d1, self.d2):
            raise ConfigError(f"need 1 <= r <= min(d1, d2), got r={self.r}")


def gen_parameters(spec: ParamGenSpec, rng: np.random.Generator) -> CoefficientMatrix:
    """Draw a structured true coefficient matrix.

    column_sparse: each column gets a uniform-random size-s support with
    entries +-1/sqrt(s) (unit column norm).  lowrank: U Lambda V^T with Haar
    orthogonal U, V and r random diagonal slots valued +-1/sqrt(r) (unit
    Frobenius norm).  fully_sparse: one size-s support over all d1*d2 cells.
    """
    from . import linalg  # local import avoids a cycle at package init

    d1, d2 = spec.d1, spec.d2
    B = np.zeros((d1, d2))
    if spec.structure == "column_sparse":
        val = 1.0 / math.sqrt(spec.s)
        for k in range(d2):
            support = rng.choice(d1, size=spec.s, replace=False)
            B[support, k] = rng.choice([-val, val], size=spec.s)
    elif spec.structure == "lowrank":
        U = linalg.random_orthogonal(d1, rng)
        V = linalg.random_orthogonal(d2, rng)
        dmin = min(d1, d2)
        slots = rng.choice(dmin, size=spec.r, replace=False)
        diag = np.zeros(dmin)
        diag[slots] = rng.choice([-1.0, 1.0], size=spec.r) / math.sqrt(spec.r)
        B = (U[:, :dmin] * diag) @ V[:, :dmin].T
    else:
        val = 1.0 / math.sqrt(spec.s)
        support = rng.choice(d1 * d2, size=spec.s, replace=False)
        B.ravel()[support] = rng.choice([-val, val], size=spec.s)
    return CoefficientMatrix(B=B)


# ---------------------------------------------------------------------------
# Dataset generation
# ---------------------------------------------------------------------------


def _links_for(model: ModelSpec, d2: int) -> Sequence[Callable]:
    if isinstance(model.link_family, (str, int)):
        name = resolve_link(model.link_family)
        f, _ = LINK_FAMILIES[name]
        return [lambda u, k=k: f(u, k) for k in range(1, d2 + 1)]
    links = list(model.link_family)
    if len(links) != d2:
        raise DimensionMismatchError(f"need d2={d2} link functions, got {len(links)}")
    return links


def gen_dataset(model: ModelSpec, B: CoefficientMatrix, n: int, rng: np.random.Generator, return_noise: bool = False):
    """Draw n observations of y = sum_j z_j f_j(<x, beta_j>) + noise.

    With ``return_noise`` the realized noise vector is returned alongside, so
    callers can verify the generation algebra exactly.
    """
    d1, d2 = B.d1, B.d2
    X = sample_design(model.design, n, d1, rng)
    if isinstance(model.z_law, CopulaSpec):
        if model.z_law.d2 != d2:
            raise DimensionMismatchError(
                f"copula dimension {model.z_law.d2} does not match d2={d2}"
            )
        Z = sample_z_copula(model.z_law, n, rng)
    elif model.z_law == "independent":
        Z = sample_z_independent(n, d2, rng)
    else:
        raise ConfigError(f"unknown z law {model.z_law!r}")
    U = X @ B.B
    links = _links_for(model, d2)
    F = np.column_stack([links[j](U[:, j]) for j in range(d2)])
    eps = model.noise_sd * rng.standard_normal(n) if model.noise_sd > 0 else np.zeros(n)
    data = Dataset(y=np.sum(Z * F, axis=1) + eps, X=X, Z=Z)
    return (data, eps) if return_noise else data


# ---------------------------------------------------------------------------
# Quantile utilities
# ---------------------------------------------------------------------------


def normal_quantile(p) -> float:
    """Standard normal quantile, accurate to well below 1e-8."""
    p_arr = np.asarray(p, dtype=float)
    if np.any(p_arr <= 0.0) or np.any(p_arr >= 1.0):
        raise VicmError(f"quantile argument must lie in (0, 1), got {p!r}")
    out = ndtri(p_arr)
    return float(out) if out.ndim == 0 else out


def t_quantile(p, nu: int) -> float:
    """Student t quantile with nu degrees of freedom."""
    if nu < 1:
        raise VicmError(f"degrees of freedom must be >= 1, got {nu!r}")
    p_arr = np.asarray(p, dtype=float)
    if np.any(p_arr <= 0.0) or np.any(p_arr >= 1.0):
        raise VicmError(f"quantile argument must lie in (0, 1), got {p!r}")
    out = stdtrit(nu, p_arr)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Mixture confounders (bootstrap demo)
# ---------------------------------------------------------------------------


def sample_mixture_normal(n, rng, weights=(0.5, 0.5), locs=(0.0, 50.0)) -> np.ndarray:
    """Draws from a two-component unit-variance normal mixture."""
    comp = rng.random(n) < weights[0] / (weights[0] + weights[1])
    return np.where(comp, locs[0], locs[1]) + rng.standard_normal(n)


def _component_weights(logw, logp_shift):
    # posterior component weights, stabilized against underflow far out
    logp = logw.reshape((-1,) + (1,) * (logp_shift.ndim - 1)) + logp_shift
    logp -= logp.max(axis=0, keepdims=True)
    return np.exp(logp)


def mixture_normal_score(v, weights=(0.5, 0.5), locs=(0.0, 50.0)):
    """Score of the normal mixture from its closed-form density derivative."""
    v = np.atleast_1d(np.asarray(v, dtype=float))
    u = np.stack([v - loc for loc in locs])
    logw = np.log(np.asarray(weights, dtype=float) / sum(weights))
    w = _component_weights(logw, -0.5 * u * u)
    out = np.sum(w * u, axis=0) / np.sum(w, axis=0)
    return float(out[0]) if out.size == 1 else out


def sample_mixture_shifted_t(n, rng, nu=13, weights=(0.5, 0.5), shifts=(0.0, 50.0)) -> np.ndarray:
    """Draws from a mixture of shifted t(nu) distributions."""
    comp = rng.random(n) < weights[0] / (weights[0] + weights[1])
    return np.where(comp, shifts[0], shifts[1]) + rng.standard_t(nu, size=n)


def mixture_t_score(v, nu=13, weights=(0.5, 0.5), shifts=(0.0, 50.0)):
    """Score of the shifted-t mixture from its closed-form density derivative."""
    v = np.atleast_1d(np.asarray(v, dtype=float))
    u = np.stack([v - s for s in shifts])
    logw = np.log(np.asarray(weights, dtype=float) / sum(weights))
    w = _component_weights(logw, -(nu + 1.0) / 2.0 * np.log1p(u * u / nu))
    per_component = (nu + 1.0) * u / (nu + u * u)
    out = np.sum(w * per_component, axis=0) / np.sum(w, axis=0)
    return float(out[0]) if out.size == 1 else out
