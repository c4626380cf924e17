"""Error metrics and uncertainty quantification.

Cosine distance is the scale-invariant directional error used for vector
estimates; matrix estimates are compared in Frobenius or nuclear norm
against the rescaled target built from a Monte Carlo estimate of the link
derivative means.  Bootstrap bands use the percentile convention with
linear-interpolation quantiles.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import synth
from .core import Dataset, DimensionMismatchError, VicmError, ZeroEstimateError


@dataclass(frozen=True)
class ErrorRecord:
    """One (sample size, replication, index, metric) observation."""

    n: int
    replication: int
    k: object  # 1-based column index, or "matrix" for whole-matrix metrics
    metric: str
    value: float

    def __post_init__(self):
        if not np.isfinite(self.value) or self.value < 0:
            raise VicmError(f"metric value must be finite and >= 0, got {self.value!r}")


def cosine_distance(beta_hat: np.ndarray, beta_star: np.ndarray) -> float:
    """1 - |<beta_hat, beta_star>| / |beta_hat|_2, for unit-norm beta_star."""
    beta_hat = np.asarray(beta_hat, dtype=float)
    beta_star = np.asarray(beta_star, dtype=float)
    nh = np.linalg.norm(beta_hat)
    if nh == 0.0:
        raise ZeroEstimateError("cosine distance undefined for a zero estimate")
    ns = np.linalg.norm(beta_star)
    if abs(ns - 1.0) > 1e-9:
        raise VicmError(f"beta_star must have unit norm, got {ns!r}")
    return 1.0 - abs(float(beta_hat @ beta_star)) / nh


def matrix_cosine_sum(B_hat: np.ndarray, B_star: np.ndarray) -> float:
    """Sum of per-column cosine distances; a rough squared-error surrogate."""
    B_hat = np.atleast_2d(np.asarray(B_hat, dtype=float))
    B_star = np.atleast_2d(np.asarray(B_star, dtype=float))
    if B_hat.shape != B_star.shape:
        raise DimensionMismatchError(f"shape mismatch: {B_hat.shape} vs {B_star.shape}")
    total = 0.0
    for k in range(B_hat.shape[1]):
        try:
            total += cosine_distance(B_hat[:, k], B_star[:, k])
        except ZeroEstimateError as e:
            raise ZeroEstimateError(f"column {k + 1} of the estimate is zero") from e
    return total


_MU_CHUNK = 100_000


def mu_oracle(
    family,
    k: int,
    beta_star_k: np.ndarray,
    design: str = "gaussian",
    mc_n: int = 1_000_000,
    rng: Optional[np.random.Generator] = None,
) -> float:
    """Monte Carlo estimate of E[f_k'(<x, beta_k>)] under the design law.

    For the gaussian design the index <x, beta> is N(0, |beta|^2), so the
    average runs over scalar draws; other designs sample x in chunks.  The
    result is deterministic given the generator.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    beta = np.asarray(beta_star_k, dtype=float)
    total = 0.0
    left = int(mc_n)
    if design == "gaussian":
        sd = float(np.linalg.norm(beta))
        while left > 0:
            m = min(left, _MU_CHUNK)
            total += float(np.sum(synth.link_deriv(family, k, sd * rng.standard_normal(m))))
            left -= m
    else:
        while left > 0:
            m = min(left, max(1, _MU_CHUNK // max(1, beta.size)))
            u = synth.sample_design(design, m, beta.size, rng) @ beta
            total += float(np.sum(synth.link_deriv(family, k, u)))
            left -= m
    return total / mc_n


def matrix_error_vs_tilde(B_hat: np.ndarray, B_star: np.ndarray, mu: np.ndarray, kind: str = "frobenius") -> float:
    """Norm of B_hat - B_star @ diag(mu), the rescaled-target error."""
    from . import linalg

    B_hat = np.atleast_2d(np.asarray(B_hat, dtype=float))
    B_star = np.atleast_2d(np.asarray(B_star, dtype=float))
    mu = np.asarray(mu, dtype=float)
    if B_hat.shape != B_star.shape or mu.shape != (B_star.shape[1],):
        raise DimensionMismatchError(
            f"shapes disagree: {B_hat.shape}, {B_star.shape}, mu {mu.shape}"
        )
    diff = B_hat - B_star * mu
    if kind == "frobenius":
        return linalg.matrix_norm(diff, "fro")
    if kind == "nuclear":
        return linalg.matrix_norm(diff, "nuclear")
    raise ValueError(f"unknown kind {kind!r}; expected 'frobenius' or 'nuclear'")


def bootstrap_ci(
    estimate_fn: Callable[[Dataset], np.ndarray],
    data: Dataset,
    mode: str = "nonparametric",
    reps: int = 100,
    level: float = 0.95,
    rng: Optional[np.random.Generator] = None,
    regenerate_x: Optional[Callable[[np.random.Generator, int], np.ndarray]] = None,
):
    """Percentile bootstrap bands for an estimator's coefficients.

    nonparametric: resample observations with replacement each rep.
    parametric: redraw the designated covariates (the X block only) via
    ``regenerate_x(rng, n)`` each rep, keeping y and Z fixed.

    Returns (lower, point, upper) arrays shaped like the point estimate,
    with the (1-level)/2 and 1-(1-level)/2 quantiles interpolated linearly
    between order statistics.  lower <= upper always; lower <= point is not
    guaranteed by the percentile construction.
    """
    if reps < 2:
        raise VicmError(f"reps must be >= 2, got {reps}")
    if not 0.0 < level < 1.0:
        raise VicmError(f"level must lie in (0, 1), got {level!r}")
    if mode not in ("nonparametric", "parametric"):
        raise VicmError(f"unknown mode {mode!r}")
    if mode == "parametric" and regenerate_x is None:
        raise VicmError("parametric mode requires regenerate_x")
    if rng is None:
        rng = np.random.default_rng(0)

    point = np.asarray(estimate_fn(data), dtype=float)
    draws = np.empty((reps,) + point.shape)
    for b in range(reps):
        if mode == "nonparametric":
            idx = rng.integers(0, data.n, size=data.n)
            resampled = Dataset(y=data.y[idx], X=data.X[idx], Z=data.Z[idx])
        else:
            resampled = Dataset(y=data.y, X=regenerate_x(rng, data.n), Z=data.Z)
        try:
            draws[b] = np.asarray(estimate_fn(resampled), dtype=float)
        except VicmError as e:
            raise VicmError(f"bootstrap rep {b + 1} failed: {e}") from e
    alpha = (1.0 - level) / 2.0
    lower = np.quantile(draws, alpha, axis=0)
    upper = np.quantile(draws, 1.0 - alpha, axis=0)
    return lower, point, upper
