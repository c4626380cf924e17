"""Score functions s(v) = -d/dv log p(v), applied entrywise to the design.

Six named distributions are supported with pinned parameters; ``custom``
takes the score itself (not the density), since estimation never needs more
than the score.  Values outside a distribution's open support raise
ScoreDomainError rather than being clamped: clamping would silently bias the
estimators, and the samplers never hit the boundary with probability one.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import ScoreDomainError, VicmError

# name -> (score on arrays, support predicate on arrays, support description)
_POSITIVE = (lambda v: v > 0.0, "v > 0")
_REAL = (lambda v: np.isfinite(v), "finite v")

SCORE_KINDS = {
    # standard normal
    "gaussian": (lambda v: v, *_REAL),
    # Beta(8, 8) on (0, 1)
    "beta": (lambda v: (14.0 * v - 7.0) / ((1.0 - v) * v), lambda v: (v > 0.0) & (v < 1.0), "0 < v < 1"),
    # Gamma(shape 8, scale 0.1)
    "gamma": (lambda v: 10.0 - 7.0 / v, *_POSITIVE),
    # Student t with 13 degrees of freedom
    "student_t": (lambda v: 14.0 * v / (13.0 + v * v), *_REAL),
    # Rayleigh(1)
    "rayleigh": (lambda v: v - 1.0 / v, *_POSITIVE),
    # Weibull(shape 7, scale 1)
    "weibull": (lambda v: 7.0 * v ** 6 - 6.0 / v, *_POSITIVE),
}


@dataclass(frozen=True)
class ScoreSpec:
    """A named design distribution or a user-supplied score function.

    Named kinds carry exactly the pinned parameters above;
    ``kind="custom"`` requires ``custom_score`` defined on the support.
    """

    kind: str
    custom_score: Optional[Callable] = None

    def __post_init__(self):
        if self.kind == "custom":
            if self.custom_score is None:
                raise VicmError("custom ScoreSpec requires custom_score")
        elif self.kind not in SCORE_KINDS:
            raise VicmError(
                f"unknown score kind {self.kind!r}; expected one of "
                f"{sorted(SCORE_KINDS)} or 'custom'"
            )


def score_scalar(spec: ScoreSpec, v: float) -> float:
    """Score of a single value; raises ScoreDomainError outside the support."""
    if spec.kind == "custom":
        return float(spec.custom_score(v))
    fn, in_support, desc = SCORE_KINDS[spec.kind]
    if not in_support(np.float64(v)):
        raise ScoreDomainError(f"{v!r} outside support of {spec.kind} ({desc})")
    return float(fn(np.float64(v)))


def score_matrix(spec: ScoreSpec, X: np.ndarray) -> np.ndarray:
    """Entrywise score of a design matrix.

    The error for an out-of-support entry carries the (row, col) of the first
    offender in row-major order, so callers can resample or reject.
    """
    X = np.asarray(X, dtype=float)
    if spec.kind == "custom":
        return np.asarray(spec.custom_score(X), dtype=float)
    fn, in_support, desc = SCORE_KINDS[spec.kind]
    ok = in_support(X)
    if not np.all(ok):
        i, j = np.argwhere(~np.atleast_2d(ok))[0]
        raise ScoreDomainError(
            f"entry ({int(i)}, {int(j)}) = {np.atleast_2d(X)[i, j]!r} outside "
            f"support of {spec.kind} ({desc})",
            index=(int(i), int(j)),
        )
    return fn(X)
