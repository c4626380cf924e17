"""Shared domain types: datasets, coefficient matrices, model and tuning specs.

All container types are immutable after construction (arrays are copied and
marked read-only), so they are safe to share across worker threads.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

# ---------------------------------------------------------------------------
# Exception hierarchy
# ---------------------------------------------------------------------------


class VicmError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatchError(VicmError, ValueError):
    """Row/column counts of related arrays disagree."""


class NonFiniteError(VicmError, ValueError):
    """An input array contains NaN or infinity; the message names the index."""


class ScoreDomainError(VicmError, ValueError):
    """A value lies outside the support of the named design distribution."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class SingularMatrixError(VicmError, np.linalg.LinAlgError):
    """Matrix inversion hit a pivot below the relative threshold."""


class NonSymmetricError(VicmError, ValueError):
    """A symmetric-eigendecomposition input was not symmetric."""


class ConvergenceError(VicmError, RuntimeError):
    """An iterative numerical kernel exceeded its iteration cap."""


class InfeasibleError(VicmError, RuntimeError):
    """A linear program has an empty feasible region."""

    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


class IterationLimitError(VicmError, RuntimeError):
    """The simplex solver exceeded its pivot budget."""


class ZeroEstimateError(VicmError, ValueError):
    """An operation needing a direction received the zero vector."""


class ZeroFirstCoordinateError(VicmError, ValueError):
    """Sign normalization is undefined: first coordinate is exactly zero."""


class ConfigError(VicmError, ValueError):
    """An experiment/CLI configuration is malformed."""


# ---------------------------------------------------------------------------
# Array helpers
# ---------------------------------------------------------------------------


def _frozen_array(a, name, ndim):
    arr = np.array(a, dtype=float)
    if arr.ndim != ndim:
        raise DimensionMismatchError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


def _check_finite(arr, name):
    if not np.all(np.isfinite(arr)):
        bad = np.argwhere(~np.isfinite(np.atleast_2d(arr)))[0]
        idx = tuple(int(i) for i in bad) if arr.ndim > 1 else int(bad[-1])
        raise NonFiniteError(f"{name} contains a non-finite entry at index {idx}")


# ---------------------------------------------------------------------------
# Dataset
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Dataset:
    """n observations of (response y, design row X_i, covariate row Z_i)."""

    y: np.ndarray
    X: np.ndarray
    Z: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "y", _frozen_array(self.y, "y", 1))
        object.__setattr__(self, "X", _frozen_array(self.X, "X", 2))
        object.__setattr__(self, "Z", _frozen_array(self.Z, "Z", 2))

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def d1(self) -> int:
        return self.X.shape[1]

    @property
    def d2(self) -> int:
        return self.Z.shape[1]


def validate_dataset(data: Dataset) -> Dataset:
    """Return ``data`` unchanged iff all invariants hold.

    Raises DimensionMismatchError when row counts differ and NonFiniteError
    (naming the offending index) when any entry is NaN or infinite.
    Idempotent: validating a validated dataset returns the same object.
    """
    n = data.y.shape[0]
    if n < 1:
        raise DimensionMismatchError("dataset must contain at least one observation")
    if data.X.shape[0] != n or data.Z.shape[0] != n:
        raise DimensionMismatchError(
            f"row counts differ: y has {n}, X has {data.X.shape[0]}, Z has {data.Z.shape[0]}"
        )
    _check_finite(data.y, "y")
    _check_finite(data.X, "X")
    _check_finite(data.Z, "Z")
    return data


def center_covariates(data: Dataset) -> Dataset:
    """Return a copy of ``data`` with Z replaced by Z - mean(Z).

    Opt-in preprocessing; the synthetic generators already produce centered z
    laws, so nothing in the experiment harness calls this by default.
    """
    return Dataset(y=data.y, X=data.X, Z=data.Z - data.Z.mean(axis=0))


# ---------------------------------------------------------------------------
# Coefficient matrix
# ---------------------------------------------------------------------------

_IDENT_NORM_TOL = 1e-12


@dataclass(frozen=True)
class CoefficientMatrix:
    """d1 x d2 parameter matrix whose columns are index coefficient vectors.

    When ``identified`` is set, every column must have unit l2 norm and a
    strictly positive first entry.
    """

    B: np.ndarray
    identified: bool = False

    def __post_init__(self):
        object.__setattr__(self, "B", _frozen_array(self.B, "B", 2))
        _check_finite(self.B, "B")
        if self.identified:
            norms = np.linalg.norm(self.B, axis=0)
            if np.any(np.abs(norms - 1.0) > _IDENT_NORM_TOL):
                k = int(np.argmax(np.abs(norms - 1.0)))
                raise DimensionMismatchError(
                    f"identified column {k + 1} has norm {norms[k]!r}, expected 1"
                )
            if np.any(self.B[0, :] <= 0.0):
                k = int(np.argmax(self.B[0, :] <= 0.0))
                raise DimensionMismatchError(
                    f"identified column {k + 1} has non-positive first entry"
                )

    @property
    def d1(self) -> int:
        return self.B.shape[0]

    @property
    def d2(self) -> int:
        return self.B.shape[1]

    def column(self, k: int) -> np.ndarray:
        """Column k (1-based, matching the index convention used throughout)."""
        if not 1 <= k <= self.d2:
            raise DimensionMismatchError(f"column index {k} outside 1..{self.d2}")
        return self.B[:, k - 1]


# ---------------------------------------------------------------------------
# Model specification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModelSpec:
    """Generating model: per-index links, design law, z law, noise level.

    ``link_family`` is either the name of a built-in family (see
    synth.LINK_FAMILIES) or a sequence of d2 callables f_j(u).
    ``design`` names a distribution for the i.i.d. entries of x (a ScoreSpec
    kind).  ``z_law`` is "independent" (Rademacher entries) or a CopulaSpec.
    """

    link_family: object  # family name/id, or a sequence of d2 callables f_j(u)
    design: str = "gaussian"
    z_law: object = "independent"
    noise_sd: float = 0.1

    def __post_init__(self):
        if not math.isfinite(self.noise_sd) or self.noise_sd < 0:
            raise ConfigError(f"noise_sd must be finite and >= 0, got {self.noise_sd!r}")


# ---------------------------------------------------------------------------
# Tuning parameters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TuningParams:
    """Penalty and truncation levels feeding the closed-form estimators.

    ``tau`` may be ``inf``, meaning no hard truncation.  ``gamma`` is the
    precision-matrix constraint level, ``m_p`` the moment bound entering the
    theorem-prescribed defaults.
    """

    lam: float
    tau: float = math.inf
    kappa1: float = 1.0
    kappa2: float = 1.0
    gamma: float = 0.0
    m_p: float = 1.0

    def __post_init__(self):
        if math.isnan(self.lam) or math.isinf(self.lam) or self.lam <= 0:
            raise ConfigError(f"lam must be finite and > 0, got {self.lam!r}")
        if math.isnan(self.tau) or self.tau <= 0:
            raise ConfigError(f"tau must be > 0 (inf allowed), got {self.tau!r}")
        for name in ("kappa1", "kappa2"):
            v = getattr(self, name)
            if not math.isfinite(v) or v <= 0:
                raise ConfigError(f"{name} must be finite and > 0, got {v!r}")
        if not math.isfinite(self.gamma) or self.gamma < 0:
            raise ConfigError(f"gamma must be finite and >= 0, got {self.gamma!r}")
        if not math.isfinite(self.m_p) or self.m_p <= 0:
            raise ConfigError(f"m_p must be finite and > 0, got {self.m_p!r}")


# ---------------------------------------------------------------------------
# CSV interchange
# ---------------------------------------------------------------------------


def _fmt(x) -> str:
    # repr of a Python float is the shortest round-trippable decimal form
    return repr(float(x))


def dataset_header(d1: int, d2: int) -> list:
    return ["y"] + [f"x{j}" for j in range(1, d1 + 1)] + [f"z{j}" for j in range(1, d2 + 1)]


def write_dataset_csv(data: Dataset, path) -> None:
    """Write one header row ``y,x1..,z1..`` and one row per observation."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(dataset_header(data.d1, data.d2))
        for i in range(data.n):
            w.writerow(
                [_fmt(data.y[i])]
                + [_fmt(v) for v in data.X[i]]
                + [_fmt(v) for v in data.Z[i]]
            )


def read_dataset_csv(path) -> Dataset:
    """Read a dataset written by write_dataset_csv; validates the header."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ConfigError(f"{path}: empty file")
    header = rows[0]
    d1 = sum(1 for h in header if h.startswith("x"))
    d2 = sum(1 for h in header if h.startswith("z"))
    if header != dataset_header(d1, d2):
        raise ConfigError(f"{path}: malformed dataset header {header[:5]}...")
    body = np.array([[float(v) for v in row] for row in rows[1:]], dtype=float)
    if body.ndim != 2 or body.shape[0] < 1 or body.shape[1] != 1 + d1 + d2:
        raise ConfigError(f"{path}: expected {1 + d1 + d2} columns of data")
    return validate_dataset(
        Dataset(y=body[:, 0], X=body[:, 1 : 1 + d1], Z=body[:, 1 + d1 :])
    )


def write_matrix_csv(M: np.ndarray, path, comment: "str | None" = None) -> None:
    """Write a matrix as ``row,col,value`` triplets (1-based indices)."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    with open(path, "w", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["row", "col", "value"])
        for i in range(M.shape[0]):
            for j in range(M.shape[1]):
                w.writerow([i + 1, j + 1, _fmt(M[i, j])])


def read_matrix_csv(path) -> np.ndarray:
    """Read a ``row,col,value`` triplet file back into a dense matrix."""
    entries = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].startswith("#"):
                continue
            if row[0] == "row":
                continue
            entries.append((int(row[0]), int(row[1]), float(row[2])))
    if not entries:
        raise ConfigError(f"{path}: no matrix entries found")
    nr = max(e[0] for e in entries)
    nc = max(e[1] for e in entries)
    M = np.zeros((nr, nc))
    for i, j, v in entries:
        M[i - 1, j - 1] = v
    return M
