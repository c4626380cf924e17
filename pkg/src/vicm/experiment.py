"""Config-driven simulation sweeps.

A scenario is run for every (sample size, replication) cell on an
independent RNG substream derived from (master seed, n, replication), so a
sweep is deterministic end to end and identical under any thread count.
Zero estimates carry no directional information and are recorded at the
maximal cosine distance 1.0 instead of erroring, matching how degenerate
nearly-singular link scalings behave in the error plots.
"""

import csv
import hashlib
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import estimators, metrics, precision, synth
from .core import ConfigError, Dataset, ModelSpec, TuningParams, VicmError
from .score import ScoreSpec

_SCENARIOS = ("sparse_vector", "lowrank", "sparse_matrix")
_Z_MODES = ("independent", "copula_equicorrelated", "copula_tridiagonal")

_CONFIG_KEYS = {
    "scenario",
    "d1",
    "d2",
    "s",
    "r",
    "n_grid",
    "link_family",
    "design",
    "z_mode",
    "tuning",
    "precision",
    "replications",
    "master_seed",
    "noise_sd",
    "mu_mc_n",
    "record_tilde_errors",
}
_PRECISION_KEYS = {"method", "kappa2", "gamma", "tau"}


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative scenario: dimensions, laws, tuning, seed grid."""

    scenario: str
    d1: int
    d2: int
    n_grid: tuple
    link_family: object
    design: str = "gaussian"
    z_mode: str = "independent"
    tuning: object = None  # regime name or TuningParams-kwargs dict
    precision_method: str = "identity"
    precision_overrides: dict = field(default_factory=dict)
    s: int = 0
    r: int = 0
    replications: int = 40
    master_seed: int = 0
    noise_sd: float = 0.1
    mu_mc_n: int = 200_000
    record_tilde_errors: bool = False

    def __post_init__(self):
        if self.scenario not in _SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; expected one of {_SCENARIOS}")
        if self.z_mode not in _Z_MODES:
            raise ConfigError(f"unknown z_mode {self.z_mode!r}; expected one of {_Z_MODES}")
        grid = tuple(int(n) for n in self.n_grid)
        if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError(f"n_grid must be non-empty and strictly increasing, got {self.n_grid!r}")
        object.__setattr__(self, "n_grid", grid)
        if self.replications < 1:
            raise ConfigError(f"replications must be >= 1, got {self.replications}")
        if self.precision_method not in ("identity", "inverse_soft", "clime"):
            raise ConfigError(f"unknown precision method {self.precision_method!r}")
        unknown = set(self.precision_overrides) - (_PRECISION_KEYS - {"method"})
        if unknown:
            raise ConfigError(f"unknown precision keys {sorted(unknown)}")
        synth.resolve_link(self.link_family)
        self.param_spec()  # validates s/r against the scenario
        try:
            self.tuning_for(self.n_grid[0])  # fail fast on malformed tuning
        except (ConfigError, ValueError) as e:
            raise ConfigError(f"invalid tuning {self.tuning!r}: {e}") from e

    def param_spec(self) -> synth.ParamGenSpec:
        structure = {
            "sparse_vector": "column_sparse",
            "lowrank": "lowrank",
            "sparse_matrix": "fully_sparse",
        }[self.scenario]
        return synth.ParamGenSpec(structure=structure, d1=self.d1, d2=self.d2, s=self.s, r=self.r)

    def tuning_for(self, n: int) -> TuningParams:
        if isinstance(self.tuning, TuningParams):
            return self.tuning
        if isinstance(self.tuning, str):
            return estimators.default_tuning(self.tuning, n, self.d1, self.d2)
        if isinstance(self.tuning, dict):
            return TuningParams(**self.tuning)
        raise ConfigError(f"tuning must be a regime name or a parameter dict, got {self.tuning!r}")

    def z_law(self):
        if self.z_mode == "independent":
            return "independent"
        if self.z_mode == "copula_equicorrelated":
            return synth.CopulaSpec(correlation=synth.equicorrelation(self.d2))
        return synth.CopulaSpec(correlation=synth.tridiagonal_precision_correlation(self.d2))

    def canonical_dict(self) -> dict:
        tuning = self.tuning
        if isinstance(tuning, TuningParams):
            tuning = {
                "lam": tuning.lam,
                "tau": tuning.tau,
                "kappa1": tuning.kappa1,
                "kappa2": tuning.kappa2,
                "gamma": tuning.gamma,
                "m_p": tuning.m_p,
            }
        return {
            "scenario": self.scenario,
            "d1": self.d1,
            "d2": self.d2,
            "s": self.s,
            "r": self.r,
            "n_grid": list(self.n_grid),
            "link_family": self.link_family,
            "design": self.design,
            "z_mode": self.z_mode,
            "tuning": tuning,
            "precision": {"method": self.precision_method, **self.precision_overrides},
            "replications": self.replications,
            "master_seed": self.master_seed,
            "noise_sd": self.noise_sd,
            "mu_mc_n": self.mu_mc_n,
            "record_tilde_errors": self.record_tilde_errors,
        }


def config_from_dict(raw: dict) -> ExperimentConfig:
    """Build a config from parsed JSON; unknown keys are rejected outright."""
    if not isinstance(raw, dict):
        raise ConfigError(f"config must be a JSON object, got {type(raw).__name__}")
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    for key in ("scenario", "d1", "d2", "n_grid", "link_family", "master_seed"):
        if key not in raw:
            raise ConfigError(f"missing required config key {key!r}")
    prec = dict(raw.get("precision", {"method": "identity"}))
    unknown = set(prec) - _PRECISION_KEYS
    if unknown:
        raise ConfigError(f"unknown precision keys {sorted(unknown)}")
    method = prec.pop("method", "identity")
    tuning = raw.get("tuning")
    if tuning is None:
        raise ConfigError("missing required config key 'tuning'")
    return ExperimentConfig(
        scenario=raw["scenario"],
        d1=int(raw["d1"]),
        d2=int(raw["d2"]),
        s=int(raw.get("s", 0)),
        r=int(raw.get("r", 0)),
        n_grid=tuple(raw["n_grid"]),
        link_family=raw["link_family"],
        design=raw.get("design", "gaussian"),
        z_mode=raw.get("z_mode", "independent"),
        tuning=tuning,
        precision_method=method,
        precision_overrides=prec,
        replications=int(raw.get("replications", 40)),
        master_seed=int(raw["master_seed"]),
        noise_sd=float(raw.get("noise_sd", 0.1)),
        mu_mc_n=int(raw.get("mu_mc_n", 200_000)),
        record_tilde_errors=bool(raw.get("record_tilde_errors", False)),
    )


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: invalid JSON: {e}") from e
    return config_from_dict(raw)


@dataclass(frozen=True)
class AggregateRow:
    scenario: str
    n: int
    metric: str
    mean: float
    stderr: float
    replications: int


@dataclass(frozen=True)
class ExperimentResult:
    scenario: str
    records: tuple
    aggregates: tuple
    provenance: dict

    def records_for(self, n=None, metric=None, k=None):
        out = []
        for r in self.records:
            if n is not None and r.n != n:
                continue
            if metric is not None and r.metric != metric:
                continue
            if k is not None and r.k != k:
                continue
            out.append(r)
        return out

    def mean_value(self, n, metric, k=None) -> float:
        vals = [r.value for r in self.records_for(n=n, metric=metric, k=k)]
        if not vals:
            raise VicmError(f"no records for n={n}, metric={metric!r}, k={k!r}")
        return float(np.mean(vals))


def _build_precision(config: ExperimentConfig, data: Dataset, n: int) -> precision.PrecisionEstimate:
    ov = config.precision_overrides
    if config.precision_method == "identity":
        return precision.identity_precision(config.d2)
    if config.precision_method == "inverse_soft":
        kappa2 = ov.get("kappa2", precision.precision_kappa2_sim(n, config.d2))
        return precision.precision_inverse(data.Z, kappa2)
    tau = ov.get("tau", precision.covariance_tau_sim(n, config.d2))
    gamma = ov.get("gamma", precision.sim_gamma(n, config.d2))
    sigma = precision.hard_truncated_covariance(data.Z, tau)
    return precision.clime(sigma, gamma)


def _safe_cosine(beta_hat, beta_star) -> float:
    # a zero estimate has no direction: record the maximal distance
    if not np.any(beta_hat):
        return 1.0
    return min(1.0, metrics.cosine_distance(beta_hat, beta_star))


def _run_cell(config: ExperimentConfig, n: int, rep: int) -> list:
    rng = synth.derive_rng(config.master_seed, n, rep)
    B = synth.gen_parameters(config.param_spec(), rng)
    model = ModelSpec(
        link_family=config.link_family,
        design=config.design,
        z_law=config.z_law(),
        noise_sd=config.noise_sd,
    )
    data = synth.gen_dataset(model, B, n, rng)
    spec = ScoreSpec(kind=config.design)
    tuning = config.tuning_for(n)
    records = []
    if config.scenario == "sparse_vector":
        # the per-k estimates are the soft-thresholded columns of one shared
        # truncated cross moment, so compute it once for all d2 indices
        from . import shrinkage

        moment = estimators.cross_moment_hard(data, tuning.tau, spec)
        beta_all = shrinkage.soft_threshold_vector(moment, tuning.lam / 2.0)
        for k in range(1, config.d2 + 1):
            beta_hat = beta_all[:, k - 1]
            records.append(
                metrics.ErrorRecord(n, rep, k, "cosine", _safe_cosine(beta_hat, B.column(k)))
            )
            if config.record_tilde_errors:
                mu = metrics.mu_oracle(config.link_family, k, B.column(k), config.design, config.mu_mc_n, rng)
                diff = beta_hat - mu * B.column(k)
                records.append(metrics.ErrorRecord(n, rep, k, "l2", float(np.linalg.norm(diff))))
                records.append(metrics.ErrorRecord(n, rep, k, "l1", float(np.sum(np.abs(diff)))))
    else:
        omega = _build_precision(config, data, n)
        if config.scenario == "lowrank":
            res = estimators.lowrank_estimate(data, tuning.lam, tuning.kappa1, spec, omega)
        else:
            res = estimators.sparse_matrix_estimate(data, tuning.lam, tuning.tau, spec, omega)
        mus = np.array(
            [
                metrics.mu_oracle(config.link_family, j, B.column(j), config.design, config.mu_mc_n, rng)
                for j in range(1, config.d2 + 1)
            ]
        )
        records.append(
            metrics.ErrorRecord(
                n, rep, "matrix", "frobenius_vs_tilde",
                metrics.matrix_error_vs_tilde(res.b_hat, B.B, mus, "frobenius"),
            )
        )
        records.append(
            metrics.ErrorRecord(
                n, rep, "matrix", "nuclear_vs_tilde",
                metrics.matrix_error_vs_tilde(res.b_hat, B.B, mus, "nuclear"),
            )
        )
    return records


def run_experiment(config: ExperimentConfig, threads: int = 0) -> ExperimentResult:
    """Run every (n, replication) cell and aggregate the error records.

    ``threads`` <= 1 runs serially; larger values dispatch cells to a thread
    pool.  Either way the output is identical: each cell is a pure function
    of (config, n, rep).
    """
    cells = [(n, rep) for n in config.n_grid for rep in range(1, config.replications + 1)]

    def job(cell):
        n, rep = cell
        try:
            return cell, _run_cell(config, n, rep)
        except (VicmError, ValueError) as e:
            raise type(e)(f"(n={n}, rep={rep}): {e}") from e

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = dict(pool.map(job, cells))
    else:
        results = dict(job(c) for c in cells)

    records = []
    for cell in cells:  # deterministic order regardless of completion order
        records.extend(results[cell])

    grouped = {}
    for r in records:
        grouped.setdefault((r.n, r.metric), []).append(r.value)
    aggregates = []
    for n in config.n_grid:
        for (gn, metric), vals in sorted(grouped.items(), key=lambda kv: (kv[0][0], kv[0][1])):
            if gn != n:
                continue
            arr = np.asarray(vals)
            stderr = float(arr.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0
            aggregates.append(
                AggregateRow(config.scenario, n, metric, float(arr.mean()), stderr, arr.size)
            )

    blob = json.dumps(config.canonical_dict(), sort_keys=True).encode()
    provenance = {
        "config_sha256": hashlib.sha256(blob).hexdigest(),
        "master_seed": config.master_seed,
        "package_version": _package_version(),
        "generated_unix_time": time.time(),
    }
    return ExperimentResult(
        scenario=config.scenario,
        records=tuple(records),
        aggregates=tuple(aggregates),
        provenance=provenance,
    )


def _package_version() -> str:
    try:
        from importlib.metadata import version

        return version("vicm")
    except Exception:
        return "unknown"


def _fmt(x) -> str:
    return repr(float(x))


def emit_results(result: ExperimentResult, out_dir) -> None:
    """Write records.csv, aggregate.csv and provenance.json under out_dir.

    Everything except the provenance timestamp is a pure function of the
    config, so records.csv is byte-identical across reruns.
    """
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "records.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["scenario", "n", "replication", "k", "metric", "value"])
        for r in result.records:
            w.writerow([result.scenario, r.n, r.replication, r.k, r.metric, _fmt(r.value)])
    with open(os.path.join(out_dir, "aggregate.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["scenario", "n", "metric", "mean", "stderr", "replications"])
        for a in result.aggregates:
            w.writerow([a.scenario, a.n, a.metric, _fmt(a.mean), _fmt(a.stderr), a.replications])
    with open(os.path.join(out_dir, "provenance.json"), "w") as fh:
        json.dump(result.provenance, fh, indent=2, sort_keys=True)
        fh.write("\n")
