"""Batch command-line interface.

Subcommands: ``simulate`` (config JSON -> records/aggregate CSVs),
``estimate`` (dataset CSV -> estimate CSV), ``precision`` (covariate CSV ->
precision CSV), ``bootstrap`` (dataset CSV -> confidence-band CSV).
Exit codes: 0 success, 1 configuration error, 2 numerical failure.
"""

import argparse
import csv
import math
import os
import sys

import numpy as np

from . import estimators, metrics, precision, synth
from .core import (
    ConfigError,
    Dataset,
    DimensionMismatchError,
    NonFiniteError,
    VicmError,
    center_covariates,
    read_dataset_csv,
    write_matrix_csv,
    _fmt,
)
from .experiment import emit_results, load_config, run_experiment
from .score import ScoreSpec

_CONFIG_ERRORS = (ConfigError, DimensionMismatchError, NonFiniteError)


def _default_threads() -> int:
    env = os.environ.get("VICM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"VICM_THREADS must be an integer, got {env!r}")
    return os.cpu_count() or 1


def _read_z(path) -> np.ndarray:
    """Covariate matrix from either a bare z CSV or a full dataset CSV."""
    with open(path, newline="") as fh:
        header = next(csv.reader(fh), None)
    if header is None:
        raise ConfigError(f"{path}: empty file")
    if header[0] == "y":
        return read_dataset_csv(path).Z
    if not all(h.startswith("z") for h in header):
        raise ConfigError(f"{path}: expected a dataset header or z1..z{{d2}} columns")
    body = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return body


def _add_estimator_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--estimator", required=True, choices=["sparse_vector", "lowrank", "sparse_matrix"])
    p.add_argument("--k", type=int, default=1, help="target index for sparse_vector (1-based)")
    p.add_argument("--score", default="gaussian", help="design score kind")
    p.add_argument("--regime", default=None, help="tuning regime name (fills unset flags)")
    p.add_argument("--lam", "--lambda", dest="lam", type=float, default=None)
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--kappa1", type=float, default=None)
    p.add_argument("--kappa2", type=float, default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--cov-tau", dest="cov_tau", type=float, default=None,
                   help="truncation level for the covariance entering the constrained-l1 precision")
    p.add_argument("--precision", default="identity", choices=["identity", "inverse_soft", "clime"])
    p.add_argument("--center-z", action="store_true", help="replace z by z - mean(z) before estimating")


def _resolve_tuning(args, data: Dataset):
    if args.regime is not None:
        t = estimators.default_tuning(args.regime, data.n, data.d1, data.d2)
        lam = args.lam if args.lam is not None else t.lam
        tau = args.tau if args.tau is not None else t.tau
        kappa1 = args.kappa1 if args.kappa1 is not None else t.kappa1
        kappa2 = args.kappa2 if args.kappa2 is not None else t.kappa2
        gamma = args.gamma if args.gamma is not None else t.gamma
    else:
        if args.lam is None:
            raise ConfigError("either --regime or --lam is required")
        lam = args.lam
        tau = args.tau if args.tau is not None else math.inf
        # the simulation kappa formulas share one shape, 2 sqrt(log m / (n m)),
        # with m = d1 + d2 for the moment and m = d2 for the covariance
        kappa1 = args.kappa1 if args.kappa1 is not None else precision.precision_kappa2_sim(data.n, data.d1 + data.d2)
        kappa2 = args.kappa2 if args.kappa2 is not None else precision.precision_kappa2_sim(data.n, data.d2)
        gamma = args.gamma if args.gamma is not None else precision.sim_gamma(data.n, data.d2)
    return lam, tau, kappa1, kappa2, gamma


def _build_precision(args, data: Dataset, kappa2, gamma):
    if args.precision == "identity":
        return precision.identity_precision(data.d2)
    if args.precision == "inverse_soft":
        return precision.precision_inverse(data.Z, kappa2)
    cov_tau = args.cov_tau if args.cov_tau is not None else precision.covariance_tau_sim(data.n, data.d2)
    sigma = precision.hard_truncated_covariance(data.Z, cov_tau)
    return precision.clime(sigma, gamma)


def _estimate(args, data: Dataset):
    """Run the selected estimator; returns (matrix, descriptive comment)."""
    lam, tau, kappa1, kappa2, gamma = _resolve_tuning(args, data)
    spec = ScoreSpec(kind=args.score)
    if args.estimator == "sparse_vector":
        res = estimators.sparse_vector_estimate(data, args.k, lam, tau, spec, normalize=args.normalize)
        vec = res.beta_normalized if args.normalize else res.beta_hat
        tag = "normalized " if args.normalize else ""
        return vec[:, None], f"{tag}sparse_vector k={args.k} lambda={lam!r} tau={tau!r}"
    omega = _build_precision(args, data, kappa2, gamma)
    if args.estimator == "lowrank":
        res = estimators.lowrank_estimate(data, lam, kappa1, spec, omega)
        return res.b_hat, f"lowrank lambda={lam!r} kappa1={kappa1!r} precision={args.precision}"
    res = estimators.sparse_matrix_estimate(data, lam, tau, spec, omega)
    return res.b_hat, f"sparse_matrix lambda={lam!r} tau={tau!r} precision={args.precision}"


def _cmd_simulate(args) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        raw = config.canonical_dict()
        raw["master_seed"] = args.seed
        from .experiment import config_from_dict

        config = config_from_dict(raw)
    result = run_experiment(config, threads=args.threads)
    emit_results(result, args.out)
    print(f"wrote {os.path.join(args.out, 'records.csv')} ({len(result.records)} records)")
    return 0


def _cmd_estimate(args) -> int:
    data = read_dataset_csv(args.data)
    if args.center_z:
        data = center_covariates(data)
    M, comment = _estimate(args, data)
    write_matrix_csv(M, args.out, comment=comment)
    print(f"wrote {args.out}")
    return 0


def _cmd_precision(args) -> int:
    Z = _read_z(args.data)
    n, d2 = Z.shape
    if args.method == "identity":
        est = precision.identity_precision(d2)
    elif args.method == "inverse_soft":
        kappa2 = args.kappa2 if args.kappa2 is not None else precision.precision_kappa2_sim(n, d2)
        est = precision.precision_inverse(Z, kappa2)
    else:
        tau = args.tau if args.tau is not None else precision.covariance_tau_sim(n, d2)
        gamma = args.gamma if args.gamma is not None else precision.sim_gamma(n, d2)
        sigma = precision.hard_truncated_covariance(Z, tau)
        est = precision.clime(sigma, gamma)
    write_matrix_csv(est.omega, args.out, comment=f"precision method={est.method} residual={est.residual!r}")
    print(f"wrote {args.out}")
    return 0


def _cmd_bootstrap(args) -> int:
    data = read_dataset_csv(args.data)
    if args.center_z:
        data = center_covariates(data)

    def estimate_fn(d):
        return _estimate(args, d)[0]

    regenerate = None
    if args.mode == "parametric":
        design = args.design
        regenerate = lambda rng, n: synth.sample_design(design, n, data.d1, rng)
    rng = synth.derive_rng(args.seed, 0)
    lower, point, upper = metrics.bootstrap_ci(
        estimate_fn, data, mode=args.mode, reps=args.reps, level=args.level,
        rng=rng, regenerate_x=regenerate,
    )
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["row", "col", "lower", "point", "upper"])
        for i in range(point.shape[0]):
            for j in range(point.shape[1]):
                w.writerow([i + 1, j + 1, _fmt(lower[i, j]), _fmt(point[i, j]), _fmt(upper[i, j])])
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vicm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a config-driven simulation sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--seed", type=int, default=None, help="override the config master seed")
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("estimate", help="estimate coefficients from a dataset CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    _add_estimator_flags(p)
    p.add_argument("--normalize", action="store_true",
                   help="emit the unit-norm, positive-first-entry representative (sparse_vector only)")
    p.set_defaults(fn=_cmd_estimate)

    p = sub.add_parser("precision", help="estimate a precision matrix from covariates")
    p.add_argument("--data", required=True, help="dataset CSV or bare z1..z{d2} CSV")
    p.add_argument("--out", required=True)
    p.add_argument("--method", required=True, choices=["identity", "inverse_soft", "clime"])
    p.add_argument("--kappa2", type=float, default=None)
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.set_defaults(fn=_cmd_precision)

    p = sub.add_parser("bootstrap", help="bootstrap confidence bands for an estimator")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    _add_estimator_flags(p)
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--mode", default="nonparametric", choices=["nonparametric", "parametric"])
    p.add_argument("--design", default="gaussian", help="design law for parametric regeneration")
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=_cmd_bootstrap)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "threads", None) is None and args.command == "simulate":
            args.threads = _default_threads()
        return args.fn(args)
    except _CONFIG_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except VicmError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
