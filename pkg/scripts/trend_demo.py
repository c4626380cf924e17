#!/usr/bin/env python3
"""Desk-scale convergence-trend demo.

The shipped protocol configs use the published tuning constants, which were
calibrated for sample sizes in the tens of thousands; below that the
shrinkage threshold sits above the whole signal and every estimate is zero
(see configs/*_desk.json and the acceptance notes in the README).  This
script reruns the same protocols with the penalty constant scaled down so
the error trends are visible in seconds at n <= 8000.

Usage: python scripts/trend_demo.py [--out DIR]
"""

import argparse
import math

from vicm.experiment import config_from_dict, emit_results, run_experiment


def sweep(name, base, n_grid, lam_fn, metric, k=None, out=None):
    print(f"\n{name}")
    print(f"  {'n':>8}  {'mean ' + metric:>24}")
    prev = None
    for n in n_grid:
        cfg = dict(base)
        cfg["n_grid"] = [n]
        cfg["tuning"] = lam_fn(n)
        result = run_experiment(config_from_dict(cfg), threads=4)
        mean = result.mean_value(n, metric, k=k)
        arrow = "" if prev is None else ("  v" if mean < prev else "  ^")
        print(f"  {n:>8}  {mean:>24.4f}{arrow}")
        prev = mean
        if out:
            emit_results(result, f"{out}/{name}_{n}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=None, help="also write records/aggregate CSVs here")
    args = parser.parse_args()

    sweep(
        "sparse_vector_desk_tuned",
        {
            "scenario": "sparse_vector", "d1": 100, "d2": 20, "s": 10,
            "link_family": "linear_cosine", "design": "gaussian",
            "z_mode": "independent", "precision": {"method": "identity"},
            "replications": 20, "master_seed": 314,
        },
        [500, 1000, 2000, 4000, 8000],
        lambda n: {
            "lam": 2.0 * math.sqrt(math.log(2000) / n),
            "tau": 2.0 * (n / math.log(2000)) ** (1.0 / 6.0),
        },
        "cosine",
        k=20,
        out=args.out,
    )

    sweep(
        "lowrank_copula_desk_tuned",
        {
            "scenario": "lowrank", "d1": 25, "d2": 25, "r": 5,
            "link_family": "linear_cosine", "design": "gaussian",
            "z_mode": "copula_equicorrelated",
            "precision": {"method": "inverse_soft"},
            "replications": 20, "master_seed": 314, "mu_mc_n": 50000,
        },
        [500, 1000, 2000, 4000],
        lambda n: {
            "lam": 1.2 * math.sqrt(50 * math.log(50) / n),
            "kappa1": 2.0 * math.sqrt(math.log(50) / (n * 50)),
            "kappa2": 2.0 * math.sqrt(math.log(25) / (n * 25)),
        },
        "frobenius_vs_tilde",
        out=args.out,
    )

    sweep(
        "sparse_matrix_tridiag_desk_tuned",
        {
            "scenario": "sparse_matrix", "d1": 100, "d2": 25, "s": 10,
            "link_family": "linear_cosine", "design": "gaussian",
            "z_mode": "copula_tridiagonal", "precision": {"method": "clime"},
            "replications": 10, "master_seed": 314, "mu_mc_n": 50000,
        },
        [1000, 2000, 4000, 8000],
        lambda n: {
            "lam": 2.0 * math.sqrt(math.log(100 * 25) / n),
            "tau": 2.0 * (n / math.log(100 * 25)) ** (1.0 / 6.0),
        },
        "frobenius_vs_tilde",
        out=args.out,
    )


if __name__ == "__main__":
    main()
