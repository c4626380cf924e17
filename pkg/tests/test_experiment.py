import json

import numpy as np
import pytest

from vicm.core import ConfigError
from vicm.experiment import (
    ExperimentResult,
    config_from_dict,
    emit_results,
    load_config,
    run_experiment,
)


def tiny_config(**overrides):
    raw = {
        "scenario": "sparse_vector",
        "d1": 6,
        "d2": 2,
        "s": 2,
        "n_grid": [100],
        "link_family": "linear_cosine",
        "design": "gaussian",
        "z_mode": "independent",
        "tuning": {"lam": 0.5},
        "precision": {"method": "identity"},
        "replications": 1,
        "master_seed": 99,
        "mu_mc_n": 2000,
    }
    raw.update(overrides)
    return config_from_dict(raw)


class TestConfigParsing:
    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown config keys"):
            tiny_config(lamda=0.5)

    def test_unknown_precision_key_rejected(self):
        with pytest.raises(ConfigError, match="precision"):
            tiny_config(precision={"method": "identity", "gama": 0.1})

    def test_missing_required_key(self):
        with pytest.raises(ConfigError, match="master_seed"):
            config_from_dict({"scenario": "sparse_vector", "d1": 2, "d2": 1, "n_grid": [10], "link_family": 1})

    def test_n_grid_must_increase(self):
        with pytest.raises(ConfigError, match="strictly increasing"):
            tiny_config(n_grid=[100, 100])

    def test_bad_scenario(self):
        with pytest.raises(ConfigError):
            tiny_config(scenario="dense")

    def test_sparsity_validated_against_scenario(self):
        with pytest.raises(ConfigError):
            tiny_config(s=50)  # > d1

    def test_regime_tuning_accepted(self):
        cfg = tiny_config(tuning="sim_sparse_vector")
        t = cfg.tuning_for(100)
        assert t.lam > 0 and t.tau > 0

    def test_load_config_round_trip(self, tmp_path):
        path = tmp_path / "c.json"
        cfg = tiny_config()
        path.write_text(json.dumps(cfg.canonical_dict()))
        assert load_config(path).canonical_dict() == cfg.canonical_dict()

    def test_load_config_bad_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError):
            load_config(path)


class TestRunExperiment:
    def test_record_shape_single_cell(self):
        result = run_experiment(tiny_config())
        # sparse_vector records one cosine per index k
        assert len(result.records) == 2
        assert {r.metric for r in result.records} == {"cosine"}
        assert {r.k for r in result.records} == {1, 2}
        assert all(r.n == 100 and r.replication == 1 for r in result.records)

    def test_same_config_identical_results(self):
        a = run_experiment(tiny_config(replications=3))
        b = run_experiment(tiny_config(replications=3))
        assert a.records == b.records
        assert a.aggregates == b.aggregates

    def test_serial_matches_threaded(self):
        cfg = tiny_config(n_grid=[60, 120], replications=4)
        serial = run_experiment(cfg, threads=1)
        threaded = run_experiment(cfg, threads=4)
        assert serial.records == threaded.records

    def test_aggregate_mean_matches_records(self):
        result = run_experiment(tiny_config(replications=5))
        for agg in result.aggregates:
            vals = [r.value for r in result.records if r.n == agg.n and r.metric == agg.metric]
            assert agg.mean == pytest.approx(np.mean(vals), abs=1e-12)
            assert agg.replications == len(vals)

    def test_seed_changes_results(self):
        a = run_experiment(tiny_config())
        b = run_experiment(tiny_config(master_seed=100))
        assert a.records != b.records

    def test_lowrank_scenario_with_inverse_soft(self):
        cfg = config_from_dict(
            {
                "scenario": "lowrank",
                "d1": 5,
                "d2": 4,
                "r": 2,
                "n_grid": [300],
                "link_family": "linear_cosine",
                "design": "gaussian",
                "z_mode": "copula_equicorrelated",
                "tuning": "sim_lowrank",
                "precision": {"method": "inverse_soft"},
                "replications": 2,
                "master_seed": 5,
                "mu_mc_n": 2000,
            }
        )
        result = run_experiment(cfg)
        metrics = {r.metric for r in result.records}
        assert metrics == {"frobenius_vs_tilde", "nuclear_vs_tilde"}
        assert all(r.k == "matrix" for r in result.records)
        assert len(result.records) == 4

    def test_sparse_matrix_scenario_with_clime(self):
        cfg = config_from_dict(
            {
                "scenario": "sparse_matrix",
                "d1": 6,
                "d2": 3,
                "s": 4,
                "n_grid": [200],
                "link_family": 1,
                "design": "gaussian",
                "z_mode": "copula_tridiagonal",
                "tuning": "sim_sparse_matrix",
                "precision": {"method": "clime"},
                "replications": 2,
                "master_seed": 6,
                "mu_mc_n": 2000,
            }
        )
        result = run_experiment(cfg)
        assert len(result.records) == 4
        assert all(np.isfinite(r.value) for r in result.records)

    def test_record_tilde_errors_flag(self):
        result = run_experiment(tiny_config(record_tilde_errors=True))
        metrics = {r.metric for r in result.records}
        assert metrics == {"cosine", "l2", "l1"}

    def test_harness_matches_per_index_estimator(self):
        # the shared-moment shortcut must agree with per-k estimator calls
        from vicm.core import ModelSpec
        from vicm.estimators import sparse_vector_estimate
        from vicm.metrics import cosine_distance
        from vicm.score import ScoreSpec
        from vicm.synth import derive_rng, gen_dataset, gen_parameters

        cfg = tiny_config(d1=8, d2=3, s=3, n_grid=[150], tuning={"lam": 0.3, "tau": 2.5})
        result = run_experiment(cfg)
        rng = derive_rng(cfg.master_seed, 150, 1)
        B = gen_parameters(cfg.param_spec(), rng)
        data = gen_dataset(
            ModelSpec(link_family=cfg.link_family, design=cfg.design, z_law="independent",
                      noise_sd=cfg.noise_sd),
            B, 150, rng,
        )
        for k in (1, 2, 3):
            res = sparse_vector_estimate(data, k, 0.3, 2.5, ScoreSpec("gaussian"))
            want = 1.0 if not res.beta_hat.any() else cosine_distance(res.beta_hat, B.column(k))
            got = [r.value for r in result.records if r.k == k][0]
            assert got == pytest.approx(want, abs=1e-12)

    def test_cosine_trend_at_matched_tuning(self):
        # published protocol shape with the penalty constant scaled to desk n:
        # the convergence trend is clearly visible
        import math

        means = {}
        for n in (500, 2000, 8000):
            lam = 2.0 * math.sqrt(math.log(100 * 20) / n)
            tau = 2.0 * (n / math.log(100 * 20)) ** (1.0 / 6.0)
            cfg = config_from_dict(
                {
                    "scenario": "sparse_vector", "d1": 100, "d2": 20, "s": 10,
                    "n_grid": [n], "link_family": "linear_cosine", "design": "gaussian",
                    "z_mode": "independent", "tuning": {"lam": lam, "tau": tau},
                    "precision": {"method": "identity"}, "replications": 12,
                    "master_seed": 314,
                }
            )
            means[n] = run_experiment(cfg, threads=4).mean_value(n, "cosine", k=20)
        assert means[500] > means[2000] > means[8000]
        assert means[8000] < 0.5 * means[2000]

    def test_lowrank_trend_at_matched_tuning(self):
        import math

        means = {}
        for n in (500, 4000):
            lam = 1.2 * math.sqrt(50 * math.log(50) / n)
            kappa1 = 2.0 * math.sqrt(math.log(50) / (n * 50))
            kappa2 = 2.0 * math.sqrt(math.log(25) / (n * 25))
            cfg = config_from_dict(
                {
                    "scenario": "lowrank", "d1": 25, "d2": 25, "r": 5,
                    "n_grid": [n], "link_family": "linear_cosine", "design": "gaussian",
                    "z_mode": "copula_equicorrelated",
                    "tuning": {"lam": lam, "kappa1": kappa1, "kappa2": kappa2},
                    "precision": {"method": "inverse_soft"}, "replications": 10,
                    "master_seed": 42, "mu_mc_n": 50_000,
                }
            )
            means[n] = run_experiment(cfg, threads=4).mean_value(n, "frobenius_vs_tilde")
        assert means[4000] < means[500]

    def test_error_annotated_with_cell(self):
        # n=2 with d2=3 leaves the soft-truncated covariance rank deficient
        cfg = config_from_dict(
            {
                "scenario": "lowrank",
                "d1": 3,
                "d2": 3,
                "r": 1,
                "n_grid": [2],
                "link_family": 1,
                "tuning": "sim_lowrank",
                "precision": {"method": "inverse_soft"},
                "replications": 1,
                "master_seed": 1,
            }
        )
        with pytest.raises(Exception, match=r"n=2, rep=1"):
            run_experiment(cfg)


class TestEmitResults:
    def test_files_and_round_trip(self, tmp_path):
        result = run_experiment(tiny_config(replications=2))
        emit_results(result, tmp_path)
        records = (tmp_path / "records.csv").read_text().splitlines()
        assert records[0] == "scenario,n,replication,k,metric,value"
        assert len(records) == 1 + len(result.records)
        for line, rec in zip(records[1:], result.records):
            parts = line.split(",")
            assert float(parts[5]) == rec.value  # bit-exact round trip
        agg = (tmp_path / "aggregate.csv").read_text().splitlines()
        assert agg[0] == "scenario,n,metric,mean,stderr,replications"
        n_metrics = len({a.metric for a in result.aggregates})
        assert len(agg) == 1 + len(tiny_config().n_grid) * n_metrics
        prov = json.loads((tmp_path / "provenance.json").read_text())
        assert prov["master_seed"] == 99
        assert len(prov["config_sha256"]) == 64

    def test_empty_records_header_only(self, tmp_path):
        result = ExperimentResult(scenario="sparse_vector", records=(), aggregates=(), provenance={})
        emit_results(result, tmp_path)
        assert (tmp_path / "records.csv").read_text() == "scenario,n,replication,k,metric,value\n"
        assert (tmp_path / "aggregate.csv").read_text() == "scenario,n,metric,mean,stderr,replications\n"

    def test_deterministic_bytes(self, tmp_path):
        cfg = tiny_config(replications=2)
        emit_results(run_experiment(cfg, threads=1), tmp_path / "a")
        emit_results(run_experiment(cfg, threads=3), tmp_path / "b")
        assert (tmp_path / "a/records.csv").read_bytes() == (tmp_path / "b/records.csv").read_bytes()
        assert (tmp_path / "a/aggregate.csv").read_bytes() == (tmp_path / "b/aggregate.csv").read_bytes()
