import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vicm.core import Dataset, VicmError, ZeroEstimateError
from vicm.estimators import normalize_direction
from vicm.metrics import (
    ErrorRecord,
    bootstrap_ci,
    cosine_distance,
    matrix_cosine_sum,
    matrix_error_vs_tilde,
    mu_oracle,
)
from vicm.synth import derive_rng


def unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


class TestCosineDistance:
    def test_equal_vectors(self):
        b = unit([1.0, 2.0, -1.0])
        assert cosine_distance(b, b) == pytest.approx(0.0, abs=1e-15)

    def test_orthogonal_vectors(self):
        assert cosine_distance(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == pytest.approx(1.0)

    def test_scale_invariance_simple(self):
        b = unit([3.0, 4.0])
        assert cosine_distance(2.0 * b, b) == pytest.approx(0.0, abs=1e-15)

    @given(st.floats(min_value=-100.0, max_value=100.0).filter(lambda c: abs(c) > 1e-6))
    def test_scale_invariance_property(self, c):
        rng = np.random.default_rng(0)
        beta_hat = rng.standard_normal(4)
        beta_star = unit(rng.standard_normal(4))
        assert cosine_distance(c * beta_hat, beta_star) == pytest.approx(
            cosine_distance(beta_hat, beta_star), abs=1e-10
        )

    def test_normalization_invariance(self):
        rng = np.random.default_rng(1)
        beta_hat = rng.standard_normal(5)
        beta_star = unit(rng.standard_normal(5))
        assert cosine_distance(normalize_direction(beta_hat), beta_star) == pytest.approx(
            cosine_distance(beta_hat, beta_star), abs=1e-12
        )

    def test_zero_estimate_rejected(self):
        with pytest.raises(ZeroEstimateError):
            cosine_distance(np.zeros(3), unit([1.0, 1.0, 1.0]))

    def test_non_unit_target_rejected(self):
        with pytest.raises(VicmError):
            cosine_distance(np.ones(2), np.array([1.0, 1.0]))


class TestMatrixCosineSum:
    def test_equal_matrices(self):
        B = np.column_stack([unit([1.0, 2.0]), unit([0.5, -1.0])])
        assert matrix_cosine_sum(B, B) == pytest.approx(0.0, abs=1e-14)

    def test_one_orthogonal_column(self):
        B_star = np.eye(3)[:, :3]
        B_hat = B_star.copy()
        B_hat[:, 2] = [0.0, 1.0, 0.0] @ np.eye(3)  # orthogonal to e3
        total = matrix_cosine_sum(B_hat, np.eye(3))
        assert total == pytest.approx(1.0)

    def test_column_scaling_invariance(self):
        rng = np.random.default_rng(2)
        B_star = np.column_stack([unit(rng.standard_normal(4)) for _ in range(3)])
        B_hat = rng.standard_normal((4, 3))
        scaled = B_hat * np.array([2.0, 0.5, 7.0])
        assert matrix_cosine_sum(scaled, B_star) == pytest.approx(
            matrix_cosine_sum(B_hat, B_star), abs=1e-12
        )

    def test_zero_column_names_index(self):
        B_hat = np.eye(3)
        B_hat[:, 1] = 0.0
        with pytest.raises(ZeroEstimateError, match="column 2"):
            matrix_cosine_sum(B_hat, np.eye(3))


class TestMuOracle:
    def test_identity_link_is_exact(self):
        mu = mu_oracle("identity", 1, unit([1.0, 1.0]), "gaussian", 1000, derive_rng(0, 0))
        assert mu == 1.0

    def test_quadratic_cosine_mean_is_k(self):
        # u^2 contributes 2u with mean 0; the k*u term dominates
        beta = unit([1.0, -1.0, 0.5])
        for k in (2, 7):
            mu = mu_oracle("quadratic_cosine", k, beta, "gaussian", 1_000_000, derive_rng(1, k))
            assert mu == pytest.approx(k, rel=0.02)

    def test_deterministic_given_seed(self):
        beta = unit([1.0, 2.0])
        a = mu_oracle(1, 3, beta, "gaussian", 10_000, derive_rng(2, 0))
        b = mu_oracle(1, 3, beta, "gaussian", 10_000, derive_rng(2, 0))
        assert a == b

    def test_non_gaussian_design_path(self):
        beta = unit([1.0, 1.0, 1.0, 1.0])
        mu = mu_oracle("identity", 1, beta, "rayleigh", 50_000, derive_rng(3, 0))
        assert mu == 1.0  # derivative is constant regardless of design

    def test_linear_cosine_close_to_one(self):
        beta = unit([2.0, 1.0])
        mu = mu_oracle(1, 5, beta, "gaussian", 200_000, derive_rng(4, 0))
        assert mu == pytest.approx(1.0, abs=0.01)


class TestMatrixErrorVsTilde:
    def test_zero_error_at_target(self):
        rng = np.random.default_rng(3)
        B_star = rng.standard_normal((4, 3))
        mu = np.array([1.0, -2.0, 0.5])
        assert matrix_error_vs_tilde(B_star * mu, B_star, mu) == pytest.approx(0.0, abs=1e-14)

    def test_zero_estimate_gives_target_norm(self):
        rng = np.random.default_rng(4)
        B_star = rng.standard_normal((4, 3))
        mu = np.ones(3)
        err = matrix_error_vs_tilde(np.zeros((4, 3)), B_star, mu)
        assert err == pytest.approx(np.linalg.norm(B_star))

    def test_triangle_inequality(self):
        rng = np.random.default_rng(5)
        B_star = rng.standard_normal((3, 3))
        mu = rng.standard_normal(3)
        P1 = rng.standard_normal((3, 3))
        P2 = rng.standard_normal((3, 3))
        base = B_star * mu
        lhs = matrix_error_vs_tilde(base + P1 + P2, B_star, mu)
        rhs = matrix_error_vs_tilde(base + P1, B_star, mu) + np.linalg.norm(P2)
        assert lhs <= rhs + 1e-12

    def test_nuclear_kind(self):
        diff = np.diag([3.0, 1.0])
        err = matrix_error_vs_tilde(diff, np.zeros((2, 2)), np.ones(2), kind="nuclear")
        assert err == pytest.approx(4.0)


class TestErrorRecord:
    def test_rejects_negative_value(self):
        with pytest.raises(VicmError):
            ErrorRecord(100, 1, 1, "cosine", -0.5)

    def test_rejects_non_finite(self):
        with pytest.raises(VicmError):
            ErrorRecord(100, 1, 1, "cosine", float("nan"))


def _toy_data(n=40, seed=6):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, 2))
    Z = rng.standard_normal((n, 1))
    y = X[:, 0] + 0.1 * rng.standard_normal(n)
    return Dataset(y=y, X=X, Z=Z)


class TestBootstrapCi:
    def test_constant_estimator_collapses(self):
        data = _toy_data()
        fn = lambda d: np.array([3.0, -1.0])
        lower, point, upper = bootstrap_ci(fn, data, reps=20, rng=derive_rng(0, 1))
        assert np.array_equal(lower, point) and np.array_equal(upper, point)

    def test_same_seed_identical_bands(self):
        data = _toy_data()
        fn = lambda d: np.array([d.y.mean(), d.y.std()])
        a = bootstrap_ci(fn, data, reps=50, rng=derive_rng(1, 2))
        b = bootstrap_ci(fn, data, reps=50, rng=derive_rng(1, 2))
        for u, v in zip(a, b):
            assert np.array_equal(u, v)

    def test_lower_below_upper(self):
        data = _toy_data()
        fn = lambda d: np.array([d.y.mean()])
        lower, _, upper = bootstrap_ci(fn, data, reps=100, level=0.9, rng=derive_rng(2, 0))
        assert np.all(lower <= upper)

    def test_band_covers_plausible_mean(self):
        data = _toy_data(n=200)
        fn = lambda d: np.array([d.y.mean()])
        lower, point, upper = bootstrap_ci(fn, data, reps=200, rng=derive_rng(3, 0))
        assert lower[0] <= point[0] <= upper[0]
        assert upper[0] - lower[0] <= 1.0

    def test_parametric_mode_redraws_x_only(self):
        data = _toy_data()
        seen_z = []

        def fn(d):
            seen_z.append(d.Z)
            return np.array([d.X.mean(), d.Z.mean()])

        regen = lambda rng, n: rng.standard_normal((n, 2))
        lower, point, upper = bootstrap_ci(
            fn, data, mode="parametric", reps=25, rng=derive_rng(4, 0), regenerate_x=regen
        )
        # Z never changes across reps, so its band collapses to the point
        assert lower[1] == pytest.approx(point[1]) == pytest.approx(upper[1])
        assert upper[0] > lower[0]
        for Z in seen_z:
            assert np.array_equal(Z, data.Z)

    def test_quantile_convention_extremes(self):
        data = _toy_data()
        counter = iter(range(1000))
        fn = lambda d: np.array([float(next(counter))])
        # level -> 1 pins the band to the min/max order statistics
        lower, _, upper = bootstrap_ci(fn, data, reps=10, level=0.999999999, rng=derive_rng(5, 0))
        assert lower[0] == pytest.approx(1.0, abs=1e-4)
        assert upper[0] == pytest.approx(10.0, abs=1e-4)

    def test_arg_validation(self):
        data = _toy_data()
        fn = lambda d: np.zeros(1)
        with pytest.raises(VicmError):
            bootstrap_ci(fn, data, reps=1)
        with pytest.raises(VicmError):
            bootstrap_ci(fn, data, level=1.0)
        with pytest.raises(VicmError):
            bootstrap_ci(fn, data, mode="parametric")
