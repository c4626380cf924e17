import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vicm import linalg
from vicm.shrinkage import (
    hard_truncate,
    phi,
    soft_threshold_singular,
    soft_threshold_vector,
    soft_truncate_matrix,
    soft_truncate_rank_one,
)

finite_floats = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


class TestHardTruncate:
    def test_boundary_kept(self):
        assert np.array_equal(hard_truncate([1.0, -3.0, 2.0], 2.0), [1.0, 0.0, 2.0])

    def test_infinite_tau_is_identity(self):
        v = np.array([5.0, -1e9, 0.0])
        assert np.array_equal(hard_truncate(v, math.inf), v)

    def test_zero_vector(self):
        assert np.array_equal(hard_truncate([0.0, 0.0], 0.1), [0.0, 0.0])

    def test_nonpositive_tau_rejected(self):
        with pytest.raises(ValueError):
            hard_truncate([1.0], 0.0)

    @given(st.lists(finite_floats, min_size=1, max_size=20), st.floats(min_value=1e-3, max_value=1e3))
    def test_never_increases_magnitude_and_idempotent(self, vals, tau):
        v = np.array(vals)
        out = hard_truncate(v, tau)
        assert np.all(np.abs(out) <= np.abs(v))
        assert np.array_equal(hard_truncate(out, tau), out)


class TestPhi:
    def test_zero(self):
        assert phi(0.0) == 0.0

    def test_one(self):
        assert phi(1.0) == pytest.approx(math.log(2.5), abs=1e-12)

    def test_minus_one_odd(self):
        assert phi(-1.0) == -phi(1.0)

    def test_envelope_oddness_contraction_on_grid(self):
        x = np.linspace(-50.0, 50.0, 10_000)
        fx = phi(x)
        lower = -np.log1p(-x + 0.5 * x * x)
        upper = np.log1p(x + 0.5 * x * x)
        assert np.all(lower <= fx + 1e-15)
        assert np.all(fx <= upper + 1e-15)
        # equality on the active branch
        assert np.array_equal(fx[x <= 0], lower[x <= 0])
        assert np.array_equal(fx[x > 0], upper[x > 0])
        assert np.allclose(phi(-x), -fx, atol=0)
        assert np.all(np.abs(fx) <= np.abs(x))
        assert np.all(np.diff(fx) > 0)  # strictly increasing

    def test_small_argument_linearization(self):
        x = 1e-9
        assert phi(x) == pytest.approx(x, rel=1e-8)


class TestSoftTruncateMatrix:
    def test_one_by_one_reduces_to_phi(self):
        out = soft_truncate_matrix([[2.0]], 1.0)
        assert out.shape == (1, 1)
        assert out[0, 0] == pytest.approx(math.log(5.0), abs=1e-12)

    def test_zero_matrix(self):
        assert np.array_equal(soft_truncate_matrix(np.zeros((2, 3)), 0.7), np.zeros((2, 3)))

    def test_odd_symmetry(self):
        rng = np.random.default_rng(3)
        V = rng.standard_normal((4, 3))
        assert np.allclose(soft_truncate_matrix(-V, 1.3), -soft_truncate_matrix(V, 1.3), atol=1e-12)

    def test_symmetric_input_matches_direct_eigen_route(self):
        rng = np.random.default_rng(5)
        A = rng.standard_normal((5, 5))
        V = (A + A.T) / 2.0
        for kappa in (1.0, 0.37):
            res = linalg.sym_eig(kappa * V)
            direct = (res.eigenvectors * phi(res.eigenvalues)) @ res.eigenvectors.T
            assert np.max(np.abs(soft_truncate_matrix(V, kappa) - direct)) <= 1e-10

    def test_transpose_consistency(self):
        rng = np.random.default_rng(8)
        V = rng.standard_normal((3, 5)) * 2.0
        out = soft_truncate_matrix(V, 0.9)
        out_t = soft_truncate_matrix(V.T, 0.9)
        assert np.max(np.abs(out.T - out_t)) <= 1e-10

    def test_rank_one_closed_form_matches_general_operator(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            u = rng.standard_normal(4)
            w = rng.standard_normal(3)
            coef = float(rng.standard_normal()) * 3.0
            fast = soft_truncate_rank_one(coef, u, w)
            slow = soft_truncate_matrix(coef * np.outer(u, w), 1.0)
            assert np.max(np.abs(fast - slow)) <= 1e-10

    def test_rank_one_zero_factor(self):
        assert np.array_equal(soft_truncate_rank_one(0.0, np.ones(2), np.ones(2)), np.zeros((2, 2)))
        assert np.array_equal(soft_truncate_rank_one(1.0, np.zeros(2), np.ones(2)), np.zeros((2, 2)))


class TestSoftThresholdVector:
    def test_examples(self):
        assert np.array_equal(soft_threshold_vector([3.0, -0.5, 1.0], 1.0), [2.0, 0.0, 0.0])
        assert np.array_equal(soft_threshold_vector([-2.0], 2.0), [0.0])

    def test_lambda_zero_identity(self):
        v = np.array([1.0, -2.0, 0.0])
        assert np.array_equal(soft_threshold_vector(v, 0.0), v)

    @given(st.lists(finite_floats, min_size=1, max_size=20), st.floats(min_value=0.0, max_value=1e3))
    def test_shrinks_toward_zero(self, vals, lam):
        v = np.array(vals)
        out = soft_threshold_vector(v, lam)
        assert np.all(np.abs(out) <= np.maximum(np.abs(v) - lam, 0.0) + 1e-9)
        assert np.all(out * v >= 0.0)  # never flips sign


class TestSoftThresholdSingular:
    def test_diagonal_case(self):
        out = soft_threshold_singular(np.diag([3.0, 1.0]), 2.0)
        assert np.allclose(out, np.diag([1.0, 0.0]), atol=1e-12)

    def test_lambda_zero_identity(self):
        rng = np.random.default_rng(2)
        A = rng.standard_normal((4, 3))
        assert np.max(np.abs(soft_threshold_singular(A, 0.0) - A)) <= 1e-10

    def test_full_shrinkage(self):
        rng = np.random.default_rng(4)
        A = rng.standard_normal((3, 3))
        lam = np.linalg.svd(A, compute_uv=False)[0]
        assert np.allclose(soft_threshold_singular(A, lam), 0.0, atol=1e-12)

    def test_singular_values_shrunk_exactly(self):
        rng = np.random.default_rng(6)
        for _ in range(5):
            A = rng.standard_normal((5, 4)) * rng.uniform(0.5, 3.0)
            lam = float(rng.uniform(0.0, 2.0))
            s_in = np.linalg.svd(A, compute_uv=False)
            s_out = np.linalg.svd(soft_threshold_singular(A, lam), compute_uv=False)
            assert np.max(np.abs(s_out - np.maximum(s_in - lam, 0.0))) <= 1e-9
