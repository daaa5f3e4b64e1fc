"""Unit tests for the normal-equations ridge solver."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sigbsde import ridge
from sigbsde.errors import ShapeError


def design(rng, m, f):
    a = rng.standard_normal((m, f))
    a[:, 0] = 1.0
    return a


class TestFit:
    def test_frozen_two_point_solution(self):
        # (A^T A + 0.3 P) w = A^T y with A = [[1,0],[1,1]], y = [0,1]
        a = np.array([[1.0, 0.0], [1.0, 1.0]])
        model = ridge.fit(a, np.array([0.0, 1.0]), lam=0.3)
        np.testing.assert_allclose(model.weights, [0.1875, 0.625], atol=1e-12)
        assert not model.fallback

    def test_matches_lstsq_at_zero_penalty_full_rank(self):
        rng = np.random.default_rng(0)
        a = design(rng, 40, 4)
        y = rng.standard_normal(40)
        model = ridge.fit(a, y, lam=0.0)
        expected = np.linalg.lstsq(a, y, rcond=None)[0]
        np.testing.assert_allclose(model.weights, expected, atol=1e-9)

    def test_unpenalized_intercept_preserves_the_target_mean(self):
        rng = np.random.default_rng(1)
        a = design(rng, 60, 5)
        y = rng.standard_normal(60) + 3.0
        for lam in (0.0, 0.3, 50.0):
            fitted = a @ ridge.fit(a, y, lam).weights
            assert fitted.mean() == pytest.approx(y.mean(), abs=1e-9)

    def test_heavy_penalty_shrinks_toward_the_mean(self):
        rng = np.random.default_rng(2)
        a = design(rng, 50, 3)
        y = rng.standard_normal(50)
        fitted = a @ ridge.fit(a, y, lam=1e12).weights
        np.testing.assert_allclose(fitted, np.full(50, y.mean()), atol=1e-6)

    def test_multi_target_matches_per_column_solves(self):
        rng = np.random.default_rng(3)
        a = design(rng, 30, 4)
        ys = rng.standard_normal((30, 3))
        joint = ridge.fit(a, ys, lam=0.7).weights
        for i in range(3):
            single = ridge.fit(a, ys[:, i], lam=0.7).weights
            np.testing.assert_allclose(joint[:, i], single, atol=1e-12)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=20, deadline=None)
    def test_row_permutation_invariance(self, seed):
        rng = np.random.default_rng(seed)
        a = design(rng, 25, 3)
        y = rng.standard_normal(25)
        perm = rng.permutation(25)
        w = ridge.fit(a, y, lam=0.3).weights
        w_perm = ridge.fit(a[perm], y[perm], lam=0.3).weights
        np.testing.assert_allclose(w_perm, w, atol=1e-8)

    def test_validation_errors(self):
        a = design(np.random.default_rng(4), 10, 3)
        with pytest.raises(ShapeError):
            ridge.fit(a, np.zeros(9), lam=0.1)
        with pytest.raises(ShapeError):
            ridge.fit(a, np.zeros(10), lam=-0.1)
        with pytest.raises(ShapeError):
            ridge.fit(np.zeros(10), np.zeros(10), lam=0.1)


class TestRankDeficientFallback:
    def rank_deficient(self, rng, m):
        a = design(rng, m, 3)
        return np.column_stack([a, a[:, 1]])  # duplicated column

    def test_flagged_and_reproduces_in_span_targets(self):
        rng = np.random.default_rng(5)
        a = self.rank_deficient(rng, 40)
        y = 2.0 * a[:, 1] - 0.5  # exactly representable
        model = ridge.fit(a, y, lam=0.0)
        assert model.fallback
        np.testing.assert_allclose(a @ model.weights, y, atol=1e-10)

    def test_fitted_values_are_the_span_projection(self):
        rng = np.random.default_rng(6)
        a = self.rank_deficient(rng, 40)
        y = rng.standard_normal(40)
        fitted = a @ ridge.fit(a, y, lam=0.0).weights
        expected = a @ np.linalg.lstsq(a, y, rcond=None)[0]
        np.testing.assert_allclose(fitted, expected, atol=1e-10)
        # residual orthogonal to the intercept: mean still preserved
        assert fitted.mean() == pytest.approx(y.mean(), abs=1e-10)

    def test_full_rank_path_is_not_flagged(self):
        rng = np.random.default_rng(7)
        model = ridge.fit(design(rng, 30, 4), rng.standard_normal(30), lam=0.0)
        assert not model.fallback


class TestPreparedRidge:
    def test_reused_design_matches_fresh_fits(self):
        rng = np.random.default_rng(8)
        a = design(rng, 30, 4)
        prepared = ridge.PreparedRidge(a, lam=0.3)
        for _ in range(3):
            y = rng.standard_normal(30)
            np.testing.assert_allclose(
                prepared.regress(y), a @ ridge.fit(a, y, 0.3).weights, atol=1e-12
            )


class TestPredict:
    def test_applies_weights(self):
        rng = np.random.default_rng(9)
        a = design(rng, 20, 3)
        model = ridge.fit(a, rng.standard_normal(20), lam=0.2)
        np.testing.assert_allclose(ridge.predict(model, a), a @ model.weights)

    def test_column_count_checked(self):
        rng = np.random.default_rng(10)
        a = design(rng, 20, 3)
        model = ridge.fit(a, rng.standard_normal(20), lam=0.2)
        with pytest.raises(ShapeError):
            ridge.predict(model, np.ones((5, 4)))
