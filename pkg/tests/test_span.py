import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ipmlab.discriminators import SingleNeuronFamily
from ipmlab.errors import NotInSpanError, UsageError
from ipmlab.measures import EmpiricalMeasure
from ipmlab.metrics import neural_distance_exact_1d
from ipmlab.numerics import RngStream
from ipmlab.span import (DecayCurve, decay_moment_bound, error_decay_curve, f_variation_norm,
                         fit_decay_exponent, monomial_dictionary, moment_bound_check,
                         random_relu_dictionary, relu_dictionary, span_density_check,
                         unit_ball_grid)

PLUS_MINUS = np.array([[1.0, 0.0], [-1.0, 0.0]])  # relu(x), relu(-x)
LINE = np.linspace(-1, 1, 21)[:, None]


class TestVariationNorm:
    def test_absolute_value(self):
        dec = f_variation_norm(lambda X: np.abs(X[:, 0]), relu_dictionary(PLUS_MINUS, LINE))
        assert dec.norm == pytest.approx(2.0, abs=1e-12)
        np.testing.assert_allclose(dec.weights, [1.0, 1.0], atol=1e-12)
        assert dec.exact and dec.anchor_restricted

    def test_constant_is_free(self):
        dec = f_variation_norm(lambda X: np.full(X.shape[0], 3.0), relu_dictionary(PLUS_MINUS, LINE))
        assert dec.norm == pytest.approx(0.0, abs=1e-12)
        assert dec.w0 == pytest.approx(3.0, abs=1e-12)

    def test_linear_target(self):
        # x = relu(x) - relu(-x)
        dec = f_variation_norm(lambda X: X[:, 0], relu_dictionary(PLUS_MINUS, LINE))
        assert dec.norm == pytest.approx(2.0, abs=1e-12)

    def test_not_in_span(self):
        with pytest.raises(NotInSpanError):
            f_variation_norm(lambda X: X[:, 0] ** 2, relu_dictionary(PLUS_MINUS, LINE))

    def test_values_instead_of_callable(self):
        dec = f_variation_norm(np.abs(LINE[:, 0]), relu_dictionary(PLUS_MINUS, LINE))
        assert dec.norm == pytest.approx(2.0, abs=1e-12)

    def test_value_count_mismatch(self):
        with pytest.raises(UsageError):
            f_variation_norm(np.zeros(3), relu_dictionary(PLUS_MINUS, LINE))

    def test_solvers_agree(self):
        dic = random_relu_dictionary(30, 1, RngStream(1), LINE)
        g = lambda X: np.maximum(X[:, 0] - 0.3, 0) + 0.5 * np.abs(X[:, 0])
        dic = dic.extended(relu_dictionary(PLUS_MINUS, LINE))
        a = f_variation_norm(g, dic, solver="simplex")
        b = f_variation_norm(g, dic, solver="highs")
        assert a.norm == pytest.approx(b.norm, abs=1e-9)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10**6))
    def test_norm_monotone_under_dictionary_growth(self, seed):
        rng = RngStream(seed)
        base = relu_dictionary(PLUS_MINUS, LINE)
        bigger = base.extended(random_relu_dictionary(10, 1, rng, LINE))
        g = lambda X: 2.0 * np.abs(X[:, 0]) + 0.3 * X[:, 0]
        assert f_variation_norm(g, bigger).norm <= f_variation_norm(g, base).norm + 1e-9

    def test_monomials(self):
        anchors = unit_ball_grid(2, 5)
        dic = monomial_dictionary(2, 2, anchors)
        dec = f_variation_norm(lambda X: 2 * X[:, 0] * X[:, 1] - X[:, 1] + 4, dic)
        assert dec.norm == pytest.approx(3.0, abs=1e-9)
        assert dic.names == ["x0", "x1", "x0*x0", "x0*x1", "x1*x1"]


class TestMomentBound:
    def test_holds_on_grid_exact_instances(self):
        rng = RngStream(2)
        fam = SingleNeuronFamily(1)
        directions = rng.unit_sphere(12, 2)
        for k in range(10):
            P = EmpiricalMeasure(rng.uniform((6, 1)) * 2 - 1)
            Q = EmpiricalMeasure(rng.uniform((6, 1)) * 2 - 1)
            w = rng.normal(12)
            g = lambda X, w=w: np.maximum(np.hstack([X, np.ones((len(X), 1))]) @ directions.T, 0) @ w
            d_F = neural_distance_exact_1d(P, Q, fam).value
            check = moment_bound_check(g, relu_dictionary(directions, LINE), P, Q, d_F)
            assert check.lhs <= check.rhs + 1e-12
            assert check.norm <= np.abs(w).sum() + 1e-9

    def test_needs_callable(self):
        P = EmpiricalMeasure(np.zeros((2, 1)))
        with pytest.raises(UsageError):
            moment_bound_check(np.zeros(2), relu_dictionary(PLUS_MINUS, LINE), P, P, 0.0)


class TestDecay:
    def test_nonincreasing_and_tends_to_zero(self):
        grid = np.linspace(-1, 1, 41)[:, None]
        dic = random_relu_dictionary(40, 1, RngStream(3), grid[::2], grid)
        curve = error_decay_curve(lambda X: np.cos(3 * X[:, 0]), dic, np.geomspace(0.1, 100, 12))
        assert np.all(np.diff(curve.epsilon) <= 0)
        assert curve.epsilon[-1] < 0.05 * curve.epsilon[0]

    def test_zero_budget_is_constant_fit(self):
        dic = relu_dictionary(PLUS_MINUS, LINE)
        curve = error_decay_curve(lambda X: X[:, 0], dic, [0.0, 1.0, 2.0, 3.0])
        assert curve.epsilon[0] == pytest.approx(1.0, abs=1e-9)
        assert curve.epsilon[2] == pytest.approx(0.0, abs=1e-9)

    def test_bad_grid(self):
        with pytest.raises(UsageError):
            error_decay_curve(lambda X: X[:, 0], relu_dictionary(PLUS_MINUS, LINE), [1.0, 0.5])

    @pytest.mark.parametrize("kappa", [0.5, 1.0, 2.0, 3.0])
    def test_power_law_recovered(self, kappa):
        r = np.geomspace(1, 1000, 20)
        fit = fit_decay_exponent(DecayCurve(r, 0.7 * r ** (-kappa)))
        assert fit.kappa == pytest.approx(kappa, abs=0.01)

    def test_exact_flagged(self):
        fit = fit_decay_exponent(DecayCurve(np.array([1.0, 2.0]), np.zeros(2)))
        assert fit.exact and fit.kappa is None

    def test_too_few_points(self):
        with pytest.raises(UsageError):
            fit_decay_exponent(DecayCurve(np.array([1.0, 2.0]), np.array([0.5, 0.3])))

    def test_moment_bound_min(self):
        curve = DecayCurve(np.array([0.0, 1.0, 2.0]), np.array([1.0, 0.2, 0.0]))
        assert decay_moment_bound(curve, 0.1) == pytest.approx(0.2)

    def test_csv(self, tmp_path):
        curve = DecayCurve(np.array([1.0, 2.0]), np.array([0.5, 0.25]))
        text = curve.to_csv(tmp_path / "c.csv").read_text()
        assert text.splitlines() == ["r,epsilon", "1.0,0.5", "2.0,0.25"]


class TestDensity:
    def test_errors_shrink(self):
        grid = unit_ball_grid(2, 15)
        table = span_density_check(lambda X: np.sin(2 * X[:, 0]) * X[:, 1], grid, [4, 16, 64, 256],
                                   RngStream(4))
        assert table.error[-1] < 0.25 * table.error[0]

    def test_planted_neuron_recovered(self):
        grid = np.linspace(-1, 1, 50)[:, None]
        v = np.array([0.6, 0.8])
        g = lambda X: np.maximum(0.6 * X[:, 0] + 0.8, 0)
        table = span_density_check(g, grid, [1, 2], RngStream(5), planted=v)
        assert np.all(table.error < 1e-10)

    def test_nonfinite_target(self):
        with pytest.raises(UsageError):
            span_density_check(lambda X: np.full(len(X), np.inf), np.zeros((3, 1)), [2], RngStream(6))

    def test_unit_ball_grid(self):
        pts = unit_ball_grid(2, 11)
        assert np.all(np.linalg.norm(pts, axis=1) <= 1 + 1e-12)
        assert pts.shape[0] > 50
