import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ipmlab.complexity import (LayerBound, empirical_rademacher, norm_21_transpose,
                               rademacher_bound_analytic, rademacher_signs, spectral_complexity,
                               spectral_complexity_from_matrices, spectral_rademacher_bound)
from ipmlab.discriminators import SingleNeuronFamily, SpectralMLP, linear_family
from ipmlab.errors import DomainError, UsageError
from ipmlab.metrics import OptimizerConfig
from ipmlab.numerics import RngStream

FAST = OptimizerConfig(restarts=2, steps=100)


class TestEmpiricalRademacher:
    def test_linear_family_closed_form(self):
        # sup over |b| <= 1 of (2/m) sum tau_i b x_i is (2/m) |sum tau_i x_i|
        rng = RngStream(1)
        X = rng.uniform((50, 1)) * 2 - 1
        est = empirical_rademacher(linear_family(1, 1.0), X, trials=8, cfg=FAST, rng=RngStream(2))
        expected = [2.0 / 50 * abs(rademacher_signs(RngStream(2), t, 50) @ X[:, 0]) for t in range(8)]
        np.testing.assert_allclose(est.per_trial, expected, atol=1e-9)

    def test_nonnegative_when_symmetrized(self):
        X = RngStream(3).unit_ball(40, 2)
        est = empirical_rademacher(SingleNeuronFamily(2), X, trials=6, cfg=FAST)
        assert np.all(est.per_trial >= 0)

    def test_below_analytic_bound(self):
        X = RngStream(4).unit_sphere(256, 2)
        est = empirical_rademacher(SingleNeuronFamily(2), X, trials=10, cfg=FAST)
        assert est.value <= rademacher_bound_analytic("relu_neuron", 256) + 3 * est.std_error

    def test_deterministic(self):
        X = RngStream(5).unit_ball(30, 2)
        a = empirical_rademacher(SingleNeuronFamily(2), X, trials=3, cfg=FAST)
        b = empirical_rademacher(SingleNeuronFamily(2), X, trials=3, cfg=FAST)
        np.testing.assert_array_equal(a.per_trial, b.per_trial)

    def test_flip_signs_symmetric_family(self):
        X = RngStream(6).uniform((40, 1)) * 2 - 1
        fam = linear_family(1, 1.0)
        a = empirical_rademacher(fam, X, trials=5, cfg=FAST)
        b = empirical_rademacher(fam, X, trials=5, cfg=FAST, flip_signs=True)
        np.testing.assert_allclose(a.per_trial, b.per_trial, atol=1e-12)

    def test_candidates_only_raise(self):
        X = RngStream(7).unit_ball(30, 2)
        fam = SingleNeuronFamily(2)
        cfg = OptimizerConfig(restarts=1, steps=2)
        base = empirical_rademacher(fam, X, trials=4, cfg=cfg)
        cands = [[fam.project(RngStream(100 + t).normal(3))] for t in range(4)]
        extra = empirical_rademacher(fam, X, trials=4, cfg=cfg, candidates=cands)
        assert np.all(extra.per_trial >= base.per_trial)

    def test_signs_are_rademacher(self):
        s = rademacher_signs(RngStream(8), 0, 1000)
        assert set(np.unique(s)) == {-1.0, 1.0}

    def test_bad_input(self):
        with pytest.raises(UsageError):
            empirical_rademacher(SingleNeuronFamily(2), np.zeros((3, 2)), trials=0)


class TestAnalytic:
    def test_relu_neuron(self):
        assert rademacher_bound_analytic("relu_neuron", 8) == pytest.approx(1.0, abs=1e-15)

    def test_rkhs(self):
        assert rademacher_bound_analytic("rkhs", 4, C_k=1.0) == pytest.approx(1.0, abs=1e-15)
        with pytest.raises(DomainError):
            rademacher_bound_analytic("rkhs", 4)

    def test_bounded_lipschitz_needs_high_dim(self):
        assert rademacher_bound_analytic("bounded_lipschitz", 1000, d=3) == pytest.approx(0.1)
        with pytest.raises(DomainError):
            rademacher_bound_analytic("bounded_lipschitz", 1000, d=2)

    def test_total_variation_constant(self):
        assert rademacher_bound_analytic("total_variation", 10**6) == 2.0

    def test_unknown(self):
        with pytest.raises(UsageError):
            rademacher_bound_analytic("transformer", 10)


class TestSpectral:
    def test_reference_value(self):
        rep = spectral_complexity([(2.0, 3.0, 1.0)], W=4)
        assert rep.R == pytest.approx(math.sqrt(math.log(32.0)) * 3.0, abs=1e-12)
        assert rep.R == pytest.approx(5.584946, abs=1e-6)

    def test_recompute(self):
        rep = spectral_complexity([LayerBound(1.5, 2.0, 0.5), LayerBound(0.7, 1.0)], W=10)
        expected = (math.sqrt(math.log(200.0)) * 1.5 * 0.5 * 0.7
                    * ((2.0 / 1.5) ** (2 / 3) + (1.0 / 0.7) ** (2 / 3)) ** 1.5)
        assert rep.R == pytest.approx(expected, rel=1e-12)
        assert rep.recompute() == rep.R

    def test_invalid_layers(self):
        with pytest.raises(DomainError):
            spectral_complexity([(0.0, 1.0)], W=2)
        with pytest.raises(DomainError):
            spectral_complexity([], W=2)

    def test_norm_21(self):
        A = np.array([[3.0, 4.0], [0.0, 1.0]])
        assert norm_21_transpose(A) == 6.0

    def test_from_matrices(self):
        A = np.diag([2.0, 1.0])
        rep = spectral_complexity_from_matrices([A])
        assert rep.layers[0].s == pytest.approx(2.0)
        assert rep.layers[0].b == pytest.approx(3.0)
        assert rep.W == 2

    def test_spectral_family_caps(self):
        fam = SpectralMLP(dim=2, widths=(6,), spectral_bounds=[1.0, 2.0])
        theta = fam.random_init(RngStream(1))
        rep = spectral_complexity_from_matrices(fam.layer_matrices(theta))
        assert rep.layers[0].s <= 1.0 + 1e-12 and rep.layers[1].s <= 2.0 + 1e-12

    def test_rademacher_bound_value(self):
        assert spectral_rademacher_bound(1.0, 1.0, 3.0) == pytest.approx(8.0, abs=1e-12)

    def test_rademacher_bound_domain(self):
        with pytest.raises(DomainError, match="m >= 3"):
            spectral_rademacher_bound(1.0, 1.0, 2.9)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0.1, 10), st.floats(0.1, 10), st.floats(1.0, 100))
    def test_rademacher_bound_decreases_past_threshold(self, xf, R, k):
        m0 = 3.0 * xf * R * math.e * k
        assert spectral_rademacher_bound(xf, R, 2 * m0) < spectral_rademacher_bound(xf, R, m0)
