import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ipmlab.discriminators import (BoxFamily, ClippedMLP, ConstantFamily, FGanWrapped,
                                   QuadraticFamily, ReluMixtureFamily, SingleNeuronFamily,
                                   SpectralMLP, family_from_config, family_metadata,
                                   linear_family, project_l1_ball)
from ipmlab.errors import ConfigurationError
from ipmlab.metrics import get_pair
from ipmlab.numerics import RngStream, central_difference, relative_errors


def small_families():
    return [
        QuadraticFamily(dim=2, clip=0.05),
        linear_family(dim=3, clip=0.5),
        SingleNeuronFamily(dim=2),
        ReluMixtureFamily(dim=2, n_neurons=4),
        ClippedMLP(dim=2, widths=(8, 8), clip=0.5),
        ClippedMLP(dim=2, widths=(6,), clip=0.5, output_bias=True),
        SpectralMLP(dim=2, widths=(5, 4), spectral_bounds=[1.5, 1.0, 2.0]),
        FGanWrapped(QuadraticFamily(dim=2, clip=0.5), get_pair("pearson")),
        FGanWrapped(ClippedMLP(dim=2, widths=(6,), clip=0.5), get_pair("js")),
    ]


FAMILY_IDS = [f"{type(f).__name__}-{i}" for i, f in enumerate(small_families())]


@pytest.fixture(params=range(len(FAMILY_IDS)), ids=FAMILY_IDS)
def family(request):
    return small_families()[request.param]


class TestLayout:
    def test_flatten_roundtrip(self, family):
        theta = family.random_init(RngStream(0))
        assert theta.shape == (family.n_params,)
        np.testing.assert_array_equal(family.flatten(family.unflatten(theta)), theta)

    def test_init_in_domain(self, family):
        for k in range(5):
            assert family.in_domain(family.random_init(RngStream(k)))

    def test_projection_idempotent(self, family):
        theta = RngStream(1).normal(family.n_params) * 3.0
        once = family.project(theta)
        assert family.in_domain(once)
        np.testing.assert_allclose(family.project(once), once, atol=1e-12)

    def test_eval_many_matches_rows(self, family):
        rng = RngStream(2)
        thetas = np.array([family.random_init(rng.substream(k)) for k in range(4)])
        X = rng.unit_ball(10, family.dim)
        many = family.eval_many(thetas, X)
        for k in range(4):
            np.testing.assert_allclose(many[k], family.eval_batch(thetas[k], X), atol=1e-12)


class TestGradients:
    def test_param_gradient(self, family):
        rng = RngStream(3)
        theta = family.random_init(rng)
        X = rng.unit_ball(12, family.dim)
        c = rng.normal(12)
        analytic = family.grad_params(theta, X, c)
        numeric = central_difference(lambda t: float(c @ family.eval_batch(t, X)), theta)
        assert relative_errors(analytic, numeric).max() < 1e-4

    def test_input_gradient(self, family):
        rng = RngStream(4)
        theta = family.random_init(rng)
        X = rng.unit_ball(5, family.dim) * 0.9
        analytic = family.grad_input(theta, X)
        for i in range(5):
            numeric = central_difference(lambda x: float(family.eval_batch(theta, x[None])[0]), X[i])
            assert relative_errors(analytic[i], numeric).max() < 1e-4

    def test_single_point_input_gradient_shape(self, family):
        theta = family.random_init(RngStream(5))
        assert family.grad_input(theta, np.zeros(family.dim)).shape == (family.dim,)

    def test_no_coeffs_no_grad(self, family):
        theta = family.random_init(RngStream(6))
        values, grad = family.value_and_grad(theta, np.zeros((2, family.dim)), None)
        assert grad is None and values.shape == (2,)


class TestMetadata:
    def test_constant(self):
        fam = ConstantFamily(dim=2, value=-3.0)
        assert fam.n_params == 0
        assert family_metadata(fam) == (3.0, 0.0, 0)

    def test_quadratic_closed_form(self):
        delta, lip, p = family_metadata(QuadraticFamily(dim=2, clip=0.05))
        assert delta == pytest.approx(0.05 * (math.sqrt(2) + 2), abs=1e-12)
        assert p == 6
        assert lip == pytest.approx(math.sqrt(1 + 1), abs=1e-12)

    def test_single_neuron_unit_ball(self):
        delta, lip, p = family_metadata(SingleNeuronFamily(dim=2))
        assert delta == pytest.approx(math.sqrt(2.0), abs=1e-12)
        assert lip == pytest.approx(math.sqrt(2.0), abs=1e-12)
        assert p == 3

    def test_sup_bounds_hold_empirically(self, family):
        meta = family.metadata()
        assert family.empirical_sup() <= meta.delta * (1 + 1e-9)

    def test_lipschitz_bounds_hold_empirically(self, family):
        meta = family.metadata()
        if not meta.lipschitz_empirical:
            assert family.empirical_lipschitz() <= meta.lipschitz * (1 + 1e-9)

    def test_clipped_mlp_sup_is_analytic(self):
        meta = ClippedMLP(dim=2, widths=(64,) * 4, clip=0.05).metadata()
        assert not meta.delta_empirical
        assert meta.lipschitz_empirical


class TestSpecificFamilies:
    def test_box_clamps(self):
        fam = BoxFamily(dim=1, clip=0.1)
        np.testing.assert_array_equal(fam.project(np.array([0.5, -0.5, 0.05])), [0.1, -0.1, 0.05])

    def test_box_boundary_not_interior(self):
        fam = QuadraticFamily(dim=2, clip=0.05)
        assert not fam.is_interior(np.full(6, 0.05), 1e-5)
        assert fam.is_interior(np.zeros(6), 1e-5)

    def test_quadratic_value(self):
        fam = QuadraticFamily(dim=2, clip=1.0)
        theta = fam.flatten({"A": np.array([[1.0, 2.0], [0.0, -1.0]]), "b": np.array([0.5, 0.0])})
        x = np.array([[1.0, 1.0]])
        # x^T A x + b^T x = 1 + 2 - 1 + 0.5
        np.testing.assert_allclose(fam.eval_batch(theta, x), [2.5])

    def test_single_neuron_relu(self):
        fam = SingleNeuronFamily(dim=1)
        theta = np.array([1.0, 0.0])
        np.testing.assert_allclose(fam.eval_batch(theta, np.array([[-0.5], [0.5]])), [0.0, 0.5])

    def test_single_neuron_projection_to_sphere(self):
        fam = SingleNeuronFamily(dim=2)
        np.testing.assert_allclose(np.linalg.norm(fam.project(np.array([3.0, 4.0, 0.0]))), 1.0)

    def test_spectral_projection_caps(self):
        fam = SpectralMLP(dim=2, widths=(4,), spectral_bounds=[0.5, 2.0])
        theta = fam.project(RngStream(9).normal(fam.n_params) * 10)
        norms = [np.linalg.norm(A, 2) for A in fam.layer_matrices(theta)]
        assert norms[0] <= 0.5 + 1e-12 and norms[1] <= 2.0 + 1e-12

    def test_spectral_default_bounds_need_depth(self):
        with pytest.raises(ConfigurationError):
            SpectralMLP(dim=2, widths=(4,), spectral_bounds=[1.0])

    def test_fgan_js_range(self):
        fam = FGanWrapped(ClippedMLP(dim=2, widths=(4,), clip=5.0), get_pair("js"))
        theta = fam.random_init(RngStream(1))
        vals = fam.eval_batch(theta, RngStream(2).unit_ball(100, 2))
        assert np.all(vals < math.log(2.0))

    def test_config_roundtrip(self):
        fam = family_from_config({"kind": "clipped_mlp", "widths": "8,8", "clip": "0.1"})
        assert isinstance(fam, ClippedMLP) and fam.widths == (8, 8) and fam.clip == 0.1
        wrapped = family_from_config({"kind": "fgan_wrapped", "pair": "js",
                                      "core": {"kind": "quadratic"}})
        assert isinstance(wrapped, FGanWrapped)

    def test_config_unknown(self):
        with pytest.raises(ConfigurationError):
            family_from_config({"kind": "transformer"})


class TestL1Projection:
    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(-10, 10), min_size=1, max_size=12), st.floats(0.1, 5))
    def test_lands_in_ball(self, w, radius):
        p = project_l1_ball(np.array(w), radius)
        assert np.abs(p).sum() <= radius * (1 + 1e-9)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(-10, 10), min_size=1, max_size=12))
    def test_is_nearest_point(self, w):
        w = np.array(w)
        p = project_l1_ball(w)
        rng = np.random.default_rng(0)
        for _ in range(20):
            q = project_l1_ball(p + rng.normal(size=w.size) * 0.1)
            assert np.linalg.norm(w - p) <= np.linalg.norm(w - q) + 1e-9

    def test_inside_unchanged(self):
        w = np.array([0.2, -0.3])
        np.testing.assert_array_equal(project_l1_ball(w), w)


class TestHypothesisEvaluation:
    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10**6))
    def test_clipped_outputs_bounded(self, seed):
        fam = ClippedMLP(dim=2, widths=(8, 8), clip=0.05)
        rng = RngStream(seed)
        vals = fam.eval_batch(fam.random_init(rng), rng.unit_ball(50, 2))
        assert np.all(np.abs(vals) <= fam.metadata().delta + 1e-12)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10**6))
    def test_relu_mixture_lipschitz(self, seed):
        fam = ReluMixtureFamily(dim=2, n_neurons=4)
        rng = RngStream(seed)
        theta = fam.random_init(rng)
        x, y = rng.unit_ball(30, 2), rng.unit_ball(30, 2)
        diff = np.abs(fam.eval_batch(theta, x) - fam.eval_batch(theta, y))
        assert np.all(diff <= fam.input_lipschitz() * np.linalg.norm(x - y, axis=1) + 1e-12)
