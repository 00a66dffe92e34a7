"""Independent-oracle checks run by ``ipmlab selftest``.

Each check compares a library result with a closed form, a brute-force
computation or a second solver.  The quick suite takes well under a minute;
``full=True`` adds the training reproductions, which take several minutes.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import linprog

from . import bounds, complexity, span
from .discriminators import ClippedMLP, QuadraticFamily, SingleNeuronFamily, linear_family
from .measures import (EmpiricalMeasure, GaussianModel, MultivariateNormal, delta, e1_truth,
                       gaussian_fit_mle, make_benchmark)
from .metrics import (PEARSON, OptimizerConfig, bl_distance, kl_gaussian_closed, mmd,
                      neural_distance, neural_distance_exact_1d, neural_f_divergence,
                      symmetric_kl, symmetric_kl_closed, w1_distance)
from .numerics import RngStream, central_difference, grad_check, relative_errors
from .training import (TrainConfig, evaluate_test_ll, experiment_family, gaussian_init,
                       mixture_init, preset_config, train_gan)

INV_E = math.exp(-1.0)
_CHECKS: list[tuple[str, bool, Callable[[], dict]]] = []


def check(name: str, full: bool = False):
    def register(fn):
        _CHECKS.append((name, full, fn))
        return fn
    return register


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "seconds": round(self.seconds, 3),
                "detail": self.detail}


def _close(a, b, tol) -> bool:
    return abs(float(a) - float(b)) <= tol


# --------------------------------------------------------------------------- #
# numerics and measures


@check("gradcheck.quadratic")
def _():
    fam = QuadraticFamily(2, 0.05)
    rng = RngStream(11)
    rep = grad_check(fam, fam.random_init(rng) * 0.9, rng.unit_ball(16, 2))
    return {"passed": rep.reliable and rep.max_rel_error < 1e-6, "max_rel_error": rep.max_rel_error}


@check("gradcheck.clipped_mlp")
def _():
    fam = ClippedMLP(2, (16, 16), 0.5)
    rng = RngStream(12)
    theta = fam.random_init(rng) * 0.9
    X = rng.unit_ball(8, 2)
    rep = grad_check(fam, theta, X)
    gi = fam.grad_input(theta, X)
    num = np.array([central_difference(lambda x: float(fam.eval_batch(theta, x[None])[0]), X[i])
                    for i in range(len(X))])
    err_in = float(relative_errors(gi, num).max())
    return {"passed": rep.max_rel_error < 1e-4 and err_in < 1e-4,
            "max_rel_error_params": rep.max_rel_error, "max_rel_error_input": err_in}


@check("rng.clt")
def _():
    z = RngStream(42, 0).normal(10**6)
    return {"passed": abs(z.mean()) < 4e-3, "mean": float(z.mean())}


@check("gaussian.e1_covariance")
def _():
    model = GaussianModel(15 / 17, (0.5 * math.log(17 / 128), 0.5 * math.log(1 / 34)), (0.5, -0.5))
    x = model.sample(10**6, RngStream(2)).points
    target = np.array([[17.0, 15.0], [15.0, 17.0]]) / 128
    err = float(np.max(np.abs(np.cov(x.T) - target)))
    return {"passed": err < 0.005, "max_abs_error": err}


@check("gaussian.log_density_at_mean")
def _():
    v = float(e1_truth().log_density(np.array([[0.5, -0.5]]))[0])
    ref = -math.log(2 * math.pi) + 0.5 * math.log(256.0)
    return {"passed": _close(v, ref, 1e-12), "value": v, "oracle": ref}


@check("gaussian.self_normalization")
def _():
    p, q = e1_truth(), GaussianModel(0.0, (0.0, 0.0), (0.5, -0.5))
    x = q.sample(10**5, RngStream(4)).points
    v = float(np.mean(np.exp(p.log_density(x) - q.log_density(x))))
    return {"passed": abs(v - 1) < 0.01, "value": v}


@check("gaussian.mle")
def _():
    data = make_benchmark("gaussian-e1", seed=0)
    err = float(np.max(np.abs(gaussian_fit_mle(data.train).mean - np.array([0.5, -0.5]))))
    model = GaussianModel(0.5, (-0.5, -1.0), (0.2, 0.3))
    fit = gaussian_fit_mle(model.sample(10**6, RngStream(6)))
    rt = float(np.max(np.abs(fit.params - model.params)))
    return {"passed": err < 0.02 and rt < 0.01, "mean_error": err, "roundtrip_error": rt}


@check("mixture.center_and_truth_ll")
def _():
    data = make_benchmark("mixture-e2", seed=0)
    center = float(data.truth.log_density(np.array([[math.sqrt(2), 0.0]]))[0])
    ref = math.log(1 / 8) + math.log(1 / (2 * math.pi * 0.01414 ** 2))
    ll = evaluate_test_ll(data.truth, data.test)
    e1 = make_benchmark("gaussian-e1", seed=0)
    ll1 = evaluate_test_ll(e1.truth, e1.test)
    ref1 = -(math.log(2 * math.pi) + 1 + 0.5 * math.log(1 / 256))
    return {"passed": _close(center, ref, 1e-6) and abs(ll - 3.60) <= 0.10 and abs(ll1 - ref1) <= 0.06,
            "center": center, "e2_truth_test_ll": ll, "e1_truth_test_ll": ll1}


# --------------------------------------------------------------------------- #
# discriminators


@check("family.single_neuron_sup")
def _():
    rng = RngStream(21)
    x = rng.unit_ball(10**5, 2)
    v = rng.unit_sphere(10**5, 3)
    vals = np.maximum(np.sum(np.hstack([x, np.ones((len(x), 1))]) * v, axis=1), 0)
    fam = SingleNeuronFamily(2)
    return {"passed": vals.max() <= math.sqrt(2) and fam.metadata().delta == math.sqrt(2),
            "max_abs": float(vals.max())}


@check("family.quadratic_closed_forms")
def _():
    fam = QuadraticFamily(2, 0.05)
    rng = RngStream(22)
    theta = fam.random_init(rng)
    X, c = rng.unit_ball(20, 2), rng.normal(20)
    g = fam.unflatten(fam.grad_params(theta, X, c))
    ref = np.einsum("n,ni,nj->ij", c, X, X)
    err = float(np.max(np.abs(g["A"] - ref)))
    delta_ = fam.metadata().delta
    return {"passed": err < 1e-12 and _close(delta_, 0.05 * (2 + math.sqrt(2)), 1e-12)
            and fam.empirical_sup() <= delta_,
            "grad_A_error": err, "delta": delta_}


# --------------------------------------------------------------------------- #
# metrics


@check("neural.linear_two_deltas")
def _():
    exact = neural_distance_exact_1d(delta(0.0), delta(1.0), linear_family(1, 1.0)).value
    asc = neural_distance(delta(0.0), delta(1.0), linear_family(1, 1.0),
                          OptimizerConfig(restarts=2, steps=100)).value
    return {"passed": _close(exact, 1, 1e-9) and _close(asc, 1, 1e-9), "grid": exact, "ascent": asc}


@check("neural.same_gaussian_below_rate")
def _():
    truth = e1_truth()
    P, Q = truth.sample(10**4, RngStream(30)), truth.sample(10**4, RngStream(31))
    fam = SingleNeuronFamily(2)
    est = neural_distance(P, Q, fam, OptimizerConfig(restarts=4, steps=200))
    spread = float(np.std(fam.eval_batch(est.best_theta, np.vstack([P.points, Q.points]))))
    band = 3 * math.sqrt(2) * spread / 100
    return {"passed": est.value <= 2 * math.sqrt(2) / 100 + band, "value": est.value,
            "ceiling": 2 * math.sqrt(2) / 100 + band}


@check("neural.lipschitz_shift")
def _():
    rng = RngStream(32)
    z = rng.normal((400, 1)) * 0.2
    worst = 0.0
    for h in (0.05, 0.2, 0.5):
        v = neural_distance_exact_1d(EmpiricalMeasure(z), EmpiricalMeasure(z + h),
                                     SingleNeuronFamily(1)).value
        worst = max(worst, v - h)
    return {"passed": worst <= 1e-9, "max_excess": worst}


@check("mmd.oracles")
def _():
    rng = RngStream(1)
    X, Y = rng.normal((64, 2)), rng.normal((64, 2)) + 0.3
    k = lambda a, b: math.exp(-float(np.sum((a - b) ** 2)) / 2)
    loop = math.sqrt(sum(k(a, b) for a in X for b in X) / 64 ** 2
                     + sum(k(a, b) for a in Y for b in Y) / 64 ** 2
                     - 2 * sum(k(a, b) for a in X for b in Y) / 64 ** 2)
    v = mmd(EmpiricalMeasure(X), EmpiricalMeasure(Y)).value
    d = mmd(delta(0.0), delta(1.0)).value
    return {"passed": _close(v, loop, 1e-12) and _close(d, math.sqrt(2 - 2 * math.exp(-0.5)), 1e-12),
            "double_loop_error": abs(v - loop), "two_deltas": d}


@check("transport.hand_cases")
def _():
    b1 = bl_distance(delta(0.0), delta(1.0)).value
    b3 = bl_distance(delta(0.0), delta(3.0)).value
    w3 = w1_distance(delta(0.0), delta(3.0)).value
    return {"passed": _close(b1, 1, 1e-9) and _close(b3, 2, 1e-9) and _close(w3, 3, 1e-9),
            "bl_01": b1, "bl_03": b3, "w1_03": w3}


@check("transport.w1_dominates_bl")
def _():
    rng = RngStream(33)
    worst = -np.inf
    for t in range(100):
        P = EmpiricalMeasure(rng.normal((10, 2)))
        Q = EmpiricalMeasure(rng.normal((10, 2)) * 1.5 + 0.2)
        worst = max(worst, bl_distance(P, Q).value - w1_distance(P, Q).value)
    return {"passed": worst <= 1e-9, "max_bl_minus_w1": float(worst)}


@check("kl.closed_and_monte_carlo")
def _():
    mu, nu = MultivariateNormal([0.0], [[1.0]]), MultivariateNormal([1.0], [[1.0]])
    est = symmetric_kl(mu, nu, 20000, RngStream(34))
    shift = kl_gaussian_closed(MultivariateNormal([0.0, 0.0], np.eye(2)),
                               MultivariateNormal([1.0, 0.0], np.eye(2)))
    rng = RngStream(35)
    worst = 0.0
    for t in range(20):
        p = GaussianModel.from_params(rng.uniform(5) - 0.5)
        q = GaussianModel.from_params(rng.uniform(5) - 0.5)
        e = symmetric_kl(p, q, 4000, rng.substream(t))
        worst = max(worst, abs(e.value - symmetric_kl_closed(p, q)) / e.std_error)
    return {"passed": abs(est.value - 1) <= 3 * est.std_error and _close(shift, 0.5, 1e-12)
            and worst <= 4, "one_d": est.value, "std_error": est.std_error,
            "max_z_over_pairs": worst}


@check("fdiv.pearson_grid")
def _():
    v = neural_f_divergence(delta(0.0), delta(1.0), linear_family(1, 1.0), PEARSON, grid=True).value
    return {"passed": _close(v, 0.75, 1e-9), "value": v}


# --------------------------------------------------------------------------- #
# complexity and bounds


@check("rademacher.single_neuron_rate")
def _():
    cfg = OptimizerConfig(restarts=3, steps=100)
    vals = {}
    for m in (256, 1024):
        X = RngStream(40 + m).unit_sphere(m, 2)
        vals[m] = complexity.empirical_rademacher(SingleNeuronFamily(2), X, trials=20, cfg=cfg)
    ratio = vals[1024].value / vals[256].value
    ok = all(e.value <= 2 * math.sqrt(2) / math.sqrt(m) + 3 * e.std_error for m, e in vals.items())
    return {"passed": ok and 0.4 <= ratio <= 0.6, "R_256": vals[256].value,
            "R_1024": vals[1024].value, "ratio": ratio}


@check("rademacher.analytic")
def _():
    a = complexity.rademacher_bound_analytic("relu_neuron", 10000)
    b = complexity.rademacher_bound_analytic("rkhs", 100, C_k=1.0)
    return {"passed": _close(a, 0.0282843, 1e-7) and _close(b, 0.2, 1e-12), "relu": a, "rkhs": b}


@check("spectral.formula")
def _():
    R = complexity.spectral_complexity([(2.0, 3.0, 1.0)], W=4).R
    layers = [(1.5, 2.0), (0.7, 1.0), (2.0, 0.5)]
    c = 1.7
    base = complexity.spectral_complexity(layers, W=8).R
    scaled = complexity.spectral_complexity([(c * s, c * b) for s, b in layers], W=8).R
    return {"passed": _close(R, math.sqrt(math.log(32)) * 3, 1e-12)
            and _close(scaled, c ** 3 * base, 1e-9 * scaled), "R": R, "homogeneity_ratio": scaled / base}


@check("spectral.rademacher_bound")
def _():
    a = complexity.spectral_rademacher_bound(1, 1, 3)
    b = complexity.spectral_rademacher_bound(1, 1, 3 * math.e)
    ms = np.linspace(3 * math.e, 300, 500)
    vals = np.array([complexity.spectral_rademacher_bound(1, 1, m) for m in ms])
    return {"passed": _close(a, 8, 1e-12) and _close(b, 16 / math.e, 1e-12)
            and bool(np.all(np.diff(vals) < 0)), "m3": a, "m3e": b}


@check("bounds.constants")
def _():
    c1 = bounds.relu_constant(INV_E)
    c2 = bounds.parametric_constant(2, 1, 1, INV_E)
    c3 = bounds.mmd_constant(1, INV_E)
    t1 = bounds.bound_relu(10**4, INV_E).total
    t3 = bounds.bound_mmd(1, INV_E, 10**4).total
    conc = bounds.bound_theorem41(0.0, 1.0, INV_E, 2).terms["concentration"]
    m = math.ceil(c2 ** 2)
    ok = (_close(c1, 4 * math.sqrt(2) + 4, 1e-12) and _close(c2, 32 * math.sqrt(2 * math.pi) + 2 * math.sqrt(2), 1e-12)
          and _close(c3, 2 * (2 + math.sqrt(2)), 1e-12) and _close(t1, 0.0965685, 1e-7)
          and _close(t3, 0.0682843, 1e-7) and _close(conc, 2, 1e-12) and c2 / math.sqrt(m) <= 1)
    return {"passed": ok, "relu": c1, "parametric": c2, "mmd": c3}


@check("bounds.spectral_and_kl")
def _():
    s = bounds.bound_spectral(1, 1, 0, 3, 0.5).total
    m = 50.0
    d = bounds.bound_spectral(0, 0, 1, m, 2 * INV_E).terms["concentration"]
    kl = bounds.bound_kl(3, 0.01, math.sqrt(2), 0.05, 10**5)
    bl = bounds.bound_bl_from_neural(1e-5, 2, 1.0)
    return {"passed": _close(s, 16, 1e-12) and _close(d, 6 * math.sqrt(2 / m), 1e-12)
            and _close(bounds.recompute_total(kl), kl.total, 1e-12) and _close(bl, 1e-2, 1e-12),
            "spectral": s, "kl": kl.total}


@check("bounds.compatibility_1d")
def _():
    rep = bounds.compatibility_coefficient(MultivariateNormal([0.0], [[1.0]]),
                                           [MultivariateNormal([1.0], [[1.0]])])
    return {"passed": _close(rep.Lambda, 1, 1e-9), "Lambda": rep.Lambda}


# --------------------------------------------------------------------------- #
# span


@check("span.abs_norm")
def _():
    anchors = np.array([[-1.0], [-0.5], [0.0], [0.5], [1.0]])
    dic = span.relu_dictionary(np.array([[1.0, 0.0], [-1.0, 0.0]]), anchors)
    dec = span.f_variation_norm(lambda X: np.abs(X[:, 0]), dic)
    P, Q = delta(0.0), delta(1.0)
    dF = neural_distance_exact_1d(P, Q, SingleNeuronFamily(1)).value
    mc = span.moment_bound_check(lambda X: np.abs(X[:, 0]), dic, P, Q, dF)
    return {"passed": _close(dec.norm, 2, 1e-12) and np.allclose(dec.weights, 1, atol=1e-12)
            and mc.lhs <= mc.rhs, "norm": dec.norm, "slack": mc.slack}


@check("span.decay_curve")
def _():
    grid = np.linspace(-1, 1, 81)[:, None]
    dic = span.random_relu_dictionary(200, 1, RngStream(50), grid[::2], grid)
    curve = span.error_decay_curve(lambda X: np.cos(3 * X[:, 0]), dic, np.geomspace(0.05, 50, 12))
    fit = span.fit_decay_exponent(curve)
    r = np.geomspace(1, 100, 10)
    synth = span.fit_decay_exponent(span.DecayCurve(r, 2.0 * r ** -1.5))
    return {"passed": bool(np.all(np.diff(curve.epsilon) <= 0))
            and curve.epsilon[-1] < curve.epsilon[0] / 5 and fit.kappa is not None
            and fit.kappa > 0 and abs(synth.kappa - 1.5) <= 0.01,
            "eps_first": float(curve.epsilon[0]), "eps_last": float(curve.epsilon[-1]),
            "kappa": fit.kappa, "residual": fit.residual}


@check("span.density")
def _():
    grid = span.unit_ball_grid(2, 21)
    good, finals = 0, []
    for seed in range(5):
        t = span.span_density_check(lambda X: np.sin(np.pi * X[:, 0]), grid, [8, 32, 128, 512],
                                    RngStream(60 + seed))
        good += bool(np.all(np.diff(t.error) < 0))
        finals.append(float(t.error[-1]))
    return {"passed": good >= 3 and max(finals) < 0.05, "decreasing_seeds": good,
            "final_errors": finals}


@check("lp.simplex_vs_highs")
def _():
    from .numerics import LpProblem, solve_lp

    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(20):
        A = rng.normal(size=(5, 6))
        b = A @ rng.uniform(0, 1, 6) + 1
        c = rng.normal(size=6)
        ours = solve_lp(LpProblem(c, A, ["<="] * 5, b, bounds=[(0, 2)] * 6)).value
        ref = linprog(c, A_ub=A, b_ub=b, bounds=[(0, 2)] * 6, method="highs").fun
        worst = max(worst, abs(ours - ref))
    return {"passed": worst < 1e-8, "max_gap": worst}


# --------------------------------------------------------------------------- #
# training (quick invariants)


def _short_data(name: str, seed: int = 0):
    return make_benchmark(name, seed, train_size=2000, test_size=200)


@check("training.flowgan_zero_lambda")
def _():
    data = _short_data("mixture-e2")
    fam = ClippedMLP(2, (16, 16), 0.05)
    a = train_gan(mixture_init(), fam, data, TrainConfig(loss="wgan_clip", steps=20, eval_every=5))
    b = train_gan(mixture_init(), fam, data, TrainConfig(loss="flowgan", flowgan_lambda=0.0,
                                                          steps=20, eval_every=5))
    same = all(np.array_equal(r.params, s.params) and r.gan_loss == s.gan_loss
               for r, s in zip(a.records, b.records))
    return {"passed": same and len(a.records) == len(b.records)}


@check("training.zero_critic")
def _():
    tr = train_gan(gaussian_init(), ClippedMLP(2, (16,), 0.05), _short_data("gaussian-e1"),
                   TrainConfig(steps=1, critic_init="zero"))
    return {"passed": tr.records[0].gan_loss == 0.0, "first_gan_loss": tr.records[0].gan_loss}


@check("training.pathwise_gradient")
def _():
    rng = RngStream(70)
    worst = 0.0
    for k in range(10):
        model = GaussianModel.from_params(rng.uniform(5) - 0.5)
        z, gx = rng.normal((6, 2)), rng.normal((6, 2))
        num = central_difference(lambda t: float(np.sum(GaussianModel.from_params(t).push(z) * gx)),
                                 model.params)
        worst = max(worst, float(relative_errors(model.pathwise_grad(z, gx), num).max()))
    return {"passed": worst < 1e-4, "max_rel_error": worst}


# --------------------------------------------------------------------------- #
# training reproductions (full suite only)


def _train(name: str, method: str, seed: int, **kw):
    from .training import EXPERIMENTS

    preset = EXPERIMENTS[name]
    data = make_benchmark(preset.benchmark, seed)
    cfg = preset_config(name, method, seed, kw)
    return data, train_gan(preset.init(), experiment_family(name, method), data, cfg)


@check("training.e1_qgan_kl", full=True)
def _():
    data, tr = _train("e1", "qgan", 7)
    kl = symmetric_kl_closed(data.truth, GaussianModel.from_params(tr.final.params))
    return {"passed": kl < 0.05, "symmetric_kl": kl}


@check("training.e1_mle", full=True)
def _():
    data, tr = _train("e1", "mle", 7)
    ref = evaluate_test_ll(gaussian_fit_mle(data.train), data.test)
    train = [r.train_ll for r in tr.records]
    drops = float(np.max(np.maximum.accumulate(train) - np.array(train)))
    return {"passed": abs(tr.final.test_ll - ref) <= 0.02 and drops <= 0.05,
            "final_test_ll": tr.final.test_ll, "closed_form": ref, "max_train_ll_drop": drops}


@check("training.e2_phenomena", full=True)
def _():
    mle_ok = wgan_ok = flow_ok = 0
    rows = []
    for seed in range(5):
        _, mle = _train("e2", "mle", seed)
        _, wg = _train("e2", "wgan_clip", seed)
        _, fl = _train("e2", "flowgan", seed)
        g = wg.gan_loss
        mle_ok += 1.5 <= mle.final.test_ll <= 3.5
        wgan_ok += wg.oscillation() > 1 and g[len(g) // 2:].mean() < g[:len(g) // 2].mean()
        flow_ok += fl.oscillation() < wg.oscillation()
        rows.append({"seed": seed, "mle": mle.final.test_ll, "wgan_osc": wg.oscillation(),
                     "flowgan_osc": fl.oscillation()})
    return {"passed": mle_ok >= 3 and wgan_ok >= 3 and flow_ok >= 3, "runs": rows}


# --------------------------------------------------------------------------- #


def run_selftest(full: bool = False, names: list[str] | None = None) -> list[CheckResult]:
    results = []
    for name, is_full, fn in _CHECKS:
        if (is_full and not full) or (names and name not in names):
            continue
        t0 = time.perf_counter()
        try:
            detail = fn()
            passed = bool(detail.pop("passed"))
        except Exception as exc:  # a crashing oracle is a failed oracle
            detail, passed = {"error": f"{type(exc).__name__}: {exc}"}, False
        results.append(CheckResult(name, passed, _jsonable(detail), time.perf_counter() - t0))
    return results


def check_names(full: bool = True) -> list[str]:
    return [n for n, f, _ in _CHECKS if full or not f]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj
