"""Acceptance suite: one PASS/FAIL line per criterion, all at the stated tolerances.

The criteria marked slow run full training reproductions (several minutes in total).
"""

import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from ipmlab import bounds, complexity, span
from ipmlab.discriminators import (ClippedMLP, FGanWrapped, QuadraticFamily, ReluMixtureFamily,
                                   SingleNeuronFamily, SpectralMLP, linear_family)
from ipmlab.measures import (EmpiricalMeasure, GaussianModel, MixtureModel, MultivariateNormal,
                             delta, e1_truth)
from ipmlab.metrics import (JENSEN_SHANNON, PEARSON, OptimizerConfig, bl_distance, get_pair, mmd,
                            neural_distance, neural_distance_exact_1d, neural_f_divergence,
                            symmetric_kl, symmetric_kl_closed, w1_distance)
from ipmlab.numerics import RngStream, central_difference, grad_check, relative_errors
from ipmlab.training import mixture_init, run_experiment
from ipmlab.training.loop import Generator

INV_E = math.exp(-1.0)


def verdict(capsys, number, title, passed, **detail):
    """Print one PASS/FAIL line for a criterion and fail the test when it does not hold."""
    text = ", ".join(f"{k}={_short(v)}" for k, v in detail.items())
    with capsys.disabled():
        print(f"\n{'PASS' if passed else 'FAIL'} criterion {number:2d} ({title}): {text}")
    assert passed, f"criterion {number} failed: {text}"


def _short(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_short(x) for x in v) + "]"
    return str(v)


def slope(ms, values):
    return float(np.polyfit(np.log(ms), np.log(values), 1)[0])


def ipmlab(*args, cwd=None):
    return subprocess.run([sys.executable, "-m", "ipmlab", *map(str, args)], capture_output=True,
                          text=True, check=False, cwd=cwd)


@pytest.fixture(scope="module")
def e1_seed7(tmp_path_factory):
    """``experiment e1 --seed 7`` through the CLI: output dir, summary and per-arm wall times."""
    out = tmp_path_factory.mktemp("e1_seed7")
    proc = ipmlab("experiment", "e1", "--seed", 7, "--out", out)
    assert proc.returncode == 0, proc.stderr
    return out, json.loads((out / "summary.json").read_text()), json.loads((out / "timings.json").read_text())


class TestAcceptance:
    def test_01_oracle_equivalence(self, capsys):
        t0 = time.perf_counter()
        rng = RngStream(1)
        X, Y = rng.normal((64, 2)), rng.normal((64, 2)) * 1.3 + 0.2
        k = lambda a, b: math.exp(-float(np.sum((a - b) ** 2)) / 2.0)
        xx = sum(k(a, b) for a in X for b in X)
        yy = sum(k(a, b) for a in Y for b in Y)
        xy = sum(k(a, b) for a in X for b in Y)
        loop = math.sqrt((xx + yy - 2 * xy) / 64 ** 2)
        gap = abs(mmd(EmpiricalMeasure(X), EmpiricalMeasure(Y)).value - loop)
        bl1 = bl_distance(delta(0.0), delta(1.0)).value
        bl3 = bl_distance(delta(0.0), delta(3.0)).value
        w3 = w1_distance(delta(0.0), delta(3.0)).value
        ok = gap <= 1e-12 and abs(bl1 - 1) <= 1e-9 and abs(bl3 - 2) <= 1e-9 and abs(w3 - 3) <= 1e-9
        verdict(capsys, 1, "oracle equivalence", ok, mmd_gap=gap, bl_01=bl1, bl_03=bl3, w1_03=w3,
                seconds=time.perf_counter() - t0)

    def test_02_gradient_suite(self, capsys):
        t0 = time.perf_counter()
        families = [QuadraticFamily(2, 0.05), linear_family(3, 0.5), SingleNeuronFamily(2),
                    ReluMixtureFamily(2, 4), ClippedMLP(2, (8, 8), 0.5),
                    ClippedMLP(2, (6,), 0.5, output_bias=True),
                    SpectralMLP(2, (5, 4), [1.5, 1.0, 2.0]),
                    FGanWrapped(QuadraticFamily(2, 0.5), get_pair("pearson")),
                    FGanWrapped(ClippedMLP(2, (6,), 0.5), get_pair("js"))]
        rng = RngStream(2024)
        worst = {"params": 0.0, "input": 0.0, "pathwise": 0.0}
        counts = {"params": 0, "input": 0, "pathwise": 0}
        for fam in families:
            done = 0
            while done < 12:
                theta = fam.random_init(rng)
                X = rng.unit_ball(6, fam.dim)
                rep = grad_check(fam, theta, X)
                if not rep.reliable:  # within a step of a clip face: not interior
                    continue
                worst["params"] = max(worst["params"], rep.max_rel_error)
                gi = fam.grad_input(theta, X)
                num = np.array([central_difference(
                    lambda x: float(fam.eval_batch(theta, x[None])[0]), X[i]) for i in range(len(X))])
                worst["input"] = max(worst["input"], float(relative_errors(gi, num).max()))
                done += 1
            counts["params"] += done
            counts["input"] += done
        gen = Generator(mixture_init())
        for k in range(100):
            z, gx = rng.normal((5, 2)), rng.normal((5, 2))
            if k % 2 == 0:
                model = GaussianModel.from_params(rng.uniform(5) - 0.5)
                fn = lambda t: float(np.sum(GaussianModel.from_params(t).push(z) * gx))
                analytic = model.pathwise_grad(z, gx)
            else:
                model = gen.model(gen.template.params + 0.2 * rng.normal(gen.template.params.size))
                latent = gen.latent(5, rng)
                fn = lambda t: float(np.sum(gen.push(MixtureModel.from_params(t), latent) * gx))
                analytic = gen.pathwise(model, latent, gx)
            num = central_difference(fn, model.params)
            worst["pathwise"] = max(worst["pathwise"], float(relative_errors(analytic, num).max()))
            counts["pathwise"] += 1
        seconds = time.perf_counter() - t0
        ok = (all(v < 1e-4 for v in worst.values()) and all(c >= 100 for c in counts.values())
              and seconds < 60)
        verdict(capsys, 2, "gradient suite", ok, **{f"max_rel_{k}": v for k, v in worst.items()},
                configurations=list(counts.values()), seconds=seconds)

    def test_03_rademacher_rate(self, capsys):
        t0 = time.perf_counter()
        ms = [64, 256, 1024, 4096]
        fam = SingleNeuronFamily(2)
        values, below = [], []
        for m in ms:
            X = RngStream(300 + m).unit_ball(m, 2)
            est = complexity.empirical_rademacher(fam, X, trials=30,
                                                  cfg=OptimizerConfig(restarts=5, steps=200),
                                                  rng=RngStream(7, m))
            values.append(est.value)
            below.append(est.value <= 2 * math.sqrt(2) / math.sqrt(m) + 3 * est.std_error)
        s = slope(ms, values)
        seconds = time.perf_counter() - t0
        verdict(capsys, 3, "Rademacher rate", all(below) and -0.65 <= s <= -0.35 and seconds < 300,
                R_m=values, slope=s, seconds=seconds)

    def test_04_bound_constants(self, capsys):
        c_relu = bounds.relu_constant(INV_E)
        c_par = bounds.parametric_constant(2, 1.0, 1.0, INV_E)
        c_mmd = bounds.mmd_constant(1.0, INV_E)
        R = complexity.spectral_complexity([(2.0, 3.0, 1.0)], W=4).R
        eq18 = complexity.spectral_rademacher_bound(1.0, 1.0, 3.0)
        closed = {"relu": 4 * math.sqrt(2) + 4, "parametric": 32 * math.sqrt(2 * math.pi) + 2 * math.sqrt(2),
                  "mmd": 2 * (2 + math.sqrt(2)), "R": 3 * math.sqrt(math.log(32)), "eq18": 8.0}
        got = {"relu": c_relu, "parametric": c_par, "mmd": c_mmd, "R": R, "eq18": eq18}
        quoted = {"relu": "9.65685", "parametric": "83.0405", "mmd": "6.82843", "R": "5.58486", "eq18": "8"}
        ok = all(abs(got[k] - closed[k]) <= 1e-9 for k in got)
        # quoted figures are roundings; the quoted R differs from its closed form in the 5th digit
        mismatch = [k for k, q in quoted.items()
                    if abs(got[k] - float(q)) > 0.5 * 10.0 ** -len(q.partition(".")[2])]
        verdict(capsys, 4, "bound constants", ok, **got, quoted_value_mismatch=mismatch or "none")

    def test_05_two_sample_decay(self, capsys):
        t0 = time.perf_counter()
        fam = ClippedMLP(2, (16, 16), 0.05)
        truth = e1_truth()
        ms, means = [100, 1000, 10000], []
        for m in ms:
            vals = []
            for r in range(5):
                P = truth.sample(m, RngStream(1000 + r, m))
                Q = truth.sample(m, RngStream(2000 + r, m))
                vals.append(neural_distance(P, Q, fam, OptimizerConfig(restarts=3, steps=200, seed=r)).value)
            means.append(float(np.mean(vals)))
        s = slope(ms, means)
        seconds = time.perf_counter() - t0
        verdict(capsys, 5, "two-sample decay", -0.65 <= s <= -0.35 and seconds < 600,
                d_F=means, slope=s, seconds=seconds)

    def test_06_kl_identity(self, capsys):
        t0 = time.perf_counter()
        rng = RngStream(6)
        zs = []
        for t in range(20):
            p = GaussianModel.from_params(rng.uniform(5) - 0.5)
            q = GaussianModel.from_params(rng.uniform(5) - 0.5)
            est = symmetric_kl(p, q, 5000, rng.substream(t))
            zs.append(abs(est.value - symmetric_kl_closed(p, q)) / est.std_error)
        mu, nu = MultivariateNormal([0.0], [[1.0]]), MultivariateNormal([1.0], [[1.0]])
        closed = symmetric_kl_closed(mu, nu)
        one = symmetric_kl(mu, nu, 20000, RngStream(61))
        seconds = time.perf_counter() - t0
        ok = (max(zs) <= 4 and abs(closed - 1.0) <= 1e-12
              and abs(one.value - 1.0) <= 4 * one.std_error and seconds < 60)
        verdict(capsys, 6, "KL identity", ok, max_z=max(zs), one_d_closed=closed,
                one_d_mc=one.value, one_d_se=one.std_error, seconds=seconds)

    @pytest.mark.slow
    def test_07_e1_reproduction(self, capsys, e1_seed7):
        _, summary, timings = e1_seed7
        rows = {r["method"]: r for r in summary["runs"]}
        mle, qgan, wgan = rows["mle"], rows["qgan"], rows["wgan_clip"]
        mle_mean = GaussianModel.from_params(mle["final_params"]).mean
        mean_err = float(np.max(np.abs(mle_mean - np.array([0.5, -0.5]))))
        arm_seconds = {m: timings[f"{m}_seed7"] for m in rows}
        ok = (mean_err <= 0.02 and qgan["symmetric_kl"] < 0.05
              and abs(qgan["final_test_ll"] - mle["final_test_ll"]) <= 0.05
              and wgan["final_test_ll"] <= qgan["final_test_ll"] + 0.02
              and max(arm_seconds.values()) < 600)
        verdict(capsys, 7, "E1 reproduction", ok, mle_mean_err=mean_err, qgan_kl=qgan["symmetric_kl"],
                qgan_ll=qgan["final_test_ll"], mle_ll=mle["final_test_ll"],
                wgan_ll=wgan["final_test_ll"], arm_seconds=list(arm_seconds.values()))

    @pytest.mark.slow
    def test_08_e2_inconsistency(self, capsys, tmp_path):
        t0 = time.perf_counter()
        summary = run_experiment("e2", None, range(5), outdir=tmp_path, plots=False)
        seconds = time.perf_counter() - t0
        by = {(r["method"], r["seed"]): r for r in summary["runs"]}
        truth = [summary["references"][str(s)]["truth_test_ll"] for s in range(5)]
        mle = [by["mle", s]["final_test_ll"] for s in range(5)]
        wosc = [by["wgan_clip", s]["test_ll_oscillation"] for s in range(5)]
        fosc = [by["flowgan", s]["test_ll_oscillation"] for s in range(5)]
        wgan_ok = sum(by["wgan_clip", s]["test_ll_oscillation"] > 1.0
                      and by["wgan_clip", s]["gan_loss_final_half_mean"]
                      < by["wgan_clip", s]["gan_loss_first_half_mean"] for s in range(5))
        flow_ok = sum(f < w for f, w in zip(fosc, wosc))
        mle_ok = sum(v < 3.50 for v in mle)
        ok = (all(abs(t - 3.60) <= 0.10 for t in truth) and mle_ok >= 3 and wgan_ok >= 3
              and flow_ok >= 3 and seconds < 1800)
        verdict(capsys, 8, "E2 inconsistency", ok, truth_ll=truth, mle_ll=mle, wgan_osc=wosc,
                flowgan_osc=fosc, seeds_mle=mle_ok, seeds_wgan=wgan_ok, seeds_flowgan=flow_ok,
                seconds=seconds)

    def test_09_span_suite(self, capsys):
        t0 = time.perf_counter()
        line = np.linspace(-1, 1, 21)[:, None]
        pm = np.array([[1.0, 0.0], [-1.0, 0.0]])
        norm = span.f_variation_norm(lambda X: np.abs(X[:, 0]), span.relu_dictionary(pm, line)).norm
        grid = np.linspace(-1, 1, 81)[:, None]
        monotone = True
        for seed, g in enumerate([lambda X: np.cos(3 * X[:, 0]), lambda X: np.sin(np.pi * X[:, 0]),
                                  lambda X: np.abs(X[:, 0] - 0.3)]):
            dic = span.random_relu_dictionary(60, 1, RngStream(90 + seed), grid[::2], grid)
            curve = span.error_decay_curve(g, dic, np.geomspace(0.05, 50, 12))
            monotone &= bool(np.all(np.diff(curve.epsilon) <= 0))
        r = np.geomspace(1, 1000, 20)
        kappa_err = max(abs(span.fit_decay_exponent(span.DecayCurve(r, 0.7 * r ** -k)).kappa - k)
                        for k in (0.5, 1.0, 1.5, 2.0, 3.0))
        rng = RngStream(9)
        fam = SingleNeuronFamily(1)
        dirs = rng.unit_sphere(12, 2)
        held, n_inst = 0, 20
        for _ in range(n_inst):
            P = EmpiricalMeasure(rng.uniform((6, 1)) * 2 - 1)
            Q = EmpiricalMeasure(rng.uniform((6, 1)) * 2 - 1)
            w = rng.normal(12)
            g = lambda X, w=w: np.maximum(np.hstack([X, np.ones((len(X), 1))]) @ dirs.T, 0) @ w
            d_F = neural_distance_exact_1d(P, Q, fam).value
            chk = span.moment_bound_check(g, span.relu_dictionary(dirs, line), P, Q, d_F)
            held += chk.lhs <= chk.rhs + 1e-12
        seconds = time.perf_counter() - t0
        ok = (abs(norm - 2.0) <= 1e-12 and monotone and kappa_err <= 0.01 and held == n_inst
              and seconds < 300)
        verdict(capsys, 9, "span suite", ok, abs_norm=norm, decay_nonincreasing=monotone,
                kappa_max_error=kappa_err, moment_inequality=f"{held}/{n_inst}", seconds=seconds)

    def test_10_fdiv_invariants(self, capsys):
        t0 = time.perf_counter()
        rng = RngStream(10)
        core = linear_family(1, 1.0)
        self_zero = True
        for pair in (PEARSON, JENSEN_SHANNON):
            X = EmpiricalMeasure(rng.normal((15, 1)))
            est = neural_f_divergence(X, X, core, pair, grid=True)
            self_zero &= est.value == 0.0 and bool(est.extra["b0_candidate"])
        worst, n_inst = -np.inf, 0
        for k in range(20):
            pair = PEARSON if k % 2 == 0 else JENSEN_SHANNON
            P = EmpiricalMeasure(rng.uniform((12, 1)) * 2 - 1)
            Q = EmpiricalMeasure(rng.uniform((12, 1)) * 1.5 - 0.5)
            fdiv = neural_f_divergence(P, Q, core, pair, grid=True).value
            ipm = neural_distance_exact_1d(P, Q, FGanWrapped(core, pair)).value
            worst = max(worst, fdiv - ipm)
            n_inst += 1
        pearson = neural_f_divergence(delta(0.0), delta(1.0), core, PEARSON, grid=True).value
        seconds = time.perf_counter() - t0
        ok = self_zero and worst <= 1e-12 and abs(pearson - 0.75) <= 1e-9 and seconds < 120
        verdict(capsys, 10, "f-divergence invariants", ok, self_zero=self_zero,
                max_fdiv_minus_ipm=float(worst), instances=n_inst, pearson=pearson, seconds=seconds)

    @pytest.mark.slow
    def test_11_determinism_and_selftest(self, capsys, e1_seed7, tmp_path):
        first, _, _ = e1_seed7
        proc = ipmlab("experiment", "e1", "--seed", 7, "--out", tmp_path / "again")
        names = sorted(p.name for p in first.glob("*.csv"))
        identical = proc.returncode == 0 and bool(names) and all(
            (first / n).read_bytes() == (tmp_path / "again" / n).read_bytes() for n in names)
        st = ipmlab("selftest")
        failed = json.loads(st.stdout)["failed"] if st.stdout else ["no output"]
        verdict(capsys, 11, "determinism and selftest", identical and st.returncode == 0,
                csv_files=len(names), identical=identical, selftest_exit=st.returncode,
                selftest_failed=failed or "none")
