"""The two toy experiments: method x seed grids with trace CSVs, a JSON summary and SVG plots."""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

from ..discriminators import ClippedMLP, FGanWrapped, QuadraticFamily
from ..errors import ConfigurationError
from ..measures import GaussianModel, gaussian_fit_mle, make_benchmark
from ..metrics.conjugates import get_pair
from ..metrics.kl import symmetric_kl_closed
from .loop import LOSS_KINDS, TrainConfig, evaluate_test_ll, gaussian_init, mixture_init, train_gan
from .svg import write_line_chart
from .trace import TrainTrace

ALIASES = {"wgan": "wgan_clip", "fgan": "fgan_js"}
PLOT_FLOOR = -1e6  # display floor for log-likelihood curves


@dataclass(frozen=True)
class ExperimentPreset:
    benchmark: str
    methods: tuple[str, ...]
    init: Callable
    critic_widths: tuple[int, ...]
    config: dict  # TrainConfig defaults for this experiment; user overrides win


EXPERIMENTS = {
    # one hidden layer of 500 clipped ReLUs against the Gaussian;
    # the quadratic critic needs the faster critic step to track the generator
    "e1": ExperimentPreset("gaussian-e1", ("qgan", "wgan_clip", "mle"), gaussian_init, (500,),
                           {"lr_d": 1e-2, "lr_g": 3e-3}),
    # four hidden layers of width 64 against the mixture
    "e2": ExperimentPreset("mixture-e2", ("wgan_clip", "flowgan", "mle"), mixture_init, (64,) * 4,
                           {"lr_d": 1e-3, "lr_g": 1e-2}),
}


def preset_config(name: str, method: str, seed: int, overrides: dict | None = None) -> TrainConfig:
    """Experiment defaults, then ``overrides``, for one method and seed."""
    return TrainConfig(**{**_preset(name).config, **(overrides or {}), "loss": method, "seed": seed})


def resolve_methods(name: str, methods: Sequence[str] | str | None) -> tuple[str, ...]:
    preset = _preset(name)
    if methods is None:
        return preset.methods
    if isinstance(methods, str):
        methods = [m for m in methods.split(",") if m.strip()]
    out = []
    for m in methods:
        m = ALIASES.get(m.strip(), m.strip())
        if m not in LOSS_KINDS:
            raise ConfigurationError(f"unknown method {m!r}; choose from {LOSS_KINDS}")
        if m not in out:
            out.append(m)
    if not out:
        raise ConfigurationError("no methods selected")
    return tuple(out)


def _preset(name: str) -> ExperimentPreset:
    try:
        return EXPERIMENTS[name]
    except KeyError:
        raise ConfigurationError(f"unknown experiment {name!r}; choose from {sorted(EXPERIMENTS)}") from None


def experiment_family(name: str, method: str):
    """Discriminator family used by ``method`` in experiment ``name`` (None for MLE)."""
    preset = _preset(name)
    if method == "mle":
        return None
    if method == "qgan":
        return QuadraticFamily(2, 0.05)
    core = ClippedMLP(2, preset.critic_widths, 0.05)
    return FGanWrapped(core, get_pair("js")) if method == "fgan_js" else core


def trace_filename(name: str, method: str, seed: int) -> str:
    return f"{name}_{method}_seed{seed}.csv"


def _run_one(job) -> tuple[str, int, TrainTrace]:
    name, method, seed, overrides = job
    preset = _preset(name)
    data = make_benchmark(preset.benchmark, seed)
    cfg = preset_config(name, method, seed, overrides)
    return method, seed, train_gan(preset.init(), experiment_family(name, method), data, cfg)


def worker_count(n_jobs: int) -> int:
    env = os.environ.get("IPMLAB_THREADS")
    cap = int(env) if env else (os.cpu_count() or 1)
    if cap < 1:
        raise ConfigurationError("IPMLAB_THREADS must be >= 1")
    return max(1, min(cap, n_jobs))


def run_experiment(name: str, methods: Sequence[str] | str | None = None,
                   seeds: Sequence[int] = (0,), overrides: dict | None = None,
                   outdir=None, plots: bool = True) -> dict:
    """Run every method x seed; write traces, ``summary.json`` and plots into ``outdir``.

    Runs go to a process pool capped by ``IPMLAB_THREADS``; each run is
    sequential and fully seeded, so files do not depend on the worker count.
    """
    preset = _preset(name)
    methods = resolve_methods(name, methods)
    seeds = [int(s) for s in seeds]
    overrides = dict(overrides or {})
    for key in ("loss", "seed"):
        overrides.pop(key, None)
    base_cfg = preset_config(name, methods[0], 0, overrides)  # validates the overrides once
    jobs = [(name, m, s, overrides) for s in seeds for m in methods]
    workers = worker_count(len(jobs))
    if workers == 1:
        results = [_run_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, jobs))

    out = Path(outdir) if outdir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)

    runs, references, truths = [], {}, {}
    for seed in seeds:
        data = make_benchmark(preset.benchmark, seed)
        truths[seed] = data.truth
        ref = {"truth_test_ll": evaluate_test_ll(data.truth, data.test)}
        if isinstance(data.truth, GaussianModel):
            ref["mle_closed_form_test_ll"] = evaluate_test_ll(gaussian_fit_mle(data.train), data.test)
        references[str(seed)] = ref
    for method, seed, trace in results:
        g = trace.gan_loss
        half = len(g) // 2
        row = {"method": method, "seed": seed, "final_step": trace.final.step,
               "final_gan_loss": float(trace.final.gan_loss),
               "final_test_ll": float(trace.final.test_ll),
               "test_ll_oscillation": trace.oscillation(),
               "gan_loss_first_half_mean": float(g[:half].mean()) if half else float(g.mean()),
               "gan_loss_final_half_mean": float(g[half:].mean()),
               "final_params": [float(v) for v in trace.final.params]}
        if isinstance(truths[seed], GaussianModel):
            row["symmetric_kl"] = symmetric_kl_closed(truths[seed],
                                                      GaussianModel.from_params(trace.final.params))
        if out is not None:
            row["trace_csv"] = trace_filename(name, method, seed)
            trace.to_csv(out / row["trace_csv"])
        runs.append(row)

    summary = {"experiment": name, "benchmark": preset.benchmark, "methods": list(methods),
               "seeds": seeds, "config": {k: v for k, v in base_cfg.to_dict().items()
                                          if k not in ("loss", "seed")},
               "critic_widths": list(preset.critic_widths),
               "references": references, "runs": runs}
    if out is not None:
        if plots:
            summary["plots"] = _write_plots(out, name, seeds, results)
        (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
        # wall times vary run to run, so they stay out of the summary
        timings = {f"{m}_seed{s}": t.wall_time for m, s, t in results}
        (out / "timings.json").write_text(json.dumps(timings, indent=2, sort_keys=True) + "\n")
    return summary


def _write_plots(out: Path, name: str, seeds, results) -> list[str]:
    files = []
    for seed in seeds:
        mine = [(m, t) for m, s, t in results if s == seed]
        ll = {m: (t.steps, t.test_ll) for m, t in mine}
        gan = {m: (t.steps, -t.gan_loss) for m, t in mine if m != "mle"}
        f = f"{name}_seed{seed}_test_ll.svg"
        write_line_chart(out / f, ll, "step", "test_ll", f"{name} seed {seed}", clip_below=PLOT_FLOOR)
        files.append(f)
        if gan:
            f = f"{name}_seed{seed}_neg_gan_loss.svg"
            write_line_chart(out / f, gan, "step", "negative gan_loss", f"{name} seed {seed}")
            files.append(f)
    return files


def arm_statistics(summary: dict, method: str) -> dict[int, dict]:
    """Per-seed rows of one method from a summary."""
    return {r["seed"]: r for r in summary["runs"] if r["method"] == method}

