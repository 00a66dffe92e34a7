"""Command-line entry point: ``ipmlab <subcommand> ...``.

Every subcommand prints one JSON document on stdout (``--json-out`` also
writes it to a file).  A config file given by ``--config`` holds one section
per subcommand with ``key = value`` lines, keys named like the long flags;
flags on the command line override file values.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import inspect
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import bounds, complexity, span
from .discriminators import family_from_config
from .errors import ConfigurationError, InvariantViolation, IpmlabError, UsageError
from .measures import (EmpiricalMeasure, MultivariateNormal, delta, make_benchmark,
                       read_samples_csv)
from .metrics import (OptimizerConfig, bl_distance, get_pair, mmd, neural_distance,
                      neural_distance_exact_1d, neural_f_divergence, symmetric_kl,
                      symmetric_kl_closed, w1_distance)
from .numerics import RngStream
from .training import (EXPERIMENTS, experiment_family, preset_config, resolve_methods,
                       run_experiment, train_gan)

TRAIN_FIELDS = ("steps", "batch_size", "n_critic", "lr_d", "lr_g", "rule", "flowgan_lambda",
                "eval_every", "critic_init")

TARGETS = {
    "abs": lambda X: np.abs(X[:, 0]),
    "linear": lambda X: X[:, 0],
    "cos3": lambda X: np.cos(3.0 * X[:, 0]),
    "sin_pi": lambda X: np.sin(np.pi * X[:, 0]),
    "square": lambda X: X[:, 0] ** 2,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# --------------------------------------------------------------------------- #
# JSON output


def to_jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return to_jsonable(obj.to_dict() if hasattr(obj, "to_dict") else dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def emit(doc: dict, args) -> None:
    text = json.dumps(to_jsonable(doc), indent=2, sort_keys=True)
    if getattr(args, "json_out", None):
        Path(args.json_out).write_text(text + "\n")
    print(text)


# --------------------------------------------------------------------------- #
# argument helpers


def load_source(source: str, n: int | None = None) -> EmpiricalMeasure:
    """``path.csv``, ``bench:<name>[:train|test[:seed]]`` or ``delta:x1[,x2...]``."""
    if source.startswith("bench:"):
        parts = source.split(":")[1:]
        split = parts[1] if len(parts) > 1 else "train"
        seed = int(parts[2]) if len(parts) > 2 else 0
        if split not in ("train", "test"):
            raise UsageError(f"benchmark split must be train or test, got {split!r}")
        sample = getattr(make_benchmark(parts[0], seed), split)
    elif source.startswith("delta:"):
        sample = delta(*[float(v) for v in source[6:].split(",")])
    else:
        path = Path(source)
        if not path.is_file():
            raise UsageError(f"sample file not found: {source}")
        sample = read_samples_csv(path)
    if n is not None:
        if n < 1 or n > sample.n:
            raise UsageError(f"--n must lie in [1, {sample.n}]")
        sample = EmpiricalMeasure(sample.points[:n])
    return sample


def float_list(text: str) -> list[float]:
    text = text.strip()
    if text.startswith("geom:"):
        lo, hi, k = text[5:].split(",")
        return [float(v) for v in np.geomspace(float(lo), float(hi), int(k))]
    return [float(v) for v in text.split(",") if v.strip()]


def int_list(text: str) -> list[int]:
    return [int(v) for v in text.replace(" ", "").split(",") if v]


def boolean(text) -> bool:
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigurationError(f"not a boolean: {text!r}")


def _optimizer(args) -> OptimizerConfig:
    return OptimizerConfig(restarts=args.restarts, steps=args.ascent_steps,
                           step_size=args.step_size, seed=args.seed)


def _family(args, dim: int):
    cfg = {"kind": args.family, "dim": dim}
    for key in ("widths", "clip", "n_neurons", "degree"):
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return family_from_config(cfg)


def _add_family_args(p, default="single_neuron"):
    p.add_argument("--family", default=default,
                   help="single_neuron, relu_mixture, quadratic, clipped_mlp or spectral_mlp")
    p.add_argument("--widths", help="hidden widths, e.g. 64,64")
    p.add_argument("--clip", type=float)
    p.add_argument("--n-neurons", type=int)
    p.add_argument("--degree", type=int)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--ascent-steps", type=int, default=500)
    p.add_argument("--step-size", type=float, default=1e-2)


def _add_train_args(p):
    p.add_argument("--steps", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--n-critic", type=int)
    p.add_argument("--lr-d", type=float)
    p.add_argument("--lr-g", type=float)
    p.add_argument("--rule")
    p.add_argument("--flowgan-lambda", type=float)
    p.add_argument("--eval-every", type=int)
    p.add_argument("--critic-init")


def _train_overrides(args) -> dict:
    return {k: getattr(args, k) for k in TRAIN_FIELDS if getattr(args, k, None) is not None}


# --------------------------------------------------------------------------- #
# subcommands


def cmd_metric(args) -> int:
    P, Q = load_source(args.source_a, args.n), load_source(args.source_b, args.n)
    kind = args.kind
    if kind == "symkl":
        est = _symkl(P, Q, args)
    elif kind == "mmd":
        est = mmd(P, Q, args.bandwidth, unbiased=args.unbiased)
    elif kind == "bl":
        est = bl_distance(P, Q, args.solver)
    elif kind == "w1":
        est = w1_distance(P, Q, args.solver)
    elif kind == "neural":
        fam = _family(args, P.dim)
        est = (neural_distance_exact_1d(P, Q, fam) if args.grid
               else neural_distance(P, Q, fam, _optimizer(args)))
    else:  # fdiv
        fam = _family(args, P.dim)
        est = neural_f_divergence(P, Q, fam, get_pair(args.pair), _optimizer(args), grid=args.grid)
    doc = est.to_dict() if hasattr(est, "to_dict") else dict(est)
    doc.update({"metric": kind, "source_a": args.source_a, "source_b": args.source_b,
                "n_a": P.n, "n_b": Q.n})
    emit(doc, args)
    return 0


def _fit_normal(sample: EmpiricalMeasure) -> MultivariateNormal:
    cov = np.atleast_2d(np.cov(sample.points.T, aweights=sample.weights, bias=True))
    return MultivariateNormal(sample.weights @ sample.points, cov)


def _symkl(P, Q, args) -> dict:
    mu, nu = _fit_normal(P), _fit_normal(Q)
    est = symmetric_kl(mu, nu, args.draws, RngStream(args.seed))
    doc = est.to_dict()
    doc["closed_form"] = symmetric_kl_closed(mu, nu)
    doc["fitted"] = {"a": {"mean": mu.mean, "cov": mu.cov}, "b": {"mean": nu.mean, "cov": nu.cov}}
    return doc


def cmd_rademacher(args) -> int:
    if args.mode == "analytic":
        if args.m is None:
            raise UsageError("analytic mode needs --m")
        value = complexity.rademacher_bound_analytic(args.kind, args.m, C_k=args.C_k, d=args.d)
        emit({"mode": "analytic", "kind": args.kind, "m": args.m, "value": value}, args)
        return 0
    if args.source is None:
        raise UsageError("empirical mode needs a sample source")
    X = load_source(args.source, args.m)
    est = complexity.empirical_rademacher(_family(args, X.dim), X.points, trials=args.trials,
                                          cfg=_optimizer(args), rng=RngStream(args.seed))
    doc = {"mode": "empirical", "family": args.family, "m": X.n, "trials": args.trials}
    doc.update(to_jsonable(est))
    emit(doc, args)
    return 0


def cmd_spectral(args) -> int:
    layers = []
    for item in args.layers.split(","):
        parts = [float(v) for v in item.split(":")]
        if len(parts) not in (2, 3):
            raise UsageError(f"layer {item!r} must be s:b or s:b:rho")
        layers.append(tuple(parts))
    rep = complexity.spectral_complexity(layers, args.W)
    doc = rep.to_dict()
    if args.x_frobenius is not None and args.m is not None:
        doc["x_frobenius"], doc["m"] = args.x_frobenius, args.m
        doc["rademacher_bound"] = complexity.spectral_rademacher_bound(args.x_frobenius, rep.R, args.m)
    emit(doc, args)
    return 0


BOUND_ARGS = ("R_m", "Delta", "delta", "m", "eps", "modeling_error", "p", "L", "C_k", "Lambda",
              "inf_kl", "x_frobenius", "R")


def cmd_bound(args) -> int:
    fn = bounds.FORMULAS[args.tag]
    kwargs = {}
    for name, param in inspect.signature(fn).parameters.items():
        value = getattr(args, name, None)
        if value is None:
            if param.default is inspect.Parameter.empty:
                raise UsageError(f"bound {args.tag} needs --{name.replace('_', '-')}")
            continue
        kwargs[name] = int(value) if name == "p" else value
    rep = fn(**kwargs)
    doc = rep.to_dict()
    if args.tag == "relu":
        doc["C"] = bounds.relu_constant(rep.inputs["delta"])
    elif args.tag == "mmd":
        doc["C"] = bounds.mmd_constant(rep.inputs["C_k"], rep.inputs["delta"])
    elif args.tag == "parametric":
        x = rep.inputs
        doc["C"] = bounds.parametric_constant(x["p"], x["L"], x["Delta"], x["delta"])
    doc["recomputed_total"] = bounds.recompute_total(rep)
    emit(doc, args)
    return 0


def _dictionary(args):
    grid = span.unit_ball_grid(args.dim, args.grid_size)
    anchors = span.unit_ball_grid(args.dim, args.anchors)
    if args.dictionary == "pm_relu":
        if args.dim != 1:
            raise UsageError("pm_relu dictionary is one-dimensional")
        return span.relu_dictionary(np.array([[1.0, 0.0], [-1.0, 0.0]]), anchors, grid)
    if args.dictionary == "random_relu":
        return span.random_relu_dictionary(args.n_neurons, args.dim, RngStream(args.seed), anchors, grid)
    if args.dictionary == "monomial":
        return span.monomial_dictionary(args.dim, args.degree, anchors, grid)
    raise UsageError(f"unknown dictionary {args.dictionary!r}")


def cmd_span(args) -> int:
    g = TARGETS[args.target]
    doc = {"mode": args.mode, "target": args.target, "dim": args.dim}
    if args.mode == "norm":
        dec = span.f_variation_norm(g, _dictionary(args), args.solver)
        doc.update({"norm": dec.norm, "w0": dec.w0, "weights": dec.weights, "exact": dec.exact,
                    "anchor_restricted": dec.anchor_restricted})
    elif args.mode == "decay":
        curve = span.error_decay_curve(g, _dictionary(args), float_list(args.r_grid), args.solver)
        doc.update({"r": curve.r, "epsilon": curve.epsilon})
        try:
            fit = span.fit_decay_exponent(curve)
            doc["fit"] = to_jsonable(fit)
        except UsageError as exc:
            doc["fit"] = {"error": str(exc)}
        if args.csv_out:
            curve.to_csv(args.csv_out)
    else:
        grid = span.unit_ball_grid(args.dim, args.grid_size)
        table = span.span_density_check(g, grid, int_list(args.n_grid), RngStream(args.seed))
        doc.update({"n": table.n, "error": table.error})
        if args.csv_out:
            table.to_csv(args.csv_out)
    emit(doc, args)
    return 0


def cmd_train(args) -> int:
    name = {"gaussian-e1": "e1", "mixture-e2": "e2"}.get(args.benchmark, args.benchmark)
    if name not in EXPERIMENTS:
        raise UsageError(f"unknown benchmark {args.benchmark!r}")
    method = resolve_methods(name, [args.loss])[0]
    cfg = preset_config(name, method, args.seed, _train_overrides(args))
    data = make_benchmark(EXPERIMENTS[name].benchmark, args.seed)
    trace = train_gan(EXPERIMENTS[name].init(), experiment_family(name, method), data, cfg)
    doc = trace.summary()
    doc.update({"benchmark": data.name, "seed": args.seed, "config": cfg.to_dict()})
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        doc["trace_csv"] = f"{name}_{method}_seed{args.seed}.csv"
        trace.to_csv(out / doc["trace_csv"])
    emit(doc, args)
    return 0


def cmd_experiment(args) -> int:
    seeds = int_list(args.seeds) if args.seeds else [args.seed]
    out = args.out or f"ipmlab_{args.name}"
    summary = run_experiment(args.name, args.methods, seeds, _train_overrides(args), out,
                             plots=not args.no_plots)
    summary["outdir"] = str(out)
    emit(summary, args)
    return 0


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    results = run_selftest(full=args.full, names=args.only.split(",") if args.only else None)
    failed = [r.name for r in results if not r.passed]
    emit({"passed": not failed, "n_checks": len(results), "failed": failed,
          "checks": [r.to_dict() for r in results]}, args)
    return 1 if failed else 0


# --------------------------------------------------------------------------- #
# parser


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="config file (sections per subcommand)")
    common.add_argument("--json-out", default=argparse.SUPPRESS, help="also write the JSON here")

    parser = _Parser(prog="ipmlab", description="Neural-distance estimation and GAN toy experiments.",
                     parents=[common])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("metric", parents=[common], help="distance between two sample sources")
    p.add_argument("kind", choices=("neural", "mmd", "bl", "w1", "symkl", "fdiv"))
    p.add_argument("source_a")
    p.add_argument("source_b")
    p.add_argument("--n", type=int, help="use only the first n points of each source")
    p.add_argument("--bandwidth", type=float, default=1.0)
    p.add_argument("--unbiased", action="store_true")
    p.add_argument("--solver", default="auto")
    p.add_argument("--pair", default="pearson", help="f-divergence conjugate pair: pearson or js")
    p.add_argument("--grid", action="store_true", help="exhaustive grid for 1-d families")
    p.add_argument("--draws", type=int, default=20000, help="Monte Carlo draws for symkl")
    p.add_argument("--seed", type=int, default=0)
    _add_family_args(p)
    p.set_defaults(func=cmd_metric)

    p = sub.add_parser("rademacher", parents=[common], help="Rademacher complexity")
    p.add_argument("mode", choices=("empirical", "analytic"))
    p.add_argument("source", nargs="?")
    p.add_argument("--m", type=int)
    p.add_argument("--kind", default="relu_neuron")
    p.add_argument("--C-k", dest="C_k", type=float)
    p.add_argument("--d", type=int)
    p.add_argument("--trials", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    _add_family_args(p)
    p.set_defaults(func=cmd_rademacher)

    p = sub.add_parser("spectral", parents=[common], help="spectral complexity R")
    p.add_argument("--layers", required=True, help="comma list of s:b[:rho]")
    p.add_argument("--W", type=int, required=True)
    p.add_argument("--x-frobenius", type=float)
    p.add_argument("--m", type=float)
    p.set_defaults(func=cmd_spectral)

    p = sub.add_parser("bound", parents=[common], help="generalization bound report")
    p.add_argument("tag", choices=sorted(bounds.FORMULAS))
    for name in BOUND_ARGS:
        p.add_argument("--" + name.replace("_", "-"), dest=name, type=float)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("span", parents=[common], help="span and approximation diagnostics")
    p.add_argument("mode", choices=("norm", "decay", "density"))
    p.add_argument("--target", choices=sorted(TARGETS), default="abs")
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--dictionary", default="pm_relu", help="pm_relu, random_relu or monomial")
    p.add_argument("--n-neurons", type=int, default=200)
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--anchors", type=int, default=21, help="anchor points per axis")
    p.add_argument("--grid-size", type=int, default=81, help="evaluation points per axis")
    p.add_argument("--r-grid", default="geom:0.05,50,12")
    p.add_argument("--n-grid", default="8,32,128,512")
    p.add_argument("--solver", default="auto")
    p.add_argument("--csv-out")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_span)

    p = sub.add_parser("train", parents=[common], help="one training run")
    p.add_argument("--benchmark", default="e1", help="e1 (gaussian-e1) or e2 (mixture-e2)")
    p.add_argument("--loss", default="wgan_clip")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="directory for the trace CSV")
    _add_train_args(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("experiment", parents=[common], help="method x seed experiment grid")
    p.add_argument("name", choices=sorted(EXPERIMENTS))
    p.add_argument("--methods", help="comma list; defaults to the experiment's methods")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seeds", help="comma list of seeds; overrides --seed")
    p.add_argument("--out", help="output directory (default ipmlab_<name>)")
    p.add_argument("--no-plots", action="store_true")
    _add_train_args(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("selftest", parents=[common], help="run the oracle checks")
    p.add_argument("--full", action="store_true", help="include the training reproductions")
    p.add_argument("--only", help="comma list of check names")
    p.set_defaults(func=cmd_selftest)
    return parser


def _apply_config(parser, args, argv):
    cp = configparser.ConfigParser()
    path = Path(args.config)
    if not path.is_file():
        raise UsageError(f"config file not found: {args.config}")
    try:
        cp.read(path)
    except configparser.Error as exc:
        raise ConfigurationError(f"{path}: {exc}") from None
    if not cp.has_section(args.command):
        return args
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    actions = {a.dest: a for a in subparser._actions if a.option_strings}
    defaults = {}
    for key, value in cp.items(args.command):
        dest = key.replace("-", "_")
        if dest not in actions or dest in ("config", "json_out", "help"):
            raise ConfigurationError(f"{path}: unknown key {key!r} in [{args.command}]")
        action = actions[dest]
        defaults[dest] = boolean(value) if isinstance(action, argparse._StoreTrueAction) else value
    subparser.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        if getattr(args, "config", None):
            args = _apply_config(parser, args, argv)
        return args.func(args)
    except InvariantViolation as exc:
        print(f"ipmlab: internal invariant violated: {exc}", file=sys.stderr)
        return 2
    except (IpmlabError, ValueError, OSError) as exc:
        print(f"ipmlab: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
