from .experiment import EXPERIMENTS, experiment_family, preset_config, resolve_methods, run_experiment
from .loop import (LOSS_KINDS, Generator, TrainConfig, evaluate_test_ll, gaussian_init,
                   mixture_init, train_gan, train_mle)
from .svg import line_chart, write_line_chart
from .trace import TraceRecord, TrainTrace, fnv1a64, param_hash, read_trace_csv

__all__ = [
    "EXPERIMENTS", "experiment_family", "preset_config", "resolve_methods", "run_experiment",
    "LOSS_KINDS", "Generator", "TrainConfig", "evaluate_test_ll", "gaussian_init",
    "mixture_init", "train_gan", "train_mle",
    "line_chart", "write_line_chart",
    "TraceRecord", "TrainTrace", "fnv1a64", "param_hash", "read_trace_csv",
]
