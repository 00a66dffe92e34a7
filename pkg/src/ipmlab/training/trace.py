"""Training traces and their CSV serialization."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import InvariantViolation

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1
CSV_COLUMNS = ("step", "gan_loss", "test_ll", "param_hash")


def fnv1a64(data: bytes) -> int:
    h = FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * FNV_PRIME) & _MASK64
    return h


def param_hash(params) -> str:
    """FNV-1a-64 of the little-endian float64 bytes of ``params``, as 16 hex digits."""
    return f"{fnv1a64(np.ascontiguousarray(params, dtype='<f8').tobytes()):016x}"


@dataclass
class TraceRecord:
    step: int
    gan_loss: float
    test_ll: float
    params: np.ndarray
    gen_loss: float = 0.0
    wgan_component: float = 0.0
    nll_component: float = 0.0
    train_ll: float | None = None


@dataclass
class TrainTrace:
    method: str
    records: list[TraceRecord] = field(default_factory=list)
    config: dict = field(default_factory=dict)
    wall_time: float = 0.0

    def append(self, record: TraceRecord) -> None:
        if self.records and record.step <= self.records[-1].step:
            raise InvariantViolation("trace steps must be strictly increasing")
        self.records.append(record)

    @property
    def steps(self) -> np.ndarray:
        return np.array([r.step for r in self.records])

    @property
    def gan_loss(self) -> np.ndarray:
        return np.array([r.gan_loss for r in self.records])

    @property
    def test_ll(self) -> np.ndarray:
        return np.array([r.test_ll for r in self.records])

    @property
    def train_ll(self) -> np.ndarray:
        return np.array([np.nan if r.train_ll is None else r.train_ll for r in self.records])

    @property
    def final(self) -> TraceRecord:
        return self.records[-1]

    def final_half(self, values: np.ndarray) -> np.ndarray:
        return values[len(values) // 2:]

    def oscillation(self, values: np.ndarray | None = None) -> float:
        """Max minus min over the final half of the records (test LL by default)."""
        v = self.final_half(self.test_ll if values is None else values)
        return float(v.max() - v.min())

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for r in self.records:
                writer.writerow([r.step, repr(float(r.gan_loss)), repr(float(r.test_ll)),
                                 param_hash(r.params)])
        return path

    def summary(self) -> dict:
        f = self.final
        return {"method": self.method, "final_step": f.step, "final_gan_loss": f.gan_loss,
                "final_test_ll": f.test_ll, "test_ll_oscillation": self.oscillation(),
                "final_params": [float(v) for v in f.params]}


def read_trace_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return [{"step": int(row["step"]), "gan_loss": float(row["gan_loss"]),
                 "test_ll": float(row["test_ll"]), "param_hash": row["param_hash"]}
                for row in csv.DictReader(fh)]
