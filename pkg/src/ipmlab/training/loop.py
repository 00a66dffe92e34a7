"""Alternating adversarial training, direct MLE and FlowGAN on 2-d generators.

A run is strictly sequential.  All randomness comes from named substreams of
``RngStream(seed, TRAIN_STREAM)`` so a configuration and seed fix every bit
of the trace.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, replace

import numpy as np

from ..discriminators import DiscriminatorFamily, FGanWrapped, QuadraticFamily
from ..errors import ConfigurationError
from ..measures import DatasetSplit, EmpiricalMeasure, GaussianModel, MixtureModel
from ..metrics.conjugates import ConjugatePair, get_pair
from ..numerics.rng import RngStream
from .trace import TraceRecord, TrainTrace

LOSS_KINDS = ("wgan_clip", "qgan", "fgan_js", "mle", "flowgan")
TRAIN_STREAM = 0x7121
EVAL_SIZE = 1000  # fixed fake batch and train subset used by records

# substream ids
_S_CRITIC_INIT, _S_REAL, _S_CRITIC_Z, _S_GEN_Z, _S_NLL, _S_EVAL = range(6)


@dataclass(frozen=True)
class TrainConfig:
    loss: str = "wgan_clip"
    batch_size: int = 256
    steps: int = 2000
    n_critic: int = 5
    lr_d: float = 1e-3
    lr_g: float = 1e-3
    rule: str = "rmsprop"
    flowgan_lambda: float = 1.0
    eval_every: int = 10
    seed: int = 0
    critic_init: str = "uniform"  # "uniform" | "zero"
    rho: float = 0.9
    eps: float = 1e-8

    def __post_init__(self):
        if self.loss not in LOSS_KINDS:
            raise ConfigurationError(f"unknown loss {self.loss!r}; choose from {LOSS_KINDS}")
        if self.batch_size < 2:
            raise ConfigurationError("batch size must be >= 2")
        if self.n_critic < 1 or self.steps < 0 or self.eval_every < 1:
            raise ConfigurationError("n_critic and eval_every must be >= 1, steps >= 0")
        if self.flowgan_lambda < 0:
            raise ConfigurationError("flowgan lambda must be >= 0")
        if not (self.lr_d > 0 and self.lr_g > 0):
            raise ConfigurationError("step sizes must be positive")
        if self.rule not in ("constant", "rmsprop"):
            raise ConfigurationError(f"unknown step-size rule {self.rule!r}")
        if self.critic_init not in ("uniform", "zero"):
            raise ConfigurationError(f"unknown critic init {self.critic_init!r}")

    def with_overrides(self, **kw) -> "TrainConfig":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        return asdict(self)


class _Stepper:
    """Constant or RMSprop-style update for one parameter vector."""

    def __init__(self, size: int, lr: float, cfg: TrainConfig):
        self.lr, self.rule, self.rho, self.eps = lr, cfg.rule, cfg.rho, cfg.eps
        self.acc = np.zeros(size)

    def direction(self, g: np.ndarray) -> np.ndarray:
        if self.rule == "rmsprop":
            self.acc = self.rho * self.acc + (1.0 - self.rho) * g * g
            return self.lr * g / (np.sqrt(self.acc) + self.eps)
        return self.lr * g


class Generator:
    """Uniform interface over the Gaussian and mixture models: latents, push, pathwise gradient."""

    def __init__(self, template: GaussianModel | MixtureModel):
        self.template = template
        self.mixture = isinstance(template, MixtureModel)

    def model(self, params) -> GaussianModel | MixtureModel:
        return type(self.template).from_params(params)

    def latent(self, n: int, rng: RngStream):
        if self.mixture:
            return self.template.sample_latent(n, rng)
        return rng.normal((n, 2))

    def push(self, model, latent) -> np.ndarray:
        return model.push(*latent) if self.mixture else model.push(latent)

    def pathwise(self, model, latent, gx) -> np.ndarray:
        return model.pathwise_grad(*latent, gx) if self.mixture else model.pathwise_grad(latent, gx)


def evaluate_test_ll(model, test: EmpiricalMeasure) -> float:
    """Mean log-density over the test points, in nats."""
    return float(test.weights @ np.asarray(model.log_density(test.points)))


def _train_subset_ll(model, points: np.ndarray) -> float:
    return float(np.mean(model.log_density(points)))


def _check_family(kind: str, family, pair):
    if kind == "mle":
        return None
    if family is None:
        raise ConfigurationError(f"{kind} needs a discriminator family")
    if kind == "qgan" and not isinstance(family, QuadraticFamily):
        raise ConfigurationError("qgan requires the quadratic discriminator family")
    if kind == "fgan_js":
        pair = pair or get_pair("js")
        pair.validate()
        return family if isinstance(family, FGanWrapped) else FGanWrapped(family, pair)
    if isinstance(family, FGanWrapped):
        raise ConfigurationError(f"{kind} uses a raw critic, not an f-GAN wrapped family")
    return family


class _Objective:
    """Critic objective ``E_real f - E_fake f [- E_fake psi*(f)]`` and its input weights."""

    def __init__(self, pair: ConjugatePair | None):
        self.pair = pair

    def value(self, f_real, f_fake) -> float:
        v = f_real.mean() - f_fake.mean()
        if self.pair is not None:
            v -= self.pair.psi_star(f_fake).mean()
        return float(v)

    def fake_weight(self, f_fake) -> np.ndarray:
        """d objective / d f(fake_i)."""
        n = f_fake.size
        if self.pair is None:
            return np.full(n, -1.0 / n)
        return -(1.0 + self.pair.psi_star_grad(f_fake)) / n


def train_gan(init, family: DiscriminatorFamily | None, data: DatasetSplit,
              cfg: TrainConfig, pair: ConjugatePair | None = None) -> TrainTrace:
    """Alternate ``n_critic`` projected critic ascent steps with one generator descent step."""
    if cfg.loss == "mle":
        return train_mle(init, data, cfg)
    family = _check_family(cfg.loss, family, pair)
    fpair = family.pair if isinstance(family, FGanWrapped) else None
    objective = _Objective(fpair)
    gen = Generator(init)
    flow_lambda = cfg.flowgan_lambda if cfg.loss == "flowgan" else 0.0

    root = RngStream(cfg.seed, TRAIN_STREAM)
    streams = {k: root.substream(k) for k in range(6)}
    eval_latent = gen.latent(EVAL_SIZE, streams[_S_EVAL])

    theta_d = (np.zeros(family.n_params) if cfg.critic_init == "zero"
               else family.project(family.random_init(streams[_S_CRITIC_INIT])))
    params = np.asarray(init.params, dtype=np.float64).copy()
    d_step = _Stepper(theta_d.size, cfg.lr_d, cfg)
    g_step = _Stepper(params.size, cfg.lr_g, cfg)
    train_pts = data.train.points
    n_train = train_pts.shape[0]
    train_subset = train_pts[:EVAL_SIZE]

    trace = TrainTrace(cfg.loss, config=cfg.to_dict())
    t0 = time.perf_counter()

    def record(step, model):
        fake = gen.push(model, eval_latent)
        f_test = family.eval_batch(theta_d, data.test.points)
        f_fake = family.eval_batch(theta_d, fake)
        gan = objective.value(f_test, f_fake)
        test_ll = evaluate_test_ll(model, data.test)
        wgan_part = -float(f_fake.mean())
        nll_part = -test_ll
        trace.append(TraceRecord(step, gan, test_ll, params.copy(),
                                 gen_loss=wgan_part + flow_lambda * nll_part,
                                 wgan_component=wgan_part, nll_component=nll_part,
                                 train_ll=_train_subset_ll(model, train_subset)))

    model = gen.model(params)
    record(0, model)
    for step in range(1, cfg.steps + 1):
        for _ in range(cfg.n_critic):
            real = train_pts[streams[_S_REAL].integers(n_train, cfg.batch_size)]
            fake = gen.push(model, gen.latent(cfg.batch_size, streams[_S_CRITIC_Z]))
            X = np.vstack([real, fake])
            f_fake = family.eval_batch(theta_d, fake)
            coeffs = np.concatenate([np.full(cfg.batch_size, 1.0 / cfg.batch_size),
                                     objective.fake_weight(f_fake)])
            _, grad = family.value_and_grad(theta_d, X, coeffs)
            theta_d = family.project(theta_d + d_step.direction(grad))

        latent = gen.latent(cfg.batch_size, streams[_S_GEN_Z])
        fake = gen.push(model, latent)
        f_fake = family.eval_batch(theta_d, fake)
        # the generator minimizes the critic objective; only the fake term depends on it
        gx = objective.fake_weight(f_fake)[:, None] * family.grad_input(theta_d, fake)
        grad = gen.pathwise(model, latent, gx)
        if flow_lambda > 0.0:
            real = train_pts[streams[_S_NLL].integers(n_train, cfg.batch_size)]
            grad = grad - flow_lambda * model.grad_log_density(real).mean(axis=0)
        params = params - g_step.direction(grad)
        model = gen.model(params)
        if step % cfg.eval_every == 0 or step == cfg.steps:
            record(step, model)
    trace.wall_time = time.perf_counter() - t0
    return trace


def train_mle(init, data: DatasetSplit, cfg: TrainConfig) -> TrainTrace:
    """Stochastic ascent on the mean training log-likelihood."""
    cfg = cfg if cfg.loss == "mle" else cfg.with_overrides(loss="mle")
    root = RngStream(cfg.seed, TRAIN_STREAM)
    batches = root.substream(_S_REAL)
    params = np.asarray(init.params, dtype=np.float64).copy()
    stepper = _Stepper(params.size, cfg.lr_g, cfg)
    gen = Generator(init)
    train_pts = data.train.points
    n_train = train_pts.shape[0]
    train_subset = train_pts[:EVAL_SIZE]
    trace = TrainTrace("mle", config=cfg.to_dict())
    t0 = time.perf_counter()

    def record(step, model):
        ll = evaluate_test_ll(model, data.test)
        trace.append(TraceRecord(step, 0.0, ll, params.copy(), nll_component=-ll,
                                 train_ll=_train_subset_ll(model, train_subset)))

    model = gen.model(params)
    record(0, model)
    for step in range(1, cfg.steps + 1):
        batch = train_pts[batches.integers(n_train, cfg.batch_size)]
        grad = model.grad_log_density(batch).mean(axis=0)
        params = params + stepper.direction(grad)
        model = gen.model(params)
        if step % cfg.eval_every == 0 or step == cfg.steps:
            record(step, model)
    trace.wall_time = time.perf_counter() - t0
    return trace


# --------------------------------------------------------------------------- #
# initializations


def gaussian_init() -> GaussianModel:
    return GaussianModel(0.0, (0.0, 0.0), (0.0, 0.0))


def mixture_init(radius: float = 0.5, log_scale: float = -2.0, k: int = 8) -> MixtureModel:
    comps = []
    for j in range(k):
        angle = 2.0 * math.pi * j / k + math.pi / k
        comps.append(GaussianModel(0.0, (log_scale, log_scale),
                                   (radius * math.cos(angle), radius * math.sin(angle))))
    return MixtureModel(tuple(comps))
