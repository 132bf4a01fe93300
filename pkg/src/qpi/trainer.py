"""Domain sampling and the Adam training loop."""

import time
from dataclasses import dataclass, field

import numpy as np

from .catalog import NODAL_EPSILON
from .errors import ConfigError, DivergenceError, SamplingError
from .io import write_csv
from .losses import Objective


@dataclass
class TrainConfig:
    epochs: int = 500
    batch_size: int = 32
    learning_rate: float = 1e-3
    dataset_size: int = 2500
    seed: int = 0
    betas: tuple = (0.9, 0.999)
    eps: float = 1e-8

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.batch_size < 1 or self.dataset_size < self.batch_size:
            raise ConfigError("need 1 <= batch_size <= dataset_size")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")


@dataclass
class TrainingHistory:
    losses: list = field(default_factory=list)
    seconds: list = field(default_factory=list)
    checksum: str = ""

    def to_csv(self, path):
        write_csv(path, ["epoch", "loss", "seconds"], [(i + 1, l, s) for i, (l, s) in enumerate(zip(self.losses, self.seconds))])


def seed_streams(seed):
    """Independent generators for (initialisation, data, shuffling)."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(3)]


def sample_domain(system, n, rng, max_rejections=None):
    """``n`` uniform points of the system domain, avoiding nodes of |psi|.

    Returns an array of shape (n, number of coordinates).
    """
    if n < 1:
        raise ConfigError("need at least one sample")
    lo = np.array([a for a, _ in system.domain])
    hi = np.array([b for _, b in system.domain])
    limit = 1000 * n if max_rejections is None else max_rejections
    kept, have, rejected = [], 0, 0
    while have < n:
        cand = rng.uniform(lo, hi, size=(n - have, len(lo)))
        if system.has_amplitude:
            ok = np.abs(system.amplitude(cand)) >= NODAL_EPSILON
            cand = cand[ok]
            rejected += int(np.count_nonzero(~ok))
            if rejected > limit:
                raise SamplingError(f"{rejected} nodal rejections while sampling {system.id}")
        kept.append(cand)
        have += len(cand)
    return np.concatenate(kept)[:n]


class Adam:
    def __init__(self, size, lr=1e-3, betas=(0.9, 0.999), eps=1e-8):
        self.lr, self.b1, self.b2, self.eps = lr, betas[0], betas[1], eps
        self.m = np.zeros(size)
        self.v = np.zeros(size)
        self.t = 0

    def step(self, params, grad):
        """In-place update of ``params``."""
        self.t += 1
        self.m *= self.b1
        self.m += (1 - self.b1) * grad
        self.v *= self.b2
        self.v += (1 - self.b2) * grad * grad
        mhat = self.m / (1 - self.b1**self.t)
        vhat = self.v / (1 - self.b2**self.t)
        params -= self.lr * mhat / (np.sqrt(vhat) + self.eps)


def train(config, loss_spec, system, init_params, dataset=None, log=None):
    """Minimise the loss with minibatch Adam; returns (final params, history).

    ``init_params`` is a single MlpParams or a tuple of them (PIB: potential,
    wave).  The run is a pure function of its arguments: the dataset and the
    shuffling order are drawn from generators derived from ``config.seed``.
    """
    objective = Objective(loss_spec, system)
    single = not isinstance(init_params, (tuple, list))
    models = [init_params] if single else list(init_params)
    if len(models) != objective.n_models:
        raise ConfigError(f"{loss_spec.kind} loss trains {objective.n_models} network(s), got {len(models)}")
    models = [m.with_flat(m.flat.copy()) for m in models]
    _, data_rng, shuffle_rng = seed_streams(config.seed)
    points = sample_domain(system, config.dataset_size, data_rng) if dataset is None else np.asarray(dataset)
    aux = objective.prepare(points)
    optimizers = [Adam(m.n_params, config.learning_rate, config.betas, config.eps) for m in models]
    history = TrainingHistory()
    n, bs = len(points), config.batch_size
    for epoch in range(config.epochs):
        start = time.perf_counter()
        order = shuffle_rng.permutation(n)
        total = 0.0
        for lo in range(0, n, bs):
            idx = order[lo : lo + bs]
            with np.errstate(over="ignore", invalid="ignore"):  # divergence is checked explicitly below
                value, grads = objective(models, points[idx], aux[idx], with_grad=True)
            if not np.isfinite(value) or not all(np.all(np.isfinite(g)) for g in grads):
                raise DivergenceError(epoch + 1)
            total += value * len(idx)
            for m, opt, g in zip(models, optimizers, grads):
                opt.step(m.flat, g)
        history.losses.append(total / n)
        history.seconds.append(time.perf_counter() - start)
        if log is not None:
            log(epoch + 1, history.losses[-1])
    history.checksum = "".join(m.checksum()[:16] for m in models)
    return (models[0] if single else tuple(models)), history
