"""Experiment configuration: flat ``key = value`` files with dotted sections.

Example::

    # Poschl-Teller from its density
    preset = pt-tise
    train.epochs = 200
    loss.ic = 0, -3
    seeds = 0, 1, 2

A ``preset`` line (anywhere in the file) loads the built-in defaults first;
every other line overrides them.  Network activation and scale default to the
preset whose system and loss kind match when neither is given.
"""

from dataclasses import dataclass, field, replace

from .catalog import get_system
from .errors import ConfigError
from .losses import LossSpec, Objective
from .network import init_params
from .presets import PRESETS
from .trainer import TrainConfig, seed_streams


def _bool(text):
    t = text.lower()
    if t in ("true", "yes", "1", "on"):
        return True
    if t in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _optional(conv):
    def parse(text):
        return None if text.lower() in ("none", "null", "") else conv(text)

    return parse


def _pair(text):
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2:
        raise ValueError(f"expected 'point, value', got {text!r}")
    return (float(parts[0]), float(parts[1]))


def _int_list(text):
    return [int(p) for p in text.replace(",", " ").split()]


def _activation(text):
    t = text.lower()
    if t in ("none", "null", ""):
        return None
    if t != "sigmoid":
        raise ValueError(f"activation must be 'sigmoid' or 'none', got {text!r}")
    return t


SCHEMA = {
    "system": str,
    "preset": str,
    "output": str,
    "seeds": _int_list,
    "loss.kind": str,
    "loss.ic": _optional(_pair),
    "loss.ic_weight": float,
    "loss.order": int,
    "loss.moyal_factorial": _bool,
    "loss.moyal_sign": float,
    "train.epochs": int,
    "train.batch_size": int,
    "train.learning_rate": float,
    "train.dataset_size": int,
    "train.seed": int,
    "network.activation": _activation,
    "network.scale": _optional(float),
    "network.bias_init": str,
    "network.residual": _bool,
    "wave.activation": _activation,
    "wave.scale": _optional(float),
    "wave.bias_init": str,
    "eval.grid": int,
}


@dataclass
class ExperimentConfig:
    system: str
    loss: dict = field(default_factory=dict)
    train: dict = field(default_factory=dict)
    network: dict = field(default_factory=dict)
    wave: dict = None
    output: str = None
    seeds: list = field(default_factory=lambda: [0])
    grid: int = 201
    preset: str = None

    def system_instance(self):
        return get_system(self.system)

    def loss_spec(self):
        return LossSpec(**self.loss)

    def train_config(self, seed=None):
        kw = dict(self.train)
        if seed is not None:
            kw["seed"] = seed
        return TrainConfig(**kw)

    def with_seed(self, seed):
        return replace(self, train={**self.train, "seed": seed})

    @property
    def seed(self):
        return self.train.get("seed", 0)

    def initial_params(self, system=None):
        """Seeded networks: one potential, plus the wave network for PIB runs."""
        system = system or self.system_instance()
        rng = seed_streams(self.seed)[0]

        def make(opts):
            return init_params(
                system.dim,
                rng,
                final_activation=opts.get("activation"),
                final_scale=opts.get("scale"),
                residual=opts.get("residual", True),
                bias_init=opts.get("bias_init", "uniform"),
            )

        potential = make(self.network)
        if self.loss.get("kind") == "supervised_pib":
            return (potential, make(self.wave or {}))
        return potential

    def validate(self):
        """Resolve everything that can fail before a run starts."""
        system = self.system_instance()
        spec = self.loss_spec()
        Objective(spec, system)
        self.train_config()
        if spec.kind == "tise" and spec.ic is None and not self.network.get("activation") and self.network.get("scale") is None:
            raise ConfigError("field loss.ic: a TISE run without an initial condition needs a bounded final layer")
        if self.grid < 2:
            raise ConfigError("field eval.grid: need at least 2 points")
        self.initial_params(system)
        return system


def from_preset(name):
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; valid presets: {', '.join(PRESETS)}")
    p = PRESETS[name]
    return ExperimentConfig(
        system=p.system,
        loss=dict(p.loss),
        train={"epochs": p.epochs, "dataset_size": p.dataset_size},
        network=dict(p.network),
        wave=None if p.wave is None else dict(p.wave),
        grid=p.grid,
        preset=name,
    )


def _default_network(system_id, kind):
    family = system_id.split(":")[0]
    for p in PRESETS.values():
        if p.system.split(":")[0] == family and p.loss["kind"] == kind:
            return dict(p.network), (None if p.wave is None else dict(p.wave))
    return {}, ({} if kind == "supervised_pib" else None)


def parse_config(text, source="<config>"):
    """Parse config text into an ExperimentConfig; errors carry file:line."""
    entries = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        where = f"{source}:{lineno}"
        if not sep:
            raise ConfigError(f"{where}: expected 'key = value', got {raw.strip()!r}")
        if key not in SCHEMA:
            raise ConfigError(f"{where}: unknown field {key!r}")
        try:
            parsed = SCHEMA[key](value)
        except ValueError as exc:
            raise ConfigError(f"{where}: field {key}: {exc}") from None
        entries.append((where, key, parsed))

    keys = [k for _, k, _ in entries]
    dupes = {k for k in keys if keys.count(k) > 1}
    if dupes:
        raise ConfigError(f"{source}: duplicate field(s) {', '.join(sorted(dupes))}")
    values = {k: v for _, k, v in entries}
    if "preset" in values:
        cfg = from_preset(values["preset"])
    elif "system" in values:
        cfg = ExperimentConfig(system=values["system"])
    else:
        raise ConfigError(f"{source}: missing required field 'system' (or 'preset')")

    explicit_net = any(k.startswith("network.") for k in values)
    for _, key, value in entries:
        if key == "preset":
            continue
        if key in ("system", "output", "seeds"):
            setattr(cfg, key, value)
        elif key == "eval.grid":
            cfg.grid = value
        else:
            section, name = key.split(".")
            if section == "wave" and cfg.wave is None:
                cfg.wave = {}
            getattr(cfg, section)[name] = value
    cfg.loss.setdefault("kind", "tise")
    if cfg.preset is None and not explicit_net:
        cfg.network, wave = _default_network(cfg.system, cfg.loss["kind"])
        if cfg.wave is None:
            cfg.wave = wave
    if "train.seed" in values and "seeds" not in values:
        cfg.seeds = [values["train.seed"]]
    elif "seeds" in values and "train.seed" not in values and cfg.seeds:
        cfg.train["seed"] = cfg.seeds[0]
    return cfg


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, str(path))


def dumps_config(cfg):
    """Inverse of parse_config for the fields a run records."""
    lines = [f"system = {cfg.system}"]
    for section in ("loss", "train", "network", "wave"):
        for k, v in sorted((getattr(cfg, section) or {}).items()):
            if isinstance(v, tuple):
                v = ", ".join(repr(float(x)) for x in v)
            lines.append(f"{section}.{k} = {'none' if v is None else v}")
    lines.append(f"eval.grid = {cfg.grid}")
    lines.append("seeds = " + ", ".join(str(s) for s in cfg.seeds))
    return "\n".join(lines) + "\n"

