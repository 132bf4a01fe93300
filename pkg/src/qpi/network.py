"""Feed-forward potential network with jet propagation and exact reverse pass.

Architecture: four affine layers (input -> 32 -> 128 -> 128 -> 1) with tanh
hidden activations, a residual skip around the third layer, and an optional
sigmoid plus scale on the output.

Derivatives with respect to the inputs are propagated forward as stacked
arrays of shape ``(K, batch, width)``:

* taylor mode: K = order + 1 raw derivatives along one input direction;
* grad mode:   K = 1 + d, the value and the first partials along d seeds.

``grad_params`` then runs reverse accumulation through that propagation, so a
loss that is any function of the output stack gets its exact parameter
gradient from the stack's cotangent.
"""

import hashlib
import json
import struct
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError
from .jets import Dual2D, Jet3, sigmoid_derivs, tanh_derivs

HIDDEN = (32, 128, 128)
RESIDUAL_LAYER = 2  # affine index whose input is added back to its output
FINAL_ACTIVATIONS = (None, "sigmoid")

_DERIVS = {"tanh": tanh_derivs, "sigmoid": sigmoid_derivs}


@dataclass
class MlpParams:
    sizes: tuple
    flat: np.ndarray
    residual: bool = True
    final_activation: str = None
    final_scale: float = None
    hidden_activation: str = "tanh"
    _views: list = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.sizes = tuple(int(s) for s in self.sizes)
        self.flat = np.ascontiguousarray(self.flat, dtype=np.float64)
        if self.flat.size != self.n_params:
            raise ConfigError(f"flat parameter vector has {self.flat.size} entries, expected {self.n_params}")
        if self.final_activation not in FINAL_ACTIVATIONS:
            raise ConfigError(f"final activation must be one of {FINAL_ACTIVATIONS}")
        if self.residual and self.sizes[RESIDUAL_LAYER] != self.sizes[RESIDUAL_LAYER + 1]:
            raise ConfigError("residual skip needs equal widths around the third layer")
        self._views = None

    @property
    def input_dim(self):
        return self.sizes[0]

    @property
    def n_params(self):
        return sum(a * b + b for a, b in zip(self.sizes[:-1], self.sizes[1:]))

    def layers(self):
        """(W, b) views into ``flat``; W has shape (fan_in, fan_out)."""
        if self._views is None:
            views, pos = [], 0
            for a, b in zip(self.sizes[:-1], self.sizes[1:]):
                W = self.flat[pos : pos + a * b].reshape(a, b)
                pos += a * b
                views.append((W, self.flat[pos : pos + b]))
                pos += b
            self._views = views
        return self._views

    def with_flat(self, flat):
        return replace(self, flat=np.array(flat, dtype=np.float64))

    def checksum(self):
        return hashlib.sha256(self.flat.tobytes()).hexdigest()

    # the loss functions only need these three calls, which oracle potentials mimic
    def taylor(self, points, order, direction=None):
        return taylor(self, points, order, direction)

    def partials(self, points):
        return partials(self, points)

    def grad(self, cache, cotangent):
        return grad_params(self, cache, cotangent)


def init_params(input_dim=1, seed=0, final_activation=None, final_scale=None, residual=True, hidden=HIDDEN,
                bias_init="uniform"):
    """Glorot-uniform weights; biases uniform in +-1/sqrt(fan_in) (or zero).

    All weight matrices are drawn first, then the biases, from one seeded
    generator.  Zero biases make the untrained tanh network an odd function of
    its input, which biases one-sided fits; the uniform default avoids that.
    """
    if bias_init not in ("uniform", "zero"):
        raise ConfigError(f"bias_init must be 'uniform' or 'zero', got {bias_init!r}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    sizes = (input_dim, *hidden, 1)
    pairs = list(zip(sizes[:-1], sizes[1:]))
    weights = [rng.uniform(-np.sqrt(6.0 / (a + b)), np.sqrt(6.0 / (a + b)), size=a * b) for a, b in pairs]
    if bias_init == "zero":
        biases = [np.zeros(b) for _, b in pairs]
    else:
        biases = [rng.uniform(-1 / np.sqrt(a), 1 / np.sqrt(a), size=b) for a, b in pairs]
    chunks = [c for w, b in zip(weights, biases) for c in (w, b)]
    return MlpParams(sizes, np.concatenate(chunks), residual, final_activation, final_scale)


def _as_points(params, points):
    p = np.asarray(points, dtype=np.float64)
    if p.ndim == 0:
        p = p.reshape(1, 1)
    elif p.ndim == 1:
        p = p[:, None] if params.input_dim == 1 else p[None, :]
    if p.shape[-1] != params.input_dim:
        raise ConfigError(f"network expects {params.input_dim} input(s), got points of shape {p.shape}")
    return p


def _activate(name, z, taylor_mode, order):
    """Forward an activation on a stacked jet; also return derivatives for the reverse pass."""
    n = order + 1 if taylor_mode else 2
    d = _DERIVS[name](z[0], n)
    if taylor_mode:
        y = np.empty_like(z)
        y[0] = d[0]
        if order >= 1:
            y[1] = d[1] * z[1]
        if order >= 2:
            y[2] = d[2] * z[1] ** 2 + d[1] * z[2]
        if order >= 3:
            y[3] = d[3] * z[1] ** 3 + 3 * d[2] * z[1] * z[2] + d[1] * z[3]
    else:
        y = d[1] * z
        y[0] = d[0]
    return y, d


def _activate_back(z, d, g, taylor_mode, order):
    gz = np.empty_like(g)
    if not taylor_mode:
        gz[:] = g * d[1]
        gz[0] = g[0] * d[1] + np.sum(g[1:] * z[1:], axis=0) * d[2]
        return gz
    z1 = z[1] if order >= 1 else None
    gz[0] = g[0] * d[1]
    if order >= 1:
        gz[0] += g[1] * z1 * d[2]
        gz[1] = g[1] * d[1]
    if order >= 2:
        z2 = z[2]
        gz[0] += g[2] * (d[3] * z1**2 + d[2] * z2)
        gz[1] += 2 * g[2] * d[2] * z1
        gz[2] = g[2] * d[1]
    if order >= 3:
        z3 = z[3]
        gz[0] += g[3] * (d[4] * z1**3 + 3 * d[3] * z1 * z2 + d[2] * z3)
        gz[1] += g[3] * (3 * d[3] * z1**2 + 3 * d[2] * z2)
        gz[2] += 3 * g[3] * d[2] * z1
        gz[3] = g[3] * d[1]
    return gz


def _propagate(params, X, taylor_mode, order):
    layers = params.layers()
    last = len(layers) - 1
    h = X
    cache = []
    for i, (W, b) in enumerate(layers):
        K, B, _ = h.shape
        z = (h.reshape(K * B, -1) @ W).reshape(K, B, -1)
        z[0] += b
        act = params.final_activation if i == last else params.hidden_activation
        if act is None:
            y, d = z, None
        else:
            y, d = _activate(act, z, taylor_mode, order)
        cache.append((h, z, d, act))
        if params.residual and i == RESIDUAL_LAYER:
            y = y + h
        h = y
    out = h[..., 0]
    if params.final_scale is not None:
        out = params.final_scale * out
    return out, (taylor_mode, order, cache)


def grad_params(params, cache, cotangent):
    """Reverse accumulation: d(loss)/d(flat params) given d(loss)/d(output stack)."""
    taylor_mode, order, layer_cache = cache
    g = np.asarray(cotangent, dtype=np.float64)[..., None]
    if params.final_scale is not None:
        g = g * params.final_scale
    layers = params.layers()
    parts = [None] * len(layers)
    for i in range(len(layers) - 1, -1, -1):
        W, _ = layers[i]
        h, z, d, act = layer_cache[i]
        skip = g if params.residual and i == RESIDUAL_LAYER else None
        gz = g if d is None else _activate_back(z, d, g, taylor_mode, order)
        K, B, n_in = h.shape
        flat_gz = gz.reshape(K * B, -1)
        parts[i] = ((h.reshape(K * B, n_in).T @ flat_gz).ravel(), gz[0].sum(axis=0))
        if i:
            g = (flat_gz @ W.T).reshape(K, B, n_in)
            if skip is not None:
                g = g + skip
    return np.concatenate([c for pair in parts for c in pair])


def forward(params, points):
    """Network value at each point, shape (batch,)."""
    p = _as_points(params, points)
    out, _ = _propagate(params, p[None], True, 0)
    return out[0]


def taylor(params, points, order, direction=None):
    """Raw derivatives 0..order of U along ``direction`` (default: first input axis).

    Returns ``(stack, cache)`` with stack shape (order + 1, batch).
    """
    if not 0 <= order <= 3:
        raise ConfigError("taylor order must be in 0..3")
    p = _as_points(params, points)
    X = np.zeros((order + 1, *p.shape))
    X[0] = p
    if order >= 1:
        if direction is None:
            X[1, :, 0] = 1.0
        else:
            X[1] = np.asarray(direction, dtype=np.float64)
    return _propagate(params, X, True, order)


def partials(params, points):
    """Value and all first partials: stack (1 + input_dim, batch) and cache."""
    p = _as_points(params, points)
    d = params.input_dim
    X = np.zeros((1 + d, *p.shape))
    X[0] = p
    for j in range(d):
        X[1 + j, :, j] = 1.0
    return _propagate(params, X, False, 1)


def forward_jet(params, seed):
    """Push a Jet3 seed for the (single) input through the network."""
    if params.input_dim != 1:
        raise ConfigError("forward_jet needs a one-input network")
    coeffs = [np.atleast_1d(np.asarray(c, dtype=np.float64)) for c in seed.coefficients]
    shape = np.broadcast_shapes(*(c.shape for c in coeffs))
    X = np.stack([np.broadcast_to(c, shape).reshape(-1, 1) for c in coeffs])
    out, _ = _propagate(params, X, True, 3)
    scalar = all(np.ndim(c) == 0 for c in seed.coefficients)
    vals = [o[0] if scalar else o.reshape(shape) for o in out]
    return Jet3(*vals)


def forward_dual2(params, seed_x, seed_y):
    """Push Dual2D seeds for the two inputs through the network."""
    if params.input_dim != 2:
        raise ConfigError("forward_dual2 needs a two-input network")
    cols = [[np.atleast_1d(np.asarray(getattr(s, f), dtype=np.float64)) for s in (seed_x, seed_y)] for f in ("value", "dx", "dy")]
    shape = np.broadcast_shapes(*(c.shape for row in cols for c in row))
    X = np.stack([np.stack([np.broadcast_to(c, shape).ravel() for c in row], axis=-1) for row in cols])
    out, _ = _propagate(params, X, False, 1)
    scalar = np.ndim(seed_x.value) == 0 and np.ndim(seed_y.value) == 0
    vals = [o[0] if scalar else o.reshape(shape) for o in out]
    return Dual2D(*vals)


# ------------------------------------------------------------ checkpoints
#
# Layout (little endian):
#   magic b"QPIC", uint32 format version, uint32 header length,
#   UTF-8 JSON header {"sizes", "residual", "final_activation", "final_scale",
#   "hidden_activation", "n_params"}, then n_params float64 values.

CHECKPOINT_MAGIC = b"QPIC"
CHECKPOINT_VERSION = 1


def dumps_checkpoint(params):
    header = json.dumps(
        {
            "sizes": list(params.sizes),
            "residual": params.residual,
            "final_activation": params.final_activation,
            "final_scale": params.final_scale,
            "hidden_activation": params.hidden_activation,
            "n_params": params.n_params,
        },
        sort_keys=True,
    ).encode()
    return CHECKPOINT_MAGIC + struct.pack("<II", CHECKPOINT_VERSION, len(header)) + header + params.flat.astype("<f8").tobytes()


def loads_checkpoint(blob):
    if blob[:4] != CHECKPOINT_MAGIC:
        raise ConfigError("not a parameter checkpoint")
    version, hlen = struct.unpack("<II", blob[4:12])
    if version != CHECKPOINT_VERSION:
        raise ConfigError(f"unsupported checkpoint version {version}")
    header = json.loads(blob[12 : 12 + hlen])
    flat = np.frombuffer(blob[12 + hlen :], dtype="<f8").astype(np.float64)
    if flat.size != header["n_params"]:
        raise ConfigError("checkpoint truncated")
    return MlpParams(
        tuple(header["sizes"]),
        flat,
        header["residual"],
        header["final_activation"],
        header["final_scale"],
        header["hidden_activation"],
    )


def save_checkpoint(path, params):
    from .io import atomic_write_bytes

    atomic_write_bytes(path, dumps_checkpoint(params))


def load_checkpoint(path):
    with open(path, "rb") as fh:
        return loads_checkpoint(fh.read())
