"""Neural layers over the Tensor graph.

Dense and BatchNorm compose Tensor primitives, so their gradients fall out
of the graph. Conv1d, MaxPool1d and Lstm instead call the accel kernels
and attach handwritten backward closures; their gradients have their own
finite-difference coverage.

Sequence layers take [batch, time, channels]. BatchNorm normalizes over
every axis except the last, so it handles both flat [batch, features] and
sequence inputs with per-channel statistics. Running statistics use the
biased (population) variance and update as
``running = (1 - momentum) * running + momentum * batch_stat``.
"""
import numpy as np

from .. import accel
from ..errors import SequenceTooShort, ShapeError
from .tensor import Tensor

_ACTIVATIONS = ("linear", "relu")


def _apply_activation(x: Tensor, activation: str) -> Tensor:
    if activation == "linear":
        return x
    if activation == "relu":
        return x.relu()
    raise ShapeError(f"unknown activation {activation!r}")


def _he_uniform(rng, fan_in: int, shape) -> np.ndarray:
    limit = np.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, size=shape)


class Layer:
    def forward(self, x: Tensor, train: bool = False, rng=None) -> Tensor:
        raise NotImplementedError

    def params(self) -> list:
        return []

    def buffers(self) -> list:
        return []

    def spec(self) -> dict:
        raise NotImplementedError


class Dense(Layer):
    def __init__(self, in_features: int, out_features: int,
                 activation: str = "linear", rng=None):
        if activation not in _ACTIVATIONS:
            raise ShapeError(f"unknown activation {activation!r}")
        rng = rng or np.random.default_rng(0)
        self.in_features = int(in_features)
        self.out_features = int(out_features)
        self.activation = activation
        self.w = Tensor(_he_uniform(rng, in_features, (in_features, out_features)),
                        requires_grad=True)
        self.b = Tensor(np.zeros(out_features), requires_grad=True)

    def forward(self, x, train=False, rng=None):
        return _apply_activation(x @ self.w + self.b, self.activation)

    def params(self):
        return [self.w, self.b]

    def spec(self):
        return {"kind": "dense", "in_features": self.in_features,
                "out_features": self.out_features, "activation": self.activation}


class Conv1d(Layer):
    """Same-padded cross-correlation along the time axis; odd kernel only."""

    def __init__(self, in_channels: int, out_channels: int, kernel_size: int,
                 activation: str = "linear", rng=None):
        if kernel_size % 2 == 0 or kernel_size < 1:
            raise ShapeError("kernel_size must be odd so 'same' padding is symmetric")
        if activation not in _ACTIVATIONS:
            raise ShapeError(f"unknown activation {activation!r}")
        rng = rng or np.random.default_rng(0)
        self.in_channels = int(in_channels)
        self.out_channels = int(out_channels)
        self.kernel_size = int(kernel_size)
        self.activation = activation
        fan_in = kernel_size * in_channels
        self.w = Tensor(_he_uniform(rng, fan_in, (kernel_size, in_channels, out_channels)),
                        requires_grad=True)
        self.b = Tensor(np.zeros(out_channels), requires_grad=True)

    def forward(self, x, train=False, rng=None):
        if x.data.ndim != 3 or x.data.shape[2] != self.in_channels:
            raise ShapeError(
                f"conv expects [batch, time, {self.in_channels}], got {x.data.shape}")
        xd = np.ascontiguousarray(x.data)
        w, b = self.w, self.b
        y = accel.conv1d_fwd(xd, w.data, b.data)

        def backward(g):
            dx, dw, db = accel.conv1d_bwd(xd, w.data, np.ascontiguousarray(g))
            if x.requires_grad:
                x._accumulate(dx)
            if w.requires_grad:
                w._accumulate(dw)
            if b.requires_grad:
                b._accumulate(db)

        out = Tensor.from_op(y, (x, w, b), backward)
        return _apply_activation(out, self.activation)

    def params(self):
        return [self.w, self.b]

    def spec(self):
        return {"kind": "conv1d", "in_channels": self.in_channels,
                "out_channels": self.out_channels, "kernel_size": self.kernel_size,
                "activation": self.activation}


class MaxPool1d(Layer):
    """Non-overlapping max pooling (stride == window); remainder dropped."""

    def __init__(self, window: int):
        if window < 1:
            raise ShapeError("pool window must be >= 1")
        self.window = int(window)

    def forward(self, x, train=False, rng=None):
        if x.data.ndim != 3:
            raise ShapeError(f"pool expects [batch, time, channels], got {x.data.shape}")
        T = x.data.shape[1]
        if T < self.window:
            raise SequenceTooShort(
                f"pool window {self.window} exceeds sequence length {T}")
        xd = np.ascontiguousarray(x.data)
        y, idx = accel.maxpool_fwd(xd, self.window)

        def backward(g):
            if x.requires_grad:
                x._accumulate(accel.maxpool_bwd(np.ascontiguousarray(g), idx, T))

        return Tensor.from_op(y, (x,), backward)

    def spec(self):
        return {"kind": "maxpool", "window": self.window}


class BatchNorm(Layer):
    def __init__(self, num_features: int, momentum: float = 0.1, eps: float = 1e-5):
        self.num_features = int(num_features)
        self.momentum = float(momentum)
        self.eps = float(eps)
        self.gamma = Tensor(np.ones(num_features), requires_grad=True)
        self.beta = Tensor(np.zeros(num_features), requires_grad=True)
        self.running_mean = np.zeros(num_features)
        self.running_var = np.ones(num_features)

    def forward(self, x, train=False, rng=None):
        if x.data.shape[-1] != self.num_features:
            raise ShapeError(
                f"batchnorm over {self.num_features} features, got {x.data.shape}")
        if train:
            axes = tuple(range(x.data.ndim - 1))
            m = x.mean(axis=axes, keepdims=True)
            centered = x - m
            v = (centered * centered).mean(axis=axes, keepdims=True)
            xhat = centered * (v + self.eps) ** -0.5
            bm = x.data.mean(axis=axes)
            bv = x.data.var(axis=axes)
            self.running_mean += self.momentum * (bm - self.running_mean)
            self.running_var += self.momentum * (bv - self.running_var)
        else:
            scale = 1.0 / np.sqrt(self.running_var + self.eps)
            xhat = x * Tensor(scale) + Tensor(-self.running_mean * scale)
        return xhat * self.gamma + self.beta

    def params(self):
        return [self.gamma, self.beta]

    def buffers(self):
        return [self.running_mean, self.running_var]

    def spec(self):
        return {"kind": "batchnorm", "num_features": self.num_features,
                "momentum": self.momentum, "eps": self.eps}


class Dropout(Layer):
    """Inverted dropout: active only in training, identity otherwise."""

    def __init__(self, p: float):
        if not 0.0 <= p < 1.0:
            raise ShapeError(f"dropout rate must be in [0, 1), got {p}")
        self.p = float(p)

    def forward(self, x, train=False, rng=None):
        if not train or self.p == 0.0:
            return x
        if rng is None:
            raise ShapeError("training-mode dropout needs an rng for determinism")
        mask = (rng.random(x.data.shape) >= self.p) / (1.0 - self.p)
        return x * Tensor(mask)

    def spec(self):
        return {"kind": "dropout", "p": self.p}


class Lstm(Layer):
    """Gate recurrence over [batch, time, input]; emits the final hidden state.

    Weights are uniform in +-1/sqrt(hidden); the forget-gate bias starts
    at 1 so early training does not flush the cell state.
    """

    def __init__(self, input_size: int, hidden_size: int,
                 activation: str = "linear", rng=None):
        if activation not in _ACTIVATIONS:
            raise ShapeError(f"unknown activation {activation!r}")
        rng = rng or np.random.default_rng(0)
        self.input_size = int(input_size)
        self.hidden_size = int(hidden_size)
        self.activation = activation
        limit = 1.0 / np.sqrt(hidden_size)
        self.wx = Tensor(rng.uniform(-limit, limit, (input_size, 4 * hidden_size)),
                         requires_grad=True)
        self.wh = Tensor(rng.uniform(-limit, limit, (hidden_size, 4 * hidden_size)),
                         requires_grad=True)
        bias = np.zeros(4 * hidden_size)
        bias[hidden_size:2 * hidden_size] = 1.0
        self.b = Tensor(bias, requires_grad=True)

    def forward(self, x, train=False, rng=None):
        if x.data.ndim != 3 or x.data.shape[2] != self.input_size:
            raise ShapeError(
                f"lstm expects [batch, time, {self.input_size}], got {x.data.shape}")
        xd = np.ascontiguousarray(x.data)
        wx, wh, b = self.wx, self.wh, self.b
        h, hs, cs, gates = accel.lstm_fwd(xd, wx.data, wh.data, b.data)

        def backward(g):
            dx, dwx, dwh, db = accel.lstm_bwd(
                xd, wx.data, wh.data, hs, cs, gates, np.ascontiguousarray(g))
            if x.requires_grad:
                x._accumulate(dx)
            if wx.requires_grad:
                wx._accumulate(dwx)
            if wh.requires_grad:
                wh._accumulate(dwh)
            if b.requires_grad:
                b._accumulate(db)

        out = Tensor.from_op(h, (x, wx, wh, b), backward)
        return _apply_activation(out, self.activation)

    def params(self):
        return [self.wx, self.wh, self.b]

    def spec(self):
        return {"kind": "lstm", "input_size": self.input_size,
                "hidden_size": self.hidden_size, "activation": self.activation}


class Network:
    """Plain layer stack; forward threads train flag and rng through."""

    def __init__(self, layers: list):
        self.layers = list(layers)

    def forward(self, x, train: bool = False, rng=None) -> Tensor:
        out = x if isinstance(x, Tensor) else Tensor(x)
        for layer in self.layers:
            out = layer.forward(out, train=train, rng=rng)
        return out

    def params(self) -> list:
        out = []
        for layer in self.layers:
            out.extend(layer.params())
        return out

    def buffers(self) -> list:
        out = []
        for layer in self.layers:
            out.extend(layer.buffers())
        return out

    def param_count(self) -> int:
        return sum(p.size for p in self.params())

    def specs(self) -> list:
        return [layer.spec() for layer in self.layers]

    def zero_grad(self):
        for p in self.params():
            p.grad = None

    def state_arrays(self) -> list:
        """Parameters then buffers, declaration order; views, not copies."""
        return [p.data for p in self.params()] + list(self.buffers())


_LAYER_BUILDERS = {
    "dense": lambda s, rng: Dense(s["in_features"], s["out_features"],
                                  s["activation"], rng=rng),
    "conv1d": lambda s, rng: Conv1d(s["in_channels"], s["out_channels"],
                                    s["kernel_size"], s["activation"], rng=rng),
    "maxpool": lambda s, rng: MaxPool1d(s["window"]),
    "batchnorm": lambda s, rng: BatchNorm(s["num_features"], s["momentum"], s["eps"]),
    "dropout": lambda s, rng: Dropout(s["p"]),
    "lstm": lambda s, rng: Lstm(s["input_size"], s["hidden_size"],
                                s["activation"], rng=rng),
}


def network_from_specs(specs: list, rng=None) -> Network:
    rng = rng or np.random.default_rng(0)
    layers = []
    for s in specs:
        kind = s.get("kind")
        if kind not in _LAYER_BUILDERS:
            raise ShapeError(f"unknown layer kind {kind!r}")
        layers.append(_LAYER_BUILDERS[kind](s, rng))
    return Network(layers)
