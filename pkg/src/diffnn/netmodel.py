"""Network representation, file I/O, pairing and benchmark fixtures.

Three architectures are supported, all single-hidden-layer recurrent or plain
feed-forward, with sigmoid or tanh activations:

``ffnn``
    ``h_l = act(W_l h_{l-1} + b_l)`` for hidden layers ``l = 1..L`` and a
    linear output layer ``y = W_{L+1} h_L + b_{L+1}``.
``rnn``
    many-to-one vanilla RNN, ``a(t) = W_hh h(t-1) + W_hx x(t) + b_h``,
    ``h(t) = act(a(t))``, ``y = W_hy h(T) + b_y``.
``lstm``
    many-to-one LSTM with sigmoid i/f/o gates and tanh cell gate.

Inputs are always flattened: a sequence of ``T`` steps with ``m`` features is a
vector of length ``T*m`` whose step ``t`` (1-based) is ``x[(t-1)*m : t*m]``.
"""

from __future__ import annotations

import json
import logging
import math
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

import numpy as np

from .interval import IntervalVector

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
FLOAT16_MAX = 65504.0
LSTM_GATES = ("i", "f", "g", "o")


class NetworkFormatError(ValueError):
    """A network file does not match the expected schema."""


class StructuralMismatchError(ValueError):
    """Two networks do not share architecture, dimensions and activation."""


class Activation(str, Enum):
    SIGMOID = "sigmoid"
    TANH = "tanh"

    def __call__(self, u):
        return tanh(u) if self is Activation.TANH else sigmoid(u)

    @property
    def range(self) -> tuple[float, float]:
        return (-1.0, 1.0) if self is Activation.TANH else (0.0, 1.0)


def sigmoid(u):
    """Logistic function, split on sign so ``exp`` never overflows."""
    u = np.asarray(u, dtype=np.float64)
    e = np.exp(-np.abs(u))
    return np.where(u >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def tanh(u):
    return np.tanh(np.asarray(u, dtype=np.float64))


@dataclass(frozen=True)
class Dims:
    input: int
    hidden: int
    output: int
    steps: int = 1
    layers: tuple[int, ...] = ()

    @property
    def n_inputs(self) -> int:
        """Total number of input variables (all steps)."""
        return self.input * self.steps


@dataclass(frozen=True, eq=False)
class Network:
    arch: str
    activation: Activation
    dims: Dims
    weights: dict[str, np.ndarray]
    h0: np.ndarray | None = None
    c0: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "activation", Activation(self.activation))
        w = {k: np.array(v, dtype=np.float64) for k, v in self.weights.items()}
        for a in w.values():
            a.setflags(write=False)
        object.__setattr__(self, "weights", w)
        ell = self.dims.hidden
        for name in ("h0", "c0"):
            v = getattr(self, name)
            if v is None:
                v = np.zeros(ell if self.arch != "ffnn" else 0)
            v = np.array(v, dtype=np.float64).reshape(-1)
            v.setflags(write=False)
            object.__setattr__(self, name, v)
        _validate(self)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.weights[name]

    @property
    def n_layers(self) -> int:
        """Number of weight layers of a feed-forward net (hidden + output)."""
        return len(self.dims.layers) + 1

    def same_values(self, other: Network) -> bool:
        return (
            self.arch == other.arch
            and self.activation == other.activation
            and self.dims == other.dims
            and self.weights.keys() == other.weights.keys()
            and all(np.array_equal(self[k], other[k]) for k in self.weights)
            and np.array_equal(self.h0, other.h0)
            and np.array_equal(self.c0, other.c0)
        )


def expected_shapes(arch: str, dims: Dims) -> dict[str, tuple[int, ...]]:
    """Canonical weight names, in file order, mapped to their shapes."""
    m, ell, p = dims.input, dims.hidden, dims.output
    if arch == "ffnn":
        widths = [m, *dims.layers, p]
        shapes = {}
        for l in range(1, len(widths)):
            shapes[f"W_{l}"] = (widths[l], widths[l - 1])
            shapes[f"b_{l}"] = (widths[l],)
        return shapes
    if arch == "rnn":
        return {"W_hh": (ell, ell), "W_hx": (ell, m), "b_h": (ell,), "W_hy": (p, ell), "b_y": (p,)}
    if arch == "lstm":
        shapes = {}
        for v in LSTM_GATES:
            shapes[f"W_{v}h"] = (ell, ell)
            shapes[f"W_{v}x"] = (ell, m)
            shapes[f"b_{v}"] = (ell,)
        shapes["W_hy"] = (p, ell)
        shapes["b_y"] = (p,)
        return shapes
    raise NetworkFormatError(f"unknown architecture {arch!r}")


def _validate(net: Network) -> None:
    d = net.dims
    if min(d.input, d.output, d.steps) < 1:
        raise NetworkFormatError(f"non-positive dimension in {d}")
    if net.arch == "ffnn":
        if d.steps != 1:
            raise NetworkFormatError("ffnn must have steps = 1")
        if not d.layers or min(d.layers) < 1:
            raise NetworkFormatError("ffnn needs at least one positive hidden width")
    elif d.hidden < 1:
        raise NetworkFormatError("hidden size must be positive")
    shapes = expected_shapes(net.arch, d)
    missing = shapes.keys() - net.weights.keys()
    extra = net.weights.keys() - shapes.keys()
    if missing or extra:
        raise NetworkFormatError(f"weight names mismatch: missing {sorted(missing)}, unexpected {sorted(extra)}")
    for name, shape in shapes.items():
        if net.weights[name].shape != shape:
            raise NetworkFormatError(
                f"dimension mismatch: {name} has shape {net.weights[name].shape}, expected {shape}")
        if not np.all(np.isfinite(net.weights[name])):
            raise NetworkFormatError(f"non-finite entry in {name}")
    if net.arch != "ffnn":
        if net.h0.shape != (d.hidden,):
            raise NetworkFormatError(f"dimension mismatch: h0 has length {net.h0.shape[0]}")
        if net.c0.shape != (d.hidden,):
            raise NetworkFormatError(f"dimension mismatch: c0 has length {net.c0.shape[0]}")


# ---------------------------------------------------------------------------
# File format
# ---------------------------------------------------------------------------

def network_to_dict(net: Network) -> dict:
    d = net.dims
    if net.arch == "ffnn":
        dims = {"input": d.input, "layers": list(d.layers), "output": d.output, "steps": 1}
    else:
        dims = {"input": d.input, "hidden": d.hidden, "output": d.output, "steps": d.steps}
    weights = {}
    for name, shape in expected_shapes(net.arch, d).items():
        w = net.weights[name]
        # biases are stored as column matrices
        weights[name] = (w.reshape(-1, 1) if len(shape) == 1 else w).tolist()
    doc = {
        "format_version": FORMAT_VERSION,
        "arch": net.arch,
        "activation": net.activation.value,
        "dims": dims,
        "weights": weights,
    }
    if net.arch != "ffnn":
        doc["h0"] = net.h0.tolist()
        if net.arch == "lstm":
            doc["c0"] = net.c0.tolist()
    return doc


def dumps_network(net: Network) -> str:
    return json.dumps(network_to_dict(net), indent=1) + "\n"


def save_network(net: Network, path) -> None:
    Path(path).write_text(dumps_network(net), encoding="utf-8")


def network_from_dict(doc: dict) -> Network:
    if not isinstance(doc, dict):
        raise NetworkFormatError("top level must be an object")
    if doc.get("format_version") != FORMAT_VERSION:
        raise NetworkFormatError(f"unsupported format_version {doc.get('format_version')!r}")
    arch = doc.get("arch")
    if arch not in ("ffnn", "rnn", "lstm"):
        raise NetworkFormatError(f"unknown architecture {arch!r}")
    try:
        activation = Activation(doc.get("activation"))
    except ValueError:
        raise NetworkFormatError(f"unknown activation {doc.get('activation')!r}") from None
    raw = doc.get("dims")
    if not isinstance(raw, dict):
        raise NetworkFormatError("missing dims")
    try:
        if arch == "ffnn":
            layers = tuple(int(w) for w in raw["layers"])
            dims = Dims(int(raw["input"]), max(layers, default=0), int(raw["output"]),
                        int(raw.get("steps", 1)), layers)
        else:
            dims = Dims(int(raw["input"]), int(raw["hidden"]), int(raw["output"]), int(raw["steps"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise NetworkFormatError(f"bad dims: {exc}") from None
    shapes = expected_shapes(arch, dims)
    raw_w = doc.get("weights")
    if not isinstance(raw_w, dict):
        raise NetworkFormatError("missing weights")
    weights = {}
    for name, value in raw_w.items():
        try:
            arr = np.array(value, dtype=np.float64)
        except (TypeError, ValueError):
            raise NetworkFormatError(f"{name} is not a rectangular numeric array") from None
        shape = shapes.get(name)
        if shape is not None and len(shape) == 1 and arr.ndim == 2 and arr.shape[1] == 1:
            arr = arr[:, 0]
        weights[name] = arr
    return Network(arch, activation, dims, weights, doc.get("h0"), doc.get("c0"))


def loads_network(text: str) -> Network:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkFormatError(f"parse error: {exc}") from None
    return network_from_dict(doc)


def load_network(path) -> Network:
    return loads_network(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# Quantization, generation, pairing
# ---------------------------------------------------------------------------

def to_float16(values) -> np.ndarray:
    """Round to the nearest binary16 value (ties to even), back in float64.

    Magnitudes beyond the largest finite binary16 are clamped to +-65504.
    """
    v = np.asarray(values, dtype=np.float64)
    over = np.abs(v) > FLOAT16_MAX
    if np.any(over):
        log.warning("%d value(s) exceed the binary16 range; clamped to +-%g", int(over.sum()), FLOAT16_MAX)
        v = np.clip(v, -FLOAT16_MAX, FLOAT16_MAX)
    return v.astype(np.float16).astype(np.float64)


def quantize_weights(net: Network) -> Network:
    """Twin network with every weight and bias rounded to binary16."""
    return replace(net, weights={k: to_float16(w) for k, w in net.weights.items()})


@dataclass(frozen=True)
class ArchSpec:
    """Shape of a network to generate.

    ``depth`` is the number of time steps (rnn/lstm) or hidden layers (ffnn);
    ``width`` the hidden size.  ``"rnn:4x8"`` is four steps of eight neurons.
    """

    kind: str
    depth: int
    width: int
    inputs: int = 4
    outputs: int = 3
    activation: Activation = Activation.TANH

    @classmethod
    def parse(cls, text: str, **kw) -> ArchSpec:
        m = re.fullmatch(r"\s*(ffnn|rnn|lstm)\s*:\s*(\d+)\s*[xX]\s*(\d+)\s*", text)
        if not m:
            raise ValueError(f"bad architecture spec {text!r}; expected e.g. 'rnn:4x8'")
        return cls(m.group(1), int(m.group(2)), int(m.group(3)), **kw)

    @property
    def dims(self) -> Dims:
        if self.kind == "ffnn":
            return Dims(self.inputs, self.width, self.outputs, 1, (self.width,) * self.depth)
        return Dims(self.inputs, self.width, self.outputs, self.depth)

    def __str__(self) -> str:
        return f"{self.kind}:{self.depth}x{self.width}"


def _uniform_f32(rng: np.random.Generator, shape, bound: float) -> np.ndarray:
    b32 = np.float32(bound)
    if float(b32) > bound:
        b32 = np.nextafter(b32, np.float32(0))
    w = rng.uniform(-bound, bound, size=shape).astype(np.float32)
    return np.clip(w, -b32, b32).astype(np.float64)


def generate_network(spec: ArchSpec, seed: int) -> Network:
    """Deterministic random network with float32-representable weights.

    Weights and biases are uniform in ``[-1/sqrt(fan_in), 1/sqrt(fan_in)]``;
    recurrent architectures use the hidden size as fan-in for every parameter.
    """
    rng = np.random.default_rng(seed)
    dims = spec.dims
    weights = {}
    for name, shape in expected_shapes(spec.kind, dims).items():
        if spec.kind == "ffnn":
            layer = int(name.split("_")[1])
            fan_in = expected_shapes(spec.kind, dims)[f"W_{layer}"][1]
        else:
            fan_in = dims.hidden
        weights[name] = _uniform_f32(rng, shape, 1.0 / math.sqrt(fan_in))
    activation = Activation.SIGMOID if spec.kind == "lstm" else spec.activation
    return Network(spec.kind, activation, dims, weights)


@dataclass(frozen=True, eq=False)
class DiffNetwork:
    """Two structurally identical networks and their parameter differences."""

    net_a: Network
    net_b: Network
    deltas: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def arch(self) -> str:
        return self.net_a.arch

    @property
    def dims(self) -> Dims:
        return self.net_a.dims

    @property
    def activation(self) -> Activation:
        return self.net_a.activation

    def delta(self, name: str) -> np.ndarray:
        return self.deltas[name]

    def is_zero(self) -> bool:
        return all(not np.any(d) for d in self.deltas.values())


def check_structure(a: Network, b: Network) -> None:
    if a.arch != b.arch:
        raise StructuralMismatchError(f"architectures differ: {a.arch} vs {b.arch}")
    if a.activation != b.activation:
        raise StructuralMismatchError(
            f"activations differ: {a.activation.value} vs {b.activation.value}")
    if a.dims != b.dims:
        raise StructuralMismatchError(f"dimensions differ: {a.dims} vs {b.dims}")


def diff_weights(a: Network, b: Network) -> DiffNetwork:
    """Pair two networks; every delta is ``b - a`` in float64."""
    check_structure(a, b)
    deltas = {k: b[k] - a[k] for k in a.weights}
    for name in ("h0", "c0"):
        deltas[name] = getattr(b, name) - getattr(a, name)
    return DiffNetwork(a, b, deltas)


# ---------------------------------------------------------------------------
# Input regions and concrete evaluation
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class InputRegion:
    """Box of admissible (flattened) inputs."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.array(self.lo, dtype=np.float64).reshape(-1)
        hi = np.array(self.hi, dtype=np.float64).reshape(-1)
        if lo.shape != hi.shape:
            raise ValueError("lo/hi length mismatch")
        if np.any(lo > hi) or not np.all(np.isfinite(lo)) or not np.all(np.isfinite(hi)):
            raise ValueError("invalid input region")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def from_center(cls, center, radii) -> InputRegion:
        center = np.asarray(center, dtype=np.float64)
        radii = np.broadcast_to(np.asarray(radii, dtype=np.float64), center.shape)
        if np.any(radii < 0):
            raise ValueError("radii must be non-negative")
        return cls(center - radii, center + radii)

    @classmethod
    def from_intervals(cls, items) -> InputRegion:
        items = list(items)
        return cls([lo for lo, _ in items], [hi for _, hi in items])

    def __len__(self) -> int:
        return self.lo.shape[0]

    @property
    def vector(self) -> IntervalVector:
        return IntervalVector(self.lo, self.hi)

    def step(self, t: int, m: int) -> IntervalVector:
        """Inputs of 1-based time step ``t`` with ``m`` features per step."""
        s = slice((t - 1) * m, t * m)
        return IntervalVector(self.lo[s], self.hi[s])

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size=(n, len(self)))

    def contains(self, other: InputRegion) -> bool:
        return bool(np.all(self.lo <= other.lo) and np.all(other.hi <= self.hi))


@dataclass
class Trace:
    """Concrete states from a batched forward pass (last axis = neuron)."""

    y: np.ndarray
    a: list = field(default_factory=list)
    h: list = field(default_factory=list)
    c: list = field(default_factory=list)
    gates: list = field(default_factory=list)


def forward(net: Network, x, trace: bool = False):
    """Concrete evaluation on a batch of flattened inputs, shape ``(N, T*m)``.

    Returns the outputs ``(N, p)``, or a :class:`Trace` if ``trace`` is set.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    d = net.dims
    if x.shape[1] != d.n_inputs:
        raise ValueError(f"expected {d.n_inputs} inputs, got {x.shape[1]}")
    tr = Trace(y=None)
    act = net.activation
    if net.arch == "ffnn":
        h = x
        L = net.n_layers
        for l in range(1, L):
            a = h @ net[f"W_{l}"].T + net[f"b_{l}"]
            h = act(a)
            tr.a.append(a)
            tr.h.append(h)
        tr.y = h @ net[f"W_{L}"].T + net[f"b_{L}"]
        return tr if trace else tr.y

    m = d.input
    h = np.broadcast_to(net.h0, (x.shape[0], d.hidden))
    c = np.broadcast_to(net.c0, (x.shape[0], d.hidden))
    for t in range(1, d.steps + 1):
        xt = x[:, (t - 1) * m:t * m]
        if net.arch == "rnn":
            a = h @ net["W_hh"].T + xt @ net["W_hx"].T + net["b_h"]
            h = act(a)
            tr.a.append(a)
        else:
            pre = {v: h @ net[f"W_{v}h"].T + xt @ net[f"W_{v}x"].T + net[f"b_{v}"] for v in LSTM_GATES}
            c = sigmoid(pre["f"]) * c + sigmoid(pre["i"]) * tanh(pre["g"])
            h = sigmoid(pre["o"]) * tanh(c)
            tr.gates.append(pre)
            tr.c.append(c)
        tr.h.append(h)
    tr.y = h @ net["W_hy"].T + net["b_y"]
    return tr if trace else tr.y
