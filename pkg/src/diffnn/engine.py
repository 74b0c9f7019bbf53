"""Differential verification pipelines for feed-forward nets, RNNs and LSTMs.

Every step propagates two kinds of bounds side by side:

* value bounds of the first network (``h``, ``c``, pre-activations), by plain
  interval bound propagation;
* difference bounds ``delta = (second network) - (first network)`` for the
  same quantities, computed directly from weight deltas and previous
  differences rather than by subtracting two value bounds.

The affine difference transformer is

    da = dW_x x + W'_h dh_prev + dW_h h_prev + db

and the nonlinear one bounds ``act(a + da) - act(a)`` in closed form.  For
LSTMs the cell and hidden differences are product surfaces, bounded by
differential evolution and then proved by branch-and-prune.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .global_opt import OptParams, de_extremize
from .interval import (UNIT_ROUNDOFF, Box, Interval, IntervalVector, concretize,
                       matvec_bounds, sym_affine, sym_identity)
from .netmodel import LSTM_GATES, Activation, DiffNetwork, InputRegion, Network
from .scalar_diff import act_diff_bounds_vec, act_value_bounds
from .surfaces import SurfaceKind, is_identically_zero
from .validator import ValidationError, ValidatorParams, validate_and_adjust

log = logging.getLogger(__name__)

PROVED = "Proved"
UNKNOWN = "Unknown"
DEFAULT_DEADLINE = 30 * 60.0
# DE candidates are nudged outward before validation
PRE_WIDEN = 1e-9

SIG = Activation.SIGMOID
TANH = Activation.TANH


class DeadlineExceeded(RuntimeError):
    pass


@dataclass
class LayerState:
    """Bounds for one time step (or layer); vectors have one entry per neuron."""

    h: IntervalVector
    dh: IntervalVector
    c: IntervalVector | None = None
    dc: IntervalVector | None = None
    a: IntervalVector | None = None
    da: IntervalVector | None = None
    gates: dict[str, IntervalVector] = field(default_factory=dict)
    dgates: dict[str, IntervalVector] = field(default_factory=dict)


@dataclass
class VerdictReport:
    verdict: str
    delta_y: IntervalVector | None
    epsilon: float
    elapsed: float
    diagnostics: list[dict] = field(default_factory=list)
    message: str = ""

    @property
    def proved(self) -> bool:
        return self.verdict == PROVED

    @property
    def max_abs_delta(self) -> float:
        if self.delta_y is None:
            return float("nan")
        return float(self.delta_y.mag.max())

    def summary(self) -> str:
        lines = [f"verdict: {self.verdict}", f"epsilon: {self.epsilon:g}", f"elapsed: {self.elapsed:.3f}s"]
        if self.delta_y is not None:
            for j, (lo, hi) in enumerate(zip(self.delta_y.lo, self.delta_y.hi)):
                lines.append(f"delta_y[{j}]: [{lo:.6e}, {hi:.6e}]")
        if self.message:
            lines.append(f"note: {self.message}")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# Affine pieces
# ---------------------------------------------------------------------------

def _point_diff(b: np.ndarray, a: np.ndarray) -> IntervalVector:
    return IntervalVector.point(b) - IntervalVector.point(a)


def _exact_difference(b, a, d) -> bool:
    bb = d - b
    return not np.any((b - (d - bb)) + (-a - bb))


def _delta_matvec(dn: DiffNetwork, name: str, v: IntervalVector) -> IntervalVector:
    """``dW @ v`` where ``dW`` may carry rounding from the subtraction."""
    dW = dn.delta(name)
    lo, hi = matvec_bounds(dW, v.lo, v.hi)
    if not _exact_difference(dn.net_b[name], dn.net_a[name], dW):
        err = UNIT_ROUNDOFF * (np.abs(dW) @ v.mag) * (1 + 1e-12)
        lo, hi = lo - err, hi + err
        lo, hi = np.nextafter(lo, -np.inf), np.nextafter(hi, np.inf)
    return IntervalVector(lo, hi)


def input_term(W: np.ndarray, x_t: IntervalVector) -> IntervalVector:
    """``W @ x`` over the input box, via symbolic bounds on the inputs."""
    sym = sym_affine(sym_identity(len(x_t)), W)
    return concretize(sym, x_t)


def _delta_input_term(dn: DiffNetwork, name: str, x_t: IntervalVector) -> IntervalVector:
    if not np.any(dn.delta(name)):
        return IntervalVector.zeros(dn.delta(name).shape[0])
    return _delta_matvec(dn, name, x_t)


def affine_diff(dn: DiffNetwork, wx: str | None, wh: str, b: str,
                x_t: IntervalVector | None, h_prev: IntervalVector,
                dh_prev: IntervalVector) -> IntervalVector:
    """``dW_x x + W'_h dh_prev + dW_h h_prev + db`` for one weight group."""
    out = dh_prev.matvec(dn.net_b[wh]) + _delta_matvec(dn, wh, h_prev)
    if wx is not None:
        out = out + _delta_input_term(dn, wx, x_t)
    return out + _point_diff(dn.net_b[b], dn.net_a[b])


def affine_diff_rnn(dn: DiffNetwork, x_t: IntervalVector, h_prev: IntervalVector,
                    dh_prev: IntervalVector) -> IntervalVector:
    """Difference of the RNN pre-activations ``a'(t) - a(t)``."""
    return affine_diff(dn, "W_hx", "W_hh", "b_h", x_t, h_prev, dh_prev)


def nonlinear_diff_rnn(act: Activation, a_bounds: IntervalVector, da: IntervalVector) -> IntervalVector:
    """Bounds on ``act(a + da) - act(a)`` neuron by neuron."""
    if len(a_bounds) != len(da):
        raise ValueError("value and difference vectors differ in length")
    return act_diff_bounds_vec(act, a_bounds, da)


def output_diff(dn: DiffNetwork, h_T: IntervalVector, dh_T: IntervalVector) -> IntervalVector:
    """``W'_y dh(T) + dW_y h(T) + db_y``."""
    if dn.arch == "ffnn":
        L = dn.net_a.n_layers
        w, b = f"W_{L}", f"b_{L}"
    else:
        w, b = "W_hy", "b_y"
    return affine_diff(dn, None, w, b, None, h_T, dh_T)


# ---------------------------------------------------------------------------
# Value bounds
# ---------------------------------------------------------------------------

def _pre_activation(net: Network, wh: str, wx: str, b: str, x_t: IntervalVector,
                    h_prev: IntervalVector) -> IntervalVector:
    return h_prev.matvec(net[wh]) + input_term(net[wx], x_t) + IntervalVector.point(net[b])


def value_bounds_step(net: Network, x_t: IntervalVector, state: LayerState) -> LayerState:
    """Value bounds of one recurrent step given the previous step's state.

    The returned state holds value bounds only; difference fields are empty.
    """
    if net.arch == "rnn":
        a = _pre_activation(net, "W_hh", "W_hx", "b_h", x_t, state.h)
        return LayerState(h=act_value_bounds(net.activation, a), dh=None, a=a)
    if net.arch == "lstm":
        gates = {v: _pre_activation(net, f"W_{v}h", f"W_{v}x", f"b_{v}", x_t, state.h)
                 for v in LSTM_GATES}
        sig = {v: act_value_bounds(SIG, gates[v]) for v in ("i", "f", "o")}
        c = sig["f"] * state.c + sig["i"] * act_value_bounds(TANH, gates["g"])
        h = sig["o"] * act_value_bounds(TANH, c)
        return LayerState(h=h, dh=None, c=c, gates=gates)
    raise ValueError(f"value_bounds_step handles recurrent nets, not {net.arch}")


def _initial_state(net: Network) -> LayerState:
    ell = net.dims.hidden
    return LayerState(h=IntervalVector.point(net.h0), dh=IntervalVector.zeros(ell),
                      c=IntervalVector.point(net.c0), dc=IntervalVector.zeros(ell))


def output_value_bounds(net: Network, region: InputRegion) -> IntervalVector:
    """Plain interval bound propagation of a single network's outputs."""
    if net.arch == "ffnn":
        h = region.vector
        L = net.n_layers
        for l in range(1, L):
            a = input_term(net[f"W_{l}"], h) if l == 1 else h.matvec(net[f"W_{l}"])
            h = act_value_bounds(net.activation, a + IntervalVector.point(net[f"b_{l}"]))
        return h.matvec(net[f"W_{L}"]) + IntervalVector.point(net[f"b_{L}"])
    state = _initial_state(net)
    for t in range(1, net.dims.steps + 1):
        state = value_bounds_step(net, region.step(t, net.dims.input), state)
    return state.h.matvec(net["W_hy"]) + IntervalVector.point(net["b_y"])


def naive_output_diff(dn: DiffNetwork, region: InputRegion) -> IntervalVector:
    """Baseline: subtract independently computed output bounds of both nets."""
    return output_value_bounds(dn.net_b, region) - output_value_bounds(dn.net_a, region)


# ---------------------------------------------------------------------------
# LSTM surfaces
# ---------------------------------------------------------------------------

def surface_bounds(kind: SurfaceKind, box: Box, opt: OptParams, val: ValidatorParams) -> Interval:
    """Proved enclosure of a product surface over a box.

    Candidate from differential evolution, widened until the checker proves
    it, then widened by the checker's ``delta`` so the result is sound outright.
    """
    if is_identically_zero(box.lo, box.hi):
        return Interval(0.0, 0.0)
    ext = de_extremize(kind, box, opt)
    cand = Interval(ext.min - PRE_WIDEN, ext.max + PRE_WIDEN)
    return validate_and_adjust(kind, box, cand, val).widen(val.delta)


def _cell_neuron(args):
    j, boxes_c, opt, val = args
    c1 = surface_bounds(SurfaceKind.F1, boxes_c[0], replace(opt, seed=opt.seed + 3 * j), val)
    c2 = surface_bounds(SurfaceKind.F2, boxes_c[1], replace(opt, seed=opt.seed + 3 * j + 1), val)
    return c1 + c2


def _hidden_neuron(args):
    j, box, opt, val = args
    return surface_bounds(SurfaceKind.H2, box, replace(opt, seed=opt.seed + 3 * j + 2), val)


def _box(*ivs: Interval) -> Box:
    return Box(tuple(ivs))


def _map(fn, items, jobs: int):
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(it) for it in items]


def lstm_cell_diff(gates: dict[str, IntervalVector], dgates: dict[str, IntervalVector],
                   c_prev: IntervalVector, dc_prev: IntervalVector, c: IntervalVector,
                   opt: OptParams | None = None, val: ValidatorParams | None = None,
                   jobs: int = 1, clock=None) -> tuple[IntervalVector, IntervalVector]:
    """Cell and hidden differences ``(dc(t), dh(t))`` of one LSTM step.

    ``dc = dc1 + dc2`` with ``dc1`` the forget-gate/cell product surface (F1)
    and ``dc2`` the input-gate/cell-gate surface (F2); ``dh`` is the output
    gate surface over ``(o_in, do_in, c(t), dc(t))``.
    """
    opt = opt or OptParams()
    val = val or ValidatorParams()
    ell = len(c)
    items = []
    for j in range(ell):
        b1 = _box(gates["f"][j], dgates["f"][j], c_prev[j], dc_prev[j])
        b2 = _box(gates["i"][j], dgates["i"][j], gates["g"][j], dgates["g"][j])
        items.append((j, (b1, b2), opt, val))
    if clock:
        clock()
    dc = IntervalVector.from_intervals(_map(_cell_neuron, items, jobs))
    if clock:
        clock()
    items = [(j, _box(gates["o"][j], dgates["o"][j], c[j], dc[j]), opt, val) for j in range(ell)]
    dh = IntervalVector.from_intervals(_map(_hidden_neuron, items, jobs))
    return dc, dh


# ---------------------------------------------------------------------------
# Pipelines
# ---------------------------------------------------------------------------

def _make_clock(start: float, deadline: float):
    def check():
        if time.monotonic() - start >= deadline:
            raise DeadlineExceeded(f"deadline of {deadline:g}s exceeded")
    return check


def _run_ffnn(dn: DiffNetwork, region: InputRegion, clock, diag):
    a_net = dn.net_a
    act = a_net.activation
    h = region.vector
    dh = IntervalVector.zeros(len(region))
    for l in range(1, a_net.n_layers):
        clock()
        W, b = f"W_{l}", f"b_{l}"
        if l == 1:
            a = input_term(a_net[W], h) + IntervalVector.point(a_net[b])
            da = _delta_input_term(dn, W, h) + _point_diff(dn.net_b[b], a_net[b])
        else:
            a = h.matvec(a_net[W]) + IntervalVector.point(a_net[b])
            da = affine_diff(dn, None, W, b, None, h, dh)
        h, dh = act_value_bounds(act, a), nonlinear_diff_rnn(act, a, da)
        diag.append({"layer": l, "max_da_width": float(da.width.max()),
                     "max_dh_width": float(dh.width.max())})
    return h, dh


def _run_rnn(dn: DiffNetwork, region: InputRegion, clock, diag):
    state = _initial_state(dn.net_a)
    state.dh = _point_diff(dn.net_b.h0, dn.net_a.h0)
    m = dn.dims.input
    for t in range(1, dn.dims.steps + 1):
        clock()
        x_t = region.step(t, m)
        new = value_bounds_step(dn.net_a, x_t, state)
        new.da = affine_diff_rnn(dn, x_t, state.h, state.dh)
        new.dh = nonlinear_diff_rnn(dn.activation, new.a, new.da)
        diag.append({"step": t, "max_da_width": float(new.da.width.max()),
                     "max_dh_width": float(new.dh.width.max())})
        state = new
    return state.h, state.dh


def _run_lstm(dn: DiffNetwork, region: InputRegion, clock, diag, opt, val, jobs):
    state = _initial_state(dn.net_a)
    state.dh = _point_diff(dn.net_b.h0, dn.net_a.h0)
    state.dc = _point_diff(dn.net_b.c0, dn.net_a.c0)
    m = dn.dims.input
    for t in range(1, dn.dims.steps + 1):
        clock()
        x_t = region.step(t, m)
        new = value_bounds_step(dn.net_a, x_t, state)
        new.dgates = {v: affine_diff(dn, f"W_{v}x", f"W_{v}h", f"b_{v}", x_t, state.h, state.dh)
                      for v in LSTM_GATES}
        step_opt = replace(opt, seed=opt.seed * 1_000_003 + 7919 * t)
        new.dc, new.dh = lstm_cell_diff(new.gates, new.dgates, state.c, state.dc, new.c,
                                        step_opt, val, jobs, clock)
        diag.append({"step": t, "max_dc_width": float(new.dc.width.max()),
                     "max_dh_width": float(new.dh.width.max())})
        state = new
    return state.h, state.dh


def verify(dn: DiffNetwork, region: InputRegion, epsilon: float,
           deadline: float = DEFAULT_DEADLINE, opt: OptParams | None = None,
           val: ValidatorParams | None = None, jobs: int = 1) -> VerdictReport:
    """Try to prove ``|f'(x) - f(x)| < epsilon`` for every ``x`` in the region."""
    opt = opt or OptParams()
    val = val or ValidatorParams()
    start = time.monotonic()
    clock = _make_clock(start, deadline)
    if len(region) != dn.dims.n_inputs:
        raise ValueError(f"region has {len(region)} variables, network expects {dn.dims.n_inputs}")
    diag: list[dict] = []
    try:
        if dn.arch == "ffnn":
            h, dh = _run_ffnn(dn, region, clock, diag)
        elif dn.arch == "rnn":
            h, dh = _run_rnn(dn, region, clock, diag)
        else:
            h, dh = _run_lstm(dn, region, clock, diag, opt, val, jobs)
        dy = output_diff(dn, h, dh)
    except DeadlineExceeded as exc:
        return VerdictReport(UNKNOWN, None, epsilon, time.monotonic() - start, diag, str(exc))
    except ValidationError as exc:
        log.info("validation failed: %s", exc)
        return VerdictReport(UNKNOWN, None, epsilon, time.monotonic() - start, diag, str(exc))

    ok = bool(np.all(dy.mag < epsilon))
    elapsed = time.monotonic() - start
    msg = "" if ok else f"max |delta_y| = {float(dy.mag.max()):.6g} is not below epsilon"
    log.debug("verify %s: %s in %.3fs", dn.arch, PROVED if ok else UNKNOWN, elapsed)
    return VerdictReport(PROVED if ok else UNKNOWN, dy, epsilon, elapsed, diag, msg)
