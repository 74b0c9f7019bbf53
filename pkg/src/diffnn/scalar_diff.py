"""Sound bounds on activation values and activation differences.

For a monotone activation ``act`` with an even derivative (sigmoid, tanh) the
difference ``f(x, d) = act(x + d) - act(x)`` is increasing in ``d``, so its
minimum over a box sits at ``d = d_lo`` and its maximum at ``d = d_hi``.  For a
fixed ``d`` the curve in ``x`` is a single bump (``d >= 0``) or dip (``d < 0``)
centred at ``x = -d/2``; the extremum over ``[x_lo, x_hi]`` is therefore one of
``x_lo``, ``x_hi`` or ``clip(-d/2, x_lo, x_hi)``.  Evaluating those three
candidates at both ``d`` extremes covers every case of the usual 12-way split.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .interval import UNIT_ROUNDOFF, Interval, IntervalVector
from .netmodel import Activation

# generous multiple of the unit roundoff covering exp/tanh/div error
_ACT_REL_ERR = 8 * UNIT_ROUNDOFF
_TINY = 2.0**-1060


@dataclass(frozen=True)
class DiffBoundQuery:
    act: Activation
    x: Interval
    d: Interval


def _act_err(v):
    return _ACT_REL_ERR * np.abs(v) + _TINY


def act_value_bounds_arrays(act: Activation, lo, hi) -> tuple[np.ndarray, np.ndarray]:
    act = Activation(act)
    vlo = act(lo)
    vhi = act(hi)
    rlo, rhi = act.range
    out_lo = np.clip(vlo - _act_err(vlo), rlo, rhi)
    out_hi = np.clip(vhi + _act_err(vhi), rlo, rhi)
    if act is Activation.TANH:
        # tanh(0) = 0 is exact
        out_lo = np.where(lo == 0, 0.0, out_lo)
        out_hi = np.where(hi == 0, 0.0, out_hi)
    return out_lo, out_hi


def act_value_bounds(act: Activation, x):
    """``[act(x.lo), act(x.hi)]`` rounded outward, within the activation range.

    Accepts an :class:`Interval` or an :class:`IntervalVector`.
    """
    lo, hi = act_value_bounds_arrays(act, x.lo, x.hi)
    if isinstance(x, Interval):
        return Interval(float(lo), float(hi))
    return IntervalVector(lo, hi)


def diff_value(act: Activation, x, d):
    """Plain floating-point ``act(x + d) - act(x)``."""
    act = Activation(act)
    return act(np.add(x, d)) - act(x)


def _diff_with_err(act: Activation, x, d):
    s = np.add(x, d)
    a1 = act(s)
    a2 = act(x)
    f = a1 - a2
    err = 2 * UNIT_ROUNDOFF * np.abs(s) + _ACT_REL_ERR * (np.abs(a1) + np.abs(a2)) \
        + 2 * UNIT_ROUNDOFF * np.abs(f) + _TINY
    # d == 0 gives an exact zero
    err = np.where(d == 0, 0.0, err)
    f = np.where(d == 0, 0.0, f)
    return f, err


def _candidates(xlo, xhi, d):
    crit = np.clip(-0.5 * d, xlo, xhi)
    return np.stack([xlo, xhi, crit])


def act_diff_bounds_arrays(act: Activation, xlo, xhi, dlo, dhi) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised core of :func:`act_diff_bounds`; arrays broadcast together."""
    act = Activation(act)
    xlo, xhi, dlo, dhi = np.broadcast_arrays(*(np.asarray(v, dtype=np.float64) for v in (xlo, xhi, dlo, dhi)))

    cand = _candidates(xlo, xhi, dlo)
    f, err = _diff_with_err(act, cand, dlo[None])
    lo = (f - err).min(axis=0)

    cand = _candidates(xlo, xhi, dhi)
    f, err = _diff_with_err(act, cand, dhi[None])
    hi = (f + err).max(axis=0)

    lo = np.where(dlo >= 0, np.maximum(lo, 0.0), lo)
    hi = np.where(dhi <= 0, np.minimum(hi, 0.0), hi)
    span = 2.0 if act is Activation.TANH else 1.0
    return np.clip(lo, -span, span), np.clip(hi, -span, span)


def act_diff_bounds(q: DiffBoundQuery) -> Interval:
    """Bounds on ``act(x + d) - act(x)`` over ``x in q.x``, ``d in q.d``."""
    lo, hi = act_diff_bounds_arrays(q.act, q.x.lo, q.x.hi, q.d.lo, q.d.hi)
    return Interval(float(lo), float(hi))


def act_diff_bounds_vec(act: Activation, x: IntervalVector, d: IntervalVector) -> IntervalVector:
    """Neuron-wise :func:`act_diff_bounds` over whole layers."""
    return IntervalVector(*act_diff_bounds_arrays(act, x.lo, x.hi, d.lo, d.hi))
