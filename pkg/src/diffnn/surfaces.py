"""The LSTM product-difference surfaces and their interval extensions.

``F1(x, dx, y, dy) = sig(x + dx) * (y + dy) - sig(x) * y``
``F2(x, dx, y, dy) = sig(x + dx) * tanh(y + dy) - sig(x) * tanh(y)``

``H2`` is ``F2`` applied to the hidden state (output gate times ``tanh`` of the
cell state).  Both surfaces are increasing in ``dy`` because ``sig >= 0`` and
``tanh`` is increasing.

Boxes are passed as ``(N, 4)`` arrays of lower and upper corners with the
variable order ``(x, dx, y, dy)``.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from .interval import add_down, add_up, mul_down, mul_up
from .netmodel import Activation, sigmoid, tanh
from .scalar_diff import act_diff_bounds_arrays, act_value_bounds_arrays

VARS = ("x", "dx", "y", "dy")


class SurfaceKind(str, Enum):
    F1 = "f1"
    F2 = "f2"
    H2 = "h2"

    @property
    def base(self) -> SurfaceKind:
        return SurfaceKind.F2 if self is SurfaceKind.H2 else self


def surface_value(kind: SurfaceKind, x, dx, y, dy):
    """Point evaluation (broadcasting)."""
    kind = SurfaceKind(kind)
    if kind is SurfaceKind.F1:
        return sigmoid(np.add(x, dx)) * np.add(y, dy) - sigmoid(x) * y
    return sigmoid(np.add(x, dx)) * tanh(np.add(y, dy)) - sigmoid(x) * tanh(y)


def _imul(alo, ahi, blo, bhi):
    a = np.stack([alo, alo, ahi, ahi])
    b = np.stack([blo, bhi, blo, bhi])
    return mul_down(a, b).min(axis=0), mul_up(a, b).max(axis=0)


def _iadd(alo, ahi, blo, bhi):
    return add_down(alo, blo), add_up(ahi, bhi)


def surface_interval(kind: SurfaceKind, lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sound enclosure of the surface over each box.

    The surfaces are split into a difference part bounded with the exact
    activation-difference ranges and a remainder, in two ways; the two
    enclosures are intersected.
    """
    kind = SurfaceKind(kind)
    xl, dxl, yl, dyl = lo.T
    xh, dxh, yh, dyh = hi.T
    sig = Activation.SIGMOID

    # sig(x + dx) - sig(x)
    D = act_diff_bounds_arrays(sig, xl, xh, dxl, dxh)
    Sx = act_value_bounds_arrays(sig, xl, xh)
    Sxd = act_value_bounds_arrays(sig, add_down(xl, dxl), add_up(xh, dxh))
    Yd = (add_down(yl, dyl), add_up(yh, dyh))

    if kind is SurfaceKind.F1:
        # D * y + sig(x + dx) * dy
        e1 = _iadd(*_imul(*D, yl, yh), *_imul(*Sxd, dyl, dyh))
        # D * (y + dy) + sig(x) * dy
        e2 = _iadd(*_imul(*D, *Yd), *_imul(*Sx, dyl, dyh))
    else:
        th = Activation.TANH
        Dt = act_diff_bounds_arrays(th, yl, yh, dyl, dyh)
        Ty = act_value_bounds_arrays(th, yl, yh)
        Tyd = act_value_bounds_arrays(th, *Yd)
        # D * tanh(y + dy) + sig(x) * (tanh(y + dy) - tanh(y))
        e1 = _iadd(*_imul(*D, *Tyd), *_imul(*Sx, *Dt))
        # D * tanh(y) + sig(x + dx) * (tanh(y + dy) - tanh(y))
        e2 = _iadd(*_imul(*D, *Ty), *_imul(*Sxd, *Dt))
    return np.maximum(e1[0], e2[0]), np.minimum(e1[1], e2[1])


def is_identically_zero(lo, hi) -> bool:
    """True when both difference variables are pinned at exactly zero."""
    return lo[1] == hi[1] == 0.0 and lo[3] == hi[3] == 0.0
