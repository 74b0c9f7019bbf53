"""Independent reference computations used by the tests.

Nothing here imports the package's numerical kernels: the oracles use exact
rationals, the ``math`` module, brute-force grids or plain loops.
"""

import itertools
import math
from fractions import Fraction

import numpy as np


def float16_oracle(v: float) -> float:
    """Round a double to binary16 (ties to even) with exact rational arithmetic.

    Values beyond the largest finite binary16 saturate to +-65504, matching
    the clamping policy of the quantizer.
    """
    if v == 0:
        return v
    sign = -1 if v < 0 else 1
    q = Fraction(abs(v))
    e = max(math.floor(math.log2(q)), -14)
    # correct log2 rounding near powers of two
    while Fraction(2) ** e > q and e > -14:
        e -= 1
    while Fraction(2) ** (e + 1) <= q:
        e += 1
    ulp = Fraction(2) ** (e - 10)
    n = round(q / ulp)  # Fraction.__round__ is ties-to-even
    r = n * ulp
    if r > 65504:
        r = Fraction(65504)
    return sign * float(r)


def sigmoid(u: float) -> float:
    if u >= 0:
        return 1.0 / (1.0 + math.exp(-u))
    e = math.exp(u)
    return e / (1.0 + e)


ACTS = {"sigmoid": sigmoid, "tanh": math.tanh}


def diff_candidates(act: str, xlo, xhi, dlo, dhi):
    """Extremes of act(x+d)-act(x) from the endpoint / -d/2 candidate set."""
    f = ACTS[act]
    vals_lo, vals_hi = [], []
    for d, out in ((dlo, vals_lo), (dhi, vals_hi)):
        crit = min(max(-d / 2, xlo), xhi)
        for x in (xlo, xhi, crit):
            out.append(f(x + d) - f(x))
    return min(vals_lo), max(vals_hi)


def np_sigmoid(u):
    u = np.asarray(u, dtype=float)
    return 0.5 * (1.0 + np.tanh(0.5 * u))


def surface_np(kind, x, dx, y, dy):
    if kind == "f1":
        return np_sigmoid(x + dx) * (y + dy) - np_sigmoid(x) * y
    return np_sigmoid(x + dx) * np.tanh(y + dy) - np_sigmoid(x) * np.tanh(y)


def reduced_grid_extrema(kind, lo, hi, n):
    """Min (at dy_lo) and max (at dy_hi) of a surface on an n^3 grid of (x, dx, y)."""
    xs = np.linspace(lo[0], hi[0], n)
    ds = np.linspace(lo[1], hi[1], n)
    ys = np.linspace(lo[2], hi[2], n)
    X, D = np.meshgrid(xs, ds, indexing="ij")
    s1 = np_sigmoid(X + D)[..., None]
    s0 = np_sigmoid(X)[..., None]
    out = []
    for dy in (lo[3], hi[3]):
        if kind == "f1":
            vals = (s1 - s0) * ys + s1 * dy
        else:
            vals = s1 * np.tanh(ys + dy) - s0 * np.tanh(ys)
        out.append(vals)
    return float(out[0].min()), float(out[1].max())


def corners(lo, hi):
    return np.array(list(itertools.product(*zip(lo, hi))))
