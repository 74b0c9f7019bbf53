"""Bounding act(x + d) - act(x) directly.

A verifier that bounds each network separately pays for the full range of
both activations. Bounding the difference itself is far tighter: for a fixed
shift the difference has a single interior extremum at x = -d/2, so the
extremes lie at the ends of the x-range or at that critical point.
"""

import numpy as np

from diffnn.interval import Interval
from diffnn.netmodel import Activation
from diffnn.scalar_diff import DiffBoundQuery, act_diff_bounds, act_value_bounds

x = Interval(-2.0, 2.0)
d = Interval(-1.0, -0.9)
direct = act_diff_bounds(DiffBoundQuery(Activation.SIGMOID, x, d))
shifted = act_value_bounds(Activation.SIGMOID, x + d)
plain = act_value_bounds(Activation.SIGMOID, x)
print("direct difference bound :", direct)
print("subtracting value bounds:", shifted - plain)

rng = np.random.default_rng(0)
xs = rng.uniform(x.lo, x.hi, 100_000)
ds = rng.uniform(d.lo, d.hi, 100_000)
sig = Activation.SIGMOID
vals = sig(xs + ds) - sig(xs)
print(f"sampled range            : [{vals.min():.6f}, {vals.max():.6f}]")
