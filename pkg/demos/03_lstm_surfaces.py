"""Optimise, then prove: bounds for the LSTM product surfaces.

The cell-state difference of an LSTM is a sum of products such as
sig(x + dx) * (y + dy) - sig(x) * y. There is no closed form for its extremes
over a box, so a global optimiser proposes a candidate range and an interval
branch-and-prune checker widens it until no point of the box can escape.
"""

from diffnn.global_opt import OptParams, de_extremize
from diffnn.interval import Box, Interval
from diffnn.surfaces import SurfaceKind
from diffnn.validator import Side, check_exceeds, validate_and_adjust

box = Box.from_bounds([-1.0, -0.1, 0.2, -0.05], [1.0, 0.1, 0.8, 0.05])
for kind in (SurfaceKind.F1, SurfaceKind.F2):
    ext = de_extremize(kind, box, OptParams(seed=1))
    proved = validate_and_adjust(kind, box, Interval(ext.min, ext.max))
    print(f"{kind.value}: candidate [{ext.min:.6f}, {ext.max:.6f}] -> proved {proved}")

# The checker on its own: is F2 ever above 0.3 on a single point?
point = Box.from_bounds([0, 0, 0, 1], [0, 0, 0, 1])
print("F2 > 0.3 ?", check_exceeds(SurfaceKind.F2, point, 0.3, Side.UPPER).kind)
print("F2 > 0.4 ?", check_exceeds(SurfaceKind.F2, point, 0.4, Side.UPPER).kind)
