"""Interval arithmetic and why symbolic bounds help.

Take p = 5x and q = 4x with x in [-1, 1]. Plain interval subtraction forgets
that p and q move together and reports a range nine times too wide. Carrying
affine expressions in x keeps the dependency.
"""

import numpy as np

from diffnn.interval import Box, Interval, concretize, sym_affine, sym_identity

p = Interval(-5.0, 5.0)
q = Interval(-4.0, 4.0)
print("concrete p - q:", p - q)

x = sym_identity(1)
pq = sym_affine(x, np.array([[5.0], [4.0]]))          # rows: p = 5x, q = 4x
diff = sym_affine(pq, np.array([[1.0, -1.0]]))        # p - q
print("symbolic p - q: lower coef", diff.lower_coef[0], "upper coef", diff.upper_coef[0])
print("concretized over x in [-1, 1]:", concretize(diff, Box.from_bounds([-1.0], [1.0])))

# Every endpoint is rounded outward only when the floating-point result is
# inexact, so exact computations stay exact.
print("0.1 + 0.2 enclosed by", Interval.point(0.1) + Interval.point(0.2))
print("1 + 2 stays", Interval.point(1.0) + Interval.point(2.0))
