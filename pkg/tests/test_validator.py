import numpy as np
import pytest

from diffnn.interval import Box, Interval
from diffnn.surfaces import SurfaceKind
from diffnn.validator import (Side, ValidationError, ValidatorParams, adjust_bound,
                              check_exceeds, validate_and_adjust)
from oracles import reduced_grid_extrema, sigmoid

DEGEN = Box.from_bounds([0, 0, 0, 1], [0, 0, 0, 1])


class TestCheck:
    def test_zero_surface_unsat(self):
        box = Box.from_bounds([-1, 0, -2, 0], [1, 0, 2, 0])
        assert check_exceeds(SurfaceKind.F1, box, 0.0, Side.UPPER).unsat
        assert check_exceeds(SurfaceKind.F1, box, 0.0, Side.LOWER).unsat

    def test_degenerate_sat(self):
        v = check_exceeds(SurfaceKind.F2, DEGEN, 0.3, Side.UPPER)
        assert not v.unsat and v.kind == "delta-sat"
        assert v.exact and v.value == pytest.approx(0.380797, abs=1e-6)
        assert v.witness.contains([0, 0, 0, 1])

    def test_degenerate_unsat(self):
        v = check_exceeds(SurfaceKind.F2, DEGEN, 0.4, Side.UPPER, ValidatorParams(delta=1e-4))
        assert v.unsat and v.kind == "unsat" and not v

    def test_budget_exhaustion_is_conservative(self):
        # bound exactly at the maximum: the interval test can never clear it
        box = Box.from_bounds([0, 0, 0, 0.5], [1, 0.5, 1, 0.5])
        hi = float(np.max([sigmoid(x + d) * (y + 0.5) - sigmoid(x) * y
                           for x in (0, 1) for d in (0, .5) for y in (0, 1)]))
        v = check_exceeds(SurfaceKind.F1, box, hi - 1e-3, Side.UPPER,
                          ValidatorParams(max_depth=3))
        assert not v.unsat


class TestAdjust:
    def test_zero_candidate(self):
        box = Box.from_bounds([-1, 0, -2, 0], [1, 0, 2, 0])
        assert validate_and_adjust(SurfaceKind.F1, box, Interval(0, 0)) == Interval(0, 0)

    def test_single_widening(self):
        # F1 with dx = dy = 0 except dy pinned; known maximum on a point-like box
        box = Box.from_bounds([0, 0, 1, 0.2], [0, 0, 1, 0.2])
        true = 0.5 * 0.2  # sigmoid(0) * dy
        hi, steps = adjust_bound(SurfaceKind.F1, box, true - 0.005, Side.UPPER)
        assert steps == 1 and hi == pytest.approx(true + 0.005)
        lo, steps = adjust_bound(SurfaceKind.F1, box, true + 0.005, Side.LOWER)
        assert steps == 1 and lo == pytest.approx(true - 0.005)

    def test_iteration_cap(self):
        box = Box.from_bounds([0, 0, 1, 0.2], [0, 0, 1, 0.2])
        with pytest.raises(ValidationError):
            adjust_bound(SurfaceKind.F1, box, -5.0, Side.UPPER, ValidatorParams(max_iterations=3))

    def test_bad_params(self):
        with pytest.raises(ValueError):
            ValidatorParams(delta=0)


@pytest.mark.parametrize("kind", ["f1", "f2"])
def test_output_sound_and_wider(kind, rng):
    for _ in range(10):
        c = rng.uniform([-3, -0.5, -2, -0.5], [3, 0.5, 2, 0.5])
        w = rng.uniform(0, [1, 0.3, 1, 0.3])
        box = Box.from_bounds(c - w / 2, c + w / 2)
        gmin, gmax = reduced_grid_extrema(kind, box.lo, box.hi, 60)
        mid = 0.5 * (gmin + gmax)
        cand = Interval(mid, mid)
        out = validate_and_adjust(SurfaceKind(kind), box, cand)
        assert out.lo <= cand.lo and out.hi >= cand.hi
        assert out.lo - 1e-4 <= gmin and gmax <= out.hi + 1e-4
