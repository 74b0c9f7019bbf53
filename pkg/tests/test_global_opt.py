import numpy as np
import pytest

from diffnn.global_opt import OptParams, de_extremize
from diffnn.interval import Box
from diffnn.surfaces import SurfaceKind, surface_interval, surface_value
from oracles import reduced_grid_extrema, surface_np

HALF_TANH_1 = 0.38079707797788244406  # 0.5 * tanh(1), mpmath


def random_box(rng):
    c = rng.uniform([-4, -1, -2, -1], [4, 1, 2, 1])
    w = rng.uniform(0, [2, 0.5, 1.5, 0.5])
    return Box.from_bounds(c - w / 2, c + w / 2)


class TestExamples:
    def test_zero_surface(self):
        box = Box.from_bounds([-1, 0, -2, 0], [1, 0, 2, 0])
        ext = de_extremize(SurfaceKind.F1, box, OptParams(generations=10))
        assert ext.min == 0.0 and ext.max == 0.0

    def test_degenerate_box(self):
        box = Box.from_bounds([0, 0, 0, 1], [0, 0, 0, 1])
        ext = de_extremize(SurfaceKind.F2, box)
        assert ext.min == pytest.approx(HALF_TANH_1, rel=1e-15)
        assert ext.max == pytest.approx(HALF_TANH_1, rel=1e-15)

    @pytest.mark.parametrize("kind", ["f1", "f2"])
    def test_against_grid(self, kind, rng):
        for _ in range(5):
            box = random_box(rng)
            gmin, gmax = reduced_grid_extrema(kind, box.lo, box.hi, 50)
            ext = de_extremize(SurfaceKind(kind), box)
            assert ext.min <= gmin + 1e-6
            assert ext.max >= gmax - 1e-6

    def test_witnesses(self, rng):
        box = random_box(rng)
        ext = de_extremize(SurfaceKind.F1, box)
        assert box.contains(ext.argmin) and box.contains(ext.argmax)
        assert surface_value("f1", *ext.argmin) == ext.min
        assert surface_value("f1", *ext.argmax) == ext.max
        # the reported values are attainable, so they sit inside a sound enclosure
        flo, fhi = surface_interval("f1", box.lo[None], box.hi[None])
        assert flo[0] <= ext.min <= ext.max <= fhi[0]

    def test_deterministic(self, rng):
        box = random_box(rng)
        a = de_extremize(SurfaceKind.F2, box, OptParams(seed=4))
        b = de_extremize(SurfaceKind.F2, box, OptParams(seed=4))
        assert (a.min, a.max) == (b.min, b.max)
        np.testing.assert_array_equal(a.argmin, b.argmin)

    def test_bad_params(self):
        with pytest.raises(ValueError):
            OptParams(population=2)
        with pytest.raises(ValueError):
            OptParams(crossover=1.5)
        with pytest.raises(ValueError):
            de_extremize(SurfaceKind.F1, Box.from_bounds([0, 0], [1, 1]))


@pytest.mark.parametrize("kind", ["f1", "f2"])
def test_monotone_in_dy(kind, rng):
    for _ in range(200):
        box = random_box(rng)
        p = rng.uniform(box.lo, box.hi)
        f = surface_np(kind, *p)
        assert surface_np(kind, p[0], p[1], p[2], box.lo[3]) <= f + 1e-15
        assert surface_np(kind, p[0], p[1], p[2], box.hi[3]) >= f - 1e-15


def test_surface_interval_contains_samples(rng):
    for kind in ("f1", "f2", "h2"):
        for _ in range(100):
            box = random_box(rng)
            flo, fhi = surface_interval(kind, box.lo[None], box.hi[None])
            pts = rng.uniform(box.lo, box.hi, size=(500, 4))
            v = surface_value(kind, *pts.T)
            assert np.all(v >= flo[0] - 1e-15) and np.all(v <= fhi[0] + 1e-15)
