"""Candidate extrema of the F1/F2 surfaces by differential evolution.

Both surfaces are monotone in ``dy``, so the minimum search pins ``dy`` at its
lower bound and the maximum search at its upper bound, leaving a search over
``(x, dx, y)``.  The results are candidates only; soundness comes from
:mod:`diffnn.validator`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import differential_evolution
from scipy.stats import qmc

from .interval import Box
from .surfaces import SurfaceKind, surface_value


@dataclass(frozen=True)
class OptParams:
    population: int = 30
    generations: int = 100
    crossover: float = 0.9
    weight: float = 0.7
    seed: int = 0
    restarts: int = 2

    def __post_init__(self):
        if self.population < 4:
            raise ValueError("population must be at least 4")
        if not (0 < self.crossover <= 1 and 0 < self.weight <= 1):
            raise ValueError("crossover and differential weight must lie in (0, 1]")
        if self.generations < 1 or self.restarts < 1:
            raise ValueError("generations and restarts must be positive")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@dataclass(frozen=True)
class Extrema:
    min: float
    max: float
    argmin: np.ndarray
    argmax: np.ndarray


def _initial_population(lo, hi, n, seed):
    corners = np.array(list(itertools.product(*zip(lo, hi))))
    corners = np.unique(corners, axis=0)[:n]
    rest = n - len(corners)
    if rest <= 0:
        return corners
    sample = qmc.LatinHypercube(d=len(lo), seed=np.random.default_rng(seed)).random(rest)
    return np.vstack([corners, qmc.scale(sample, lo, hi)])


def _search(fun, lo, hi, params: OptParams, seed: np.random.SeedSequence):
    """Minimise ``fun`` over the box ``[lo, hi]``; returns (value, argmin)."""
    if np.all(lo == hi):
        return float(fun(lo[:, None])[0]), lo.copy()
    free = lo < hi
    base = lo.copy()

    def reduced(z):
        full = np.repeat(base[:, None], z.shape[1], axis=1)
        full[free] = z
        return fun(full)

    # keep at least 5 members, the solver's minimum
    n = max(params.population, 5)
    init_seed, de_seed = seed.spawn(2)
    init = _initial_population(lo[free], hi[free], n, init_seed)
    res = differential_evolution(
        reduced,
        list(zip(lo[free], hi[free])),
        init=init,
        maxiter=params.generations,
        mutation=params.weight,
        recombination=params.crossover,
        seed=np.random.default_rng(de_seed),
        tol=0,
        atol=0,
        polish=False,
        vectorized=True,
        updating="deferred",
    )
    arg = base.copy()
    arg[free] = np.clip(res.x, lo[free], hi[free])
    return float(fun(arg[:, None])[0]), arg


def de_extremize(kind: SurfaceKind, box: Box, params: OptParams | None = None) -> Extrema:
    """Best found minimum and maximum of the surface over a 4-D box.

    Witnesses are ``(x, dx, y, dy)`` points inside the box whose re-evaluated
    surface values are the reported numbers.
    """
    params = params or OptParams()
    kind = SurfaceKind(kind)
    if box.ndim != 4:
        raise ValueError("surface boxes have exactly 4 dimensions")
    lo, hi = box.lo, box.hi

    def value(z):
        return surface_value(kind, z[0], z[1], z[2], z[3])

    results = {}
    for sign, pin in ((1.0, lo[3]), (-1.0, hi[3])):
        plo, phi = lo.copy(), hi.copy()
        plo[3] = phi[3] = pin
        best = None
        for r in range(params.restarts):
            seed = np.random.SeedSequence([params.seed, r, int(sign < 0)])
            val, arg = _search(lambda z: sign * value(z), plo, phi, params, seed)
            if best is None or val < best[0]:
                best = (val, arg)
        results[sign] = (sign * best[0], best[1])

    (vmin, amin), (vmax, amax) = results[1.0], results[-1.0]
    return Extrema(vmin, vmax, amin, amax)
