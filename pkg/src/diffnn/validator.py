"""Interval branch-and-prune checker with an unsat / delta-sat contract.

``check_exceeds(kind, box, bound, Side.UPPER, params)`` asks whether
``f > bound`` is satisfiable on the box.  ``Unsat`` is a proof that
``f <= bound + delta`` everywhere on the box.  ``DeltaSat`` carries a witness
sub-box and is returned either for a real violation found at a sub-box midpoint
or, conservatively, when the search budget runs out.

``validate_and_adjust`` widens a candidate interval in fixed steps until both
sides are proved.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .interval import Box, Interval
from .surfaces import SurfaceKind, surface_interval, surface_value

log = logging.getLogger(__name__)


class Side(str, Enum):
    UPPER = "upper"
    LOWER = "lower"


class ValidationError(RuntimeError):
    """The widening loop hit its iteration cap."""


@dataclass(frozen=True)
class ValidatorParams:
    delta: float = 1e-4
    max_depth: int = 40
    adjust: float = 0.01
    max_iterations: int = 200
    max_frontier: int = 4096

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if not self.adjust > 0:
            raise ValueError("adjust must be positive")


@dataclass(frozen=True)
class Verdict:
    unsat: bool
    witness: Box | None = None
    value: float | None = None
    # True when the witness is a genuine midpoint violation, not budget exhaustion
    exact: bool = False

    @property
    def kind(self) -> str:
        return "unsat" if self.unsat else "delta-sat"

    def __bool__(self) -> bool:
        # truthy when satisfiable, mirroring "sat = CheckSat(...)"
        return not self.unsat


UNSAT = Verdict(True)


def _pinned(box: Box, side: Side) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = box.lo, box.hi
    # monotone in dy: the extreme sits on the matching dy face
    pin = hi[3] if side is Side.UPPER else lo[3]
    lo[3] = hi[3] = pin
    return lo[None, :], hi[None, :]


def _witness(lo, hi, value, exact) -> Verdict:
    return Verdict(False, Box.from_bounds(lo, hi), float(value), exact)


def check_exceeds(kind: SurfaceKind, box: Box, bound: float, side: Side,
                  params: ValidatorParams | None = None) -> Verdict:
    params = params or ValidatorParams()
    kind = SurfaceKind(kind)
    side = Side(side)
    if box.ndim != 4:
        raise ValueError("surface boxes have exactly 4 dimensions")
    upper = side is Side.UPPER
    lo, hi = _pinned(box, side)

    for depth in range(params.max_depth + 1):
        flo, fhi = surface_interval(kind, lo, hi)
        keep = fhi > bound + params.delta if upper else flo < bound - params.delta
        if not keep.any():
            return UNSAT
        lo, hi = lo[keep], hi[keep]
        fval = (fhi if upper else flo)[keep]

        mid = 0.5 * lo + 0.5 * hi
        fm = surface_value(kind, *mid.T)
        viol = fm > bound if upper else fm < bound
        if viol.any():
            i = int(np.argmax(viol))
            return _witness(lo[i], hi[i], fm[i], True)

        widths = hi - lo
        dim = np.argmax(widths, axis=1)
        rows = np.arange(len(lo))
        stuck = widths[rows, dim] == 0
        if depth == params.max_depth or len(lo) > params.max_frontier or stuck.any():
            i = int(np.argmax(stuck)) if stuck.any() else 0
            log.debug("conservative delta-sat at depth %d with %d open boxes", depth, len(lo))
            return _witness(lo[i], hi[i], fval[i], False)

        cut = mid[rows, dim]
        left_hi = hi.copy()
        left_hi[rows, dim] = cut
        right_lo = lo.copy()
        right_lo[rows, dim] = cut
        lo = np.concatenate([lo, right_lo])
        hi = np.concatenate([left_hi, hi])
    return UNSAT  # pragma: no cover - loop always returns


def adjust_bound(kind: SurfaceKind, box: Box, bound: float, side: Side,
                 params: ValidatorParams | None = None) -> tuple[float, int]:
    """Widen one side until it is proved; returns the bound and the step count."""
    params = params or ValidatorParams()
    side = Side(side)
    step = params.adjust if side is Side.UPPER else -params.adjust
    steps = 0
    while check_exceeds(kind, box, bound, side, params):
        if steps >= params.max_iterations:
            raise ValidationError(
                f"{SurfaceKind(kind).value} {side.value} bound not proved after {steps} widenings")
        bound = bound + step
        steps += 1
    return bound, steps


def validate_and_adjust(kind: SurfaceKind, box: Box, candidate: Interval,
                        params: ValidatorParams | None = None) -> Interval:
    """Smallest widening of ``candidate`` (in ``adjust`` steps) proved sound.

    The result bounds the surface on the box up to the checker's ``delta``.
    """
    params = params or ValidatorParams()
    hi, _ = adjust_bound(kind, box, candidate.hi, Side.UPPER, params)
    lo, _ = adjust_bound(kind, box, candidate.lo, Side.LOWER, params)
    return Interval(lo, hi)
