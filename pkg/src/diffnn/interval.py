"""Interval arithmetic and symbolic affine bounds with outward rounding.

Endpoints are IEEE binary64.  Every primitive operation rounds its result
outward: the exact real result of the operation is checked with an
error-free transformation (TwoSum / TwoProduct) and the endpoint is moved one
ULP away from the interval whenever the floating-point result is inexact.  Exact
results (in particular exact zeros) therefore stay put, which keeps the
"zero difference" fixpoint of the verifier exact.

Two representations are provided:

* :class:`Interval` -- a scalar ``[lo, hi]`` value type.
* :class:`IntervalVector` -- a pair of numpy arrays, used by the propagation
  engine where all neurons of a layer are processed at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "Interval",
    "IntervalVector",
    "Box",
    "SymBounds",
    "iv_add",
    "iv_sub",
    "iv_scale",
    "iv_mul",
    "sym_identity",
    "sym_affine",
    "concretize",
]

UNIT_ROUNDOFF = 2.0**-53
# products smaller than this may have lost bits to gradual underflow
_UNDERFLOW_GUARD = 2.0**-960
_SPLITTER = 134217729.0  # 2**27 + 1


# ---------------------------------------------------------------------------
# Directed rounding kernels (numpy, elementwise)
# ---------------------------------------------------------------------------

def _down(x):
    return np.nextafter(x, -np.inf)


def _up(x):
    return np.nextafter(x, np.inf)


def _two_sum_err(a, b, s):
    bb = s - a
    return (a - (s - bb)) + (b - bb)


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod_err(a, b, p):
    ah, al = _split(a)
    bh, bl = _split(b)
    return al * bl - (((p - ah * bh) - al * bh) - ah * bl)


def add_down(a, b):
    with np.errstate(invalid="ignore", over="ignore"):
        s = np.add(a, b)
        e = _two_sum_err(a, b, s)
    return np.where(e < 0, _down(s), s)


def add_up(a, b):
    with np.errstate(invalid="ignore", over="ignore"):
        s = np.add(a, b)
        e = _two_sum_err(a, b, s)
    return np.where(e > 0, _up(s), s)


def _mul_err(a, b, p):
    with np.errstate(invalid="ignore", over="ignore"):
        e = _two_prod_err(a, b, p)
    # Dekker's product is only exact away from underflow; be conservative there
    tiny = (np.abs(p) < _UNDERFLOW_GUARD) & (a != 0) & (b != 0)
    return e, tiny


def mul_down(a, b):
    p = np.multiply(a, b)
    e, tiny = _mul_err(a, b, p)
    return np.where((e < 0) | tiny, _down(p), p)


def mul_up(a, b):
    p = np.multiply(a, b)
    e, tiny = _mul_err(a, b, p)
    return np.where((e > 0) | tiny, _up(p), p)


def _gamma(n: int) -> float:
    nu = n * UNIT_ROUNDOFF
    return nu / (1.0 - nu)


def matvec_bounds(W: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Outward-rounded enclosure of ``W @ v`` for every ``v`` in ``[lo, hi]``.

    The products are accumulated by BLAS in unknown order, so instead of
    per-operation rounding a standard a-priori bound
    ``gamma(n + 2) * |W| @ max(|lo|, |hi|)`` is subtracted/added.
    """
    W = np.asarray(W, dtype=np.float64)
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    if W.ndim != 2 or W.shape[1] != lo.shape[0] or lo.shape != hi.shape:
        raise ValueError(f"dimension mismatch: W{W.shape} vs vector {lo.shape}")
    n = W.shape[1]
    Wp = np.maximum(W, 0.0)
    Wn = np.minimum(W, 0.0)
    out_lo = Wp @ lo + Wn @ hi
    out_hi = Wp @ hi + Wn @ lo
    mag = np.abs(W) @ np.maximum(np.abs(lo), np.abs(hi))
    err = _gamma(n + 2) * mag + np.where(mag > 0, (n + 1) * 2.0**-1074, 0.0)
    out_lo = np.where(err > 0, _down(out_lo - err), out_lo)
    out_hi = np.where(err > 0, _up(out_hi + err), out_hi)
    return out_lo, out_hi


# ---------------------------------------------------------------------------
# Scalar interval
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Interval:
    """A closed, finite interval ``[lo, hi]``."""

    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError(f"interval endpoints must be finite, got [{lo}, {hi}]")
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, x: float) -> Interval:
        return cls(x, x)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * self.lo + 0.5 * self.hi

    @property
    def mag(self) -> float:
        return max(abs(self.lo), abs(self.hi))

    def contains(self, x, tol: float = 0.0) -> bool:
        return bool(np.all((self.lo - tol <= np.asarray(x)) & (np.asarray(x) <= self.hi + tol)))

    def __contains__(self, x) -> bool:
        return self.contains(x)

    def is_subset(self, other: Interval) -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def hull(self, other: Interval) -> Interval:
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def widen(self, amount: float) -> Interval:
        """Move both endpoints outward by ``amount`` (rounded outward)."""
        if amount == 0:
            return self
        return Interval(float(add_down(self.lo, -amount)), float(add_up(self.hi, amount)))

    def __add__(self, other):
        return iv_add(self, _as_interval(other))

    __radd__ = __add__

    def __sub__(self, other):
        return iv_sub(self, _as_interval(other))

    def __rsub__(self, other):
        return iv_sub(_as_interval(other), self)

    def __mul__(self, other):
        if isinstance(other, Interval):
            return iv_mul(self, other)
        return iv_scale(self, float(other))

    __rmul__ = __mul__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __iter__(self):
        yield self.lo
        yield self.hi

    def __repr__(self) -> str:
        return f"[{self.lo!r}, {self.hi!r}]"


def _as_interval(x) -> Interval:
    return x if isinstance(x, Interval) else Interval.point(float(x))


def iv_add(a: Interval, b: Interval) -> Interval:
    return Interval(float(add_down(a.lo, b.lo)), float(add_up(a.hi, b.hi)))


def iv_sub(a: Interval, b: Interval) -> Interval:
    return Interval(float(add_down(a.lo, -b.hi)), float(add_up(a.hi, -b.lo)))


def iv_scale(a: Interval, c: float) -> Interval:
    c = float(c)
    if not math.isfinite(c):
        raise ValueError("scale factor must be finite")
    if c >= 0:
        return Interval(float(mul_down(a.lo, c)), float(mul_up(a.hi, c)))
    return Interval(float(mul_down(a.hi, c)), float(mul_up(a.lo, c)))


def iv_mul(a: Interval, b: Interval) -> Interval:
    xs = np.array([a.lo, a.lo, a.hi, a.hi])
    ys = np.array([b.lo, b.hi, b.lo, b.hi])
    return Interval(float(mul_down(xs, ys).min()), float(mul_up(xs, ys).max()))


# ---------------------------------------------------------------------------
# Vector of intervals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntervalVector:
    """Elementwise intervals stored as two float64 arrays."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=np.float64)
        hi = np.asarray(self.hi, dtype=np.float64)
        if lo.shape != hi.shape:
            raise ValueError("lo/hi shape mismatch")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("interval endpoints must be finite")
        if np.any(lo > hi):
            raise ValueError("empty interval component")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, x) -> IntervalVector:
        x = np.asarray(x, dtype=np.float64)
        return cls(x.copy(), x.copy())

    @classmethod
    def zeros(cls, n: int) -> IntervalVector:
        return cls(np.zeros(n), np.zeros(n))

    @classmethod
    def from_intervals(cls, items: Sequence[Interval]) -> IntervalVector:
        return cls(np.array([i.lo for i in items]), np.array([i.hi for i in items]))

    def __len__(self) -> int:
        return self.lo.shape[0]

    def __getitem__(self, idx):
        if isinstance(idx, (int, np.integer)):
            return Interval(self.lo[idx], self.hi[idx])
        return IntervalVector(self.lo[idx], self.hi[idx])

    def to_intervals(self) -> list[Interval]:
        return [Interval(lo, hi) for lo, hi in zip(self.lo, self.hi)]

    @property
    def width(self) -> np.ndarray:
        return self.hi - self.lo

    @property
    def mag(self) -> np.ndarray:
        return np.maximum(np.abs(self.lo), np.abs(self.hi))

    def contains(self, x, tol: float = 0.0) -> bool:
        x = np.asarray(x)
        return bool(np.all((self.lo - tol <= x) & (x <= self.hi + tol)))

    def widen(self, amount) -> IntervalVector:
        amount = np.broadcast_to(np.asarray(amount, dtype=np.float64), self.lo.shape)
        lo = np.where(amount > 0, add_down(self.lo, -amount), self.lo)
        hi = np.where(amount > 0, add_up(self.hi, amount), self.hi)
        return IntervalVector(lo, hi)

    def __add__(self, other: IntervalVector) -> IntervalVector:
        return IntervalVector(add_down(self.lo, other.lo), add_up(self.hi, other.hi))

    def __sub__(self, other: IntervalVector) -> IntervalVector:
        return IntervalVector(add_down(self.lo, -other.hi), add_up(self.hi, -other.lo))

    def __neg__(self) -> IntervalVector:
        return IntervalVector(-self.hi, -self.lo)

    def __mul__(self, other: IntervalVector) -> IntervalVector:
        """Elementwise (Hadamard) product."""
        a = np.stack([self.lo, self.lo, self.hi, self.hi])
        b = np.stack([other.lo, other.hi, other.lo, other.hi])
        return IntervalVector(mul_down(a, b).min(axis=0), mul_up(a, b).max(axis=0))

    def matvec(self, W: np.ndarray) -> IntervalVector:
        """Enclosure of ``W @ v`` for ``v`` ranging over this vector."""
        return IntervalVector(*matvec_bounds(W, self.lo, self.hi))

    def hull(self, other: IntervalVector) -> IntervalVector:
        return IntervalVector(np.minimum(self.lo, other.lo), np.maximum(self.hi, other.hi))

    def __repr__(self) -> str:
        pairs = ", ".join(f"[{lo:.6g}, {hi:.6g}]" for lo, hi in zip(self.lo, self.hi))
        return f"IntervalVector({pairs})"


# ---------------------------------------------------------------------------
# Box
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Box:
    """Axis-aligned box, one interval per variable."""

    dims: tuple[Interval, ...]

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(_as_interval_pair(d) for d in self.dims))

    @classmethod
    def from_bounds(cls, lo, hi) -> Box:
        return cls(tuple(Interval(a, b) for a, b in zip(lo, hi)))

    @property
    def lo(self) -> np.ndarray:
        return np.array([d.lo for d in self.dims])

    @property
    def hi(self) -> np.ndarray:
        return np.array([d.hi for d in self.dims])

    @property
    def ndim(self) -> int:
        return len(self.dims)

    def __len__(self) -> int:
        return len(self.dims)

    def __getitem__(self, i) -> Interval:
        return self.dims[i]

    def as_array(self) -> np.ndarray:
        """``(ndim, 2)`` array of ``[lo, hi]`` rows."""
        return np.array([[d.lo, d.hi] for d in self.dims])

    def contains(self, x, tol: float = 0.0) -> bool:
        x = np.asarray(x)
        return bool(np.all((self.lo - tol <= x) & (x <= self.hi + tol)))

    def is_subset(self, other: Box) -> bool:
        return all(a.is_subset(b) for a, b in zip(self.dims, other.dims))


def _as_interval_pair(d) -> Interval:
    if isinstance(d, Interval):
        return d
    lo, hi = d
    return Interval(lo, hi)


# ---------------------------------------------------------------------------
# Symbolic affine bounds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SymBounds:
    """Affine lower/upper bounds over ``k`` region variables, one row per neuron.

    Row ``j`` bounds the true value ``v_j`` by::

        lower_coef[j] @ x + lower_const[j] - slack(x) <= v_j
        v_j <= upper_coef[j] @ x + upper_const[j] + slack(x)

    where ``slack(x) = coef_err[j] @ |x| + const_err[j]`` accounts for
    floating-point error made while building the coefficients.
    """

    lower_coef: np.ndarray
    lower_const: np.ndarray
    upper_coef: np.ndarray
    upper_const: np.ndarray
    coef_err: np.ndarray
    const_err: np.ndarray

    @property
    def n_vars(self) -> int:
        return self.lower_coef.shape[1]

    def __len__(self) -> int:
        return self.lower_coef.shape[0]

    def __getitem__(self, idx) -> SymBounds:
        idx = np.atleast_1d(np.arange(len(self))[idx])
        return SymBounds(*(f[idx] for f in self._fields()))

    def _fields(self):
        return (self.lower_coef, self.lower_const, self.upper_coef,
                self.upper_const, self.coef_err, self.const_err)

    def evaluate(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Lower and upper expression values at a point (slack excluded)."""
        x = np.asarray(x, dtype=np.float64)
        return self.lower_coef @ x + self.lower_const, self.upper_coef @ x + self.upper_const


def sym_identity(n_vars: int) -> SymBounds:
    """Symbolic bounds ``[x_i, x_i]`` for each region variable."""
    eye = np.eye(n_vars)
    z = np.zeros(n_vars)
    return SymBounds(eye, z.copy(), eye.copy(), z.copy(), np.zeros((n_vars, n_vars)), z.copy())


def sym_affine(prev: SymBounds, W: np.ndarray, bias=None) -> SymBounds:
    """Symbolic bounds for ``W @ prev + bias``.

    Positive weights take the same-side bound of ``prev``; negative weights
    take the opposite side.
    """
    W = np.asarray(W, dtype=np.float64)
    if W.ndim != 2 or W.shape[1] != len(prev):
        raise ValueError(f"dimension mismatch: W{W.shape} vs {len(prev)} symbolic rows")
    bias = np.zeros(W.shape[0]) if bias is None else np.asarray(bias, dtype=np.float64)
    if bias.shape != (W.shape[0],):
        raise ValueError(f"bias shape {bias.shape} does not match W{W.shape}")
    n = W.shape[1]
    Wp = np.maximum(W, 0.0)
    Wn = np.minimum(W, 0.0)
    aW = np.abs(W)
    g = _gamma(n + 2)

    lower_coef = Wp @ prev.lower_coef + Wn @ prev.upper_coef
    upper_coef = Wp @ prev.upper_coef + Wn @ prev.lower_coef
    lower_const = Wp @ prev.lower_const + Wn @ prev.upper_const + bias
    upper_const = Wp @ prev.upper_const + Wn @ prev.lower_const + bias

    coef_mag = aW @ np.maximum(np.abs(prev.lower_coef), np.abs(prev.upper_coef))
    const_mag = aW @ np.maximum(np.abs(prev.lower_const), np.abs(prev.upper_const)) + np.abs(bias)
    coef_err = aW @ prev.coef_err + g * (coef_mag + aW @ prev.coef_err)
    const_err = aW @ prev.const_err + g * (const_mag + aW @ prev.const_err)
    const_err = const_err + np.where(const_mag + np.abs(coef_mag).sum(axis=1) > 0, (n + 2) * 2.0**-1074, 0.0)
    # push the error terms themselves upward
    coef_err = np.where(coef_err > 0, _up(coef_err), coef_err)
    const_err = np.where(const_err > 0, _up(const_err), const_err)
    return SymBounds(lower_coef, lower_const, upper_coef, upper_const, coef_err, const_err)


def concretize(s: SymBounds, region) -> IntervalVector:
    """Concrete enclosure of symbolic bounds over a box.

    Each affine expression is minimised (lower) or maximised (upper) at the
    box corner picked by the sign of its coefficients.
    """
    if isinstance(region, Box):
        lo, hi = region.lo, region.hi
    elif isinstance(region, IntervalVector):
        lo, hi = region.lo, region.hi
    else:
        lo, hi = (np.asarray(v, dtype=np.float64) for v in region)
    if lo.shape != (s.n_vars,):
        raise ValueError(f"region has {lo.shape[0]} variables, bounds expect {s.n_vars}")
    low_lo, _ = matvec_bounds(s.lower_coef, lo, hi)
    _, up_hi = matvec_bounds(s.upper_coef, lo, hi)
    xmag = np.maximum(np.abs(lo), np.abs(hi))
    slack = s.coef_err @ xmag + s.const_err
    slack = np.where(slack > 0, _up(slack * (1 + 4 * UNIT_ROUNDOFF)), slack)
    out_lo = add_down(add_down(low_lo, s.lower_const), -slack)
    out_hi = add_up(add_up(up_hi, s.upper_const), slack)
    return IntervalVector(out_lo, out_hi)
