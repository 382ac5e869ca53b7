"""Exact piecewise-linear (PWL) function algebra on [0,1].

A :class:`PwlFunc` is a continuous real function on [0,1] that is affine
between rational breakpoints. All arithmetic here is exact rational
arithmetic (``fractions.Fraction``); no floating point enters this module.
Canonical form (strictly increasing abscissae starting at 0 and ending at 1,
no interior breakpoint collinear with its neighbours) makes exact function
equality the same as structural equality, so identities like the telescoping
of clamped ramps can be verified with ``==`` and zero tolerance.

The two generator families of the construction live here:

* ``ramp(q, m)`` -- the clamped ramp ``t -> max(0, min(1, m*(q - t)))``,
  a steepness-``m`` lower approximation of the indicator of [0, q);
* ``layer(q, m)`` -- the difference ``ramp(q, m) - ramp(q, m-1)``, the
  nonnegative "squared layer" whose partial sums telescope back to a ramp.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence, Union

from .errors import DomainError, ParameterError

RationalLike = Union[Fraction, int, str]

_ZERO = Fraction(0)
_ONE = Fraction(1)


def as_fraction(x: RationalLike) -> Fraction:
    """Coerce ints, strings like '3/4', and Fractions to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise ParameterError(f"not a rational: {x!r}")
    if isinstance(x, (int, str)):
        return Fraction(x)
    raise ParameterError(f"not an exact rational: {x!r} (floats are rejected)")


@dataclass(frozen=True)
class PwlFunc:
    """Canonical piecewise-linear function on [0,1].

    ``points`` is a tuple of (t, v) pairs with strictly increasing t,
    t[0] == 0 and t[-1] == 1. The value at any t is obtained by affine
    interpolation between the two neighbouring breakpoints.
    """

    points: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        pts = self.points
        if len(pts) < 2:
            raise ParameterError("a PWL function needs at least 2 breakpoints")
        if pts[0][0] != 0 or pts[-1][0] != 1:
            raise ParameterError("breakpoints must span [0,1] exactly")
        for (t0, _), (t1, _) in zip(pts, pts[1:]):
            if not t0 < t1:
                raise ParameterError("breakpoint abscissae must strictly increase")

    # -- construction -------------------------------------------------------

    @staticmethod
    def from_points(pairs: Iterable[tuple[RationalLike, RationalLike]]) -> "PwlFunc":
        pts = tuple((as_fraction(t), as_fraction(v)) for t, v in pairs)
        return canonicalize(PwlFunc(pts))

    @staticmethod
    def constant(c: RationalLike) -> "PwlFunc":
        c = as_fraction(c)
        return PwlFunc(((_ZERO, c), (_ONE, c)))

    @staticmethod
    def zero() -> "PwlFunc":
        return PwlFunc.constant(0)

    # -- evaluation ---------------------------------------------------------

    def __call__(self, t: RationalLike) -> Fraction:
        return evaluate(self, t)

    def is_zero(self) -> bool:
        return all(v == 0 for _, v in self.points)

    def is_constant(self) -> bool:
        return len(self.points) == 2 and self.points[0][1] == self.points[1][1]

    def constant_value(self) -> Fraction:
        """Value of a constant function; raises for non-constant input."""
        if not self.is_constant():
            raise ParameterError("function is not constant")
        return self.points[0][1]

    def is_nonnegative(self) -> bool:
        """Nonnegative everywhere (equivalent to nonnegative at breakpoints)."""
        return all(v >= 0 for _, v in self.points)

    def abscissae(self) -> tuple[Fraction, ...]:
        return tuple(t for t, _ in self.points)


def canonicalize(f: PwlFunc) -> PwlFunc:
    """Remove interior breakpoints collinear with their neighbours.

    Idempotent; canonical form makes structural equality decide function
    equality.
    """
    pts = list(f.points)
    out = [pts[0]]
    for i in range(1, len(pts) - 1):
        t_prev, v_prev = out[-1]
        t_cur, v_cur = pts[i]
        t_next, v_next = pts[i + 1]
        # collinear iff slopes on both sides agree:
        # (v_cur-v_prev)*(t_next-t_cur) == (v_next-v_cur)*(t_cur-t_prev)
        if (v_cur - v_prev) * (t_next - t_cur) == (v_next - v_cur) * (t_cur - t_prev):
            continue
        out.append(pts[i])
    out.append(pts[-1])
    return PwlFunc(tuple(out))


def evaluate(f: PwlFunc, t: RationalLike) -> Fraction:
    """Exact value of f at t in [0,1]."""
    t = as_fraction(t)
    if t < 0 or t > 1:
        raise DomainError(f"evaluation point {t} outside [0,1]")
    pts = f.points
    lo, hi = 0, len(pts) - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pts[mid][0] <= t:
            lo = mid
        else:
            hi = mid
    t0, v0 = pts[lo]
    t1, v1 = pts[hi]
    if t == t0:
        return v0
    if t == t1:
        return v1
    return v0 + (v1 - v0) * (t - t0) / (t1 - t0)


def _merged_abscissae(fs: Sequence[PwlFunc]) -> list[Fraction]:
    ts: set[Fraction] = set()
    for f in fs:
        ts.update(f.abscissae())
    return sorted(ts)


def lincomb(terms: Iterable[tuple[RationalLike, PwlFunc]]) -> PwlFunc:
    """Exact rational linear combination of PWL functions.

    The result's breakpoints are a subset of the union of the inputs'
    breakpoints (the combination is affine on every merged segment), reduced
    to canonical form. Computed by a slope-delta sweep: each input
    contributes its value at 0 and its slope changes, so the cost is linear
    in the total number of breakpoints rather than quadratic.
    """
    terms = [(as_fraction(c), f) for c, f in terms]
    value_at_zero = _ZERO
    slope_delta: dict[Fraction, Fraction] = {}
    for c, f in terms:
        if c == 0:
            continue
        pts = f.points
        value_at_zero += c * pts[0][1]
        prev_slope = _ZERO
        for (t0, y0), (t1, y1) in zip(pts, pts[1:]):
            slope = (y1 - y0) / (t1 - t0)
            if slope != prev_slope:
                slope_delta[t0] = slope_delta.get(t0, _ZERO) + c * (slope - prev_slope)
                prev_slope = slope
    ts = sorted({_ZERO, _ONE} | set(slope_delta))
    points = []
    value, slope, prev_t = value_at_zero, _ZERO, None
    for t in ts:
        if prev_t is not None:
            value += slope * (t - prev_t)
        points.append((t, value))
        delta = slope_delta.get(t)
        if delta is not None:
            slope += delta
        prev_t = t
    return canonicalize(PwlFunc(tuple(points)))


def _segment_crossings(f: PwlFunc, g: PwlFunc, ts: Sequence[Fraction]) -> list[Fraction]:
    """Abscissae where f-g changes sign strictly inside a merged segment."""
    extra = []
    for t0, t1 in zip(ts, ts[1:]):
        d0 = evaluate(f, t0) - evaluate(g, t0)
        d1 = evaluate(f, t1) - evaluate(g, t1)
        if (d0 > 0 and d1 < 0) or (d0 < 0 and d1 > 0):
            # affine difference on the segment: root at t0 + (t1-t0)*d0/(d0-d1)
            extra.append(t0 + (t1 - t0) * d0 / (d0 - d1))
    return extra


def _meet_join(f: PwlFunc, g: PwlFunc, take_max: bool) -> PwlFunc:
    ts = _merged_abscissae([f, g])
    ts = sorted(set(ts) | set(_segment_crossings(f, g, ts)))
    pick = max if take_max else min
    pts = tuple((t, pick(evaluate(f, t), evaluate(g, t))) for t in ts)
    return canonicalize(PwlFunc(pts))


def pointwise_min(f: PwlFunc, g: PwlFunc) -> PwlFunc:
    """Exact pointwise minimum; inserts breakpoints at crossing abscissae."""
    return _meet_join(f, g, take_max=False)


def pointwise_max(f: PwlFunc, g: PwlFunc) -> PwlFunc:
    """Exact pointwise maximum; inserts breakpoints at crossing abscissae."""
    return _meet_join(f, g, take_max=True)


def sup_norm(f: PwlFunc) -> Fraction:
    """Exact sup norm: a PWL function attains its extrema at breakpoints."""
    return max(abs(v) for _, v in f.points)


def range_on(f: PwlFunc, lo: RationalLike, hi: RationalLike) -> tuple[Fraction, Fraction]:
    """Exact (min, max) of f over the subinterval [lo, hi] of [0,1]."""
    lo, hi = as_fraction(lo), as_fraction(hi)
    if not (0 <= lo <= hi <= 1):
        raise DomainError(f"[{lo}, {hi}] is not a subinterval of [0,1]")
    vals = [evaluate(f, lo), evaluate(f, hi)]
    vals.extend(v for t, v in f.points if lo < t < hi)
    return min(vals), max(vals)


# -- the construction's generator functions ---------------------------------

def ramp(q: RationalLike, m: int) -> PwlFunc:
    """Clamped ramp t -> max(0, min(1, m*(q - t))), with ramp(q, 0) == 0.

    For m >= 1 the function is 1 on [0, q - 1/m] (when that interval is
    nonempty), affine with slope -m down to 0 at t = q, and 0 on [q, 1].
    Pointwise nondecreasing in m, with sup norm min(1, m*q).
    """
    q = as_fraction(q)
    if not (0 < q <= 1):
        raise ParameterError(f"q must lie in (0,1], got {q}")
    if not isinstance(m, int) or m < 0:
        raise ParameterError(f"steepness m must be an integer >= 0, got {m!r}")
    return _ramp_cached(q, m)


@lru_cache(maxsize=8192)
def _ramp_cached(q: Fraction, m: int) -> PwlFunc:
    if m == 0:
        return PwlFunc.zero()
    pts: list[tuple[Fraction, Fraction]] = []
    knee = q - Fraction(1, m)
    if knee > 0:
        pts.append((_ZERO, _ONE))
        pts.append((knee, _ONE))
    else:
        pts.append((_ZERO, m * q))  # = min(1, m*q) since q <= 1/m here
    pts.append((q, _ZERO))
    if q < 1:
        pts.append((_ONE, _ZERO))
    return canonicalize(PwlFunc(tuple(pts)))


def layer(q: RationalLike, m: int) -> PwlFunc:
    """The squared layer ramp(q, m) - ramp(q, m-1); nonnegative, and the
    partial sums over m telescope exactly: sum_{m<=M} layer(q,m) == ramp(q,M).

    Its sup norm is min(q, 1/m).
    """
    if not isinstance(m, int) or m < 1:
        raise ParameterError(f"layer index m must be an integer >= 1, got {m!r}")
    q = as_fraction(q)
    if not (0 < q <= 1):
        raise ParameterError(f"q must lie in (0,1], got {q}")
    return _layer_cached(q, m)


@lru_cache(maxsize=8192)
def _layer_cached(q: Fraction, m: int) -> PwlFunc:
    return lincomb([(1, _ramp_cached(q, m)), (-1, _ramp_cached(q, m - 1))])


# -- serialization -----------------------------------------------------------

def to_obj(f: PwlFunc) -> list[list[str]]:
    """JSON-ready [t, v] pairs with rationals as fraction strings."""
    return [[str(t), str(v)] for t, v in f.points]


def from_obj(obj: Sequence[Sequence[str]]) -> PwlFunc:
    return PwlFunc.from_points((Fraction(t), Fraction(v)) for t, v in obj)


def to_json(f: PwlFunc) -> str:
    return json.dumps(to_obj(f))


def from_json(s: str) -> PwlFunc:
    return from_obj(json.loads(s))
