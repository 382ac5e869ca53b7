"""Dyadic interval arithmetic with outward rounding.

Endpoints are rationals whose denominators divide 2**prec, produced by
rounding exact rational results outward (lower endpoints down, upper
endpoints up) onto the dyadic grid. Every operation therefore returns a
superset of the true image set: enclosures are sound by construction, and
deterministic across platforms because only integer arithmetic is used.

The default precision of 128 fractional bits leaves ~2**-128 of rounding
slack per operation, negligible against the package-wide default tolerance
of 2**-30.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

from .errors import DomainError, ParameterError

DEFAULT_PRECISION = 128


def round_down(x: Fraction, prec: int = DEFAULT_PRECISION) -> Fraction:
    """Largest dyadic k/2**prec that is <= x."""
    return Fraction((x.numerator << prec) // x.denominator, 1 << prec)


def round_up(x: Fraction, prec: int = DEFAULT_PRECISION) -> Fraction:
    """Smallest dyadic k/2**prec that is >= x."""
    return -round_down(-x, prec)


def sqrt_down(x: Fraction, prec: int = DEFAULT_PRECISION) -> Fraction:
    """Largest dyadic d = k/2**prec with d*d <= x (x >= 0).

    Exact in integer arithmetic: k = isqrt(floor(x * 4**prec)).
    """
    if x < 0:
        raise DomainError(f"square root of negative value {x}")
    k = isqrt((x.numerator << (2 * prec)) // x.denominator)
    return Fraction(k, 1 << prec)


def sqrt_up(x: Fraction, prec: int = DEFAULT_PRECISION) -> Fraction:
    """Smallest dyadic d = k/2**prec with d*d >= x (x >= 0)."""
    if x < 0:
        raise DomainError(f"square root of negative value {x}")
    k = isqrt((x.numerator << (2 * prec)) // x.denominator)
    if k * k * x.denominator < (x.numerator << (2 * prec)):
        k += 1
    return Fraction(k, 1 << prec)


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi]; a sound enclosure of some real value or set."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ParameterError(f"empty interval [{self.lo}, {self.hi}]")

    @staticmethod
    def point(x: Fraction) -> "Interval":
        return Interval(x, x)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x: Fraction) -> bool:
        return self.lo <= x <= self.hi

    def contains_interval(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def intersects(self, other: "Interval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def __str__(self) -> str:
        return f"[{self.lo}, {self.hi}]"


ZERO_IV = Interval(Fraction(0), Fraction(0))
UNIT_IV = Interval(Fraction(0), Fraction(1))


def iadd(a: Interval, b: Interval, prec: int = DEFAULT_PRECISION) -> Interval:
    return Interval(round_down(a.lo + b.lo, prec), round_up(a.hi + b.hi, prec))


def ineg(a: Interval) -> Interval:
    return Interval(-a.hi, -a.lo)


def iscale(c: Fraction, a: Interval, prec: int = DEFAULT_PRECISION) -> Interval:
    lo, hi = c * a.lo, c * a.hi
    if c < 0:
        lo, hi = hi, lo
    return Interval(round_down(lo, prec), round_up(hi, prec))


def imul(a: Interval, b: Interval, prec: int = DEFAULT_PRECISION) -> Interval:
    products = (a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi)
    return Interval(round_down(min(products), prec), round_up(max(products), prec))


def isqrt_iv(a: Interval, prec: int = DEFAULT_PRECISION) -> Interval:
    """Enclosure of sqrt over a; the lower endpoint is clamped to 0 so that
    outward-rounding dips below zero (on a truly nonnegative quantity) do not
    leave the domain."""
    if a.hi < 0:
        raise DomainError(f"square root of negative interval {a}")
    lo = max(a.lo, Fraction(0))
    return Interval(sqrt_down(lo, prec), sqrt_up(a.hi, prec))


def iabs(a: Interval) -> Interval:
    if a.lo >= 0:
        return a
    if a.hi <= 0:
        return ineg(a)
    return Interval(Fraction(0), max(-a.lo, a.hi))


def ihull(a: Interval, b: Interval) -> Interval:
    return Interval(min(a.lo, b.lo), max(a.hi, b.hi))


def imeet(a: Interval, b: Interval) -> Interval:
    """Intersection of two enclosures of the same set (must overlap)."""
    return Interval(max(a.lo, b.lo), min(a.hi, b.hi))


def iinv(a: Interval, prec: int = DEFAULT_PRECISION) -> Interval:
    """Enclosure of {1/x : x in a}; requires 0 outside a."""
    if a.lo <= 0 <= a.hi:
        raise DomainError(f"inverse of interval containing zero: {a}")
    lo, hi = 1 / a.hi, 1 / a.lo
    return Interval(round_down(lo, prec), round_up(hi, prec))


def iround(x: Fraction, prec: int = DEFAULT_PRECISION) -> Interval:
    """Thin outward-rounded enclosure of an exact rational."""
    return Interval(round_down(x, prec), round_up(x, prec))


# -- decimal rendering for reports -------------------------------------------

def _decimal(n: int, digits: int) -> str:
    sign = "-" if n < 0 else ""
    whole, frac = divmod(abs(n), 10**digits)
    return f"{sign}{whole}.{frac:0{digits}d}"


def decimal_down(x: Fraction, digits: int) -> str:
    """Decimal string <= x with the given number of fractional digits."""
    scaled = x * 10**digits
    return _decimal(scaled.numerator // scaled.denominator, digits)


def decimal_up(x: Fraction, digits: int) -> str:
    """Decimal string >= x with the given number of fractional digits."""
    scaled = x * 10**digits
    return _decimal(-((-scaled.numerator) // scaled.denominator), digits)
