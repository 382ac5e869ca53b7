"""Formal rational-linear combinations of function atoms on [0,1].

This is the scalar type for inner products and map values: exact where the
construction needs exactness (cancellation of like atoms, collapse of pure
PWL combinations), validated elsewhere (interval enclosures for square roots
and products).

Atoms:

* ``PwlAtom(f)`` -- an exact piecewise-linear function;
* ``SqrtAtom(g)`` -- the pointwise square root of a nonnegative PWL function;
* ``ProductAtom(factors)`` -- an ordered product of >= 2 non-product atoms
  (piecewise-quadratic and worse; handled by enclosure, never exactly).

A :class:`FuncLin` maps atoms to rational coefficients. Canonicalization
merges equal atoms, folds constant PWL atoms into coefficients on the
constant-one atom, and drops identically-zero atoms. Multiplication applies
one rewrite rule -- ``SqrtAtom(g) * SqrtAtom(g) -> PwlAtom(g)`` with
structural radicand equality -- which is the only simplification the
construction's exact identities require; cross products like
``SqrtAtom(g) * SqrtAtom(h)`` stay symbolic.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional, Union

from . import pwl
from .dyadic import (
    DEFAULT_PRECISION,
    Interval,
    UNIT_IV,
    ZERO_IV,
    decimal_down,
    iabs,
    iadd,
    iinv,
    imeet,
    imul,
    iscale,
    isqrt_iv,
    round_down,
    round_up,
)
from .errors import BudgetExhausted, DomainError, ParameterError
from .pwl import PwlFunc, as_fraction

_ZERO = Fraction(0)
_ONE = Fraction(1)


# -- atoms --------------------------------------------------------------------

@dataclass(frozen=True)
class PwlAtom:
    func: PwlFunc


@dataclass(frozen=True)
class SqrtAtom:
    radicand: PwlFunc

    def __post_init__(self):
        if not self.radicand.is_nonnegative():
            raise DomainError("square-root radicand must be nonnegative on [0,1]")


@dataclass(frozen=True)
class ProductAtom:
    factors: tuple  # sorted non-product, non-constant atoms, len >= 2

    def __post_init__(self):
        if len(self.factors) < 2:
            raise ParameterError("a product atom needs at least 2 factors")
        if any(isinstance(f, ProductAtom) for f in self.factors):
            raise ParameterError("product atoms must not nest")


Atom = Union[PwlAtom, SqrtAtom, ProductAtom]

ONE_ATOM = PwlAtom(PwlFunc.constant(1))


def _pwl_key(f: PwlFunc) -> tuple:
    return tuple((t.numerator, t.denominator, v.numerator, v.denominator) for t, v in f.points)


@lru_cache(maxsize=65536)
def atom_key(a: Atom) -> tuple:
    """Total order on atoms; used for canonical term and factor ordering."""
    if isinstance(a, PwlAtom):
        return (0, _pwl_key(a.func))
    if isinstance(a, SqrtAtom):
        return (1, _pwl_key(a.radicand))
    return (2, tuple(atom_key(f) for f in a.factors))


def _factors(a: Atom) -> list:
    return list(a.factors) if isinstance(a, ProductAtom) else [a]


def _combine_factors(raw: list) -> tuple[Fraction, Atom]:
    """Normalize a factor multiset: fold constants into a scalar, pair equal
    square-root factors into their radicand, sort, unwrap singletons."""
    scalar = _ONE
    sqrt_counts: dict[PwlFunc, int] = {}
    factors: list[Atom] = []
    for f in raw:
        if isinstance(f, PwlAtom):
            if f.func.is_constant():
                scalar *= f.func.constant_value()
            else:
                factors.append(f)
        elif isinstance(f, SqrtAtom):
            if f.radicand.is_zero():
                return _ZERO, ONE_ATOM
            sqrt_counts[f.radicand] = sqrt_counts.get(f.radicand, 0) + 1
        else:
            raise ParameterError("nested product atom")
    if scalar == 0:
        return _ZERO, ONE_ATOM
    for g, count in sqrt_counts.items():
        pairs, rest = divmod(count, 2)
        if pairs:
            if g.is_constant():
                scalar *= g.constant_value() ** pairs
            else:
                factors.extend([PwlAtom(g)] * pairs)
        if rest:
            factors.append(SqrtAtom(g))
    factors.sort(key=atom_key)
    if not factors:
        return scalar, ONE_ATOM
    if len(factors) == 1:
        return scalar, factors[0]
    return scalar, ProductAtom(tuple(factors))


def _norm_term(atom: Atom) -> tuple[Fraction, Optional[Atom]]:
    """Rewrite an atom to canonical form; None means the atom is the zero
    function and the term vanishes."""
    if isinstance(atom, PwlAtom):
        f = atom.func
        if f.is_constant():
            c = f.constant_value()
            return (c, ONE_ATOM) if c != 0 else (_ZERO, None)
        return _ONE, atom
    if isinstance(atom, SqrtAtom):
        if atom.radicand.is_zero():
            return _ZERO, None
        return _ONE, atom
    scalar, a = _combine_factors(list(atom.factors))
    if scalar == 0:
        return _ZERO, None
    if isinstance(a, ProductAtom):
        return scalar, a  # already canonical
    # an unwrapped single factor may itself need a rewrite (e.g. a constant)
    s2, a2 = _norm_term(a)
    return scalar * s2, a2


# -- linear combinations ------------------------------------------------------

@dataclass(frozen=True)
class FuncLin:
    """Canonical finite linear combination of atoms with rational
    coefficients; the empty combination is the zero function."""

    terms: tuple[tuple[Atom, Fraction], ...]

    @staticmethod
    def _from_raw(mapping: dict) -> "FuncLin":
        acc: dict[Atom, Fraction] = {}
        for atom, coeff in mapping.items():
            if coeff == 0:
                continue
            scale, norm = _norm_term(atom)
            if norm is None or scale == 0:
                continue
            acc[norm] = acc.get(norm, _ZERO) + coeff * scale
        items = [(a, c) for a, c in acc.items() if c != 0]
        items.sort(key=lambda ac: atom_key(ac[0]))
        return FuncLin(tuple(items))

    @staticmethod
    def zero() -> "FuncLin":
        return FuncLin(())

    @staticmethod
    def const(c) -> "FuncLin":
        return FuncLin._from_raw({ONE_ATOM: as_fraction(c)})

    @staticmethod
    def from_pwl(f: PwlFunc) -> "FuncLin":
        return FuncLin._from_raw({PwlAtom(f): _ONE})

    def coefficient(self, atom: Atom) -> Fraction:
        for a, c in self.terms:
            if a == atom:
                return c
        return _ZERO

    def atoms(self) -> tuple:
        return tuple(a for a, _ in self.terms)

    # operator sugar; the module-level functions are the primary API
    def __add__(self, other: "FuncLin") -> "FuncLin":
        return lin_combine([(1, self), (1, other)])

    def __sub__(self, other: "FuncLin") -> "FuncLin":
        return lin_combine([(1, self), (-1, other)])

    def __neg__(self) -> "FuncLin":
        return lin_combine([(-1, self)])

    def __mul__(self, other):
        if isinstance(other, FuncLin):
            return lin_mul(self, other)
        return lin_combine([(as_fraction(other), self)])

    def __rmul__(self, other):
        return lin_combine([(as_fraction(other), self)])

    def __repr__(self) -> str:
        if not self.terms:
            return "FuncLin<0>"
        kinds = ",".join(type(a).__name__[:-4].lower() for a, _ in self.terms)
        return f"FuncLin<{len(self.terms)} terms: {kinds}>"


def sqrt_atom(g: PwlFunc) -> FuncLin:
    """Single-atom combination sqrt(g); g must be nonnegative at all
    breakpoints (hence everywhere)."""
    if not g.is_nonnegative():
        raise DomainError("square-root radicand must be nonnegative on [0,1]")
    return FuncLin._from_raw({SqrtAtom(g): _ONE})


def lin_combine(terms: Iterable[tuple]) -> FuncLin:
    """Coefficientwise combination sum_i c_i * x_i with exact cancellation."""
    acc: dict[Atom, Fraction] = {}
    for coeff, x in terms:
        coeff = as_fraction(coeff)
        if coeff == 0:
            continue
        for atom, c in x.terms:
            acc[atom] = acc.get(atom, _ZERO) + coeff * c
    return FuncLin._from_raw(acc)


def lin_mul(x: FuncLin, y: FuncLin) -> FuncLin:
    """Bilinear expansion of x*y.

    Same-radicand square-root pairs are rewritten to PWL atoms; all other
    atom products remain symbolic product atoms.
    """
    acc: dict[Atom, Fraction] = {}
    for ax, cx in x.terms:
        for ay, cy in y.terms:
            scalar, atom = _combine_factors(_factors(ax) + _factors(ay))
            c = cx * cy * scalar
            if c == 0:
                continue
            acc[atom] = acc.get(atom, _ZERO) + c
    return FuncLin._from_raw(acc)


def atom_square(a: Atom) -> tuple[Fraction, Atom]:
    """Exact symbolic square of an atom. Every square-root factor pairs out,
    so the result never contains sqrt atoms; the scalar is nonnegative."""
    return _combine_factors(_factors(a) + _factors(a))


def atom_has_sqrt(a: Atom) -> bool:
    if isinstance(a, SqrtAtom):
        return True
    return isinstance(a, ProductAtom) and any(isinstance(f, SqrtAtom) for f in a.factors)


def try_pwl_collapse(x: FuncLin) -> Optional[PwlFunc]:
    """Collapse a PWL-only combination to a single exact PwlFunc, or None if
    square-root or product atoms are present."""
    if not all(isinstance(a, PwlAtom) for a, _ in x.terms):
        return None
    return pwl.lincomb([(c, a.func) for a, c in x.terms])


def is_zero_exact(x: FuncLin) -> bool:
    """Sound, incomplete zero test: structural zero, or exact collapse of a
    PWL-only combination. A False verdict for mixed combinations means "not
    structurally zero", not a proof of nonvanishing; pair it with
    :func:`find_separating_point` or an enclosure when reporting."""
    collapsed = try_pwl_collapse(x)
    if collapsed is None:
        return False
    return collapsed.is_zero()


# -- interval evaluation ------------------------------------------------------

def _pwl_product_mean_value(funcs: list[PwlFunc], iv: Interval, prec: int) -> Optional[Interval]:
    """Mean-value-form enclosure of a product of PWL functions that are all
    affine on iv: p(mid) + p'(enclosure) * (iv - mid).

    Its overestimation is O(width^2) near critical points of the product
    (the derivative enclosure shrinks with the true derivative), which is
    what keeps branch-and-bound pruning geometric around smooth maxima where
    the naive product of ranges stalls. Returns None when some factor has a
    breakpoint strictly inside iv.
    """
    a, b = iv.lo, iv.hi
    if a == b:
        return None
    for f in funcs:
        if any(a < t < b for t in f.abscissae()):
            return None
    mid = (a + b) / 2
    vals = [pwl.evaluate(f, mid) for f in funcs]
    slopes = [(pwl.evaluate(f, b) - pwl.evaluate(f, a)) / (b - a) for f in funcs]
    ranges = [Interval(*sorted((pwl.evaluate(f, a), pwl.evaluate(f, b)))) for f in funcs]
    center = Fraction(1)
    for v in vals:
        center *= v
    deriv = ZERO_IV
    for i, slope in enumerate(slopes):
        part = Interval.point(slope)
        for j, r in enumerate(ranges):
            if j != i:
                part = imul(part, r, prec)
        deriv = iadd(deriv, part, prec)
    half = (b - a) / 2
    return iadd(Interval.point(center), imul(deriv, Interval(-half, half), prec), prec)


def _atom_enclosure(a: Atom, iv: Interval, prec: int) -> Interval:
    if isinstance(a, PwlAtom):
        lo, hi = pwl.range_on(a.func, iv.lo, iv.hi)
        return Interval(lo, hi)  # exact range; the accumulator rounds
    if isinstance(a, SqrtAtom):
        lo, hi = pwl.range_on(a.radicand, iv.lo, iv.hi)
        return isqrt_iv(Interval(lo, hi), prec)
    acc = None
    for f in a.factors:
        e = _atom_enclosure(f, iv, prec)
        acc = e if acc is None else imul(acc, e, prec)
    if all(isinstance(f, PwlAtom) for f in a.factors):
        mv = _pwl_product_mean_value([f.func for f in a.factors], iv, prec)
        if mv is not None and mv.lo <= acc.hi and acc.lo <= mv.hi:
            acc = imeet(acc, mv)
    return acc


def _slope_range(f: PwlFunc, iv: Interval) -> Interval:
    """Exact hull of the slopes f takes on segments overlapping iv."""
    slopes = []
    for (t0, v0), (t1, v1) in zip(f.points, f.points[1:]):
        if t1 >= iv.lo and t0 <= iv.hi:
            slopes.append((v1 - v0) / (t1 - t0))
    return Interval(min(slopes), max(slopes))


def _atom_derivative(a: Atom, iv: Interval, prec: int) -> Optional[Interval]:
    """Enclosure of the a.e. derivative of an atom on iv, or None when no
    finite bound is available (a square root whose radicand may vanish)."""
    if isinstance(a, PwlAtom):
        return _slope_range(a.func, iv)
    if isinstance(a, SqrtAtom):
        lo, hi = pwl.range_on(a.radicand, iv.lo, iv.hi)
        if lo <= 0:
            return None  # unbounded slope where the radicand vanishes
        root = isqrt_iv(Interval(lo, hi), prec)
        if root.lo <= 0:
            return None
        return imul(_slope_range(a.radicand, iv), iinv(iscale(Fraction(2), root, prec), prec), prec)
    derivatives, ranges = [], []
    for f in a.factors:
        d = _atom_derivative(f, iv, prec)
        if d is None:
            return None
        derivatives.append(d)
        ranges.append(_atom_enclosure(f, iv, prec))
    acc = ZERO_IV
    for i, d in enumerate(derivatives):
        part = d
        for j, r in enumerate(ranges):
            if j != i:
                part = imul(part, r, prec)
        acc = iadd(acc, part, prec)
    return acc


def _rest_mean_value(rest: tuple, iv: Interval, prec: int) -> Optional[Interval]:
    """Sum-level mean-value enclosure of the non-PWL terms on iv.

    Locally Lipschitz terms satisfy x(t) in x(mid) + D * (t - mid) with D
    any enclosure of the a.e. derivative, so the form is sound across PWL
    corners; its overestimation is O(width^2) near smooth interior maxima,
    which keeps branch-and-bound pruning geometric where the naive sum of
    atom ranges (O(width) dependency error) would stall.
    """
    deriv = ZERO_IV
    for atom, coeff in rest:
        d = _atom_derivative(atom, iv, prec)
        if d is None:
            return None
        deriv = iadd(deriv, iscale(coeff, d, prec), prec)
    mid = iv.midpoint
    thin = Interval(mid, mid)
    center = ZERO_IV
    for atom, coeff in rest:
        center = iadd(center, iscale(coeff, _atom_enclosure(atom, thin, prec), prec), prec)
    half = (iv.hi - iv.lo) / 2
    return iadd(center, imul(deriv, Interval(-half, half), prec), prec)


@lru_cache(maxsize=256)
def _split_pwl_part(x: FuncLin) -> tuple[Optional[PwlFunc], tuple]:
    """Partition into (exact PWL collapse of all PWL terms, remaining terms).

    Collapsing the PWL sub-part once removes the dependency problem between
    PWL atoms entirely: its range on any subinterval is exact, so enclosures
    of expressions whose PWL parts cancel do not suffer spurious width (this
    is what lets branch-and-bound terminate on identically-zero inputs).
    """
    pwl_terms = [(c, a.func) for a, c in x.terms if isinstance(a, PwlAtom)]
    rest = tuple((a, c) for a, c in x.terms if not isinstance(a, PwlAtom))
    collapsed = pwl.lincomb(pwl_terms) if pwl_terms else None
    return collapsed, rest


def eval_interval(x: FuncLin, iv: Interval, prec: int = DEFAULT_PRECISION) -> Interval:
    """Sound enclosure of {x(t) : t in iv}.

    The PWL sub-part contributes its exact range on iv (monotone-segment
    analysis of the collapsed combination); square roots and products are
    composed by outward-rounded interval arithmetic.
    """
    if not UNIT_IV.contains_interval(iv):
        raise DomainError(f"interval {iv} is not contained in [0,1]")
    collapsed, rest = _split_pwl_part(x)
    acc = ZERO_IV
    if collapsed is not None:
        lo, hi = pwl.range_on(collapsed, iv.lo, iv.hi)
        acc = Interval(round_down(lo, prec), round_up(hi, prec))
    if rest:
        naive = ZERO_IV
        for atom, coeff in rest:
            naive = iadd(naive, iscale(coeff, _atom_enclosure(atom, iv, prec), prec), prec)
        if _rest_mean_value_helps(rest) and iv.lo < iv.hi and iv.width <= Fraction(1, 4):
            mv = _rest_mean_value(rest, iv, prec)
            if mv is not None and mv.lo <= naive.hi and naive.lo <= mv.hi:
                naive = imeet(naive, mv)
        acc = iadd(acc, naive, prec)
    return acc


def _rest_mean_value_helps(rest: tuple) -> bool:
    """The sum-level mean-value form cannot beat a single atom whose
    enclosure is already an exact range (a lone sqrt atom) or already
    carries its own centered form (a lone all-PWL product)."""
    if len(rest) > 1:
        return True
    atom = rest[0][0]
    if isinstance(atom, SqrtAtom):
        return False
    return not (isinstance(atom, ProductAtom) and all(isinstance(f, PwlAtom) for f in atom.factors))


def eval_point(x: FuncLin, t, prec: int = DEFAULT_PRECISION) -> Interval:
    """Thin enclosure of the value x(t)."""
    t = as_fraction(t)
    return eval_interval(x, Interval(t, t), prec)


def eval_exact(x: FuncLin, t) -> Fraction:
    """Exact rational value of a PWL-only combination at t."""
    collapsed = try_pwl_collapse(x)
    if collapsed is None:
        raise DomainError("combination contains irrational atoms; use eval_point")
    return pwl.evaluate(collapsed, t)


def sup_norm_enclosure(
    x: FuncLin,
    tol,
    budget: int = 10**6,
    prec: int = DEFAULT_PRECISION,
) -> Interval:
    """Enclosure [lo, hi] of sup_{t in [0,1]} |x(t)| with hi - lo <= tol.

    Adaptive bisection branch-and-bound: subintervals are kept in a priority
    queue ordered by their |x| upper bound; the one with the largest bound is
    split until the gap between the global upper bound and the best certified
    lower bound is at most tol. Subintervals whose upper bound cannot beat
    the current lower bound are pruned. Every subinterval evaluation counts
    against ``budget``; exhaustion raises :class:`BudgetExhausted` carrying
    the best enclosure so far. Deterministic: the queue order is a total
    order on exact rationals.
    """
    tol = as_fraction(tol)
    if tol <= 0:
        raise ParameterError(f"tolerance must be positive, got {tol}")
    if budget < 1:
        raise ParameterError(f"budget must be >= 1, got {budget}")

    evals = 0

    def enclose(a: Fraction, b: Fraction) -> Interval:
        return iabs(eval_interval(x, Interval(a, b), prec))

    e0 = enclose(_ZERO, _ONE)
    evals += 1
    lower = e0.lo
    heap: list[tuple[Fraction, Fraction, Fraction]] = [(-e0.hi, _ZERO, _ONE)]
    while heap:
        neg_hi, a, b = heap[0]
        upper = -neg_hi
        if upper - lower <= tol:
            return Interval(lower, upper)
        heapq.heappop(heap)
        if upper <= lower:
            continue
        mid = (a + b) / 2
        for c, d in ((a, mid), (mid, b)):
            if evals >= budget:
                raise BudgetExhausted(
                    f"sup-norm budget of {budget} evaluations exhausted at gap "
                    f"{upper - lower} > tol {tol}",
                    best=Interval(lower, upper),
                )
            e = enclose(c, d)
            evals += 1
            if e.lo > lower:
                lower = e.lo
            if e.hi > lower:
                heapq.heappush(heap, (-e.hi, c, d))
    return Interval(lower, lower)


def find_separating_point(
    x: FuncLin, prec: int = DEFAULT_PRECISION
) -> Optional[tuple[Fraction, Interval]]:
    """Search a rational point where the enclosure of x excludes 0, as
    concrete evidence for a "not exactly zero" verdict. Checks atom
    breakpoints, segment midpoints, and a coarse dyadic grid."""
    ts: set[Fraction] = {_ZERO, _ONE}

    def collect(a: Atom):
        if isinstance(a, PwlAtom):
            ts.update(a.func.abscissae())
        elif isinstance(a, SqrtAtom):
            ts.update(a.radicand.abscissae())
        else:
            for f in a.factors:
                collect(f)

    for atom, _ in x.terms:
        collect(atom)
    grid = sorted(ts)
    for t0, t1 in zip(grid, grid[1:]):
        ts.add((t0 + t1) / 2)
    ts.update(Fraction(k, 64) for k in range(65))
    for t in sorted(ts):
        e = eval_point(x, t, prec)
        if e.lo > 0 or e.hi < 0:
            return t, e
    return None


# -- serialization ------------------------------------------------------------

def _atom_to_obj(a: Atom) -> dict:
    if isinstance(a, PwlAtom):
        return {"kind": "pwl", "points": pwl.to_obj(a.func)}
    if isinstance(a, SqrtAtom):
        return {"kind": "sqrt", "radicand": pwl.to_obj(a.radicand)}
    return {"kind": "product", "factors": [_atom_to_obj(f) for f in a.factors]}


def _atom_from_obj(obj: dict) -> Atom:
    kind = obj["kind"]
    if kind == "pwl":
        return PwlAtom(pwl.from_obj(obj["points"]))
    if kind == "sqrt":
        return SqrtAtom(pwl.from_obj(obj["radicand"]))
    if kind == "product":
        return ProductAtom(tuple(_atom_from_obj(f) for f in obj["factors"]))
    raise ParameterError(f"unknown atom kind {kind!r}")


def to_obj(x: FuncLin) -> list[dict]:
    return [{"coefficient": str(c), "atom": _atom_to_obj(a)} for a, c in x.terms]


def from_obj(obj: Iterable[dict]) -> FuncLin:
    acc: dict[Atom, Fraction] = {}
    for term in obj:
        atom = _atom_from_obj(term["atom"])
        acc[atom] = acc.get(atom, _ZERO) + Fraction(term["coefficient"])
    return FuncLin._from_raw(acc)


def to_json(x: FuncLin) -> str:
    return json.dumps(to_obj(x))


def from_json(s: str) -> FuncLin:
    return from_obj(json.loads(s))


def sample_csv(x: FuncLin, samples: int, digits: int = 12) -> str:
    """CSV "t,value" rows at ``samples`` uniform points in [0,1]; exact PWL
    evaluation where possible, midpoint of a thin enclosure otherwise."""
    if samples < 2:
        raise ParameterError(f"need at least 2 samples, got {samples}")
    collapsed = try_pwl_collapse(x)
    lines = ["t,value"]
    for k in range(samples):
        t = Fraction(k, samples - 1)
        if collapsed is not None:
            v = pwl.evaluate(collapsed, t)
        else:
            v = eval_point(x, t).midpoint
        lines.append(f"{decimal_down(t, digits)},{decimal_down(v, digits)}")
    return "\n".join(lines) + "\n"
