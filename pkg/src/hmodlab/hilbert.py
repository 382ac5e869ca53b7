"""Standard Hilbert module over C[0,1] with a countable index set.

Elements are finitely supported families of :class:`FuncLin` scalars; the
inner product <x, y> = sum_s x_s* y_s is computed exactly (the involution is
the identity on the real-valued scalars this construction uses). Bounded
right-linear maps into C[0,1] are represented by coefficient families with a
stored bound certificate that can be spot-verified on any finite subset.

Index sets:

* plain ``int`` (>= 1) for sequence modules;
* ``ZERO`` / ``Pair(n, m)`` for the doubly-indexed set {0} u (N x N) used by
  the counterexample, serialized as ``"0"`` and ``"n:m"``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional, Union

from . import funcexpr
from .dyadic import DEFAULT_PRECISION, Interval, isqrt_iv, iscale, sqrt_down, sqrt_up
from .errors import CertificateViolation, ParameterError
from .funcexpr import (
    FuncLin,
    PwlAtom,
    atom_has_sqrt,
    atom_square,
    lin_combine,
    lin_mul,
    sup_norm_enclosure,
    try_pwl_collapse,
)
from .pwl import as_fraction, sup_norm

# -- indices ------------------------------------------------------------------

class ZeroIndex:
    """The distinguished index of the separate scalar copy; a singleton."""

    _instance: Optional["ZeroIndex"] = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "ZERO"


ZERO = ZeroIndex()


@dataclass(frozen=True)
class Pair:
    """Index (n, m): entry m of the n-th sequence copy; both >= 1."""

    n: int
    m: int

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ParameterError(f"pair components must be >= 1, got ({self.n}, {self.m})")


Index = Union[int, ZeroIndex, Pair]


def index_key(idx: Index) -> tuple[int, int, int]:
    """Total order: ZERO first, then naturals, then pairs lexicographically."""
    if isinstance(idx, ZeroIndex):
        return (0, 0, 0)
    if isinstance(idx, int):
        return (1, idx, 0)
    if isinstance(idx, Pair):
        return (2, idx.n, idx.m)
    raise ParameterError(f"not an index: {idx!r}")


def index_str(idx: Index) -> str:
    if isinstance(idx, ZeroIndex):
        return "0"
    if isinstance(idx, int):
        return str(idx)
    return f"{idx.n}:{idx.m}"


def parse_index(s: str) -> Index:
    if ":" in s:
        n, m = s.split(":")
        return Pair(int(n), int(m))
    if s == "0":
        return ZERO
    value = int(s)
    if value < 1:
        raise ParameterError(f"natural index must be >= 1, got {s!r}")
    return value


# -- module elements ----------------------------------------------------------

@dataclass(frozen=True)
class ModuleElement:
    """Finitely supported family index -> FuncLin (zero entries removed)."""

    entries: tuple[tuple[Index, FuncLin], ...]

    @staticmethod
    def from_entries(pairs: Iterable[tuple[Index, FuncLin]]) -> "ModuleElement":
        acc: dict[Index, FuncLin] = {}
        for idx, value in pairs:
            if idx in acc:
                value = acc[idx] + value
            acc[idx] = value
        items = [(idx, v) for idx, v in acc.items() if v.terms]
        items.sort(key=lambda iv: index_key(iv[0]))
        return ModuleElement(tuple(items))

    @staticmethod
    def zero() -> "ModuleElement":
        return ModuleElement(())

    def support(self) -> tuple[Index, ...]:
        return tuple(idx for idx, _ in self.entries)

    def entry(self, idx: Index) -> FuncLin:
        for i, v in self.entries:
            if i == idx:
                return v
        return FuncLin.zero()

    def __add__(self, other: "ModuleElement") -> "ModuleElement":
        return ModuleElement.from_entries(list(self.entries) + list(other.entries))

    def __neg__(self) -> "ModuleElement":
        return ModuleElement(tuple((i, -v) for i, v in self.entries))

    def __sub__(self, other: "ModuleElement") -> "ModuleElement":
        return self + (-other)


def basis_vector(s: Index) -> ModuleElement:
    """The canonical basis element e_s (entry s holds the constant 1)."""
    return ModuleElement.from_entries([(s, FuncLin.const(1))])


def right_action(x: ModuleElement, b: FuncLin) -> ModuleElement:
    """Entrywise right multiplication x * b."""
    return ModuleElement.from_entries([(i, lin_mul(v, b)) for i, v in x.entries])


def inner_product(x: ModuleElement, y: ModuleElement) -> FuncLin:
    """<x, y> = sum over the common support of x_s * y_s, exact."""
    ys = dict(y.entries)
    terms = []
    for idx, xv in x.entries:
        yv = ys.get(idx)
        if yv is not None:
            terms.append((1, lin_mul(xv, yv)))
    return lin_combine(terms)


# -- norms ---------------------------------------------------------------------

def norm_enclosure(
    x: FuncLin,
    tol,
    budget: int = 10**6,
    prec: int = DEFAULT_PRECISION,
) -> Interval:
    """Enclosure of the sup norm of a FuncLin, routed through the cheapest
    sound method.

    * PWL-only combinations collapse to an exact value (width 0).
    * A single term c*A whose atom contains square-root factors is squared
      symbolically (all roots pair out, leaving a PWL or an all-PWL
      product), the square's sup is enclosed, and sup |c*A| =
      |c| sqrt(sup A^2) is recovered -- no branch-and-bound over irrational
      atoms needed.
    * Everything else goes to branch-and-bound directly.
    """
    collapsed = try_pwl_collapse(x)
    if collapsed is not None:
        v = sup_norm(collapsed)
        return Interval(v, v)
    tol = as_fraction(tol)
    if tol <= 0:
        raise ParameterError(f"tolerance must be positive, got {tol}")
    if len(x.terms) == 1 and atom_has_sqrt(x.terms[0][0]):
        atom, c = x.terms[0]
        c_abs = abs(c)
        scale, sq = atom_square(atom)
        if isinstance(sq, PwlAtom):
            v = scale * sup_norm(sq.func)
            return iscale(c_abs, Interval(sqrt_down(v, prec), sqrt_up(v, prec)), prec)
        inner_tol = tol / c_abs
        y = FuncLin(((sq, scale),))
        e = sup_norm_enclosure(y, inner_tol, budget, prec)
        if e.hi > inner_tol * inner_tol:
            if e.hi >= 2 * inner_tol:
                target = inner_tol * sqrt_down(e.hi, prec) / 2
            else:
                target = inner_tol * inner_tol  # narrow band near zero
            if e.width > target:
                e = sup_norm_enclosure(y, target, budget, prec)
        return iscale(c_abs, isqrt_iv(e, prec), prec)
    return sup_norm_enclosure(x, tol, budget, prec)


def module_norm(
    x: ModuleElement,
    tol,
    budget: int = 10**6,
    prec: int = DEFAULT_PRECISION,
) -> Interval:
    """Enclosure of ||x|| = sqrt(||<x,x>||) of width <= tol.

    The inner tolerance is chosen adaptively from a rough pass: requesting
    tol^2 outright would force branch-and-bound to resolve quadratic maxima
    far beyond what the square root needs, while tol * sqrt(sup)/2 keeps the
    post-sqrt width below tol whenever the norm is not itself below tol.
    """
    tol = as_fraction(tol)
    if tol <= 0:
        raise ParameterError(f"tolerance must be positive, got {tol}")
    gram = inner_product(x, x)
    rough = norm_enclosure(gram, tol, budget, prec)
    if rough.hi <= tol * tol:
        return isqrt_iv(rough, prec)
    if rough.hi >= 2 * tol:
        target = tol * sqrt_down(rough.hi, prec) / 2
    else:
        target = tol * tol  # narrow band near zero; rarely hit
    if rough.width > target:
        rough = norm_enclosure(gram, target, budget, prec)
    return isqrt_iv(rough, prec)


# -- bounded maps as coefficient families --------------------------------------

@dataclass(frozen=True)
class CoeffFamily:
    """A bounded right-linear map into C[0,1], given by its coefficients
    beta_s (the values on basis vectors) together with a bound certificate:
    ||sum_{s in S'} beta_s * beta_s|| <= bound for every finite subset S'.

    The certificate is a stored number with a derivation note; it is
    spot-verified by :func:`verify_map_bound` on every finite subset a
    computation touches, never proven universally.
    """

    coefficient: Callable[[Index], FuncLin]
    bound: Fraction
    note: str


def apply_map(family: CoeffFamily, x: ModuleElement) -> FuncLin:
    """Exact value of the map on a finitely supported element:
    sum_s beta_s * x_s over the support of x."""
    terms = [(1, lin_mul(family.coefficient(idx), value)) for idx, value in x.entries]
    return lin_combine(terms)


def gram_sum(family: CoeffFamily, subset: Iterable[Index]) -> FuncLin:
    """sum_{s in S'} beta_s * beta_s for a finite subset S'."""
    idxs = sorted(subset, key=index_key)
    return lin_combine([(1, lin_mul(family.coefficient(i), family.coefficient(i))) for i in idxs])


def verify_map_bound(
    family: CoeffFamily,
    subset: Iterable[Index],
    tol,
    budget: int = 10**6,
    prec: int = DEFAULT_PRECISION,
) -> Interval:
    """Enclosure of ||sum_{s in S'} beta_s * beta_s|| for the finite subset;
    raises :class:`CertificateViolation` if the upper endpoint exceeds the
    stored certificate."""
    idxs = sorted(subset, key=index_key)
    enclosure = norm_enclosure(gram_sum(family, idxs), tol, budget, prec)
    if enclosure.hi > family.bound:
        raise CertificateViolation(
            f"bound certificate {family.bound} violated on subset "
            f"{[index_str(i) for i in idxs]}: ||sum beta*beta|| in {enclosure}",
            subset=tuple(idxs),
            enclosure=enclosure,
            bound=family.bound,
        )
    return enclosure


# -- rule-defined families ------------------------------------------------------

@dataclass(frozen=True)
class Support:
    """Support descriptor for rule-defined families: a finite index set, one
    full row of pairs, or the whole index set {ZERO} u (N x N)."""

    kind: str  # "finite" | "row" | "all"
    indices: frozenset = frozenset()
    row: int = 0

    @staticmethod
    def finite(indices: Iterable[Index]) -> "Support":
        return Support("finite", indices=frozenset(indices))

    @staticmethod
    def full_row(n: int) -> "Support":
        return Support("row", row=n)

    @staticmethod
    def all_indices() -> "Support":
        return Support("all")

    def contains(self, idx: Index) -> bool:
        if self.kind == "finite":
            return idx in self.indices
        if self.kind == "row":
            return isinstance(idx, Pair) and idx.n == self.row
        return isinstance(idx, (ZeroIndex, Pair))


@dataclass(frozen=True)
class GeneratorElement:
    """A rule-defined (possibly infinitely supported) family. The rule must
    be pure; queries outside the declared support return zero."""

    rule: Callable[[Index], FuncLin]
    support: Support

    def entry(self, idx: Index) -> FuncLin:
        if not self.support.contains(idx):
            return FuncLin.zero()
        return self.rule(idx)

    def truncate(self, indices: Iterable[Index]) -> ModuleElement:
        """Finitely supported restriction to the given index set."""
        return ModuleElement.from_entries([(i, self.entry(i)) for i in indices])


def inner_with_generator(x: ModuleElement, g: GeneratorElement) -> FuncLin:
    """<x, g>: well defined because only the finite support of x enters."""
    return inner_product(x, g.truncate(x.support()))


def cauchy_gap(
    x: GeneratorElement,
    s1: Iterable[Index],
    s2: Iterable[Index],
    tol,
    budget: int = 10**6,
    prec: int = DEFAULT_PRECISION,
) -> Interval:
    """Enclosure of ||sum_{a in S2 minus S1} x_a * x_a||, the tail norm whose
    uniform smallness over growing subsets is exactly membership in the
    standard module."""
    set1, set2 = frozenset(s1), frozenset(s2)
    if not set1 <= set2:
        raise ParameterError("cauchy_gap requires S1 to be a subset of S2")
    diff = sorted(set2 - set1, key=index_key)
    gram = lin_combine([(1, lin_mul(x.entry(a), x.entry(a))) for a in diff])
    return norm_enclosure(gram, tol, budget, prec)


# -- serialization ---------------------------------------------------------------

def element_to_obj(x: ModuleElement) -> dict:
    return {index_str(i): funcexpr.to_obj(v) for i, v in x.entries}


def element_from_obj(obj: dict) -> ModuleElement:
    return ModuleElement.from_entries(
        [(parse_index(k), funcexpr.from_obj(v)) for k, v in obj.items()]
    )


def element_to_json(x: ModuleElement) -> str:
    return json.dumps(element_to_obj(x))


def element_from_json(s: str) -> ModuleElement:
    return element_from_obj(json.loads(s))
