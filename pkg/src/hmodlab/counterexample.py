"""Construction and machine verification of the counterexample.

The pipeline builds, over the scalar algebra C[0,1]:

* a dense sequence q_n of dyadic rationals in (0,1];
* the square-root layer families psi_{q,m} = sqrt(layer(q, m)) whose squares
  telescope to clamped ramps;
* the doubly-indexed module with index set {ZERO} u (N x N) and the bounded
  map on it whose coefficient at ZERO is 1 and at (n, m) is 2^-n psi_{q_n,m};
* the two-entry kernel generators zeta(k, l) that the map annihilates
  exactly, generating a closed submodule of the kernel;

and then certifies, quantitatively, that nothing nonzero is orthogonal to
all the generators: orthogonality forces every entry from the ZERO entry b0
(the constraint solver), and a nonzero b0 makes the row tail sums fail the
Cauchy criterion on a certified witness window around some q_n, so the
forced family escapes the module. The refutation is an explicit lower-bound
function for the tail gaps, cross-checked against computed enclosures.

The pre-Hilbert warm-up for sequence spaces (exact rational linear algebra)
lives here too.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional, Sequence

from .dyadic import DEFAULT_PRECISION, Interval, iabs, sqrt_up
from .errors import (
    BudgetExhausted,
    ConstructionError,
    NotApplicableError,
    ParameterError,
    WindowSearchError,
)
from .funcexpr import FuncLin, eval_interval, is_zero_exact, lin_mul, sqrt_atom
from .hilbert import (
    ZERO,
    CoeffFamily,
    GeneratorElement,
    ModuleElement,
    Pair,
    Support,
    ZeroIndex,
    apply_map,
    cauchy_gap,
    inner_product,
    norm_enclosure,
)
from .pwl import PwlFunc, as_fraction, layer

DEFAULT_TOL = Fraction(1, 2**30)
DEFAULT_BUDGET = 10**6
DEFAULT_DEPTH = 64
DEFAULT_TRUNC = (8, 64)

# window half-widths tried by the witness search, largest first
_EPS_CANDIDATES = tuple(Fraction(1, 2**j) for j in range(2, 9))
_WINDOW_SPLIT_DEPTH = 10


# -- the dense parameter sequence ----------------------------------------------

def dense_sequence(n: int) -> Fraction:
    """Breadth-first enumeration of the dyadic rationals in (0,1]:
    1, 1/2, 1/4, 3/4, 1/8, 3/8, 5/8, 7/8, 1/16, ...

    Injective, and every dyadic k/2**j (k odd) appears at a computable
    position, so the range is dense in [0,1].
    """
    if not isinstance(n, int) or n < 1:
        raise ParameterError(f"sequence position must be an integer >= 1, got {n!r}")
    if n == 1:
        return Fraction(1)
    j = (n - 1).bit_length()
    i = n - 1 - (1 << (j - 1))
    return Fraction(2 * i + 1, 1 << j)


@dataclass(frozen=True)
class DenseSeq:
    """A deterministic parameter sequence n -> q_n in (0,1]. The builtin
    dyadic enumeration is dense; a user-supplied file sequence is accepted
    for experimentation and is only as good as its contents."""

    name: str
    fn: Callable[[int], Fraction]

    def __call__(self, n: int) -> Fraction:
        if not isinstance(n, int) or n < 1:
            raise ParameterError(f"sequence position must be an integer >= 1, got {n!r}")
        q = self.fn(n)
        if not (0 < q <= 1):
            raise ParameterError(f"sequence value q_{n} = {q} outside (0,1]")
        return q

    @staticmethod
    def builtin_dyadic() -> "DenseSeq":
        return DenseSeq("builtin-dyadic", dense_sequence)

    @staticmethod
    def from_file(path) -> "DenseSeq":
        try:
            with open(path) as fh:
                values = [Fraction(line.strip()) for line in fh if line.strip()]
        except (ValueError, ZeroDivisionError) as err:
            raise ParameterError(f"malformed value in sequence file {path}: {err}") from err
        if not values:
            raise ParameterError(f"sequence file {path} is empty")

        def lookup(n: int) -> Fraction:
            if n > len(values):
                raise ParameterError(
                    f"sequence file {path} has only {len(values)} terms, asked for {n}"
                )
            return values[n - 1]

        return DenseSeq(f"file:{path}", lookup)


# -- scalars used as the distinguished entry b0 ---------------------------------

def standard_scalar(name: str) -> FuncLin:
    """Named test scalars: the constant one, the identity t -> t, and the
    vee function |t - 1/3| vanishing only at t = 1/3."""
    key = name.strip().lower()
    if key in ("one", "1"):
        return FuncLin.const(1)
    if key in ("t", "identity"):
        return FuncLin.from_pwl(PwlFunc.from_points([(0, 0), (1, 1)]))
    if key in ("hat13", "hat(1/3)"):
        return FuncLin.from_pwl(
            PwlFunc.from_points([(0, Fraction(1, 3)), (Fraction(1, 3), 0), (1, Fraction(2, 3))])
        )
    raise ParameterError(f"unknown scalar name {name!r} (expected one|t|hat13)")


# -- the construction ------------------------------------------------------------

def root_layer(q, m: int) -> FuncLin:
    """The square-root layer sqrt(ramp(q,m) - ramp(q,m-1)) as a scalar."""
    return _root_layer_cached(as_fraction(q), m)


@lru_cache(maxsize=8192)
def _root_layer_cached(q: Fraction, m: int) -> FuncLin:
    return sqrt_atom(layer(q, m))


def layer_family(q) -> CoeffFamily:
    """The bounded map on the sequence module with coefficients the
    square-root layers at a fixed q; the telescoping identity bounds every
    finite partial sum of squares by 1.

    The coefficient family itself is not square-summable (the partial sums
    converge to the indicator of [0, q), which is discontinuous), so the map
    is bounded but admits no adjoint. Recorded as documentation; there is no
    adjointability decision procedure here.
    """
    q = as_fraction(q)
    if not (0 < q <= 1):
        raise ParameterError(f"q must lie in (0,1], got {q}")

    def coefficient(idx) -> FuncLin:
        if not isinstance(idx, int) or idx < 1:
            raise ParameterError(f"layer family is indexed by integers >= 1, got {idx!r}")
        return root_layer(q, idx)

    return CoeffFamily(
        coefficient=coefficient,
        bound=Fraction(1),
        note="partial sums of squared layers telescope to ramp(q, M) <= 1",
    )


def stacked_map(qs: DenseSeq) -> CoeffFamily:
    """The aggregate bounded map on the doubly-indexed module: coefficient 1
    at ZERO and 2^-n * root_layer(q_n, m) at (n, m). Certificate 4/3 =
    1 + sum_n 4^-n, since row n contributes at most 4^-n to any finite
    partial sum of squares."""

    def coefficient(idx) -> FuncLin:
        if isinstance(idx, ZeroIndex):
            return FuncLin.const(1)
        if isinstance(idx, Pair):
            return Fraction(1, 2**idx.n) * root_layer(qs(idx.n), idx.m)
        raise ParameterError(f"stacked map is indexed by ZERO or pairs, got {idx!r}")

    return CoeffFamily(
        coefficient=coefficient,
        bound=Fraction(4, 3),
        note="1 + sum_n 4^-n * ||ramp(q_n, M)|| <= 1 + 1/3",
    )


def kernel_generator(k: int, l: int, qs: DenseSeq) -> ModuleElement:
    """The two-entry element with 2^-k * root_layer(q_k, l) at ZERO and the
    constant -1 at (k, l); the stacked map annihilates it exactly."""
    if not isinstance(k, int) or not isinstance(l, int) or k < 1 or l < 1:
        raise ParameterError(f"generator indices must be integers >= 1, got ({k!r}, {l!r})")
    return ModuleElement.from_entries(
        [
            (ZERO, Fraction(1, 2**k) * root_layer(qs(k), l)),
            (Pair(k, l), FuncLin.const(-1)),
        ]
    )


def verify_kernel(k: int, l: int, qs: DenseSeq) -> bool:
    """Check that the stacked map sends kernel_generator(k, l) to exactly
    zero (the two products cancel structurally). Raises
    :class:`ConstructionError` with the residual otherwise."""
    residual = apply_map(stacked_map(qs), kernel_generator(k, l, qs))
    if not is_zero_exact(residual):
        raise ConstructionError(
            f"kernel identity failed at (k, l) = ({k}, {l}); residual has "
            f"{len(residual.terms)} terms",
            residual=residual,
        )
    return True


def solve_constraints(b0: FuncLin, qs: DenseSeq) -> GeneratorElement:
    """The unique family orthogonal to every kernel generator with
    distinguished entry b0: entry (n, m) is forced to 2^-n *
    root_layer(q_n, m) * b0. If b0 is zero, so is the whole family."""

    def rule(idx) -> FuncLin:
        if isinstance(idx, ZeroIndex):
            return b0
        if isinstance(idx, Pair):
            return Fraction(1, 2**idx.n) * lin_mul(root_layer(qs(idx.n), idx.m), b0)
        raise ParameterError(f"constraint solution is indexed by ZERO or pairs, got {idx!r}")

    return GeneratorElement(rule=rule, support=Support.all_indices())


# -- witness windows and the non-membership refutation ---------------------------

@dataclass(frozen=True)
class WitnessWindow:
    """A certified window (q - eps, q + eps) n [0,1] on which |b0| >= d > 0."""

    n: int
    q: Fraction
    eps: Fraction
    d: Fraction


def _abs_lower_bound(
    x: FuncLin, lo: Fraction, hi: Fraction, depth: int, prec: int
) -> Fraction:
    """Certified lower bound for |x| on [lo, hi] by adaptive bisection."""
    e = iabs(eval_interval(x, Interval(lo, hi), prec))
    if e.lo > 0 or depth == 0:
        return e.lo
    mid = (lo + hi) / 2
    left = _abs_lower_bound(x, lo, mid, depth - 1, prec)
    if left == 0:
        return Fraction(0)
    right = _abs_lower_bound(x, mid, hi, depth - 1, prec)
    return min(left, right)


def find_witness_window(
    b0: FuncLin,
    qs: DenseSeq,
    depth: int = DEFAULT_DEPTH,
    tol=DEFAULT_TOL,
    prec: int = DEFAULT_PRECISION,
) -> WitnessWindow:
    """Search rows n <= depth for a dyadic window around q_n on which |b0|
    is certified >= d > 0 by interval evaluation.

    Rows are scanned in order; within a row the candidate half-widths are
    tried largest first and the first certifying one wins (a larger window
    maximizes the validity range of the gap lower bound downstream). A
    failed search raises :class:`WindowSearchError` and asserts nothing
    about nonexistence.
    """
    if is_zero_exact(b0):
        raise NotApplicableError("witness windows apply to nonzero scalars only")
    if depth < 1:
        raise ParameterError(f"search depth must be >= 1, got {depth}")
    for n in range(1, depth + 1):
        q = qs(n)
        for eps in _EPS_CANDIDATES:
            lo = max(Fraction(0), q - eps)
            hi = min(Fraction(1), q + eps)
            d = _abs_lower_bound(b0, lo, hi, _WINDOW_SPLIT_DEPTH, prec)
            if d > 0:
                return WitnessWindow(n=n, q=q, eps=eps, d=d)
    raise WindowSearchError(
        f"no certified window found for rows n <= {depth}; the search is "
        "incomplete evidence, not a nonexistence proof"
    )


@dataclass(frozen=True)
class GapCheck:
    """One cross-check of the closed-form tail lower bound against a
    computed tail-norm enclosure on the witness row."""

    m_low: int
    m_high: int
    bound: Fraction
    enclosure: Interval


@dataclass(frozen=True)
class NonMembershipWitness:
    """Quantitative certificate that the constraint solution for a nonzero
    b0 fails the Cauchy criterion and therefore lies outside the module.

    ``gap_bound(M, M')`` = 4^-n d^2 (1 - M/M') lower-bounds the tail norm
    between column cutoffs M < M' whenever 1/M' < min(eps, q_n): the
    evaluation point q_n - 1/M' then lies in the witness window, where the
    tail of squared layers has value exactly 1 - M/M' and |b0|^2 >= d^2.
    The asymptote 4^-n d^2 / 2 (at M' = 2M) stays bounded away from zero,
    so the tails cannot become uniformly small.
    """

    window: WitnessWindow
    asymptote: Fraction
    checks: tuple[GapCheck, ...] = field(default_factory=tuple)

    @property
    def threshold(self) -> Fraction:
        return min(self.window.eps, self.window.q)

    def gap_bound(self, m_low: int, m_high: int) -> Fraction:
        if not (1 <= m_low < m_high):
            raise ParameterError(f"need 1 <= M < M', got ({m_low}, {m_high})")
        if Fraction(1, m_high) >= self.threshold:
            raise ParameterError(
                f"gap bound valid only for 1/M' < {self.threshold}, got M' = {m_high}"
            )
        w = self.window
        return Fraction(1, 4**w.n) * w.d * w.d * (1 - Fraction(m_low, m_high))


def _row_cutoff(n: int, m_max: int) -> frozenset:
    return frozenset(Pair(n, m) for m in range(1, m_max + 1))


def refute_membership(
    b0: FuncLin,
    qs: DenseSeq,
    depth: int = DEFAULT_DEPTH,
    tol=DEFAULT_TOL,
    budget: int = DEFAULT_BUDGET,
    prec: int = DEFAULT_PRECISION,
) -> NonMembershipWitness:
    """Produce and cross-check the non-membership certificate for the
    constraint solution determined by a nonzero b0.

    Raises :class:`NotApplicableError` for b0 == 0 (the forced family is
    then zero, which is a member); window-search failure propagates.
    """
    tol = as_fraction(tol)
    if is_zero_exact(b0):
        raise NotApplicableError(
            "the zero scalar forces the zero family, which belongs to the module"
        )
    window = find_witness_window(b0, qs, depth, tol, prec)
    asymptote = Fraction(1, 4**window.n) * window.d * window.d / 2
    witness = NonMembershipWitness(window=window, asymptote=asymptote)

    x = solve_constraints(b0, qs)
    threshold = witness.threshold
    m0 = 1
    while Fraction(1, 2 * m0) >= threshold:
        m0 *= 2
    checks = []
    for i in range(5):
        m_low, m_high = m0 << i, m0 << (i + 1)
        enclosure = cauchy_gap(
            x,
            _row_cutoff(window.n, m_low),
            _row_cutoff(window.n, m_high),
            tol,
            budget,
            prec,
        )
        bound = witness.gap_bound(m_low, m_high)
        if bound > enclosure.lo + tol:
            raise ConstructionError(
                f"gap lower bound {bound} exceeds computed tail enclosure "
                f"{enclosure} at cutoffs ({m_low}, {m_high})"
            )
        checks.append(GapCheck(m_low, m_high, bound, enclosure))
    return NonMembershipWitness(window=window, asymptote=asymptote, checks=tuple(checks))


# -- the complement probe ---------------------------------------------------------

@dataclass(frozen=True)
class ProbeReport:
    """Finite-truncation evidence for triviality of the complement: the
    truncated constraint solution is orthogonal to every included generator
    exactly, the residual against the excluded generators is bounded below
    by explicit layer norms, and (for nonzero b0) a non-membership witness
    shows the residual cannot be driven to zero inside the module."""

    rows: int
    cols: int
    orthogonal_count: int
    all_orthogonal: bool
    residual: Interval
    residual_terms: int
    witness: Optional[NonMembershipWitness]


def complement_probe(
    b0: FuncLin,
    rows: int,
    cols: int,
    qs: DenseSeq,
    tol=DEFAULT_TOL,
    budget: int = DEFAULT_BUDGET,
    prec: int = DEFAULT_PRECISION,
) -> ProbeReport:
    """Probe orthogonality of the truncated constraint solution (rows n <=
    rows, columns m <= cols) against all kernel generators.

    The residual is the supremum over *excluded* generators (n, m) of
    ||<generator, truncation>|| = 2^-n ||root_layer(q_n, m) * b0||; the
    supremum over the infinite excluded set is enclosed by evaluating
    candidates and pruning tails with the decay bounds
    ||root_layer(q,m)|| <= sqrt(min(q, 1/m)) and the local size of b0 left
    of q_n.
    """
    if rows < 1 or cols < 1:
        raise ParameterError(f"truncation sizes must be >= 1, got ({rows}, {cols})")
    tol = as_fraction(tol)
    if tol <= 0:
        raise ParameterError(f"tolerance must be positive, got {tol}")

    x = solve_constraints(b0, qs)
    indices = [ZERO] + [Pair(n, m) for n in range(1, rows + 1) for m in range(1, cols + 1)]
    truncation = x.truncate(indices)

    orthogonal = 0
    all_orthogonal = True
    for n in range(1, rows + 1):
        for m in range(1, cols + 1):
            value = inner_product(kernel_generator(n, m, qs), truncation)
            if is_zero_exact(value):
                orthogonal += 1
            else:
                all_orthogonal = False

    if is_zero_exact(b0):
        return ProbeReport(
            rows=rows,
            cols=cols,
            orthogonal_count=orthogonal,
            all_orthogonal=all_orthogonal,
            residual=Interval.point(Fraction(0)),
            residual_terms=0,
            witness=None,
        )

    term_tol = tol / 2
    stop_tol = tol / 2
    b0_norm_up = norm_enclosure(b0, term_tol, budget, prec).hi
    lower = Fraction(0)
    upper = Fraction(0)
    evaluated = 0

    def local_bound(q: Fraction, m_cur: int) -> Fraction:
        lo = max(Fraction(0), q - Fraction(1, m_cur + 1))
        return iabs(eval_interval(b0, Interval(lo, q), prec)).hi

    def term(n: int, q: Fraction, m: int) -> Interval:
        nonlocal evaluated
        evaluated += 1
        if evaluated > budget:
            raise BudgetExhausted(
                f"residual budget of {budget} term evaluations exhausted",
                best=Interval(lower, max(upper, b0_norm_up)),
            )
        e = norm_enclosure(lin_mul(root_layer(q, m), b0), term_tol, budget, prec)
        return Interval(e.lo / 2**n, e.hi / 2**n)

    def scan_row(n: int, q: Fraction, m_start: int):
        nonlocal lower, upper
        m = m_start
        while True:
            e = term(n, q, m)
            lower = max(lower, e.lo)
            upper = max(upper, e.hi)
            # sound bound for every unevaluated column m' > m in this row
            tail = local_bound(q, m) * sqrt_up(min(q, Fraction(1, m + 1)), 32) / 2**n
            if tail <= max(lower, stop_tol):
                upper = max(upper, min(tail, b0_norm_up / 2**n))
                return
            m += 1

    for n in range(1, rows + 1):
        scan_row(n, qs(n), cols + 1)
    n = rows + 1
    while b0_norm_up / 2**n > max(lower, stop_tol):
        scan_row(n, qs(n), 1)
        n += 1
    if b0_norm_up / 2**n > 0:
        upper = max(upper, min(b0_norm_up / 2**n, stop_tol + lower))

    witness = refute_membership(b0, qs, DEFAULT_DEPTH, tol, budget, prec)
    return ProbeReport(
        rows=rows,
        cols=cols,
        orthogonal_count=orthogonal,
        all_orthogonal=all_orthogonal,
        residual=Interval(lower, max(lower, upper)),
        residual_terms=evaluated,
        witness=witness,
    )


# -- pre-Hilbert warm-up -----------------------------------------------------------

def _nullspace(rows: Sequence[Sequence[Fraction]], ncols: int) -> list[tuple[Fraction, ...]]:
    """Exact nullspace basis of a rational matrix by Gauss-Jordan."""
    mat = [list(row) for row in rows]
    nrows = len(mat)
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, nrows) if mat[i][c] != 0), None)
        if pivot is None:
            continue
        mat[r], mat[pivot] = mat[pivot], mat[r]
        scale = mat[r][c]
        mat[r] = [v / scale for v in mat[r]]
        for i in range(nrows):
            if i != r and mat[i][c] != 0:
                factor = mat[i][c]
                mat[i] = [v - factor * p for v, p in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * ncols
        vec[fc] = Fraction(1)
        for pr, pc in enumerate(pivots):
            vec[pc] = -mat[pr][fc]
        basis.append(tuple(vec))
    return basis


def _solve_linear(matrix: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]) -> list[Fraction]:
    """Exact solve of a nonsingular rational system by Gaussian elimination."""
    n = len(rhs)
    aug = [list(row) + [b] for row, b in zip(matrix, rhs)]
    for c in range(n):
        pivot = next(i for i in range(c, n) if aug[i][c] != 0)
        aug[c], aug[pivot] = aug[pivot], aug[c]
        scale = aug[c][c]
        aug[c] = [v / scale for v in aug[c]]
        for i in range(n):
            if i != c and aug[i][c] != 0:
                factor = aug[i][c]
                aug[i] = [v - factor * p for v, p in zip(aug[i], aug[c])]
    return [row[n] for row in aug]


@dataclass(frozen=True)
class PreHilbertReport:
    """Exact sequence-space warm-up: over the first N coordinates, the
    difference constraints e_n - 2 e_{n+1} leave a one-dimensional solution
    space spanned by (2^{N-1}, ..., 2, 1); the geometric candidate
    phi = (2^-n) annihilates every constraint exactly; and the least-squares
    distance from (truncated) phi to the constraint span converges to
    ||phi|| = sqrt(1/3), exhibiting an orthogonal complement that appears
    only in the completion."""

    dimension: int
    kernel_basis: tuple[tuple[Fraction, ...], ...]
    kernel_is_expected_line: bool
    orthogonality_checked_up_to: int
    orthogonality_all_zero: bool
    distance_sq: Fraction
    distance_sq_limit_gap: Fraction


def prehilbert_demo(dimension: int, orthogonality_up_to: int = 50) -> PreHilbertReport:
    """Run the exact pre-Hilbert computations in dimension N >= 2."""
    if dimension < 2:
        raise ParameterError(f"dimension must be >= 2, got {dimension}")
    n = dimension
    # constraint rows e_k - 2 e_{k+1}, k = 1..N-1, in Q^N
    rows = []
    for k in range(n - 1):
        row = [Fraction(0)] * n
        row[k] = Fraction(1)
        row[k + 1] = Fraction(-2)
        rows.append(row)

    basis = _nullspace(rows, n)
    expected = tuple(Fraction(2 ** (n - 1 - i)) for i in range(n))
    kernel_is_line = False
    if len(basis) == 1:
        vec = basis[0]
        if vec[-1] != 0:
            scale = expected[-1] / vec[-1]
            kernel_is_line = tuple(v * scale for v in vec) == expected

    phi_all_zero = all(
        Fraction(1, 2**k) - 2 * Fraction(1, 2 ** (k + 1)) == 0
        for k in range(1, orthogonality_up_to + 1)
    )

    phi = [Fraction(1, 2**k) for k in range(1, n + 1)]
    gram = [
        [sum(ri * rj for ri, rj in zip(rows[i], rows[j])) for j in range(n - 1)]
        for i in range(n - 1)
    ]
    rhs = [sum(r * p for r, p in zip(rows[i], phi)) for i in range(n - 1)]
    coeffs = _solve_linear(gram, rhs)
    # distance^2 = ||phi - sum c_i s_i||^2, expanded exactly
    phi_sq = sum(p * p for p in phi)
    cross = sum(c * b for c, b in zip(coeffs, rhs))
    quad = sum(
        coeffs[i] * coeffs[j] * gram[i][j] for i in range(n - 1) for j in range(n - 1)
    )
    distance_sq = phi_sq - 2 * cross + quad
    return PreHilbertReport(
        dimension=n,
        kernel_basis=tuple(basis),
        kernel_is_expected_line=kernel_is_line,
        orthogonality_checked_up_to=orthogonality_up_to,
        orthogonality_all_zero=phi_all_zero,
        distance_sq=distance_sq,
        distance_sq_limit_gap=abs(distance_sq - Fraction(1, 3)),
    )
