"""Verification suites and report construction.

Each suite runs a family of checks and produces a deterministic report
(rationals as fraction strings, enclosures as outward-rounded decimal
strings): two runs with the same configuration are byte-identical modulo
the timestamp. Suites never raise on a *verified failure*; they record it
and let the caller map it to an exit status. Resource and parameter
problems do raise.
"""

from __future__ import annotations

import datetime
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from . import counterexample as cx
from . import funcexpr, pwl
from .dyadic import Interval, decimal_down, decimal_up
from .errors import CertificateViolation, ConstructionError, ParameterError
from .funcexpr import FuncLin, lin_mul
from .hilbert import ZERO, Pair, cauchy_gap, inner_product, verify_map_bound
from .pwl import PwlFunc

REPORT_DIGITS = 30
SUITE_NAMES = ("identity", "kernel", "bound", "complement", "prehilbert")
CURVE_OBJECTS = ("f", "row-sum", "gap")

_Q_GRID_SIZE = 8  # q_1 .. q_8 of the dense enumeration
_KERNEL_RANGE = 20
_ORTHO_RANGE = 10
_GAP_CUTOFFS = (4, 8, 16, 32)
_PROBE_TRUNC = (2, 3)
_PROBE_TOL = Fraction(1, 2**20)
_PREHILBERT_ORTHO = 50
_PREHILBERT_DIM = 40


# -- configuration -------------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    """Validated run parameters shared by every suite."""

    tol: Fraction = cx.DEFAULT_TOL
    budget: int = cx.DEFAULT_BUDGET
    depth: int = cx.DEFAULT_DEPTH
    trunc_rows: int = cx.DEFAULT_TRUNC[0]
    trunc_cols: int = cx.DEFAULT_TRUNC[1]
    qseq: cx.DenseSeq = field(default_factory=cx.DenseSeq.builtin_dyadic)

    def __post_init__(self):
        if self.tol <= 0:
            raise ParameterError(f"tol must be positive, got {self.tol}")
        for name in ("budget", "depth", "trunc_rows", "trunc_cols"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ParameterError(f"{name} must be an integer >= 1, got {value!r}")

    def to_obj(self) -> dict:
        return {
            "tol": str(self.tol),
            "budget": self.budget,
            "depth": self.depth,
            "trunc": f"{self.trunc_rows},{self.trunc_cols}",
            "qseq": self.qseq.name,
        }


def config_from_options(options: dict) -> RunConfig:
    """Build a RunConfig from a string-keyed option mapping (config file,
    CLI flags, or service payload); unknown keys are rejected."""
    known = {"tol", "budget", "depth", "trunc", "qseq"}
    unknown = set(options) - known
    if unknown:
        raise ParameterError(f"unknown config keys: {sorted(unknown)}")
    kwargs = {}
    try:
        if "tol" in options and options["tol"] is not None:
            kwargs["tol"] = Fraction(str(options["tol"]))
        for key, attr in (("budget", "budget"), ("depth", "depth")):
            if key in options and options[key] is not None:
                kwargs[attr] = int(options[key])
        if options.get("trunc"):
            rows, cols = str(options["trunc"]).split(",")
            kwargs["trunc_rows"], kwargs["trunc_cols"] = int(rows), int(cols)
    except (ValueError, ZeroDivisionError) as err:
        raise ParameterError(f"malformed config value: {err}") from err
    qseq = options.get("qseq")
    if qseq:
        if isinstance(qseq, (list, tuple)):
            kwargs["qseq"] = dense_seq_from_values(qseq)
        elif qseq != "builtin-dyadic":
            kwargs["qseq"] = cx.DenseSeq.from_file(qseq)
    return RunConfig(**kwargs)


def dense_seq_from_values(values) -> cx.DenseSeq:
    try:
        parsed = [Fraction(str(v)) for v in values]
    except (ValueError, ZeroDivisionError) as err:
        raise ParameterError(f"malformed sequence value: {err}") from err
    if not parsed:
        raise ParameterError("explicit q-sequence must be nonempty")

    def lookup(n: int) -> Fraction:
        if n > len(parsed):
            raise ParameterError(f"explicit q-sequence has {len(parsed)} terms, asked for {n}")
        return parsed[n - 1]

    return cx.DenseSeq("explicit", lookup)


def parse_config_file(path) -> dict:
    """Plain key=value lines; blank lines and '#' comments ignored."""
    options: dict = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParameterError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = line.split("=", 1)
            options[key.strip()] = value.strip()
    out = options.pop("out", None)
    if out is not None:
        options["__out__"] = out
    return options


# -- report model ---------------------------------------------------------------

@dataclass
class Check:
    check: str
    parameters: dict
    verdict: str  # "exact-zero" | "enclosure"
    passed: bool
    interval: Optional[Interval] = None
    witness: Optional[dict] = None

    def to_obj(self) -> dict:
        obj = {
            "check": self.check,
            "parameters": self.parameters,
            "verdict": self.verdict,
            "passed": self.passed,
        }
        if self.interval is not None:
            obj["interval"] = interval_to_obj(self.interval)
        if self.witness is not None:
            obj["witness"] = self.witness
        return obj


@dataclass
class SuiteReport:
    suite: str
    timestamp: str
    config: dict
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_obj(self) -> dict:
        return {
            "suite": self.suite,
            "timestamp": self.timestamp,
            "config": self.config,
            "passed": self.passed,
            "checks": [c.to_obj() for c in self.checks],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_obj(), indent=2) + "\n"


def interval_to_obj(iv: Interval) -> dict:
    return {
        "lo": decimal_down(iv.lo, REPORT_DIGITS),
        "hi": decimal_up(iv.hi, REPORT_DIGITS),
        "digits": REPORT_DIGITS,
    }


def _timestamp() -> str:
    return datetime.datetime.now(tz=datetime.timezone.utc).isoformat()


def _witness_to_obj(w: cx.NonMembershipWitness) -> dict:
    return {
        "window": {
            "n": w.window.n,
            "q": str(w.window.q),
            "eps": str(w.window.eps),
            "d": str(w.window.d),
        },
        "asymptote": str(w.asymptote),
        "threshold": str(w.threshold),
        "gap_checks": [
            {
                "m_low": c.m_low,
                "m_high": c.m_high,
                "bound": str(c.bound),
                "enclosure": interval_to_obj(c.enclosure),
            }
            for c in w.checks
        ],
    }


# -- suites -----------------------------------------------------------------------

def suite_identity(cfg: RunConfig) -> SuiteReport:
    """Exact telescoping: partial sums of squared layers equal the clamped
    ramp, as canonical PWL equality, over the q grid and all column cutoffs."""
    checks = []
    for n in range(1, _Q_GRID_SIZE + 1):
        q = cfg.qseq(n)
        running = PwlFunc.zero()
        for m in range(1, cfg.trunc_cols + 1):
            running = pwl.lincomb([(1, running), (1, pwl.layer(q, m))])
            ok = running == pwl.ramp(q, m)
            checks.append(
                Check(
                    check="telescoping",
                    parameters={"q": str(q), "M": m},
                    verdict="exact-zero",
                    passed=ok,
                )
            )
    return SuiteReport("identity", _timestamp(), cfg.to_obj(), checks)


def suite_kernel(cfg: RunConfig) -> SuiteReport:
    """The stacked map annihilates every kernel generator exactly."""
    checks = []
    for k in range(1, _KERNEL_RANGE + 1):
        for l in range(1, _KERNEL_RANGE + 1):
            try:
                cx.verify_kernel(k, l, cfg.qseq)
                checks.append(
                    Check(
                        check="kernel-annihilation",
                        parameters={"k": k, "l": l},
                        verdict="exact-zero",
                        passed=True,
                    )
                )
            except ConstructionError as err:
                checks.append(
                    Check(
                        check="kernel-annihilation",
                        parameters={"k": k, "l": l},
                        verdict="exact-zero",
                        passed=False,
                        witness={"residual": funcexpr.to_obj(err.residual)},
                    )
                )
    return SuiteReport("kernel", _timestamp(), cfg.to_obj(), checks)


def suite_bound(cfg: RunConfig) -> SuiteReport:
    """Bound certificates: exact partial-sum norms for the layer families and
    the finite-subset certificate of the stacked map."""
    checks = []
    cutoffs = [m for m in (1, 2, 4, 8, 16, 32, 64) if m <= cfg.trunc_cols]
    for n in range(1, _Q_GRID_SIZE + 1):
        q = cfg.qseq(n)
        fam = cx.layer_family(q)
        for m_cut in cutoffs:
            e = verify_map_bound(fam, range(1, m_cut + 1), cfg.tol, cfg.budget)
            expected = min(Fraction(1), m_cut * q)
            checks.append(
                Check(
                    check="layer-family-norm",
                    parameters={"q": str(q), "M": m_cut, "expected": str(expected)},
                    verdict="enclosure",
                    passed=e.lo == expected and e.hi == expected,
                    interval=e,
                )
            )
    phi = cx.stacked_map(cfg.qseq)
    side = min(8, cfg.trunc_rows)
    subset = [ZERO] + [Pair(n, m) for n in range(1, side + 1) for m in range(1, side + 1)]
    try:
        e = verify_map_bound(phi, subset, cfg.tol, cfg.budget)
        bound_ok, enclosure = e.hi <= phi.bound, e
    except CertificateViolation as err:
        bound_ok, enclosure = False, err.enclosure
    checks.append(
        Check(
            check="stacked-map-bound",
            parameters={"subset": f"zero plus pairs up to ({side},{side})", "certificate": str(phi.bound)},
            verdict="enclosure",
            passed=bound_ok,
            interval=enclosure,
        )
    )
    e_empty = verify_map_bound(phi, [], cfg.tol, cfg.budget)
    checks.append(
        Check(
            check="stacked-map-bound",
            parameters={"subset": "empty", "certificate": str(phi.bound)},
            verdict="enclosure",
            passed=e_empty.lo == 0 and e_empty.hi == 0,
            interval=e_empty,
        )
    )
    return SuiteReport("bound", _timestamp(), cfg.to_obj(), checks)


def suite_complement(cfg: RunConfig) -> SuiteReport:
    """Density of the parameter sequence, exact orthogonality of constraint
    solutions, the quantitative tail gaps, and the truncation probe."""
    checks = []

    prefix = [cfg.qseq(n) for n in range(1, 257)]
    worst = max(min(abs(q - Fraction(k, 100)) for q in prefix) for k in range(1, 101))
    checks.append(
        Check(
            check="density",
            parameters={"grid": "k/100", "prefix": 256, "radius": "1/128"},
            verdict="enclosure",
            passed=worst < Fraction(1, 128),
            interval=Interval.point(worst),
        )
    )

    for name in ("one", "t", "hat13"):
        b0 = cx.standard_scalar(name)
        solution = cx.solve_constraints(b0, cfg.qseq)
        all_zero = True
        for n in range(1, _ORTHO_RANGE + 1):
            for m in range(1, _ORTHO_RANGE + 1):
                z = cx.kernel_generator(n, m, cfg.qseq)
                if inner_product(z, solution.truncate(z.support())) != FuncLin.zero():
                    all_zero = False
        checks.append(
            Check(
                check="constraint-orthogonality",
                parameters={"b0": name, "range": _ORTHO_RANGE},
                verdict="exact-zero",
                passed=all_zero,
            )
        )

    solution = cx.solve_constraints(FuncLin.const(1), cfg.qseq)
    q2 = cfg.qseq(2)
    for m_cut in _GAP_CUTOFFS:
        s1 = frozenset(Pair(2, m) for m in range(1, m_cut + 1))
        s2 = frozenset(Pair(2, m) for m in range(1, 2 * m_cut + 1))
        e = cauchy_gap(solution, s1, s2, cfg.tol, cfg.budget)
        # independent oracle: the tail collapses to 4^-2 (ramp(q,2M) - ramp(q,M))
        expected = Fraction(1, 16) * pwl.sup_norm(
            pwl.lincomb([(1, pwl.ramp(q2, 2 * m_cut)), (-1, pwl.ramp(q2, m_cut))])
        )
        checks.append(
            Check(
                check="row-tail-gap",
                parameters={"row": 2, "M": m_cut, "M2": 2 * m_cut, "expected": str(expected)},
                verdict="enclosure",
                passed=e.lo == expected and e.hi == expected,
                interval=e,
            )
        )

    try:
        witness = cx.refute_membership(FuncLin.const(1), cfg.qseq, cfg.depth, cfg.tol, cfg.budget)
        gap_ok = all(c.bound <= c.enclosure.lo + cfg.tol for c in witness.checks)
        checks.append(
            Check(
                check="non-membership",
                parameters={"b0": "one"},
                verdict="enclosure",
                passed=gap_ok and witness.asymptote > 0,
                witness=_witness_to_obj(witness),
            )
        )
    except ConstructionError as err:
        checks.append(
            Check(
                check="non-membership",
                parameters={"b0": "one"},
                verdict="enclosure",
                passed=False,
                witness={"error": str(err)},
            )
        )

    probe = cx.complement_probe(
        FuncLin.const(1), _PROBE_TRUNC[0], _PROBE_TRUNC[1], cfg.qseq, _PROBE_TOL, cfg.budget
    )
    expected = Fraction(1, 4)
    residual_ok = (
        abs(probe.residual.lo - expected) <= _PROBE_TOL
        and abs(probe.residual.hi - expected) <= _PROBE_TOL
    )
    checks.append(
        Check(
            check="complement-probe",
            parameters={
                "b0": "one",
                "rows": _PROBE_TRUNC[0],
                "cols": _PROBE_TRUNC[1],
                "expected_residual": str(expected),
            },
            verdict="enclosure",
            passed=probe.all_orthogonal and residual_ok,
            interval=probe.residual,
            witness=_witness_to_obj(probe.witness) if probe.witness else None,
        )
    )
    return SuiteReport("complement", _timestamp(), cfg.to_obj(), checks)


def suite_prehilbert(cfg: RunConfig) -> SuiteReport:
    """The sequence-space warm-up: exact kernel line, exact orthogonality of
    the geometric candidate, convergence of the least-squares distance."""
    checks = []
    rep3 = cx.prehilbert_demo(3)
    checks.append(
        Check(
            check="constraint-kernel-line",
            parameters={"dimension": 3, "expected": "span{(4,2,1)}"},
            verdict="exact-zero",
            passed=rep3.kernel_is_expected_line,
        )
    )
    rep = cx.prehilbert_demo(_PREHILBERT_DIM, orthogonality_up_to=_PREHILBERT_ORTHO)
    checks.append(
        Check(
            check="geometric-candidate-orthogonality",
            parameters={"up_to": _PREHILBERT_ORTHO},
            verdict="exact-zero",
            passed=rep.orthogonality_all_zero,
        )
    )
    checks.append(
        Check(
            check="distance-to-span",
            parameters={"dimension": _PREHILBERT_DIM, "limit": "1/3", "tolerance": "1/1000000"},
            verdict="enclosure",
            passed=rep.distance_sq_limit_gap < Fraction(1, 10**6),
            interval=Interval.point(rep.distance_sq),
        )
    )
    return SuiteReport("prehilbert", _timestamp(), cfg.to_obj(), checks)


_SUITES: dict[str, Callable[[RunConfig], SuiteReport]] = {
    "identity": suite_identity,
    "kernel": suite_kernel,
    "bound": suite_bound,
    "complement": suite_complement,
    "prehilbert": suite_prehilbert,
}


def run_suites(name: str, cfg: RunConfig) -> list[SuiteReport]:
    """Run one named suite, or all of them in canonical order."""
    if name == "all":
        return [_SUITES[s](cfg) for s in SUITE_NAMES]
    if name not in _SUITES:
        raise ParameterError(f"unknown suite {name!r} (expected {'|'.join(SUITE_NAMES)}|all)")
    return [_SUITES[name](cfg)]


# -- curve emission -----------------------------------------------------------------

def emit_curve(obj: str, params: dict, samples: int, cfg: Optional[RunConfig] = None) -> str:
    """CSV `t,value` sampling of the named curve:

    * ``f``        -- the clamped ramp; params q, m;
    * ``row-sum``  -- partial (or limit) row sums of the constraint solution
                      squared; params b0, n, and m (an integer or "limit");
    * ``gap``      -- the tail between two column cutoffs; params b0, n,
                      m_low, m_high.
    """
    cfg = cfg or RunConfig()
    if samples < 2:
        raise ParameterError(f"need at least 2 samples, got {samples}")
    try:
        if obj == "f":
            q = Fraction(str(params["q"]))
            m = int(params["m"])
            return funcexpr.sample_csv(FuncLin.from_pwl(pwl.ramp(q, m)), samples)
        if obj == "row-sum":
            b0 = cx.standard_scalar(str(params.get("b0", "one")))
            n = int(params["n"])
            q = cfg.qseq(n)
            weight = Fraction(1, 4**n)
            if str(params.get("m", "limit")) == "limit":
                return _limit_row_sum_csv(b0, q, weight, samples)
            m = int(params["m"])
            x = weight * lin_mul(lin_mul(b0, b0), FuncLin.from_pwl(pwl.ramp(q, m)))
            return funcexpr.sample_csv(x, samples)
        if obj == "gap":
            b0 = cx.standard_scalar(str(params.get("b0", "one")))
            n = int(params["n"])
            m_low, m_high = int(params["m_low"]), int(params["m_high"])
            if not m_low < m_high:
                raise ParameterError("gap curve needs m_low < m_high")
            q = cfg.qseq(n)
            tail = pwl.lincomb([(1, pwl.ramp(q, m_high)), (-1, pwl.ramp(q, m_low))])
            x = Fraction(1, 4**n) * lin_mul(lin_mul(b0, b0), FuncLin.from_pwl(tail))
            return funcexpr.sample_csv(x, samples)
    except KeyError as err:
        raise ParameterError(f"curve {obj!r} is missing parameter {err.args[0]!r}") from err
    except (ValueError, ZeroDivisionError) as err:
        raise ParameterError(f"malformed curve parameter: {err}") from err
    raise ParameterError(f"unknown curve object {obj!r} (expected {'|'.join(CURVE_OBJECTS)})")


def _limit_row_sum_csv(b0: FuncLin, q: Fraction, weight: Fraction, samples: int) -> str:
    """The discontinuous limit of the row sums: weight * b0(t)^2 left of q,
    0 from q on; sampled exactly for PWL scalars."""
    lines = ["t,value"]
    for k in range(samples):
        t = Fraction(k, samples - 1)
        if t < q:
            sq = lin_mul(b0, b0)
            collapsed = funcexpr.try_pwl_collapse(sq)
            if collapsed is not None:
                v = weight * pwl.evaluate(collapsed, t)
            else:
                v = weight * funcexpr.eval_point(sq, t).midpoint
        else:
            v = Fraction(0)
        lines.append(f"{decimal_down(t, 12)},{decimal_down(v, 12)}")
    return "\n".join(lines) + "\n"
