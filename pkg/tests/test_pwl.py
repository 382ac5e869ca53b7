"""Exact PWL algebra: pointwise oracles, telescoping, canonical form."""

import random
from fractions import Fraction

import pytest

from hmodlab import pwl
from hmodlab.errors import DomainError, ParameterError
from hmodlab.pwl import PwlFunc


def frac(s) -> Fraction:
    return Fraction(s)


def direct_ramp_value(q: Fraction, m: int, t: Fraction) -> Fraction:
    """Independent oracle: the defining clamp formula, evaluated pointwise."""
    return max(Fraction(0), min(Fraction(1), m * (q - t)))


def random_rational(rng: random.Random, max_den: int = 64) -> Fraction:
    den = rng.randint(1, max_den)
    return Fraction(rng.randint(0, den), den)


def random_pwl(rng: random.Random, max_breaks: int = 5, max_den: int = 16) -> PwlFunc:
    ts = {Fraction(0), Fraction(1)}
    for _ in range(rng.randint(0, max_breaks)):
        ts.add(Fraction(rng.randint(1, 15), 16) * Fraction(rng.randint(1, max_den), max_den))
    pts = [(t, Fraction(rng.randint(-8, 8), rng.randint(1, 4))) for t in sorted(ts) if t <= 1]
    return PwlFunc.from_points(pts)


class TestEvaluate:
    def test_mid_slope(self):
        f = pwl.ramp(frac("1/2"), 2)
        assert pwl.evaluate(f, frac("1/4")) == frac("1/2")

    def test_zero_at_q(self):
        for q, m in ((frac("1/2"), 2), (frac("3/8"), 5), (frac(1), 1)):
            assert pwl.evaluate(pwl.ramp(q, m), q) == 0

    def test_saturated_at_origin(self):
        assert pwl.evaluate(pwl.ramp(frac("1/2"), 4), Fraction(0)) == 1
        assert pwl.evaluate(pwl.ramp(frac("1/4"), 8), Fraction(0)) == 1

    def test_outside_domain_rejected(self):
        f = pwl.ramp(frac("1/2"), 1)
        with pytest.raises(DomainError):
            pwl.evaluate(f, frac("3/2"))
        with pytest.raises(DomainError):
            pwl.evaluate(f, frac("-1/10"))

    def test_matches_clamp_formula_on_grid(self):
        # oracle: the clamp formula at 200 random rational points
        rng = random.Random(7)
        for _ in range(10):
            q = Fraction(rng.randint(1, 16), 16)
            m = rng.randint(0, 12)
            f = pwl.ramp(q, m)
            for _ in range(20):
                t = random_rational(rng)
                assert pwl.evaluate(f, t) == direct_ramp_value(q, m, t)


class TestLincomb:
    def test_cancellation(self):
        f = pwl.ramp(frac("1/2"), 1)
        assert pwl.lincomb([(1, f), (-1, f)]).is_zero()

    def test_scaling(self):
        f = pwl.ramp(frac("1/2"), 1)
        assert pwl.evaluate(pwl.lincomb([(2, f)]), Fraction(0)) == 1

    def test_sum_of_ramps(self):
        g = pwl.lincomb([(1, pwl.ramp(frac("1/2"), 1)), (1, pwl.ramp(frac("1/2"), 2))])
        assert pwl.evaluate(g, frac("1/4")) == frac("3/4")

    def test_evaluation_homomorphism(self):
        # oracle: pointwise combination of values equals value of combination
        rng = random.Random(11)
        for _ in range(25):
            terms = [
                (Fraction(rng.randint(-4, 4), rng.randint(1, 3)), random_pwl(rng))
                for _ in range(rng.randint(1, 4))
            ]
            combo = pwl.lincomb(terms)
            for _ in range(8):
                t = random_rational(rng)
                expected = sum((c * pwl.evaluate(f, t) for c, f in terms), Fraction(0))
                assert pwl.evaluate(combo, t) == expected

    def test_empty_combination_is_zero(self):
        assert pwl.lincomb([]).is_zero()


class TestMeetJoin:
    def test_min_of_nested_ramps(self):
        # pointwise dominance ramp(q,m) >= ramp(q,m-1)
        q = frac("3/8")
        assert pwl.pointwise_min(pwl.ramp(q, 5), pwl.ramp(q, 4)) == pwl.ramp(q, 4)

    def test_max_with_zero_keeps_nonnegative(self):
        f = pwl.ramp(frac("1/2"), 3)
        assert pwl.pointwise_max(f, PwlFunc.zero()) == f

    def test_clamp_builds_ramp(self):
        # independent construction of ramp(1/2, 2) by clamping the affine
        # t -> 2*(1/2 - t) into [0, 1]
        affine = PwlFunc.from_points([(0, 1), (1, -1)])
        clamped = pwl.pointwise_min(pwl.pointwise_max(affine, PwlFunc.zero()), PwlFunc.constant(1))
        assert clamped == pwl.ramp(frac("1/2"), 2)

    def test_clamp_matches_ramp_everywhere(self):
        rng = random.Random(3)
        for _ in range(12):
            q = Fraction(rng.randint(1, 16), 16)
            m = rng.randint(1, 10)
            affine = PwlFunc.from_points([(0, m * q), (1, m * (q - 1))])
            clamped = pwl.pointwise_min(
                pwl.pointwise_max(affine, PwlFunc.zero()), PwlFunc.constant(1)
            )
            assert clamped == pwl.ramp(q, m)

    def test_min_max_pointwise_oracle(self):
        rng = random.Random(5)
        for _ in range(20):
            f, g = random_pwl(rng), random_pwl(rng)
            lo, hi = pwl.pointwise_min(f, g), pwl.pointwise_max(f, g)
            for _ in range(10):
                t = random_rational(rng)
                assert pwl.evaluate(lo, t) == min(pwl.evaluate(f, t), pwl.evaluate(g, t))
                assert pwl.evaluate(hi, t) == max(pwl.evaluate(f, t), pwl.evaluate(g, t))


class TestSupNorm:
    def test_ramp_sup_is_clamped_slope(self):
        assert pwl.sup_norm(pwl.ramp(frac("1/4"), 2)) == frac("1/2")

    def test_zero(self):
        assert pwl.sup_norm(PwlFunc.zero()) == 0

    def test_difference_of_ramps(self):
        d = pwl.lincomb([(1, pwl.ramp(frac("1/2"), 1)), (-1, pwl.ramp(frac("1/2"), 2))])
        assert pwl.sup_norm(d) == frac("1/2")

    def test_sup_law_min_of_one_and_mq(self):
        for q in (frac(1), frac("1/2"), frac("3/8"), frac("1/16")):
            for m in range(0, 20):
                assert pwl.sup_norm(pwl.ramp(q, m)) == min(Fraction(1), m * q)

    def test_brute_force_oracle(self):
        # oracle: dense sampling never exceeds the reported sup, which is attained
        rng = random.Random(13)
        for _ in range(20):
            f = random_pwl(rng)
            s = pwl.sup_norm(f)
            samples = [abs(pwl.evaluate(f, Fraction(k, 97))) for k in range(98)]
            assert all(v <= s for v in samples)
            assert any(abs(v) == s for _, v in f.points)


class TestRampLayer:
    def test_ramp_zero_steepness_is_zero(self):
        assert pwl.ramp(frac("1/2"), 0).is_zero()

    def test_parameter_validation(self):
        with pytest.raises(ParameterError):
            pwl.ramp(frac(0), 1)
        with pytest.raises(ParameterError):
            pwl.ramp(frac("9/8"), 1)
        with pytest.raises(ParameterError):
            pwl.ramp(frac("1/2"), -1)
        with pytest.raises(ParameterError):
            pwl.layer(frac("1/2"), 0)

    def test_layer_first_is_ramp(self):
        assert pwl.layer(frac("1/2"), 1) == pwl.ramp(frac("1/2"), 1)

    def test_layer_value(self):
        assert pwl.evaluate(pwl.layer(frac("1/2"), 2), Fraction(0)) == frac("1/2")

    def test_layer_sup_is_min_q_inv_m(self):
        # oracle: brute force over merged breakpoints via sup_norm
        for q in (frac(1), frac("1/2"), frac("3/4"), frac("1/8"), frac("5/8")):
            for m in range(1, 33):
                assert pwl.sup_norm(pwl.layer(q, m)) == min(q, Fraction(1, m))

    def test_layer_nonnegative(self):
        for q in (frac(1), frac("1/2"), frac("3/8")):
            for m in range(1, 20):
                assert pwl.layer(q, m).is_nonnegative()


class TestTelescoping:
    @pytest.mark.parametrize("q", ["1", "1/2", "1/4", "3/4", "1/8", "3/8", "5/8", "7/8"])
    def test_partial_sums_telescope(self, q):
        q = frac(q)
        running = PwlFunc.zero()
        for m in range(1, 65):
            running = pwl.lincomb([(1, running), (1, pwl.layer(q, m))])
            assert running == pwl.ramp(q, m)

    def test_monotone_exhaustion(self):
        for q in (frac("1/2"), frac("7/8")):
            prev = PwlFunc.zero()
            for m in range(1, 40):
                cur = pwl.ramp(q, m)
                diff = pwl.lincomb([(1, cur), (-1, prev)])
                assert diff.is_nonnegative()
                assert pwl.sup_norm(cur) <= 1
                prev = cur


class TestCanonicalForm:
    def test_idempotent(self):
        rng = random.Random(17)
        for _ in range(20):
            f = random_pwl(rng)
            assert pwl.canonicalize(f) == f  # from_points already canonicalizes

    def test_collinear_interior_removed(self):
        f = PwlFunc.from_points([(0, 0), (frac("1/2"), frac("1/2")), (1, 1)])
        assert f.points == ((Fraction(0), Fraction(0)), (Fraction(1), Fraction(1)))

    def test_structural_equality_is_function_equality(self):
        a = PwlFunc.from_points([(0, 1), (frac("1/4"), frac("1/2")), (frac("1/2"), 0), (1, 0)])
        b = pwl.ramp(frac("1/2"), 2)
        assert a == b


class TestSerialization:
    def test_round_trip_bit_exact(self):
        rng = random.Random(19)
        for _ in range(20):
            f = random_pwl(rng)
            assert pwl.from_json(pwl.to_json(f)) == f

    def test_wire_format(self):
        f = pwl.ramp(frac("1/2"), 1)
        assert pwl.to_obj(f) == [["0", "1/2"], ["1/2", "0"], ["1", "0"]]
