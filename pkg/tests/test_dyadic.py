"""Outward-rounded dyadic interval arithmetic soundness."""

import random
from fractions import Fraction

import pytest

from hmodlab import dyadic
from hmodlab.dyadic import Interval
from hmodlab.errors import DomainError, ParameterError


def random_fraction(rng, span=10):
    return Fraction(rng.randint(-span * 60, span * 60), rng.randint(1, 60))


class TestRounding:
    def test_round_down_up_bracket(self):
        rng = random.Random(23)
        for _ in range(200):
            x = random_fraction(rng)
            lo = dyadic.round_down(x, 16)
            hi = dyadic.round_up(x, 16)
            assert lo <= x <= hi
            assert hi - lo <= Fraction(1, 2**16)
            assert (lo * 2**16).denominator == 1
            assert (hi * 2**16).denominator == 1

    def test_exact_dyadics_fixed(self):
        x = Fraction(5, 8)
        assert dyadic.round_down(x, 8) == x
        assert dyadic.round_up(x, 8) == x

    def test_sqrt_bounds(self):
        rng = random.Random(29)
        for _ in range(200):
            x = abs(random_fraction(rng))
            lo = dyadic.sqrt_down(x, 32)
            hi = dyadic.sqrt_up(x, 32)
            assert lo * lo <= x <= hi * hi
            assert hi - lo <= Fraction(1, 2**31)

    def test_sqrt_exact_for_dyadic_squares(self):
        assert dyadic.sqrt_down(Fraction(1, 4)) == Fraction(1, 2)
        assert dyadic.sqrt_up(Fraction(1, 4)) == Fraction(1, 2)
        assert dyadic.sqrt_down(Fraction(9)) == 3

    def test_sqrt_rejects_negative(self):
        with pytest.raises(DomainError):
            dyadic.sqrt_down(Fraction(-1))


class TestIntervalOps:
    def test_empty_interval_rejected(self):
        with pytest.raises(ParameterError):
            Interval(Fraction(1), Fraction(0))

    def test_containment_under_ops(self):
        # oracle: sampled member arithmetic stays inside the result interval
        rng = random.Random(31)
        for _ in range(300):
            a_lo, b_lo = random_fraction(rng), random_fraction(rng)
            a = Interval(a_lo, a_lo + abs(random_fraction(rng, 2)))
            b = Interval(b_lo, b_lo + abs(random_fraction(rng, 2)))
            xa = a.lo + Fraction(rng.randint(0, 8), 8) * (a.hi - a.lo)
            xb = b.lo + Fraction(rng.randint(0, 8), 8) * (b.hi - b.lo)
            assert dyadic.iadd(a, b, 24).contains(xa + xb)
            assert dyadic.imul(a, b, 24).contains(xa * xb)
            c = random_fraction(rng, 3)
            assert dyadic.iscale(c, a, 24).contains(c * xa)
            assert dyadic.iabs(a).contains(abs(xa))
            assert dyadic.ihull(a, b).contains(xa)
            assert dyadic.ihull(a, b).contains(xb)

    def test_sqrt_interval_containment(self):
        rng = random.Random(37)
        for _ in range(200):
            lo = abs(random_fraction(rng, 2))
            iv = Interval(lo, lo + abs(random_fraction(rng, 2)))
            x = iv.lo + Fraction(rng.randint(0, 4), 4) * (iv.hi - iv.lo)
            out = dyadic.isqrt_iv(iv, 48)
            assert out.lo * out.lo <= x <= out.hi * out.hi

    def test_sqrt_interval_clamps_rounding_dip(self):
        iv = Interval(Fraction(-1, 2**40), Fraction(1, 4))
        out = dyadic.isqrt_iv(iv)
        assert out.lo == 0
        assert out.hi >= Fraction(1, 2)


class TestDecimal:
    def test_brackets_value(self):
        rng = random.Random(41)
        for _ in range(100):
            x = random_fraction(rng)
            lo = Fraction(dyadic.decimal_down(x, 12))
            hi = Fraction(dyadic.decimal_up(x, 12))
            assert lo <= x <= hi
            assert hi - lo <= Fraction(1, 10**12)

    def test_exact_values_render_exactly(self):
        assert dyadic.decimal_down(Fraction(1, 4), 4) == "0.2500"
        assert dyadic.decimal_up(Fraction(1, 4), 4) == "0.2500"
        assert dyadic.decimal_down(Fraction(0), 3) == "0.000"
        assert dyadic.decimal_up(Fraction(0), 3) == "0.000"
        assert dyadic.decimal_down(Fraction(-1, 3), 3) == "-0.334"
        assert dyadic.decimal_up(Fraction(-1, 3), 3) == "-0.333"
