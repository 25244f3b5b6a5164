from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from irrmeasure.hiprec import (
    GUARD_BITS,
    BigFloat,
    DomainError,
    arctan_rational,
    bits_for_digits,
    dilog_rational,
    log_rational,
    pi,
    sqrt_rational,
    zeta3,
)

mp = mpmath.mp.clone()
mp.prec = 2600

positive = st.fractions(min_value=Fraction(1, 1000), max_value=1000, max_denominator=1000)
anyq = st.fractions(min_value=-1000, max_value=1000, max_denominator=1000)
dilog_args = st.fractions(min_value=-20, max_value=1, max_denominator=500)
precisions = st.sampled_from([64, 128, 300, 700])


def mpq(q: Fraction):
    return mp.mpf(q.numerator) / q.denominator


def close(v: BigFloat, ref, bits: int) -> bool:
    got = v.to_fraction()
    r = Fraction(mp.nstr(ref, 700, strip_zeros=False)) if ref != 0 else Fraction(0)
    scale = max(abs(r), Fraction(1, 2**20))
    return abs(got - r) <= scale / Fraction(2) ** bits


def doubling_stable(op, q: Fraction, p: int) -> bool:
    a, b = op(q, p).to_fraction(), op(q, 2 * p).to_fraction()
    return abs(a - b) <= max(abs(b), Fraction(1, 2**40)) / Fraction(2) ** (p - GUARD_BITS)


class TestKnownValues:
    def test_log_one_is_zero(self):
        assert log_rational(1, 100).is_zero()

    def test_log2(self):
        v = log_rational(2, 128)
        assert v.to_decimal(21).startswith("0.693147180559945309417")
        alt = log_rational(Fraction(4, 3), 160) + log_rational(Fraction(3, 2), 160)
        assert abs(v.to_fraction() - alt.to_fraction()) <= Fraction(1, 2 ** (128 - 16))

    def test_log_of_quadratic_irrational(self):
        s = sqrt_rational(2, 200)
        lhs = log_rational((3 + 2 * s).to_fraction(), 150)
        rhs = log_rational((1 + s).to_fraction(), 150) * 2
        assert abs(lhs.to_fraction() - rhs.to_fraction()) < Fraction(1, 2**120)
        assert lhs.to_decimal(15) == "1.76274717403909"

    def test_arctan(self):
        assert arctan_rational(0, 64).is_zero()
        quarter = arctan_rational(1, 128).to_fraction()
        machin = 4 * arctan_rational(Fraction(1, 5), 160).to_fraction() - arctan_rational(Fraction(1, 239), 160).to_fraction()
        assert abs(quarter - machin) <= Fraction(1, 2**112)
        assert arctan_rational(1, 128).to_decimal(21) == "0.785398163397448309616"

    def test_arctan_sqrt3_over_sqrt3(self):
        s = sqrt_rational(3, 300).to_fraction()
        v = arctan_rational(s, 250).to_fraction() / s
        target = pi(250).to_fraction() / (3 * s)
        assert abs(v - target) < Fraction(1, 10**60)
        assert str(float(v))[:15] == "0.6045997880780"

    def test_dilog_values(self):
        assert dilog_rational(0, 64).is_zero()
        assert dilog_rational(1, 128).to_decimal(22) == "1.644934066848226436472"
        half = dilog_rational(Fraction(1, 2), 128).to_fraction()
        p = pi(160).to_fraction()
        l2 = log_rational(2, 160).to_fraction()
        assert abs(half - (p * p / 12 - l2 * l2 / 2)) <= Fraction(1, 2**110)

    def test_sqrt(self):
        assert sqrt_rational(0, 64).is_zero()
        r = sqrt_rational(2, 128).to_fraction()
        assert abs(r * r - 2) <= Fraction(1, 2 ** (128 - 16))
        assert sqrt_rational(2, 128).to_decimal(21) == "1.41421356237309504880"

    def test_zeta3(self):
        assert abs(zeta3(700).to_fraction() - Fraction(mp.nstr(mp.zeta(3), 260))) < Fraction(1, 10**205)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            log_rational(0, 64)
        with pytest.raises(DomainError):
            sqrt_rational(-1, 64)
        with pytest.raises(DomainError):
            dilog_rational(Fraction(3, 2), 64)

    def test_bits_for_digits(self):
        assert bits_for_digits(100) >= 333

    def test_decimal_output_counts_significant_digits(self):
        assert pi(200).to_decimal(30) == "3.14159265358979323846264338328"


class TestAgainstMpmath:
    @given(positive, precisions)
    def test_log(self, q, p):
        assert close(log_rational(q, p), mp.log(mpq(q)), p - GUARD_BITS)

    @given(anyq, precisions)
    def test_arctan(self, q, p):
        assert close(arctan_rational(q, p), mp.atan(mpq(q)), p - GUARD_BITS)

    @given(dilog_args, precisions)
    def test_dilog(self, q, p):
        assert close(dilog_rational(q, p), mp.polylog(2, mpq(q)), p - GUARD_BITS)

    @given(st.fractions(min_value=0, max_value=10**6, max_denominator=10**4), precisions)
    def test_sqrt(self, q, p):
        assert close(sqrt_rational(q, p), mp.sqrt(mpq(q)), p - GUARD_BITS)


class TestPrecisionDoubling:
    @given(positive, precisions)
    def test_log(self, q, p):
        assert doubling_stable(log_rational, q, p)

    @given(anyq, precisions)
    def test_arctan(self, q, p):
        assert doubling_stable(arctan_rational, q, p)

    @given(dilog_args, precisions)
    def test_dilog(self, q, p):
        assert doubling_stable(dilog_rational, q, p)

    @given(positive, precisions)
    def test_sqrt(self, q, p):
        assert doubling_stable(sqrt_rational, q, p)


class TestIdentities:
    @given(positive, positive)
    def test_log_product(self, a, b):
        lhs = log_rational(a * b, 200).to_fraction()
        rhs = log_rational(a, 220).to_fraction() + log_rational(b, 220).to_fraction()
        assert abs(lhs - rhs) <= Fraction(1, 2**180)

    @given(anyq)
    def test_arctan_odd(self, q):
        assert arctan_rational(-q, 150).to_fraction() == -arctan_rational(q, 150).to_fraction()

    @given(st.fractions(min_value=Fraction(1, 100), max_value=Fraction(99, 100), max_denominator=100))
    def test_dilog_reflection(self, q):
        lhs = dilog_rational(q, 200).to_fraction() + dilog_rational(1 - q, 200).to_fraction()
        p = pi(220).to_fraction()
        rhs = p * p / 6 - log_rational(q, 220).to_fraction() * log_rational(1 - q, 220).to_fraction()
        assert abs(lhs - rhs) <= Fraction(1, 2**180)
