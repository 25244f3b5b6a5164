"""Arbitrary-precision evaluation of log, arctan, Li2 and square roots at rationals.

All kernels run in binary fixed point: an integer ``X`` stands for ``X / 2**w``.
Each public function picks an internal width ``w`` = requested bits + a guard
that covers the truncation error of every series term (at most one unit in
the last place per operation) and any amplification by argument reduction,
then rounds the result to a :class:`BigFloat` of the requested precision.

Documented accuracy: a result at precision ``p`` is within ``2**(mag - p)``
of the true value, where ``2**(mag-1) <= |value| < 2**mag``.  Results at
``p`` and ``2p`` therefore agree through the first ``p - GUARD_BITS`` bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Union

GUARD_BITS = 16
BITS_PER_DIGIT = 3.33


class DomainError(ValueError):
    pass


def bits_for_digits(digits: int) -> int:
    return math.ceil(digits * BITS_PER_DIGIT) + GUARD_BITS


@dataclass(frozen=True)
class BigFloat:
    """The dyadic number ``man * 2**exp`` carried at ``prec`` bits."""

    man: int
    exp: int
    prec: int

    @classmethod
    def from_fraction(cls, q, prec: int) -> "BigFloat":
        q = Fraction(q)
        if q == 0:
            return cls(0, 0, prec)
        num, den = abs(q.numerator), q.denominator
        shift = prec + 2 - (num.bit_length() - den.bit_length())
        if shift >= 0:
            m = _round_div(num << shift, den)
        else:
            m = _round_div(num, den << -shift)
        m, e = _normalize(m, -shift, prec)
        return cls(m if q > 0 else -m, e, prec)

    @classmethod
    def from_fixed(cls, value: int, w: int, prec: int) -> "BigFloat":
        """Round ``value / 2**w`` to ``prec`` bits."""
        if value == 0:
            return cls(0, 0, prec)
        sign = -1 if value < 0 else 1
        m, e = _normalize(abs(value), -w, prec)
        return cls(sign * m, e, prec)

    def to_fraction(self) -> Fraction:
        if self.exp >= 0:
            return Fraction(self.man << self.exp)
        return Fraction(self.man, 1 << -self.exp)

    def magnitude(self) -> int:
        """mag with 2**(mag-1) <= |self| < 2**mag (very negative for zero)."""
        if self.man == 0:
            return -(10**9)
        return self.exp + abs(self.man).bit_length()

    def sign(self) -> int:
        return (self.man > 0) - (self.man < 0)

    def is_zero(self) -> bool:
        return self.man == 0

    def with_prec(self, prec: int) -> "BigFloat":
        return BigFloat.from_fraction(self.to_fraction(), prec)

    def enclosure(self) -> tuple[Fraction, Fraction]:
        """Rational interval guaranteed to contain the true value (documented accuracy)."""
        q = self.to_fraction()
        if self.man == 0:
            r = Fraction(1, 1 << self.prec)
        else:
            e = self.magnitude() - self.prec + 1
            r = Fraction(2) ** e
        return q - r, q + r

    def _other(self, other):
        if isinstance(other, BigFloat):
            return other.to_fraction(), min(self.prec, other.prec)
        if isinstance(other, (int, Fraction)):
            return Fraction(other), self.prec
        return None, None

    def __add__(self, other):
        q, p = self._other(other)
        if q is None:
            return NotImplemented
        return BigFloat.from_fraction(self.to_fraction() + q, p)

    __radd__ = __add__

    def __sub__(self, other):
        q, p = self._other(other)
        if q is None:
            return NotImplemented
        return BigFloat.from_fraction(self.to_fraction() - q, p)

    def __rsub__(self, other):
        q, p = self._other(other)
        if q is None:
            return NotImplemented
        return BigFloat.from_fraction(q - self.to_fraction(), p)

    def __mul__(self, other):
        q, p = self._other(other)
        if q is None:
            return NotImplemented
        return BigFloat.from_fraction(self.to_fraction() * q, p)

    __rmul__ = __mul__

    def __truediv__(self, other):
        q, p = self._other(other)
        if q is None:
            return NotImplemented
        if q == 0:
            raise ZeroDivisionError("BigFloat division by zero")
        return BigFloat.from_fraction(self.to_fraction() / q, p)

    def __rtruediv__(self, other):
        q, p = self._other(other)
        if q is None:
            return NotImplemented
        return BigFloat.from_fraction(q / self.to_fraction(), p)

    def __neg__(self):
        return BigFloat(-self.man, self.exp, self.prec)

    def __abs__(self):
        return BigFloat(abs(self.man), self.exp, self.prec)

    def _cmp_value(self, other):
        if isinstance(other, BigFloat):
            return other.to_fraction()
        return Fraction(other)

    def __lt__(self, other):
        return self.to_fraction() < self._cmp_value(other)

    def __le__(self, other):
        return self.to_fraction() <= self._cmp_value(other)

    def __gt__(self, other):
        return self.to_fraction() > self._cmp_value(other)

    def __ge__(self, other):
        return self.to_fraction() >= self._cmp_value(other)

    def __eq__(self, other):
        if isinstance(other, (BigFloat, int, Fraction)):
            return self.to_fraction() == self._cmp_value(other)
        return NotImplemented

    def __hash__(self):
        return hash(self.to_fraction())

    def __float__(self):
        return float(self.to_fraction()) if abs(self.exp) < 900 else math.ldexp(
            float(self.man), self.exp
        )

    def to_decimal(self, digits: int) -> str:
        """``digits`` significant decimal digits, positional or e-notation."""
        return fraction_to_decimal(self.to_fraction(), digits)

    def __str__(self):
        return self.to_decimal(max(1, int(self.prec / BITS_PER_DIGIT)))

    def __repr__(self):
        return f"BigFloat({self.to_decimal(20)}, prec={self.prec})"


Real = Union[int, Fraction, BigFloat]


def _round_div(a: int, b: int) -> int:
    q, r = divmod(a, b)
    if 2 * r >= b:
        q += 1
    return q


def _normalize(m: int, e: int, prec: int) -> tuple[int, int]:
    extra = m.bit_length() - prec
    if extra > 0:
        m = _round_div(m, 1 << extra)
        e += extra
        if m.bit_length() > prec:
            m >>= 1
            e += 1
    return m, e


def fraction_to_decimal(q: Fraction, digits: int) -> str:
    if q == 0:
        return "0." + "0" * max(digits - 1, 0)
    sign = "-" if q < 0 else ""
    q = abs(q)
    e10 = len(str(q.numerator)) - len(str(q.denominator))
    if Fraction(10) ** e10 > q:
        e10 -= 1
    scaled = q * Fraction(10) ** (digits - 1 - e10)
    m = _round_div(scaled.numerator, scaled.denominator)
    if len(str(m)) > digits:
        e10 += 1
        m = _round_div(m, 10)
    s = str(m).rjust(digits, "0")
    if -8 <= e10 < 40:
        if e10 >= 0:
            ip, fp = s[: e10 + 1], s[e10 + 1 :]
            ip = ip.ljust(e10 + 1, "0")
            return f"{sign}{ip}.{fp}" if fp else f"{sign}{ip}"
        return f"{sign}0.{'0' * (-e10 - 1)}{s}"
    return f"{sign}{s[0]}.{s[1:]}e{e10}"


def _exact(q: Real) -> Fraction:
    if isinstance(q, BigFloat):
        return q.to_fraction()
    if isinstance(q, str):
        return Fraction(q)
    return Fraction(q)


def _mag(q: Fraction) -> int:
    """Approximate binary magnitude of a nonzero rational (within one)."""
    return abs(q.numerator).bit_length() - q.denominator.bit_length()


def _guard(w: int) -> int:
    return 2 * w.bit_length() + 8


def _to_fixed(q: Fraction, w: int) -> int:
    return _round_div(q.numerator << w, q.denominator) if q >= 0 else -_round_div(
        (-q.numerator) << w, q.denominator
    )


# fixed-point kernels -------------------------------------------------------


def _atanh_inv_fixed(k: int, w: int) -> int:
    """atanh(1/k) * 2**w."""
    one = 1 << w
    power = one // k
    k2 = k * k
    total = 0
    j = 1
    while power:
        total += power // j
        power //= k2
        j += 2
    return total


def _atan_inv_fixed(k: int, w: int) -> int:
    """arctan(1/k) * 2**w."""
    one = 1 << w
    power = one // k
    k2 = k * k
    total = 0
    j = 1
    sign = 1
    while power:
        total += sign * (power // j)
        power //= k2
        j += 2
        sign = -sign
    return total


@lru_cache(maxsize=32)
def _ln2_fixed(w: int) -> int:
    g = w + 16
    v = 18 * _atanh_inv_fixed(26, g) - 2 * _atanh_inv_fixed(4801, g) + 8 * _atanh_inv_fixed(8749, g)
    return v >> 16


@lru_cache(maxsize=32)
def _pi_fixed(w: int) -> int:
    g = w + 16
    v = 16 * _atan_inv_fixed(5, g) - 4 * _atan_inv_fixed(239, g)
    return v >> 16


def _atanh_series_fixed(z: int, w: int) -> int:
    """atanh(z / 2**w) * 2**w for |z| <= 2**w / 4."""
    if z < 0:
        return -_atanh_series_fixed(-z, w)
    z2 = (z * z) >> w
    term = z
    total = 0
    j = 1
    while term:
        total += term // j
        term = (term * z2) >> w
        j += 2
    return total


def _log_fixed(q: Fraction, w: int) -> int:
    """log(q) * 2**w for q > 0 (internal guard must be supplied by caller)."""
    k = q.numerator.bit_length() - q.denominator.bit_length()
    r = q / (Fraction(2) ** k) if k >= 0 else q * (Fraction(2) ** -k)
    while r > Fraction(4, 3):
        r /= 2
        k += 1
    while r < Fraction(2, 3):
        r *= 2
        k -= 1
    z = (r - 1) / (r + 1)
    val = 2 * _atanh_series_fixed(_to_fixed(z, w), w)
    if k:
        val += k * _ln2_fixed(w)
    return val


def _arctan_fixed(q: Fraction, w: int) -> int:
    """arctan(q) * 2**w via repeated half-angle reduction then Taylor series."""
    if q == 0:
        return 0
    if q < 0:
        return -_arctan_fixed(-q, w)
    one = 1 << w
    X = _to_fixed(q, w)
    halvings = 0
    threshold = one >> 8
    while X > threshold:
        s = math.isqrt((one << w) + X * X)
        X = (X << w) // (one + s)
        halvings += 1
    X2 = (X * X) >> w
    term = X
    total = 0
    j = 1
    sign = 1
    while term:
        total += sign * (term // j)
        term = (term * X2) >> w
        j += 2
        sign = -sign
    return total << halvings


def _li2_series_fixed(z: int, w: int) -> int:
    """sum z**k / k**2 for 0 <= z <= 2**w / 2."""
    term = z
    total = 0
    k = 1
    while term:
        total += term // (k * k)
        term = (term * z) >> w
        k += 1
    return total


# public operations ---------------------------------------------------------


def pi(prec: int) -> BigFloat:
    w = prec + _guard(prec)
    return BigFloat.from_fixed(_pi_fixed(w), w, prec)


def log_rational(q: Real, prec: int) -> BigFloat:
    """Natural logarithm of a positive rational (or dyadic BigFloat)."""
    q = _exact(q)
    if q <= 0:
        raise DomainError("log of a non-positive number")
    if q == 1:
        return BigFloat(0, 0, prec)
    k = abs(q.numerator.bit_length() - q.denominator.bit_length())
    near_one = max(0, -_mag((q - 1) / (q + 1)) + 2)
    w = prec + near_one + _guard(prec + near_one) + k.bit_length() + 4
    return BigFloat.from_fixed(_log_fixed(q, w), w, prec)


def sqrt_rational(q: Real, prec: int) -> BigFloat:
    q = _exact(q)
    if q < 0:
        raise DomainError("square root of a negative number")
    if q == 0:
        return BigFloat(0, 0, prec)
    w = prec + 8 + max(0, -_mag(q) // 2 + 2)
    v = math.isqrt((q.numerator << (2 * w)) // q.denominator)
    return BigFloat.from_fixed(v, w, prec)


def arctan_rational(q: Real, prec: int) -> BigFloat:
    q = _exact(q)
    if q == 0:
        return BigFloat(0, 0, prec)
    small = max(0, -_mag(q) + 2)
    big = max(0, _mag(q)).bit_length()
    w = prec + small + _guard(prec + small) + big + 12
    return BigFloat.from_fixed(_arctan_fixed(q, w), w, prec)


def _li2_fixed(q: Fraction, w: int) -> int:
    """Li2(q) * 2**w for q <= 1 (reductions onto |q| <= 1/2)."""
    if q == 0:
        return 0
    if q == 1:
        p = _pi_fixed(w)
        return (p * p >> w) // 6
    if q < 0:
        # Landen: Li2(q) = -Li2(q/(q-1)) - log(1-q)**2 / 2
        l1 = _log_fixed(1 - q, w)
        return -_li2_fixed(q / (q - 1), w) - ((l1 * l1) >> w) // 2
    if q > Fraction(1, 2):
        # reflection: Li2(q) = pi^2/6 - log(q) log(1-q) - Li2(1-q)
        p = _pi_fixed(w)
        lq = _log_fixed(q, w)
        l1q = _log_fixed(1 - q, w)
        return (p * p >> w) // 6 - ((lq * l1q) >> w) - _li2_fixed(1 - q, w)
    return _li2_series_fixed(_to_fixed(q, w), w)


def dilog_rational(q: Real, prec: int) -> BigFloat:
    """Li2(q) = sum_{k>=1} q**k / k**2 on the real branch q <= 1."""
    q = _exact(q)
    if q > 1:
        raise DomainError("Li2 is complex for arguments above 1")
    if q == 0:
        return BigFloat(0, 0, prec)
    small = max(0, -_mag(q) + 2)
    near_one = max(0, -_mag(1 - q) + 2) if q != 1 else 0
    extra = max(0, _mag(q)).bit_length() * 2 + near_one
    w = prec + small + extra + _guard(prec + small + extra) + 8
    return BigFloat.from_fixed(_li2_fixed(q, w), w, prec)


def zeta3(prec: int) -> BigFloat:
    """zeta(3) = 5/2 * sum_{k>=1} (-1)**(k+1) / (k**3 * C(2k, k))."""
    w = prec + _guard(prec) + 4
    one = 1 << w
    total = 0
    central = 2  # C(2k, k) at k = 1
    k = 1
    sign = 1
    while True:
        term = one // (k * k * k * central)
        if term == 0:
            break
        total += sign * term
        sign = -sign
        central = central * 2 * (2 * k + 1) // (k + 1)
        k += 1
    return BigFloat.from_fixed(5 * total // 2, w, prec)


def log_real(v: Real, prec: int) -> BigFloat:
    """log|v| for a nonzero exact or dyadic value."""
    q = _exact(v)
    if q == 0:
        raise DomainError("log of zero")
    return log_rational(abs(q), prec)
