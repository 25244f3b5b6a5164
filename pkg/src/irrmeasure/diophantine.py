"""From rational approximation sequences to irrationality statements.

Empirical exponents, denominator-growth rules, rigorous measure bounds from
characteristic roots, closed-form measure formulas for log(1+b/a) and
arctan(sqrt a)/sqrt a, the Salikhov cubic family, and Apery's zeta(3) sequences.

Measure convention: with dominant growth a, decay rate b of the small linear
form and denominator growth d (all natural logs per unit n),
``delta = -(b + d) / (a + d)`` and ``mu = 1 + 1/delta``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, gcd
from typing import Callable, Sequence

from .exactmath import Polynomial, cauchy_bound, count_real_roots, factor_integer, lcm_upto
from .hiprec import BigFloat, bits_for_digits, log_rational, sqrt_rational
from .recurrence import GrowthAnalysis, isolate_real_roots

log = logging.getLogger(__name__)


class InsufficientPrecision(ArithmeticError):
    pass


class ExactHit(InsufficientPrecision):
    pass


class NoRuleFound(ValueError):
    pass


class NonpositiveDelta(ValueError):
    pass


class ConditionViolated(ValueError):
    pass


class CongruenceViolated(ValueError):
    pass


# certified interval arithmetic over Q --------------------------------------


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    @classmethod
    def point(cls, q) -> "Interval":
        q = Fraction(q)
        return cls(q, q)

    @classmethod
    def of(cls, x: BigFloat) -> "Interval":
        lo, hi = x.enclosure()
        return cls(lo, hi)

    def __add__(self, o):
        o = _iv(o)
        return Interval(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __sub__(self, o):
        return self + (-_iv(o))

    def __rsub__(self, o):
        return _iv(o) - self

    def __mul__(self, o):
        o = _iv(o)
        ps = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi]
        return Interval(min(ps), max(ps))

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = _iv(o)
        if o.lo <= 0 <= o.hi:
            raise ZeroDivisionError("interval division by an interval containing 0")
        return self * Interval(1 / o.hi, 1 / o.lo)

    def __rtruediv__(self, o):
        return _iv(o) / self

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def to_bigfloat(self, prec: int) -> BigFloat:
        return BigFloat.from_fraction(self.mid, prec)


def _iv(v) -> Interval:
    if isinstance(v, Interval):
        return v
    if isinstance(v, BigFloat):
        return Interval.of(v)
    return Interval.point(v)


def iv_sqrt(q: Fraction, prec: int) -> Interval:
    """Certified enclosure of sqrt(q) from integer square roots."""
    q = Fraction(q)
    scale = 1 << prec
    lo = math.isqrt(q.numerator * scale * scale // q.denominator)
    hi = lo + 1
    return Interval(Fraction(lo, scale), Fraction(hi, scale))


def iv_log(x: Interval, prec: int) -> Interval:
    if x.lo <= 0:
        raise ValueError("log of an interval reaching 0")
    a = Interval.of(log_rational(x.lo, prec))
    b = Interval.of(log_rational(x.hi, prec))
    return Interval(a.lo, b.hi)


def exp_minus_one_enclosure(terms: int = 30) -> Interval:
    """e**-1 from its alternating series; consecutive partial sums bracket the limit."""
    s, term = Fraction(0), Fraction(1)
    partial = []
    for k in range(terms + 1):
        s += term if k % 2 == 0 else -term
        partial.append(s)
        term /= k + 1
    a, b = partial[-1], partial[-2]
    return Interval(min(a, b), max(a, b))


# scaling rules -------------------------------------------------------------


@dataclass(frozen=True)
class ScalingRule:
    """scaled(n) = c * K**n * lcm(1..t*n)**s * value(n)."""

    s: int = 0
    K: int = 1
    c: int = 1
    t: int = 1

    def factor(self, n: int) -> int:
        L = lcm_upto(self.t * n) if n >= 1 and self.s else 1
        return self.c * self.K**n * L**self.s

    def apply(self, n: int, value: Fraction) -> Fraction:
        return Fraction(value) * self.factor(n)

    def integral_on(self, values: Sequence[Fraction], start: int = 0) -> bool:
        return all(self.apply(start + i, v).denominator == 1 for i, v in enumerate(values))

    def denom_growth(self, prec: int) -> BigFloat:
        """d = s*t + log K: the lcm factor contributes 1 per unit of its argument."""
        base = BigFloat.from_fraction(self.s * self.t, prec)
        return base + log_rational(self.K, prec) if self.K != 1 else base

    def describe(self) -> str:
        parts = []
        if self.c != 1:
            parts.append(str(self.c))
        if self.K != 1:
            parts.append(f"{self.K}^n")
        if self.s:
            arg = "n" if self.t == 1 else f"{self.t}n"
            parts.append(f"lcm(1..{arg})" + (f"^{self.s}" if self.s > 1 else ""))
        return " * ".join(parts) if parts else "1"

    def to_json(self) -> dict:
        return {"lcm_power": self.s, "lcm_stretch": self.t, "K": str(self.K), "c": str(self.c)}

    @classmethod
    def from_json(cls, data: dict) -> "ScalingRule":
        return cls(int(data["lcm_power"]), int(data["K"]), int(data["c"]), int(data.get("lcm_stretch", 1)))


def _valuations(m: int, primes: Sequence[int]) -> dict[int, int]:
    out: dict[int, int] = {}
    for p in primes:
        if m == 1:
            break
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        if e:
            out[p] = e
    if m > 1:
        for p, e in factor_integer(m).items():
            out[p] = out.get(p, 0) + e
    return out


def _primes_upto(n: int) -> list[int]:
    sieve = bytearray([1]) * (n + 1)
    sieve[:2] = b"\x00\x00"
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(sieve[p * p :: p]))
    return [p for p in range(n + 1) if sieve[p]]


def scaling_search(
    values: Sequence[Fraction],
    start: int = 0,
    max_s: int = 3,
    stretches: Sequence[int] = (1, 2),
    max_K: int = 10**4,
    max_c: int = 10**6,
    min_count: int = 32,
) -> ScalingRule:
    """Smallest rule making every value integral, searched by factoring denominators.

    Preference: total lcm exponent s*t, then K, then c.  For each prime p the
    geometric exponent k_p is the least one leaving a bounded constant share
    c_p = max_n (v_p(den_n) - k_p n).
    """
    values = [Fraction(v) for v in values]
    if len(values) < min_count:
        raise ValueError(f"scaling search needs at least {min_count} values")
    n_last = start + len(values) - 1
    primes = _primes_upto(max(stretches) * max(n_last, 1) + 1)
    options = sorted(
        ((s, t) for s in range(max_s + 1) for t in stretches if s or t == stretches[0]),
        key=lambda st: (st[0] * st[1], st[1]),
    )
    for s, t in options:
        exps: dict[int, list[tuple[int, int]]] = {}
        for i, v in enumerate(values):
            n = start + i
            L = lcm_upto(t * n) ** s if s and n >= 1 else 1
            den = (v * L).denominator
            if den == 1:
                continue
            for p, e in _valuations(den, primes).items():
                exps.setdefault(p, []).append((n, e))
        K, c, ok = 1, 1, True
        for p in sorted(exps):
            k = 0
            while True:
                need = max(e - k * n for n, e in exps[p])
                if need <= 0 or p**need <= max_c:
                    break
                k += 1
                if p**k > max_K:
                    ok = False
                    break
            if not ok:
                break
            K *= p**k
            c *= p ** max(need, 0)
            if K > max_K or c > max_c:
                ok = False
                break
        if ok:
            rule = ScalingRule(s, K, c, t)
            assert rule.integral_on(values, start)
            return rule
    raise NoRuleFound("no scaling rule within the catalog clears all denominators")


# empirical deltas ----------------------------------------------------------


@dataclass(frozen=True)
class DeltaReport:
    n: int
    A: int
    B: int
    delta: BigFloat
    measure_estimate: BigFloat
    error_bits: int = 0

    def to_json(self, digits: int = 25) -> dict:
        return {
            "n": self.n,
            "A": str(self.A),
            "B": str(self.B),
            "delta": self.delta.to_decimal(digits),
            "measure_estimate": self.measure_estimate.to_decimal(digits),
        }


def empirical_delta(x: BigFloat, Aprime: int, Bprime: int, n: int = 0, max_bits: int = 256) -> DeltaReport:
    """delta = -log|x - A/B| / log B - 1 for the reduced fraction A/B, B > 0.

    ``x`` is trusted to within one unit of its last bit; the difference must
    be resolved with a 64-bit margin beyond that or InsufficientPrecision is raised.
    The result carries at most ``max_bits`` bits.
    """
    if Bprime == 0:
        raise ZeroDivisionError("B' must be nonzero")
    g = gcd(Aprime, Bprime)
    A, B = Aprime // g, Bprime // g
    if B < 0:
        A, B = -A, -B
    if B == 1:
        raise ValueError("log B' vanishes for denominator 1")
    diff = x.to_fraction() - Fraction(A, B)
    err_exp = x.magnitude() - x.prec
    if diff == 0 or abs(diff) <= Fraction(2) ** err_exp:
        raise ExactHit(f"x agrees with A/B to the working precision ({x.prec} bits)")
    diff_exp = abs(diff).numerator.bit_length() - abs(diff).denominator.bit_length()
    if diff_exp - err_exp < 64:
        raise InsufficientPrecision(
            f"|x - A/B| ~ 2^{diff_exp} is within 64 bits of the error 2^{err_exp} of x"
        )
    prec = min(max(64, diff_exp - err_exp - 16), max_bits)
    ld = log_rational(abs(diff), prec + 32)
    lb = log_rational(B, prec + 32)
    delta = (-ld / lb - 1).with_prec(prec)
    return DeltaReport(n, A, B, delta, (1 / delta + 1).with_prec(prec), diff_exp - err_exp)


def required_digits(growth: GrowthAnalysis, n: int, margin_bits: int = 96) -> int:
    """Digits of the target constant needed to resolve |x - A(n)/B(n)| at index n."""
    gap = float(growth.dominant_log) - float(growth.subdominant_log)
    return math.ceil(n * gap / math.log(10) + margin_bits / 3.32) + 10


def delta_checked(
    constant: Callable[[int], BigFloat], Aprime: int, Bprime: int, digits: int, n: int = 0, agree: int = 10
) -> DeltaReport:
    """empirical_delta at ``digits`` and at twice the precision; they must agree to ``agree`` digits."""
    prec = bits_for_digits(digits)
    r1 = empirical_delta(constant(prec), Aprime, Bprime, n)
    r2 = empirical_delta(constant(2 * prec), Aprime, Bprime, n)
    tol = Fraction(1, 10**agree) * abs(r2.delta.to_fraction())
    if abs(r1.delta.to_fraction() - r2.delta.to_fraction()) > tol:
        raise InsufficientPrecision(f"delta at n={n} changes under precision doubling")
    return r1


# measure bounds ------------------------------------------------------------


@dataclass
class MeasureBound:
    a: BigFloat
    b: BigFloat
    d: BigFloat
    delta: BigFloat
    mu: BigFloat
    caveats: list[str] = field(default_factory=list)

    def to_json(self, digits: int = 25) -> dict:
        return {
            "dominant_log": self.a.to_decimal(digits),
            "subdominant_log": self.b.to_decimal(digits),
            "denom_growth": self.d.to_decimal(digits),
            "delta": self.delta.to_decimal(digits),
            "mu": self.mu.to_decimal(digits),
            "caveats": list(self.caveats),
        }


def measure_from_logs(a: BigFloat, b: BigFloat, d: BigFloat, caveats: Sequence[str] = ()) -> MeasureBound:
    num, den = b + d, a + d
    if not den > 0 or not num < 0:
        raise NonpositiveDelta(
            f"a + d = {den.to_decimal(12)}, b + d = {num.to_decimal(12)}: no positive delta"
        )
    delta = -num / den
    return MeasureBound(a, b, d, delta, 1 / delta + 1, list(caveats))


def measure_bound(
    growth: GrowthAnalysis,
    rule: ScalingRule,
    subdominant_override: int | None = None,
    evidence_to: int | None = None,
    min_valid_n: int | None = None,
) -> MeasureBound:
    prec = growth.dominant_log.prec
    b = growth.subdominant_log
    if subdominant_override is not None:
        r = growth.roots[subdominant_override]
        b = log_rational(abs(r.value.to_fraction()), prec)
    caveats = []
    if evidence_to is not None:
        caveats.append(
            f"conditional on the divisibility pattern {rule.describe()}, verified for n <= {evidence_to}"
        )
    if min_valid_n is not None:
        caveats.append(f"recurrence transfers to the integral for n >= {min_valid_n}")
    return measure_from_logs(growth.dominant_log, b, rule.denom_growth(prec), caveats)


# closed forms --------------------------------------------------------------


def _formula_to_bigfloat(v: Interval, digits: int) -> BigFloat:
    if v.width > abs(v.mid) * Fraction(1, 10 ** (digits + 2)):
        raise ArithmeticError("enclosure too wide for the requested digits")
    return v.to_bigfloat(bits_for_digits(digits))


def alladi_robinson_condition(a: int, b: int) -> bool:
    """a > (b - 1/e)**2 / 4, decided with a certified enclosure of 1/e."""
    for terms in (20, 40, 80, 160):
        e1 = exp_minus_one_enclosure(terms)
        lo_sq = (b - e1.hi) ** 2 if b >= e1.hi else Fraction(0)
        hi_sq = max((b - e1.lo) ** 2, (b - e1.hi) ** 2)
        if 4 * a > hi_sq:
            return True
        if 4 * a <= lo_sq:
            return False
    raise ArithmeticError("condition undecided at the enclosure width used")


def alladi_robinson_measure(a: int, b: int, digits: int = 30) -> BigFloat:
    """Closed-form irrationality measure of log(1 + b/a)."""
    if a < 1 or b < 1:
        raise ValueError("a and b must be positive integers")
    if not alladi_robinson_condition(a, b):
        raise ConditionViolated(f"a = {a} does not exceed (b - 1/e)^2/4 for b = {b}")
    prec = bits_for_digits(digits) + 64
    s = iv_sqrt(Fraction(a * (a + b)), prec)
    v = 2 * a + b + 2 * s
    u = Fraction(b * b) / v  # = 2a + b - 2 sqrt(a(a+b)), without cancellation
    lu, lv = iv_log(u, prec), iv_log(v, prec)
    return _formula_to_bigfloat((lu - lv) / (lu + 1), digits)


def arctan_measure(a: int, digits: int = 30) -> BigFloat:
    """Closed-form irrationality measure of arctan(sqrt a)/sqrt a for a = 3 mod 4."""
    if a < 1:
        raise ValueError("a must be a positive integer")
    if a % 4 != 3:
        raise CongruenceViolated(f"a = {a} is not 3 mod 4")
    prec = bits_for_digits(digits) + 64
    s = iv_sqrt(Fraction(a * (a + 1)), prec)
    small = Fraction(a) / (a + s)  # = -a + sqrt(a(a+1))
    big = a + s
    ls, lb = iv_log(small, prec), iv_log(big, prec)
    half_log_a = iv_log(Interval.point(a), prec) * Fraction(1, 2)
    return _formula_to_bigfloat((ls - lb) / (ls - half_log_a + 1), digits)


# Salikhov family -----------------------------------------------------------


def salikhov_cubic(a: int) -> Polynomial:
    c1 = 4 * a**4 + 16 * a**3 - 11 * a**2 - 54 * a - 34
    c2 = 108 * a**6 + 648 * a**5 + 1440 * a**4 + 1440 * a**3 + 614 * a**2 + 76 * a - 1
    return Polynomial([1, c1, -c2, a * (a + 2)], "N")


def salikhov_K(a: int) -> int:
    return a * (a + 2) if a % 2 else (a // 2) * (a // 2 + 1)


def _one_root_strictly_inside(p: Polynomial, lo: Fraction, hi: Fraction) -> bool:
    return p(lo) != 0 and p(hi) != 0 and count_real_roots(p, lo, hi) == 1


def salikhov_root_check(a: int) -> bool:
    """The root-location chain, decided exactly with Sturm counts on rational intervals."""
    p = salikhov_cubic(a)
    beta = Fraction(1, 4 * a * a * (a + 2) ** 2)
    gamma = Fraction(1, 27 * a * (a + 2))
    big = Fraction(108 * a * a * (a + 1) ** 2)
    top = cauchy_bound(p) + 1
    ok = (
        _one_root_strictly_inside(p, -beta, Fraction(0))
        and _one_root_strictly_inside(p, Fraction(0), gamma)
        and gamma < big
        and _one_root_strictly_inside(p, big, top)
    )
    if ok and a >= 2:
        ok = _one_root_strictly_inside(p, beta, gamma)
    return ok


@dataclass
class SalikhovBound:
    a: int
    roots: tuple[BigFloat, BigFloat, BigFloat]  # C1, C2, C3
    K: int
    uses_c3: bool
    nu: BigFloat

    def to_json(self, digits: int = 20) -> dict:
        return {
            "a": self.a,
            "C1": self.roots[0].to_decimal(digits),
            "C2": self.roots[1].to_decimal(digits),
            "C3": self.roots[2].to_decimal(digits),
            "K": self.K,
            "branch": "|C3|" if self.uses_c3 else "C2",
            "nu": self.nu.to_decimal(digits),
        }


def salikhov_bound(a: int, digits: int = 30) -> SalikhovBound:
    roots = isolate_real_roots(salikhov_cubic(a), digits)
    c3, c2, c1 = (r.value for r in roots)
    prec = bits_for_digits(digits)
    K = salikhov_K(a)
    small = abs(c3.to_fraction()) if a == 1 else c2.to_fraction()
    lk = log_rational(K, prec) if K != 1 else BigFloat(0, 0, prec)
    top = log_rational(c1.to_fraction(), prec) + lk + 2
    bot = log_rational(small, prec) + lk + 2
    return SalikhovBound(a, (c1, c2, c3), K, a == 1, -top / bot)


def salikhov_nu(a: int, digits: int = 30) -> BigFloat:
    return salikhov_bound(a, digits).nu


def salikhov_asymptote(a: int, digits: int = 30) -> BigFloat:
    prec = bits_for_digits(digits)
    base = 27 if a % 2 else 108
    return log_rational(a * (a + 2), prec) * 3 / (log_rational(base, prec) - 2)


# Apery ---------------------------------------------------------------------


@dataclass
class Apery:
    a: list[Fraction]
    b: list[int]
    p: list[int]
    q: list[int]


def apery_sequences(n_max: int) -> Apery:
    """Apery's a_n, b_n by direct summation, and their lcm(1..n)**3 scalings."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    a_seq, b_seq, p_seq, q_seq = [], [], [], []
    for n in range(n_max + 1):
        harmonic = sum((Fraction(1, m**3) for m in range(1, n + 1)), Fraction(0))
        a_n, b_n = Fraction(0), 0
        inner = Fraction(0)
        for k in range(n + 1):
            if k:
                inner += Fraction((-1) ** (k - 1), 2 * k**3 * comb(n, k) * comb(n + k, k))
            w = comb(n, k) ** 2 * comb(n + k, k) ** 2
            a_n += w * (harmonic + inner)
            b_n += w
        L3 = lcm_upto(n) ** 3 if n else 1
        p, q = a_n * L3, b_n * L3
        if p.denominator != 1:
            raise ArithmeticError(f"lcm(1..{n})^3 a_{n} is not an integer")
        a_seq.append(a_n)
        b_seq.append(b_n)
        p_seq.append(p.numerator)
        q_seq.append(q)
    return Apery(a_seq, b_seq, p_seq, q_seq)


def apery_growth(digits: int = 30) -> tuple[BigFloat, BigFloat, BigFloat]:
    """(a, b, d) = (4 log(1+sqrt 2), -4 log(1+sqrt 2), 3) for Apery's approximations."""
    prec = bits_for_digits(digits) + 32
    s = sqrt_rational(2, prec)
    l = log_rational((s + 1).to_fraction(), prec) * 4
    return l, -l, BigFloat.from_fraction(3, prec)

