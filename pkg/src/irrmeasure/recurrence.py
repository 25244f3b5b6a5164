"""Linear recurrences with polynomial coefficients and their growth rates.

Convention throughout: ``sum_i p_i(n) * u(n + i) == 0`` for ``i = 0..L``.
The Poincare constant-coefficient approximation keeps, for each ``p_i``, the
coefficient of ``n**d`` with ``d = max deg p_i``; the roots of the resulting
characteristic polynomial give the exponential growth rates of solutions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Sequence

from .exactmath import (
    Polynomial,
    as_fraction,
    cauchy_bound,
    count_real_roots,
    frac_to_str,
    poly_gcd,
    rational_roots,
    squarefree_factorization,
    sturm_sequence,
)
from .hiprec import BigFloat, bits_for_digits, fraction_to_decimal, log_rational


class SingularLeadingCoefficient(ArithmeticError):
    def __init__(self, n: int):
        super().__init__(f"leading coefficient vanishes at n = {n}")
        self.n = n


class ComplexRootsPresent(ValueError):
    pass


class ModulusTie(ValueError):
    pass


class LinearRecurrence:
    """sum_{i=0}^{L} coeffs[i](n) * u(n+i) = 0, coefficients in Q[n]."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence[Polynomial], normalize: bool = True):
        cs = [c if isinstance(c, Polynomial) else Polynomial([c], "n") for c in coeffs]
        if any(c.var != "n" for c in cs):
            raise ValueError("recurrence coefficients must be polynomials in n")
        if len(cs) < 2 or cs[0].is_zero() or cs[-1].is_zero():
            raise ValueError("first and last recurrence coefficients must be nonzero")
        if normalize:
            g = reduce(poly_gcd, cs)
            if g.degree() > 0:
                cs = [c // g for c in cs]
            content = reduce(lambda a, b: _frac_gcd(a, b), (c.content() for c in cs))
            if cs[-1].lc() < 0:
                content = -content
            cs = [c * (1 / content) for c in cs]
        self.coeffs = tuple(cs)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def residual(self, values: Sequence, n: int):
        """sum_i p_i(n) values[i] for values = (u(n), ..., u(n+L))."""
        total = 0
        for p, v in zip(self.coeffs, values):
            total = total + v * p(n)
        return total

    def reversed(self) -> "LinearRecurrence":
        """Coefficient list read backwards (the transposed shift association)."""
        return LinearRecurrence(self.coeffs[::-1])

    def __eq__(self, other):
        return isinstance(other, LinearRecurrence) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def to_json(self) -> dict:
        return {"order": self.order, "coeffs": [c.to_json() for c in self.coeffs]}

    @classmethod
    def from_json(cls, data: dict) -> "LinearRecurrence":
        return cls([Polynomial.from_json(c, "n") for c in data["coeffs"]])

    def __str__(self):
        terms = [f"({c}) u(n+{i})" if i else f"({c}) u(n)" for i, c in enumerate(self.coeffs)]
        return " + ".join(terms) + " = 0"

    def __repr__(self):
        return f"LinearRecurrence[{self}]"


def _frac_gcd(a: Fraction, b: Fraction) -> Fraction:
    from math import gcd, lcm

    a, b = abs(a), abs(b)
    return Fraction(gcd(a.numerator, b.numerator), lcm(a.denominator, b.denominator))


def evaluate_exact(rec: LinearRecurrence, initial: Sequence, n_max: int, start: int = 0) -> list:
    """u(start..n_max) by exact forward solving from u(start..start+L-1).

    Works for Fractions and for any value type closed under addition and
    multiplication by rationals (e.g. coordinate vectors over a constant basis).
    """
    L = rec.order
    if len(initial) != L:
        raise ValueError(f"need {L} initial values, got {len(initial)}")
    lead = rec.coeffs[-1]
    for m in rational_roots(lead) if lead.degree() > 0 else []:
        if m.denominator == 1 and start <= m <= n_max - L:
            raise SingularLeadingCoefficient(int(m))
    values = list(initial)
    for k in range(start, n_max - L + 1):
        acc = 0
        for i in range(L):
            c = rec.coeffs[i](k)
            if c:
                acc = acc + values[k - start + i] * c
        values.append(acc * (-1 / Fraction(lead(k))))
    return values[: n_max - start + 1]


def characteristic_poly(rec: LinearRecurrence) -> Polynomial:
    d = max(c.degree() for c in rec.coeffs)
    chi = Polynomial([c[d] for c in rec.coeffs], "N")
    return chi.primitive()


@dataclass(frozen=True)
class RootEnclosure:
    lo: Fraction
    hi: Fraction
    value: BigFloat
    multiplicity: int = 1

    def contains(self, q) -> bool:
        return self.lo <= as_fraction(q) <= self.hi

    def abs_bounds(self) -> tuple[Fraction, Fraction]:
        if self.lo >= 0:
            return self.lo, self.hi
        if self.hi <= 0:
            return -self.hi, -self.lo
        return Fraction(0), max(-self.lo, self.hi)

    def to_json(self) -> dict:
        return {
            "lo": fraction_to_decimal(self.lo, 30) if self.lo else "0",
            "hi": fraction_to_decimal(self.hi, 30) if self.hi else "0",
            "lo_exact": frac_to_str(self.lo),
            "hi_exact": frac_to_str(self.hi),
            "value": self.value.to_decimal(30),
            "multiplicity": self.multiplicity,
        }


def _bisect_isolate(seq, lo: Fraction, hi: Fraction, count: int, out: list) -> None:
    """Split (lo, hi] until each piece holds one root; exact rational roots become points."""
    if count == 0:
        return
    f = seq[0]
    if count == 1:
        out.append((lo, hi))
        return
    mid = (lo + hi) / 2
    left = count_real_roots(f, lo, mid, seq) - (1 if f(lo) == 0 else 0)
    _bisect_isolate(seq, lo, mid, left, out)
    _bisect_isolate(seq, mid, hi, count - left, out)


def _refine(f: Polynomial, lo: Fraction, hi: Fraction, rel: Fraction) -> tuple[Fraction, Fraction]:
    """Bisect a sign-change interval not containing 0 to relative width <= rel."""
    if f(hi) == 0:
        return hi, hi
    flo = f(lo)
    if flo == 0:
        return lo, lo
    floor = rel * rel
    while hi - lo > max(min(abs(lo), abs(hi)) * rel, floor):
        mid = (lo + hi) / 2
        fm = f(mid)
        if fm == 0:
            return mid, mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return lo, hi


def isolate_real_roots(p: Polynomial, digits: int) -> list[RootEnclosure]:
    """All real roots in disjoint rational intervals of relative width <= 10**-digits.

    Raises ComplexRootsPresent unless every root (counted with multiplicity) is real.
    """
    if p.degree() < 1:
        raise ValueError("root isolation needs degree >= 1")
    unit, factors = squarefree_factorization(p)
    seq = sturm_sequence(p)
    f = seq[0]
    B = cauchy_bound(f)
    lo = -B
    total = count_real_roots(f, lo, B, seq)
    pieces: list[tuple[Fraction, Fraction]] = []
    _bisect_isolate(seq, lo, B, total, pieces)
    prec = bits_for_digits(digits)
    out = []
    scale = Fraction(1, 10**digits)
    for a, b in sorted(pieces):
        if a < 0 < b:
            f0 = f(Fraction(0))
            if f0 == 0:
                a = b = Fraction(0)
            elif (f(b) > 0) == (f0 > 0) and f(b) != 0:
                b = Fraction(0)
            else:
                a = Fraction(0)
        a, b = _move_off_left_root(f, seq, a, b)
        lo_r, hi_r = _refine(f, a, b, scale)
        m = next((mm for fac, mm in factors if _root_of(fac, lo_r, hi_r)), 1)
        out.append(RootEnclosure(lo_r, hi_r, BigFloat.from_fraction((lo_r + hi_r) / 2, prec), m))
    real_count = sum(r.multiplicity for r in out)
    if real_count != p.degree():
        raise ComplexRootsPresent(
            f"{p} has {p.degree() - real_count} non-real roots; growth analysis unsupported"
        )
    return out


def _move_off_left_root(f: Polynomial, seq, a: Fraction, b: Fraction) -> tuple[Fraction, Fraction]:
    """Shrink (a, b] holding one root until the excluded endpoint a is not itself a root."""
    while a != b and f(a) == 0 and f(b) != 0:
        m = (a + b) / 2
        inside = count_real_roots(f, m, b, seq)
        if f(m) == 0 and inside == 1:
            return m, m
        if inside:
            a = m
        else:
            b = m
    return a, b


def _root_of(fac: Polynomial, lo: Fraction, hi: Fraction) -> bool:
    if lo == hi:
        return fac(lo) == 0
    return count_real_roots(fac, lo, hi) > 0


@dataclass
class GrowthAnalysis:
    char_poly: Polynomial
    roots: list[RootEnclosure]
    dominant_log: BigFloat
    subdominant_log: BigFloat
    candidate_logs: list[BigFloat] = field(default_factory=list)
    subdominant_index: int = -1

    def to_json(self) -> dict:
        return {
            "char_poly": self.char_poly.to_json(),
            "roots": [r.to_json() for r in self.roots],
            "dominant_log": self.dominant_log.to_decimal(30),
            "subdominant_log": self.subdominant_log.to_decimal(30),
            "candidate_logs": [c.to_decimal(30) for c in self.candidate_logs],
            "subdominant_index": self.subdominant_index,
        }


def growth_rates(
    rec: LinearRecurrence | Polynomial, digits: int = 40, subdominant: int | None = None
) -> GrowthAnalysis:
    """Log-moduli of the characteristic roots.

    ``subdominant`` indexes the roots sorted by value; by default the root of
    smallest nonzero modulus is taken as the one matched by the decaying solution.
    """
    chi = rec if isinstance(rec, Polynomial) else characteristic_poly(rec)
    roots = isolate_real_roots(chi, digits)
    prec = bits_for_digits(digits)
    nonzero = [i for i, r in enumerate(roots) if not (r.lo == r.hi == 0)]
    if not nonzero:
        raise ValueError("characteristic polynomial has only the root 0")
    bounds = {i: roots[i].abs_bounds() for i in nonzero}
    for i in nonzero:
        for j in nonzero:
            if i < j and not (bounds[i][1] < bounds[j][0] or bounds[j][1] < bounds[i][0]):
                raise ModulusTie(f"roots {i} and {j} share a modulus within enclosure width")
    logs = {i: log_rational(abs(roots[i].value.to_fraction()), prec) for i in nonzero}
    dom = max(nonzero, key=lambda i: bounds[i][0])
    if subdominant is None:
        sub = min(nonzero, key=lambda i: bounds[i][1])
    else:
        if subdominant not in logs:
            raise ValueError(f"no usable root with index {subdominant}")
        sub = subdominant
    return GrowthAnalysis(
        char_poly=chi,
        roots=roots,
        dominant_log=logs[dom],
        subdominant_log=logs[sub],
        candidate_logs=[logs[i] for i in nonzero],
        subdominant_index=sub,
    )
