"""The double-integral family E(n, a) = int int (x(1-x)y(1-y)/(1-xy/a))**n dx dy / (1-xy/a).

E(n, a) is evaluated from the series sum_k C(n+k, k) a**-k Beta(n+k+1, n+1)**2.
A third-order recurrence in n (transcribed, not derived) propagates the exact
decomposition E = A + B*dilog + C*log, whose base cases are recovered by an
integer-relation search on high-precision values.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .diophantine import ScalingRule, scaling_search
from .exactmath import Polynomial
from .hiprec import BigFloat, bits_for_digits, dilog_rational, log_rational
from .integrate import AtomRegistry, DilogAtom, ExactValue, LogAtom
from .recurrence import LinearRecurrence, evaluate_exact, growth_rates

log = logging.getLogger(__name__)


class ReconstructionFailed(ArithmeticError):
    pass


def _check_a(a: int) -> None:
    if not isinstance(a, int) or a < 2:
        raise ValueError("the family needs an integer a >= 2")


# series --------------------------------------------------------------------


@lru_cache(maxsize=256)
def _series_fixed(n: int, a: int, w: int) -> int:
    """E(n, a) * 2**w, truncated once the geometric tail bound drops below one unit."""
    # t_0 = Beta(n+1, n+1)**2 = (n!^2 / (2n+1)!)**2
    from math import factorial

    b0 = Fraction(factorial(n) ** 2, factorial(2 * n + 1))
    term = Fraction(b0 * b0)
    total = 0
    k = 0
    scale = 1 << w
    while True:
        t = term.numerator * scale // term.denominator
        total += t
        # t_{k+1}/t_k = (n+k+1)/((k+1) a) * ((n+k+1)/(2n+k+2))**2
        ratio = Fraction(n + k + 1, (k + 1) * a) * Fraction(n + k + 1, 2 * n + k + 2) ** 2
        bound = Fraction(n + k + 1, (k + 1) * a)  # ratios decrease from here on
        if bound < 1:
            tail = t * bound / (1 - bound)
            if tail < 1:
                return total + k + 2  # truncation floors: at most one unit per term
        term *= ratio
        k += 1


def E_bits(n: int, a: int, prec: int) -> BigFloat:
    """E(n, a) with ``prec`` significant bits."""
    from math import factorial

    _check_a(a)
    if n < 0:
        raise ValueError("n must be non-negative")
    # E >= first term = (n!^2/(2n+1)!)^2, so this many leading zero bits at most
    first = Fraction(factorial(n) ** 2, factorial(2 * n + 1)) ** 2
    zeros = first.denominator.bit_length() - first.numerator.bit_length() + 2
    w = prec + zeros + 16 + (n + 64).bit_length()
    return BigFloat.from_fixed(_series_fixed(n, a, w), w, prec)


def E_series(n: int, a: int, digits: int) -> BigFloat:
    return E_bits(n, a, bits_for_digits(digits))


# transcribed recurrence ----------------------------------------------------

PRINTED_COEFFICIENTS = (
    "-a^3 (n+1)^2 (a-1) (32na+76a-27n-66)",
    "a^2 (512a^3n^3+2752a^3n^2-1072a^2n^3+4800a^3n-5792a^2n^2+636an^3+2736a^3-10140a^2n"
    "+3456an^2-81n^3-5796a^2+6068na-441n^2+3472a-768n-432)",
    "a (256a^2n^3+1632a^2n^2-120an^3+3376a^2n-780an^2-81n^3+2232a^2-1670na-522n^2-1170a-1086n-717)",
    "(32na+44a-27n-39) (3+n)^2",
)


def printed_coefficients(a: int) -> list[Polynomial]:
    """The four printed coefficients at integer a, in printed order (E(n), ..., E(n+3))."""
    n = Polynomial([0, 1], "n")
    p0 = -(a**3) * (n + 1) ** 2 * (a - 1) * (32 * a * n + 76 * a - 27 * n - 66)
    p1 = a**2 * (
        512 * a**3 * n**3 + 2752 * a**3 * n**2 - 1072 * a**2 * n**3 + 4800 * a**3 * n
        - 5792 * a**2 * n**2 + 636 * a * n**3 + 2736 * a**3 - 10140 * a**2 * n
        + 3456 * a * n**2 - 81 * n**3 - 5796 * a**2 + 6068 * n * a - 441 * n**2
        + 3472 * a - 768 * n - 432
    )
    p2 = a * (
        256 * a**2 * n**3 + 1632 * a**2 * n**2 - 120 * a * n**3 + 3376 * a**2 * n
        - 780 * a * n**2 - 81 * n**3 + 2232 * a**2 - 1670 * n * a - 522 * n**2
        - 1170 * a - 1086 * n - 717
    )
    p3 = (32 * n * a + 44 * a - 27 * n - 39) * (3 + n) ** 2
    return [p0, p1, p2, p3]


def recurrence_residual(rec: LinearRecurrence, a: int, n: int, digits: int) -> Fraction:
    """|sum p_i(n) E(n+i)| / max_i |p_i(n) E(n+i)| with E from the series."""
    vals = [E_series(n + i, a, digits).to_fraction() for i in range(rec.order + 1)]
    terms = [p(n) * v for p, v in zip(rec.coeffs, vals)]
    scale = max(abs(t) for t in terms)
    return abs(sum(terms)) / scale


@dataclass(frozen=True)
class BeukersFamily:
    a: int
    recurrence: LinearRecurrence
    orientation: str  # "printed" or "reversed"

    @property
    def dilog_atom(self) -> DilogAtom:
        return DilogAtom(Fraction(1, self.a))

    @property
    def log_atom(self) -> LogAtom:
        return LogAtom(Fraction(self.a, self.a - 1))

    def to_json(self) -> dict:
        return {
            "a": self.a,
            "orientation": self.orientation,
            "printed": list(PRINTED_COEFFICIENTS),
            "coeffs": [c.to_json() for c in self.recurrence.coeffs],
        }


@lru_cache(maxsize=64)
def beukers_family(a: int, digits: int = 60, check_to: int = 4) -> BeukersFamily:
    """Instantiate the printed recurrence and keep the shift association the series confirms."""
    _check_a(a)
    coeffs = printed_coefficients(a)
    tol = Fraction(1, 10 ** (digits // 2))
    for name, cs in (("printed", coeffs), ("reversed", coeffs[::-1])):
        rec = LinearRecurrence(cs, normalize=False)
        if all(recurrence_residual(rec, a, n, digits) <= tol for n in range(check_to + 1)):
            return BeukersFamily(a, rec, name)
    raise ArithmeticError(f"neither association of the printed recurrence fits the series at a = {a}")


def beukers_recurrence(a: int) -> LinearRecurrence:
    return beukers_family(a).recurrence


# dilog convention ----------------------------------------------------------

DILOG_CANDIDATES = {
    "Li2(z)": lambda a: Fraction(a - 1, a),
    "Li2(1-z)": lambda a: Fraction(1, a),
}


def select_dilog_convention(a_values: Sequence[int] = (2, 3, 4, 5), digits: int = 60) -> str:
    """The reading of dilog(z), z = (a-1)/a, that makes E(0, a) = a * dilog(z) for every a given.

    At a = 2 both readings coincide, so several a are needed to separate them.
    """
    prec = bits_for_digits(digits)
    tol = Fraction(1, 10 ** (digits - 10))
    hits = []
    for name, arg in DILOG_CANDIDATES.items():
        if all(
            abs(a * dilog_rational(arg(a), prec).to_fraction() - E_series(0, a, digits).to_fraction()) <= tol
            for a in a_values
        ):
            hits.append(name)
    if len(hits) != 1:
        raise ArithmeticError(f"dilog convention not uniquely determined: {hits}")
    return hits[0]


# integer relations ---------------------------------------------------------


def lll_reduce(basis: list[list[int]], delta: Fraction = Fraction(3, 4)) -> list[list[int]]:
    """Textbook LLL on integer row vectors with exact rational Gram-Schmidt."""
    b = [list(v) for v in basis]
    m = len(b)

    def dot(u, v):
        return sum(x * y for x, y in zip(u, v))

    def gram_schmidt():
        bs: list[list[Fraction]] = []
        mu = [[Fraction(0)] * m for _ in range(m)]
        norms = []
        for i in range(m):
            v = [Fraction(x) for x in b[i]]
            for j in range(i):
                mu[i][j] = dot(b[i], bs[j]) / norms[j] if norms[j] else Fraction(0)
                v = [x - mu[i][j] * y for x, y in zip(v, bs[j])]
            bs.append(v)
            norms.append(dot(v, v))
        return mu, norms

    mu, norms = gram_schmidt()
    k = 1
    while k < m:
        for j in range(k - 1, -1, -1):
            q = round(mu[k][j])
            if q:
                b[k] = [x - q * y for x, y in zip(b[k], b[j])]
                mu, norms = gram_schmidt()
        if norms[k] >= (delta - mu[k][k - 1] ** 2) * norms[k - 1]:
            k += 1
        else:
            b[k], b[k - 1] = b[k - 1], b[k]
            mu, norms = gram_schmidt()
            k = max(k - 1, 1)
    return b


def integer_relation(values: Sequence[Fraction], prec: int, max_height: int) -> list[int] | None:
    """Small integer vector m with sum m_i values_i ~ 0, or None if none of height <= max_height."""
    scale = 1 << prec
    dim = len(values)
    basis = []
    for i, v in enumerate(values):
        row = [0] * dim + [round(v * scale)]
        row[i] = 1
        basis.append(row)
    for row in lll_reduce(basis):
        rel = row[:dim]
        if any(rel) and max(abs(c) for c in rel) <= max_height:
            # the relation must hold far beyond what its height can explain
            resid = abs(sum(c * v for c, v in zip(rel, values)))
            if resid * scale < max(abs(c) for c in rel) * dim * 4:
                return rel
    return None


@dataclass(frozen=True)
class Decomposition:
    """E(n, a) = A + B dilog((a-1)/a) + C log((a-1)/a)."""

    n: int
    A: Fraction
    B: Fraction
    C: Fraction

    def as_exact(self, fam: BeukersFamily, registry: AtomRegistry | None = None) -> ExactValue:
        coords = {fam.dilog_atom: self.B, fam.log_atom: -self.C}  # log((a-1)/a) = -log(a/(a-1))
        if registry is not None:
            coords = {registry.intern(k): v for k, v in coords.items()}
        return ExactValue(self.A, coords)

    @classmethod
    def from_exact(cls, n: int, v: ExactValue, fam: BeukersFamily) -> "Decomposition":
        return cls(n, v.rational, v.coord(fam.dilog_atom), -v.coord(fam.log_atom))

    def to_json(self) -> dict:
        return {"n": self.n, "A": str(self.A), "B": str(self.B), "C": str(self.C)}


def _relation_at(a: int, n: int, digits: int, max_height: int) -> Decomposition:
    """Integer relation among (E(n, a), 1, dilog, log) found at two precisions."""
    found = []
    for prec in (bits_for_digits(digits), 2 * bits_for_digits(digits)):
        e = E_bits(n, a, prec).to_fraction()
        li = dilog_rational(Fraction(1, a), prec + 32).to_fraction()
        lg = log_rational(Fraction(a - 1, a), prec + 32).to_fraction()
        rel = integer_relation([e, Fraction(1), li, lg], prec - 16, max_height)
        if rel is None or rel[0] == 0:
            raise ReconstructionFailed(f"no relation of height <= {max_height} at n = {n}, {prec} bits")
        m0, m1, m2, m3 = rel
        found.append((Fraction(-m1, m0), Fraction(-m2, m0), Fraction(-m3, m0)))
    if found[0] != found[1]:
        raise ReconstructionFailed(f"relations at n = {n} differ between precisions")
    return Decomposition(n, *found[0])


def propagate(fam: BeukersFamily, base: Sequence[Decomposition], n_max: int) -> list[Decomposition]:
    """Exact forward propagation of the three coordinate sequences through the recurrence."""
    init = [d.as_exact(fam) for d in base]
    seq = evaluate_exact(fam.recurrence, init, n_max)
    return [Decomposition.from_exact(i, v, fam) for i, v in enumerate(seq)]


def reconstruct_base(a: int, digits: int = 60, max_height: int = 10**12, check_to: int = 10) -> list[Decomposition]:
    """(A, B, C) for n = 0, 1, 2, gated by two-precision agreement and propagation to n = check_to."""
    fam = beukers_family(a)
    base = [_relation_at(a, n, digits, max_height) for n in range(3)]
    seq = propagate(fam, base, check_to)
    prec = bits_for_digits(digits)
    tol = Fraction(1, 10 ** (digits // 2))
    for d in seq[3:]:
        approx = d.as_exact(fam).numeric(prec + 64).to_fraction()
        exact = E_series(d.n, a, digits).to_fraction()
        if abs(approx - exact) > tol * max(abs(exact), Fraction(1, 10**digits)):
            raise ReconstructionFailed(f"propagated decomposition misses E({d.n}, {a})")
    return base


def reconstruct_ABC(a: int, n: int, digits: int = 60, max_height: int = 10**12) -> Decomposition:
    """Exact (A, B, C) at n; n <= 2 passes the full gate, larger n use a direct relation search."""
    _check_a(a)
    if n <= 2:
        return reconstruct_base(a, digits, max_height)[n]
    return _relation_at(a, n, digits, max_height)


# small linear forms --------------------------------------------------------


@dataclass(frozen=True)
class TripleReport:
    n: int
    coeffs: tuple[int, int, int]
    delta: BigFloat | None
    note: str = ""

    def to_json(self, digits: int = 15) -> dict:
        return {
            "n": self.n,
            "C1": str(self.coeffs[0]),
            "C2": str(self.coeffs[1]),
            "C3": str(self.coeffs[2]),
            "delta": self.delta.to_decimal(digits) if self.delta is not None else None,
            "note": self.note,
        }


@dataclass
class TripleDeltaRun:
    a: int
    rule: ScalingRule
    reports: list[TripleReport]
    dominant_log: BigFloat
    coefficient_growth: list[tuple[int, float]]

    def to_json(self) -> dict:
        return {
            "a": self.a,
            "scaling_rule": {**self.rule.to_json(), "text": self.rule.describe()},
            "dominant_log": self.dominant_log.to_decimal(15),
            "reports": [r.to_json() for r in self.reports],
            "coefficient_growth": [[n, f"{g:.12f}"] for n, g in self.coefficient_growth],
        }


def triple_delta(a: int, n_range: Sequence[int], digits: int = 60, n_scale: int | None = None) -> TripleDeltaRun:
    """delta(n) = -log|C1 + C2 dilog + C3 log| / log max|C_i| for integer-scaled triples.

    The scaling rule is searched on n = 1..n_scale (at least 32 values).
    """
    fam = beukers_family(a)
    base = reconstruct_base(a, digits)
    n_hi = max(max(n_range), n_scale or 0, 40)
    seq = propagate(fam, base, n_hi)
    dens = [
        Fraction(1, _lcm3(d.A.denominator, d.B.denominator, d.C.denominator)) for d in seq[1:]
    ]
    rule = scaling_search(dens, start=1)
    growth = growth_rates(fam.recurrence, 30)
    reports = []
    for n in n_range:
        d = seq[n]
        f = rule.factor(n)
        c1, c2, c3 = (int(d.A * f), int(d.B * f), int(d.C * f))
        height = max(abs(c1), abs(c2), abs(c3))
        nz = sum(1 for c in (c1, c2, c3) if c)
        note = "near-trivial combination" if nz <= 1 else ""
        if height <= 1:
            reports.append(TripleReport(n, (c1, c2, c3), None, note or "height 1"))
            continue
        # the combination is f * E(n, a); take it from the series and confirm the contraction
        prec = bits_for_digits(digits)
        form = E_bits(n, a, prec).to_fraction() * f
        work = prec + height.bit_length() + max(0, -_bit_mag(form)) + 64
        contracted = Decomposition(n, Fraction(c1), Fraction(c2), Fraction(c3)).as_exact(fam).numeric(work)
        if abs(contracted.to_fraction() - form) > abs(form) / 10**12:
            raise ReconstructionFailed(f"integer triple at n = {n} does not reproduce the series value")
        delta = -log_rational(abs(form), prec) / log_rational(height, prec)
        reports.append(TripleReport(n, (c1, c2, c3), delta, note))
    growth_pts = [
        (n, float(log_rational(abs(seq[n].B), 64)) / n) for n in n_range if n and seq[n].B
    ]
    return TripleDeltaRun(a, rule, reports, growth.dominant_log, growth_pts)


def _bit_mag(q: Fraction) -> int:
    return abs(q.numerator).bit_length() - q.denominator.bit_length()


def _lcm3(*xs: int) -> int:
    return math.lcm(*xs)
