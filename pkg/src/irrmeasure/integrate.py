"""Exact definite integrals of rational functions as vectors over transcendental atoms.

A value is stored as ``rational + sum coord * atom`` where atoms are
canonical logs of rationals, quadratic integrals ``T_P = int_lo^hi dx/P(x)``
and dilogarithms.  Hermite reduction removes repeated denominator factors;
the squarefree remainder is split into partial fractions over linear and
quadratic factors defined over Q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Union

from .exactmath import (
    Polynomial,
    RationalFunction,
    as_fraction,
    count_real_roots,
    frac_to_str,
    poly_xgcd,
    rational_roots,
    solve_bezout,
    squarefree_factorization,
)
from .hiprec import (
    GUARD_BITS,
    BigFloat,
    arctan_rational,
    dilog_rational,
    log_rational,
    log_real,
    sqrt_rational,
)
from .telescope import HyperexponentialKernel, PoleOnPath


class UnsupportedDenominator(ValueError):
    pass


# atoms ---------------------------------------------------------------------


def _int_root(m: int, k: int) -> int | None:
    r = round(m ** (1.0 / k)) if m < 2**1000 else _iroot(m, k)
    for c in (r - 1, r, r + 1):
        if c >= 0 and c**k == m:
            return c
    return None


def _iroot(m: int, k: int) -> int:
    lo, hi = 0, 1 << (m.bit_length() // k + 1)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if mid**k <= m:
            lo = mid
        else:
            hi = mid - 1
    return lo


def _perfect_power(r: Fraction) -> tuple[Fraction, int]:
    """(s, k) with r = s**k and k maximal, for r > 1."""
    best = (r, 1)
    bits = max(r.numerator.bit_length(), 1)
    for k in range(2, bits + 1):
        a = _int_root(r.numerator, k)
        if a is None:
            continue
        b = _int_root(r.denominator, k)
        if b is None:
            continue
        best = (Fraction(a, b), k)
    return best


@dataclass(frozen=True, order=True)
class LogAtom:
    """log(arg) with arg > 1 and arg not a perfect power."""

    arg: Fraction

    kind = "log"

    def value(self, prec: int) -> BigFloat:
        return _atom_value(self, prec)

    def _compute(self, prec: int) -> BigFloat:
        return log_rational(self.arg, prec)

    def to_json(self) -> dict:
        return {"kind": "log", "arg": frac_to_str(self.arg)}

    def __str__(self):
        return f"log({frac_to_str(self.arg)})"


@dataclass(frozen=True, order=True)
class QuadAtom:
    """T_P = int_lo^hi dx / P(x) for an irreducible integer-primitive quadratic P."""

    coeffs: tuple[int, int, int]
    lo: Fraction
    hi: Fraction

    kind = "quad"

    @property
    def poly(self) -> Polynomial:
        return Polynomial(self.coeffs, "x")

    @property
    def discriminant(self) -> int:
        c0, c1, c2 = self.coeffs
        return c1 * c1 - 4 * c2 * c0

    def value(self, prec: int) -> BigFloat:
        return _atom_value(self, prec)

    def _compute(self, prec: int) -> BigFloat:
        c0, c1, c2 = self.coeffs
        disc = self.discriminant
        w = prec + 2 * GUARD_BITS
        s = sqrt_rational(abs(disc), w)
        u_hi = (2 * c2 * self.hi + c1) / s
        u_lo = (2 * c2 * self.lo + c1) / s
        if disc < 0:
            total = (arctan_rational(u_hi, w) - arctan_rational(u_lo, w)) * 2 / s
        else:
            # 1/P = 1/(c2 (x-r1)(x-r2)); both u values lie on the same side of +-1
            ratio = ((u_hi - 1) / (u_hi + 1)) / ((u_lo - 1) / (u_lo + 1))
            total = log_real(ratio, w) / s
        return total.with_prec(prec)

    def to_json(self) -> dict:
        return {
            "kind": "quad",
            "poly": [str(c) for c in self.coeffs],
            "interval": [frac_to_str(self.lo), frac_to_str(self.hi)],
        }

    def __str__(self):
        return f"T[{self.poly}; {frac_to_str(self.lo)}..{frac_to_str(self.hi)}]"


@dataclass(frozen=True, order=True)
class DilogAtom:
    """Li2(arg) = sum arg**k / k**2."""

    arg: Fraction

    kind = "dilog"

    def value(self, prec: int) -> BigFloat:
        return _atom_value(self, prec)

    def _compute(self, prec: int) -> BigFloat:
        return dilog_rational(self.arg, prec)

    def to_json(self) -> dict:
        return {"kind": "dilog", "arg": frac_to_str(self.arg)}

    def __str__(self):
        return f"Li2({frac_to_str(self.arg)})"


Atom = Union[LogAtom, QuadAtom, DilogAtom]


@lru_cache(maxsize=4096)
def _atom_value(atom, prec: int) -> BigFloat:
    return atom._compute(prec)


def atom_from_json(data: dict) -> Atom:
    kind = data["kind"]
    if kind == "log":
        return LogAtom(as_fraction(data["arg"]))
    if kind == "dilog":
        return DilogAtom(as_fraction(data["arg"]))
    if kind == "quad":
        c = tuple(int(v) for v in data["poly"])
        lo, hi = data["interval"]
        return QuadAtom(c, as_fraction(lo), as_fraction(hi))
    raise ValueError(f"unknown atom kind {kind!r}")


def _atom_sort_key(atom: Atom):
    order = {"log": 0, "quad": 1, "dilog": 2}
    return (order[atom.kind], str(atom))


class AtomRegistry:
    """Interns atoms for one pipeline so equal atoms are the same object."""

    def __init__(self):
        self._atoms: dict = {}

    def intern(self, atom: Atom) -> Atom:
        return self._atoms.setdefault(atom, atom)

    def __contains__(self, atom) -> bool:
        return atom in self._atoms

    def __len__(self) -> int:
        return len(self._atoms)

    def atoms(self) -> list[Atom]:
        return sorted(self._atoms, key=_atom_sort_key)


# exact values --------------------------------------------------------------


class ExactValue:
    """rational + sum coord[atom] * atom with rational coordinates."""

    __slots__ = ("rational", "coords")

    def __init__(self, rational=0, coords: dict | None = None):
        self.rational = as_fraction(rational)
        self.coords = {a: as_fraction(c) for a, c in (coords or {}).items() if c}

    @classmethod
    def log(cls, r, coeff=1, registry: AtomRegistry | None = None) -> "ExactValue":
        """coeff * log(r) for a positive rational r, canonicalized."""
        r = as_fraction(r)
        if r <= 0:
            raise ValueError("log of a non-positive rational")
        coeff = as_fraction(coeff)
        if r == 1 or coeff == 0:
            return cls()
        if r < 1:
            r, coeff = 1 / r, -coeff
        base, k = _perfect_power(r)
        atom = LogAtom(base)
        if registry is not None:
            atom = registry.intern(atom)
        return cls(0, {atom: coeff * k})

    @classmethod
    def atom(cls, atom: Atom, coeff=1, registry: AtomRegistry | None = None) -> "ExactValue":
        if registry is not None:
            atom = registry.intern(atom)
        return cls(0, {atom: coeff})

    def is_rational(self) -> bool:
        return not self.coords

    def atoms(self) -> list[Atom]:
        return sorted(self.coords, key=_atom_sort_key)

    def coord(self, atom) -> Fraction:
        return self.coords.get(atom, Fraction(0))

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            return ExactValue(self.rational + other, self.coords)
        if not isinstance(other, ExactValue):
            return NotImplemented
        coords = dict(self.coords)
        for a, c in other.coords.items():
            coords[a] = coords.get(a, 0) + c
        return ExactValue(self.rational + other.rational, coords)

    __radd__ = __add__

    def __neg__(self):
        return ExactValue(-self.rational, {a: -c for a, c in self.coords.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, k):
        if not isinstance(k, (int, Fraction)):
            return NotImplemented
        return ExactValue(self.rational * k, {a: c * k for a, c in self.coords.items()})

    __rmul__ = __mul__

    def __truediv__(self, k):
        if not isinstance(k, (int, Fraction)):
            return NotImplemented
        return self * (Fraction(1) / k)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return not self.coords and self.rational == other
        if not isinstance(other, ExactValue):
            return NotImplemented
        return self.rational == other.rational and self.coords == other.coords

    def __hash__(self):
        return hash((self.rational, frozenset(self.coords.items())))

    def numeric(self, prec: int) -> BigFloat:
        """Contraction against atom values; each atom is evaluated with extra guard bits."""
        w = prec + GUARD_BITS + max(
            [0] + [abs(c.numerator).bit_length() + c.denominator.bit_length() for c in self.coords.values()]
        )
        total = self.rational
        for a, c in self.coords.items():
            total += c * a.value(w).to_fraction()
        return BigFloat.from_fraction(total, prec)

    def to_json(self) -> dict:
        return {
            "rational": frac_to_str(self.rational),
            "atoms": [{**a.to_json(), "coord": frac_to_str(self.coords[a])} for a in self.atoms()],
        }

    @classmethod
    def from_json(cls, data: dict, registry: AtomRegistry | None = None) -> "ExactValue":
        coords = {}
        for entry in data.get("atoms", []):
            atom = atom_from_json(entry)
            if registry is not None:
                atom = registry.intern(atom)
            coords[atom] = as_fraction(entry["coord"])
        return cls(as_fraction(data["rational"]), coords)

    def __str__(self):
        parts = [frac_to_str(self.rational)] if self.rational or not self.coords else []
        parts += [f"{frac_to_str(self.coords[a])}*{a}" for a in self.atoms()]
        return " + ".join(parts)

    def __repr__(self):
        return f"ExactValue({self})"


# integration ---------------------------------------------------------------


def _hermite_terms(num: Polynomial, den: Polynomial):
    """Mack's linear Hermite reduction of a proper fraction num/den.

    Returns (terms, a, d) with num/den = (sum B/V**j)' + a/d over terms (B, V, j),
    d monic squarefree and deg a < deg d.
    """
    unit, factors = squarefree_factorization(den)
    A = num * (1 / unit)
    D = Polynomial([1], den.var)
    for fac, m in factors:
        D = D * fac**m
    terms = []
    for V, i in factors:
        if i < 2:
            continue
        U = D // V**i
        dV = V.derivative()
        for j in range(i - 1, 0, -1):
            B, C = solve_bezout(U * dV, V, A * Fraction(-1, j))
            terms.append((B, V, j))
            A = C * (-j) - U * B.derivative()
        D = U * V
    A = A % D if D.degree() > 0 else Polynomial([], den.var)
    return terms, A, D


def hermite_reduce(num: Polynomial, den: Polynomial) -> tuple[RationalFunction, Polynomial, Polynomial]:
    """Split a proper fraction num/den into g' + a/d with d squarefree.

    Returns (g, a, d); d is monic and deg a < deg d.
    """
    terms, A, D = _hermite_terms(num, den)
    g = RationalFunction(Polynomial([], den.var))
    for B, V, j in terms:
        g = g + RationalFunction(B, V**j)
    return g, A, D


def _split_squarefree(D: Polynomial) -> list[Polynomial]:
    """Monic factors of a monic squarefree D over Q, each of degree 1 or 2."""
    factors = []
    rest = D
    for r in rational_roots(D):
        lin = Polynomial([-r, 1], "x")
        factors.append(lin)
        rest = rest // lin
    if rest.degree() <= 0:
        return factors
    if rest.degree() == 2:
        return factors + [rest]
    quads = _quadratic_factors(rest)
    if quads is None:
        raise UnsupportedDenominator(
            f"denominator factor {rest} of degree {rest.degree()} does not split into quadratics over Q"
        )
    return factors + quads


def _quadratic_factors(p: Polynomial) -> list[Polynomial] | None:
    """Split a monic polynomial without rational roots into quadratics over Q, or None.

    With x = y/M the polynomial becomes monic in y with integer coefficients, so
    every monic quadratic factor has integer coefficients (Gauss).  Candidate
    factors come from pairing numerical roots; each is confirmed by exact division.
    """
    import mpmath

    M = math.lcm(*(c.denominator for c in p.coeffs))
    d = p.degree()
    q = Polynomial([c * M ** (d - i) for i, c in enumerate(p.coeffs)], "x")
    out = []
    while q.degree() > 2:
        ctx = mpmath.mp.clone()
        ctx.dps = 30 + 2 * max(len(str(c.numerator)) for c in q.coeffs)
        roots = ctx.polyroots([int(c) for c in reversed(q.coeffs)], maxsteps=400, extraprec=4 * ctx.prec)
        found = None
        for i in range(len(roots)):
            for j in range(i + 1, len(roots)):
                s, t = roots[i] + roots[j], roots[i] * roots[j]
                if abs(ctx.im(s)) > 1e-6 or abs(ctx.im(t)) > 1e-6:
                    continue
                cand = Polynomial([int(ctx.nint(ctx.re(t))), -int(ctx.nint(ctx.re(s))), 1], "x")
                if (q % cand).is_zero():
                    found = cand
                    break
            if found is not None:
                break
        if found is None:
            return None
        out.append(found)
        q = q // found
    if q.degree() == 2:
        out.append(q)
    elif q.degree() > 0:
        return None
    return [Polynomial([f[0] / (M * M), f[1] / M, 1], "x") for f in out]


def _check_poles(den: Polynomial, lo: Fraction, hi: Fraction) -> None:
    if den.degree() > 0 and count_real_roots(den, lo, hi):
        bad = [r for r in rational_roots(den) if lo <= r <= hi]
        where = f" at x = {frac_to_str(bad[0])}" if bad else ""
        raise PoleOnPath(f"integrand has a pole in [{frac_to_str(lo)}, {frac_to_str(hi)}]{where}")


def integrate_rational(
    f: RationalFunction, lo, hi, registry: AtomRegistry | None = None
) -> ExactValue:
    lo, hi = as_fraction(lo), as_fraction(hi)
    if not lo < hi:
        raise ValueError("integration interval must satisfy lo < hi")
    num, den = f.num.with_var("x"), f.den.with_var("x")
    _check_poles(den, lo, hi)
    poly, rem = divmod(num, den)
    antider = poly.integral()
    result = ExactValue(antider(hi) - antider(lo))
    if rem.is_zero():
        return result
    terms, A, D = _hermite_terms(rem, den)
    for B, V, j in terms:
        result = result + (B(hi) / V(hi) ** j - B(lo) / V(lo) ** j)
    if A.is_zero():
        return result
    factors = _split_squarefree(D)
    logs: dict[Fraction, Fraction] = {}  # |coefficient| -> product of log arguments
    for fac in factors:
        cof = D // fac
        _, s, _ = poly_xgcd(cof, fac)
        part = (A * s) % fac  # numerator of the partial fraction over fac
        if part.is_zero():
            continue
        if fac.degree() == 1:
            r = -fac[0]
            _collect_log(logs, (hi - r) / (lo - r), part[0])
        else:
            if part[1]:
                _collect_log(logs, fac(hi) / fac(lo), part[1] / 2)
            result = result + _quadratic_remainder(part, fac, lo, hi, registry)
    for c in sorted(logs):
        result = result + ExactValue.log(logs[c], c, registry)
    return result


def _collect_log(logs: dict, arg: Fraction, coeff: Fraction) -> None:
    """Fold coeff*log(arg) into logs, merging pieces whose coefficients agree up to sign."""
    arg = abs(arg)
    if coeff < 0:
        coeff, arg = -coeff, 1 / arg
    logs[coeff] = logs.get(coeff, Fraction(1)) * arg


def _quadratic_remainder(
    part: Polynomial, fac: Polynomial, lo: Fraction, hi: Fraction, registry: AtomRegistry | None
) -> ExactValue:
    """Non-log share of int (beta + delta x) / (x^2 + q1 x + q0) for monic irreducible fac."""
    beta, delta = part[0], part[1]
    out = ExactValue()
    rest = beta - delta * fac[1] / 2
    if rest:
        prim = fac.primitive()
        scale = prim.lc() / fac.lc()  # fac = prim / scale
        coeffs = tuple(int(c) for c in prim.coeffs)
        atom = QuadAtom(coeffs, lo, hi)
        out = out + ExactValue.atom(atom, rest * scale, registry)
    return out


def initial_values(
    kernel: HyperexponentialKernel, count: int, registry: AtomRegistry | None = None
) -> list[ExactValue]:
    """I(n) = int R**n S for n = 0..count-1."""
    kernel.validate()
    out = []
    F = kernel.S
    for _ in range(count):
        out.append(integrate_rational(F, kernel.lo, kernel.hi, registry))
        F = F * kernel.R
    return out


def contract(values: Iterable[ExactValue], prec: int) -> list[BigFloat]:
    return [v.numeric(prec) for v in values]
