"""Exact integer, rational, polynomial and rational-function arithmetic.

Rationals are :class:`fractions.Fraction`.  Polynomials are dense, univariate,
immutable, and carry a variable tag so that polynomials in ``x`` (the
integration variable), ``n`` (the sequence index) and ``N`` (the shift /
characteristic variable) cannot be mixed by accident.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence, Union

Rational = Fraction
Scalar = Union[int, Fraction]

VARIABLES = ("x", "n", "N")


class VariableMismatch(ValueError):
    pass


def as_fraction(q) -> Fraction:
    if isinstance(q, Fraction):
        return q
    if isinstance(q, int):
        return Fraction(q)
    if isinstance(q, str):
        return Fraction(q.strip())
    raise TypeError(f"cannot convert {type(q).__name__} to an exact rational")


def frac_to_str(q: Fraction) -> str:
    q = as_fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def lcm_upto(n: int) -> int:
    """lcm(1, 2, ..., n) as the product of p**floor(log_p n) over primes p <= n."""
    if n < 1:
        raise ValueError("lcm_upto requires n >= 1")
    sieve = bytearray([1]) * (n + 1)
    sieve[:2] = b"\x00\x00"
    result = 1
    for p in range(2, n + 1):
        if not sieve[p]:
            continue
        sieve[p * p :: p] = bytes(len(range(p * p, n + 1, p)))
        pk = p
        while pk * p <= n:
            pk *= p
        result *= pk
    return result


class Polynomial:
    """Dense univariate polynomial over Q; ``coeffs[i]`` is the coefficient of var**i."""

    __slots__ = ("coeffs", "var")

    def __init__(self, coeffs: Iterable = (), var: str = "x"):
        if var not in VARIABLES:
            raise ValueError(f"unknown variable tag {var!r}")
        cs = [as_fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)
        self.var = var

    # construction helpers
    @classmethod
    def constant(cls, c, var: str = "x") -> "Polynomial":
        return cls([c], var)

    @classmethod
    def gen(cls, var: str = "x") -> "Polynomial":
        return cls([0, 1], var)

    @classmethod
    def from_roots(cls, roots: Iterable, var: str = "x") -> "Polynomial":
        p = cls([1], var)
        for r in roots:
            p = p * cls([-as_fraction(r), 1], var)
        return p

    # basic properties
    def degree(self) -> int:
        """Degree; the zero polynomial has degree -1."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def lc(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def tc(self) -> Fraction:
        return self.coeffs[0] if self.coeffs else Fraction(0)

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __len__(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, i: int) -> Fraction:
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return Fraction(0)

    def _check(self, other: "Polynomial") -> None:
        if self.var != other.var:
            raise VariableMismatch(f"{self.var} vs {other.var}")

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial([other], self.var)
        return NotImplemented

    # arithmetic
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return Polynomial(out, self.var)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial([-c for c in self.coeffs], self.var)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return Polynomial([], self.var)
            return Polynomial([c * other for c in self.coeffs], self.var)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return Polynomial([], self.var)
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if ai == 0:
                continue
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
        return Polynomial(out, self.var)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power of a polynomial")
        result = Polynomial([1], self.var)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / as_fraction(other))
        q, r = divmod(self, other)
        if r:
            raise ArithmeticError("inexact polynomial division")
        return q

    def __divmod__(self, other: "Polynomial"):
        other = self._coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        db = other.degree()
        lcb = other.lc()
        if len(rem) - 1 < db:
            return Polynomial([], self.var), self
        quo = [Fraction(0)] * (len(rem) - db)
        bc = other.coeffs
        for k in range(len(rem) - 1 - db, -1, -1):
            c = rem[k + db] / lcb
            quo[k] = c
            if c:
                for j in range(db + 1):
                    rem[k + j] -= c * bc[j]
        return Polynomial(quo, self.var), Polynomial(rem[:db], self.var)

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial([other], self.var)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.var == other.var and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.var, self.coeffs))

    def __call__(self, value):
        """Horner evaluation; works for ints, Fractions and any ring element."""
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * value + c
        return acc

    def derivative(self) -> "Polynomial":
        return Polynomial([i * c for i, c in enumerate(self.coeffs)][1:], self.var)

    def integral(self) -> "Polynomial":
        return Polynomial([0] + [c / (i + 1) for i, c in enumerate(self.coeffs)], self.var)

    def compose(self, other: "Polynomial") -> "Polynomial":
        acc = Polynomial([], other.var)
        for c in reversed(self.coeffs):
            acc = acc * other + c
        return acc

    def shift(self, h) -> "Polynomial":
        """p(var + h)."""
        return self.compose(Polynomial([h, 1], self.var))

    def with_var(self, var: str) -> "Polynomial":
        return Polynomial(self.coeffs, var)

    def monic(self) -> "Polynomial":
        if self.is_zero():
            return self
        return self * (1 / self.lc())

    def content(self) -> Fraction:
        """Positive rational c with self/c integral and primitive (0 for the zero polynomial)."""
        if self.is_zero():
            return Fraction(0)
        den = reduce(math.lcm, (c.denominator for c in self.coeffs), 1)
        g = reduce(math.gcd, (c.numerator * (den // c.denominator) for c in self.coeffs), 0)
        return Fraction(g, den)

    def primitive(self) -> "Polynomial":
        """Integer primitive part with positive leading coefficient."""
        if self.is_zero():
            return self
        c = self.content()
        if self.lc() < 0:
            c = -c
        return self * (1 / c)

    def int_coeffs(self) -> list[int]:
        for c in self.coeffs:
            if c.denominator != 1:
                raise ValueError("polynomial has non-integer coefficients")
        return [c.numerator for c in self.coeffs]

    def valuation_at(self, point) -> int:
        """Order of vanishing at a rational point (-1 never; zero polynomial -> large)."""
        if self.is_zero():
            return 10**9
        p = self.shift(as_fraction(point))
        for i, c in enumerate(p.coeffs):
            if c:
                return i
        return 0

    def to_json(self) -> list[str]:
        return [frac_to_str(c) for c in self.coeffs]

    @classmethod
    def from_json(cls, data: Sequence, var: str = "x") -> "Polynomial":
        return cls([as_fraction(c) for c in data], var)

    def __repr__(self):
        return f"Polynomial({self}, var={self.var!r})"

    def __str__(self):
        if not self.coeffs:
            return "0"
        terms = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            sign = "-" if c < 0 else "+"
            a = -c if c < 0 else c
            if i == 0:
                body = frac_to_str(a)
            else:
                mono = self.var if i == 1 else f"{self.var}^{i}"
                body = mono if a == 1 else f"{frac_to_str(a)}*{mono}"
            terms.append((sign, body))
        head_sign, head = terms[0]
        out = ("-" if head_sign == "-" else "") + head
        for sign, body in terms[1:]:
            out += f" {sign} {body}"
        return out


def _zero_like(p: Polynomial) -> Polynomial:
    return Polynomial([], p.var)


def poly_gcd(p: Polynomial, q: Polynomial) -> Polynomial:
    """Monic gcd (the zero polynomial only if both inputs are zero)."""
    if p.var != q.var:
        raise VariableMismatch(f"{p.var} vs {q.var}")
    a, b = p, q
    while b:
        a, b = b, a % b
    return a.monic()


def poly_xgcd(p: Polynomial, q: Polynomial):
    """(g, s, t) with s*p + t*q = g monic gcd."""
    if p.var != q.var:
        raise VariableMismatch(f"{p.var} vs {q.var}")
    r0, r1 = p, q
    s0, s1 = Polynomial([1], p.var), _zero_like(p)
    t0, t1 = _zero_like(p), Polynomial([1], p.var)
    while r1:
        quo, rem = divmod(r0, r1)
        r0, r1 = r1, rem
        s0, s1 = s1, s0 - quo * s1
        t0, t1 = t1, t0 - quo * t1
    if r0.is_zero():
        return r0, s0, t0
    inv = 1 / r0.lc()
    return r0 * inv, s0 * inv, t0 * inv


def solve_bezout(a: Polynomial, b: Polynomial, c: Polynomial):
    """(s, t) with s*a + t*b = c and deg s < deg b; requires gcd(a, b) | c."""
    g, s, t = poly_xgcd(a, b)
    q, r = divmod(c, g)
    if r:
        raise ArithmeticError("c is not in the ideal generated by a and b")
    s, t = s * q, t * q
    if b.degree() > 0:
        k, s = divmod(s, b)
        t = t + k * a
    return s, t


def poly_lcm(p: Polynomial, q: Polynomial) -> Polynomial:
    if p.is_zero() or q.is_zero():
        return _zero_like(p)
    return (p * q // poly_gcd(p, q)).monic()


def squarefree_factorization(p: Polynomial):
    """Yun's algorithm.

    Returns ``(unit, [(factor, multiplicity), ...])`` with monic, squarefree,
    pairwise coprime factors and ``p == unit * prod(f**m)``.
    """
    if p.is_zero():
        raise ValueError("squarefree factorization of the zero polynomial")
    unit = p.lc()
    f = p.monic()
    if f.degree() == 0:
        return unit, []
    out = []
    df = f.derivative()
    a = poly_gcd(f, df)
    b = f // a
    c = df // a
    d = c - b.derivative()
    i = 1
    while b.degree() > 0:
        a = poly_gcd(b, d)
        b = b // a
        c = d // a if a.degree() >= 0 else c
        if a.degree() > 0:
            out.append((a.monic(), i))
        d = c - b.derivative()
        i += 1
    return unit, out


def squarefree_part(p: Polynomial) -> Polynomial:
    if p.is_zero():
        raise ValueError("squarefree part of the zero polynomial")
    if p.degree() <= 0:
        return Polynomial([1], p.var)
    return (p // poly_gcd(p, p.derivative())).monic()


def coprime_part(p: Polynomial, q: Polynomial) -> Polynomial:
    """Largest monic divisor of p coprime to q."""
    f = p.monic()
    while True:
        g = poly_gcd(f, q)
        if g.degree() <= 0:
            return f
        f = f // g


class RationalFunction:
    """num/den over Q in canonical form.

    Canonical: gcd(num, den) = 1 and den is the integer-primitive polynomial
    with positive leading coefficient, so structural equality is equality.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=None, var: str | None = None):
        if not isinstance(num, Polynomial):
            num = Polynomial([num], var or (den.var if isinstance(den, Polynomial) else "x"))
        if den is None:
            den = Polynomial([1], num.var)
        elif not isinstance(den, Polynomial):
            den = Polynomial([den], num.var)
        if num.var != den.var:
            raise VariableMismatch(f"{num.var} vs {den.var}")
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if num.is_zero():
            self.num, self.den = num, Polynomial([1], num.var)
            return
        g = poly_gcd(num, den)
        if g.degree() > 0:
            num, den = num // g, den // g
        scale = den.content()
        if den.lc() < 0:
            scale = -scale
        self.num = num * (1 / scale)
        self.den = den * (1 / scale)

    @property
    def var(self) -> str:
        return self.num.var

    @classmethod
    def from_poly(cls, p: Polynomial) -> "RationalFunction":
        return cls(p, Polynomial([1], p.var))

    def _coerce(self, other):
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, Polynomial):
            return RationalFunction(other)
        if isinstance(other, (int, Fraction)):
            return RationalFunction(Polynomial([other], self.var))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.den == other.den:
            return RationalFunction(self.num + other.num, self.den)
        return RationalFunction(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return RationalFunction(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.num.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RationalFunction(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, k: int):
        if k >= 0:
            return RationalFunction(self.num**k, self.den**k)
        return RationalFunction(self.den ** (-k), self.num ** (-k))

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __call__(self, value):
        d = self.den(value)
        if d == 0:
            raise ZeroDivisionError("evaluation at a pole")
        return self.num(value) / d

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def derivative(self) -> "RationalFunction":
        return RationalFunction(
            self.num.derivative() * self.den - self.num * self.den.derivative(), self.den**2
        )

    def log_derivative(self) -> "RationalFunction":
        return self.derivative() / self

    def degree(self) -> int:
        """deg num - deg den (order of growth at infinity)."""
        return self.num.degree() - self.den.degree()

    def canonical(self) -> "RationalFunction":
        return RationalFunction(self.num, self.den)

    def to_json(self) -> dict:
        return {"num": self.num.to_json(), "den": self.den.to_json()}

    @classmethod
    def from_json(cls, data: dict, var: str = "x") -> "RationalFunction":
        return cls(Polynomial.from_json(data["num"], var), Polynomial.from_json(data["den"], var))

    def __repr__(self):
        return f"RationalFunction(({self.num}) / ({self.den}))"

    __str__ = __repr__


x = Polynomial.gen("x")
n = Polynomial.gen("n")
N = Polynomial.gen("N")


def rational_roots(p: Polynomial) -> list[Fraction]:
    """All rational roots (without multiplicity), via the rational-root theorem."""
    if p.is_zero():
        raise ValueError("rational roots of the zero polynomial")
    sq = squarefree_part(p).primitive()
    roots: list[Fraction] = []
    while sq.degree() > 0 and sq.tc() == 0:
        roots.append(Fraction(0))
        sq = sq // Polynomial([0, 1], p.var)
    if sq.degree() <= 0:
        return roots
    cs = sq.int_coeffs()
    for num in _divisors(abs(cs[0])):
        for den in _divisors(abs(cs[-1])):
            if math.gcd(num, den) != 1:
                continue
            for r in (Fraction(num, den), Fraction(-num, den)):
                if sq(r) == 0:
                    roots.append(r)
                    sq = sq // Polynomial([-r, 1], p.var)
            if sq.degree() <= 0:
                return sorted(roots)
    return sorted(roots)


def _divisors(m: int) -> list[int]:
    if m == 0:
        return [1]
    divs = [1]
    for p, e in factor_integer(m).items():
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def factor_integer(m: int, trial_limit: int = 10**6) -> dict[int, int]:
    """Trial-division factorization; raises if a cofactor above trial_limit**2 remains composite-unknown."""
    m = abs(m)
    out: dict[int, int] = {}
    p = 2
    while p * p <= m and p <= trial_limit:
        while m % p == 0:
            out[p] = out.get(p, 0) + 1
            m //= p
        p += 1 if p == 2 else 2
    if m > 1:
        out[m] = out.get(m, 0) + 1
    return out


def sturm_sequence(p: Polynomial) -> list[Polynomial]:
    """Sturm chain of the squarefree part of p."""
    f = squarefree_part(p)
    seq = [f, f.derivative()]
    while seq[-1]:
        seq.append(-(seq[-2] % seq[-1]))
    return seq[:-1]


def _sign_changes(seq: Sequence[Polynomial], v: Fraction) -> int:
    changes = 0
    last = 0
    for q in seq:
        s = q(v)
        if s == 0:
            continue
        s = 1 if s > 0 else -1
        if last and s != last:
            changes += 1
        last = s
    return changes


def count_real_roots(p: Polynomial, lo, hi, seq: Sequence[Polynomial] | None = None) -> int:
    """Number of distinct real roots of p in the closed interval [lo, hi]."""
    lo, hi = as_fraction(lo), as_fraction(hi)
    if p.degree() <= 0:
        return 0
    seq = seq if seq is not None else sturm_sequence(p)
    count = _sign_changes(seq, lo) - _sign_changes(seq, hi)
    if seq[0](lo) == 0:
        count += 1
    return count


def cauchy_bound(p: Polynomial) -> Fraction:
    """All complex roots satisfy |z| < bound."""
    lc = abs(p.lc())
    return 1 + max((abs(c) / lc for c in p.coeffs[:-1]), default=Fraction(0))
