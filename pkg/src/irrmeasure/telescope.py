"""Creative telescoping for integrals of hyperexponential kernels R(x)**n * S(x).

Given rational R, S and an interval [lo, hi], find polynomials p_0(n)..p_L(n)
and a rational certificate Q(n, x) with

    Q' + Q * (n R'/R + S'/S) = sum_i p_i(n) R**i,

i.e. sum_i p_i(n) F(n+i, x) = d/dx (Q F) for F = R**n S.  When Q F vanishes
at both endpoints, integrating gives sum_i p_i(n) I(n+i) = 0.

The certificate is searched as Q = P(x) / D(x) with a universal denominator D
fixed from pole multiplicities, which turns the identity into a homogeneous
linear system over Q(n) for the coefficients of P and the p_i.  The system is
solved by fraction-free Gauss-Jordan elimination over Z[n].
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd, lcm

from .exactmath import (
    Polynomial,
    RationalFunction,
    as_fraction,
    coprime_part,
    count_real_roots,
    frac_to_str,
    poly_gcd,
    poly_lcm,
    rational_roots,
    squarefree_part,
)
from .recurrence import LinearRecurrence

log = logging.getLogger(__name__)


class PoleOnPath(ValueError):
    pass


class NoRecurrenceFound(RuntimeError):
    def __init__(self, max_order: int):
        super().__init__(f"no recurrence of order <= {max_order}")
        self.max_order = max_order


class NeverVanishes(ValueError):
    pass


@dataclass(frozen=True)
class HyperexponentialKernel:
    R: RationalFunction
    S: RationalFunction
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", as_fraction(self.lo))
        object.__setattr__(self, "hi", as_fraction(self.hi))

    def validate(self) -> None:
        if not self.lo < self.hi:
            raise ValueError("kernel interval must satisfy lo < hi")
        if self.R.is_zero():
            raise ValueError("R must not vanish identically")
        for name, f in (("R", self.R), ("S", self.S)):
            if f.den.degree() > 0 and count_real_roots(f.den, self.lo, self.hi):
                roots = [r for r in rational_roots(f.den) if self.lo <= r <= self.hi]
                where = f" at x = {frac_to_str(roots[0])}" if roots else ""
                raise PoleOnPath(f"{name} has a pole in [{self.lo}, {self.hi}]{where}")

    def integrand(self, n: int) -> RationalFunction:
        return self.R**n * self.S

    def to_json(self) -> dict:
        return {
            "R": self.R.to_json(),
            "S": self.S.to_json(),
            "interval": [frac_to_str(self.lo), frac_to_str(self.hi)],
        }

    @classmethod
    def from_json(cls, data: dict) -> "HyperexponentialKernel":
        lo, hi = data["interval"]
        return cls(
            RationalFunction.from_json(data["R"]),
            RationalFunction.from_json(data["S"]),
            as_fraction(lo),
            as_fraction(hi),
        )

    def key(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class Certificate:
    """Q(n, x) = (sum_j num[j](n) x**j) / (den_n(n) * den_x(x))."""

    num: tuple[Polynomial, ...]
    den_n: Polynomial
    den_x: Polynomial

    def at(self, n) -> RationalFunction:
        nv = as_fraction(n)
        d = self.den_n(nv)
        if d == 0:
            raise ZeroDivisionError(f"certificate undefined at n = {n}")
        P = Polynomial([c(nv) for c in self.num], "x")
        return RationalFunction(P * (1 / d), self.den_x)

    def to_json(self) -> dict:
        return {
            "num_coeffs_in_n": [c.to_json() for c in self.num],
            "den_n": self.den_n.to_json(),
            "den": self.den_x.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "Certificate":
        return cls(
            tuple(Polynomial.from_json(c, "n") for c in data["num_coeffs_in_n"]),
            Polynomial.from_json(data["den_n"], "n"),
            Polynomial.from_json(data["den"], "x"),
        )

    def digest(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class TelescoperResult:
    recurrence: LinearRecurrence
    certificate: Certificate
    min_valid_n: int = 0

    @property
    def order(self) -> int:
        return self.recurrence.order

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "coeffs": [c.to_json() for c in self.recurrence.coeffs],
            "certificate": self.certificate.to_json(),
            "min_valid_n": self.min_valid_n,
        }

    @classmethod
    def from_json(cls, data: dict) -> "TelescoperResult":
        return cls(
            LinearRecurrence([Polynomial.from_json(c, "n") for c in data["coeffs"]]),
            Certificate.from_json(data["certificate"]),
            int(data["min_valid_n"]),
        )


# integer polynomials in n as lists of ints, index = degree ------------------


def _ip_trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _ip_mul(a: list[int], b: list[int]) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return out


def _ip_add(a: list[int], b: list[int]) -> list[int]:
    m = max(len(a), len(b))
    return _ip_trim([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(m)])


def _ip_sub(a: list[int], b: list[int]) -> list[int]:
    if len(a) < len(b):
        a = a + [0] * (len(b) - len(a))
    out = list(a)
    for i, c in enumerate(b):
        out[i] -= c
    return _ip_trim(out)


def _ip_exact_div(a: list[int], b: list[int]) -> list[int]:
    if not a:
        return []
    rem = list(a)
    db = len(b) - 1
    lb = b[-1]
    quo = [0] * (len(rem) - db)
    for k in range(len(rem) - 1 - db, -1, -1):
        c, r = divmod(rem[k + db], lb)
        if r:
            raise ArithmeticError("inexact division in fraction-free elimination")
        quo[k] = c
        if c:
            for j in range(db + 1):
                rem[k + j] -= c * b[j]
    if any(rem[:db]):
        raise ArithmeticError("inexact division in fraction-free elimination")
    return _ip_trim(quo)


def _nullspace_zn(rows: list[list[list[int]]], ncols: int) -> list[list[list[int]]]:
    """Basis of the right nullspace over Q(n) of a matrix with Z[n] entries.

    Fraction-free Gauss-Jordan: every pivot ends equal to the same determinant d,
    so for a free column f the vector x_f = d, x_piv(k) = -row_k[f] is a solution.
    """
    M = [[list(e) for e in r] for r in rows if any(r)]
    pivots: list[int] = []
    prev = [1]
    r = 0
    for c in range(ncols):
        cand = [i for i in range(r, len(M)) if M[i][c]]
        if not cand:
            continue
        p = min(cand, key=lambda i: (len(M[i][c]), abs(M[i][c][-1])))
        M[r], M[p] = M[p], M[r]
        piv = M[r][c]
        for i in range(len(M)):
            if i == r:
                continue
            f = M[i][c]
            row = M[i]
            if f:
                M[i] = [
                    _ip_exact_div(_ip_sub(_ip_mul(piv, row[j]), _ip_mul(f, M[r][j])), prev)
                    for j in range(ncols)
                ]
            else:
                M[i] = [_ip_exact_div(_ip_mul(piv, row[j]), prev) for j in range(ncols)]
        prev = piv
        pivots.append(c)
        r += 1
        if r == len(M):
            break
    d = prev
    basis = []
    free = [c for c in range(ncols) if c not in pivots]
    for f in free:
        v: list[list[int]] = [[] for _ in range(ncols)]
        v[f] = list(d)
        for k, pc in enumerate(pivots):
            v[pc] = [-e for e in M[k][f]]
        basis.append(v)
    return basis


class _Ansatz:
    """The linear system for one order L and one degree slack."""

    def __init__(self, kernel: HyperexponentialKernel, L: int, slack: int):
        R, S = kernel.R, kernel.S
        r1, r2, s1, s2 = R.num, R.den, S.num, S.den
        one = Polynomial([1], "x")
        C = poly_lcm(r1 * r2, s1 * s2)
        LA = (r1.derivative() * r2 - r1 * r2.derivative()) * (C / (r1 * r2))
        LB = (s1.derivative() * s2 - s1 * s2.derivative()) * (C / (s1 * s2))
        rad_r2 = squarefree_part(r2) if r2.degree() > 0 else one
        s1p = coprime_part(s1, r1 * r2) if s1.degree() > 0 else one
        D = ((r2.monic() ** L) // rad_r2) * s1p
        g = poly_gcd(D, D.derivative()) if D.degree() > 0 else one
        radD = D // g
        Dp_g = D.derivative() // g
        E = poly_lcm(C, radD)
        U = LA * (E // C)
        V = LB * (E // C) - Dp_g * (E // radD)
        base = s1p * (E // rad_r2) * (1 / r2.lc() ** L)
        T = [r1**i * r2 ** (L - i) * base for i in range(L + 1)]
        degR, degS = R.degree(), S.degree()
        kmax = L * max(degR, 0) + 1
        if degR == 0 and degS < 0:
            kmax = max(kmax, -degS)
        dP = max(D.degree() + kmax + slack, 0)
        self.L, self.D, self.dP = L, D, dP
        # columns: P coefficients c_0..c_dP, then p_0..p_L; each a pair (n^0, n^1) of x-polys
        cols: list[tuple[Polynomial, Polynomial]] = []
        X = Polynomial([0, 1], "x")
        for j in range(dP + 1):
            xj = X**j
            dxj = xj.derivative()
            cols.append((E * dxj + V * xj, U * xj))
        for i in range(L + 1):
            cols.append((-T[i], Polynomial([], "x")))
        nrows = max(max(a.degree(), b.degree()) for a, b in cols) + 1
        rows = []
        for k in range(nrows):
            entries = [(a[k], b[k]) for a, b in cols]
            den = reduce(lcm, (e.denominator for pair in entries for e in pair), 1)
            row = [_ip_trim([int(a * den), int(b * den)]) for a, b in entries]
            g_row = reduce(gcd, (c for e in row for c in e), 0)
            if g_row > 1:
                row = [[c // g_row for c in e] for e in row]
            rows.append(row)
        self.rows = rows
        self.ncols = len(cols)

    def solve(self):
        basis = _nullspace_zn(self.rows, self.ncols)
        cands = [v for v in basis if self._proper(v)]
        if not cands and len(basis) > 1:
            # every basis vector drops p_0 or p_L; a generic combination keeps both
            combo = [[] for _ in range(self.ncols)]
            for k, v in enumerate(basis):
                combo = [_ip_add(a, [(k + 1) * c for c in b]) for a, b in zip(combo, v)]
            if self._proper(combo):
                cands = [combo]
        if not cands:
            return None
        return min(cands, key=lambda v: (sum(max(len(e) - 1, 0) for e in v[self.dP + 1 :]), _vsize(v)))

    def _proper(self, v) -> bool:
        ps = v[self.dP + 1 :]
        return bool(ps[0]) and bool(ps[-1])


def _vsize(v) -> int:
    return sum(abs(c).bit_length() for e in v for c in e)


def _finish(kernel: HyperexponentialKernel, ans: _Ansatz, v) -> TelescoperResult:
    cs = [Polynomial(e, "n") for e in v[: ans.dP + 1]]
    ps = [Polynomial(e, "n") for e in v[ans.dP + 1 :]]
    # strip leading/trailing zero p's cannot happen at minimal order; guard anyway
    if ps[0].is_zero() or ps[-1].is_zero():
        return None
    g = reduce(poly_gcd, [p for p in ps if p])
    ps = [p // g for p in ps]
    content = reduce(_frac_gcd, (p.content() for p in ps if p))
    if ps[-1].lc() < 0:
        content = -content
    ps = [p * (1 / content) for p in ps]
    den_n = g * content
    h = reduce(poly_gcd, [c for c in cs if c] + [den_n]) if any(cs) else den_n.monic()
    if h.degree() > 0:
        cs = [c // h for c in cs]
        den_n = den_n // h
    # move integer content of the certificate numerators into den_n
    nz = [c for c in cs if c]
    if nz:
        k = reduce(_frac_gcd, (c.content() for c in nz))
        cs = [c * (1 / k) for c in cs]
        den_n = den_n * (1 / k)
    rec = LinearRecurrence(ps, normalize=False)
    cert = Certificate(tuple(cs), den_n, ans.D)
    return TelescoperResult(rec, cert, 0)


def _frac_gcd(a: Fraction, b: Fraction) -> Fraction:
    a, b = abs(a), abs(b)
    return Fraction(gcd(a.numerator, b.numerator), lcm(a.denominator, b.denominator))


def derive_recurrence(
    kernel: HyperexponentialKernel, max_order: int = 6, min_order: int = 1
) -> TelescoperResult:
    """Minimal-order telescoper with certificate, verified exactly before returning."""
    if max_order < 1:
        raise ValueError("max_order must be >= 1")
    kernel.validate()
    for L in range(min_order, max_order + 1):
        for slack in (2, 8):
            ans = _Ansatz(kernel, L, slack)
            v = ans.solve()
            if v is None:
                continue
            res = _finish(kernel, ans, v)
            if res is None:
                continue
            if not verify_certificate(kernel, res):
                raise ArithmeticError("telescoper produced a certificate that fails verification")
            try:
                res.min_valid_n = boundary_vanishing_check(kernel, res)
            except NeverVanishes:
                res.min_valid_n = -1
            log.debug("order %d recurrence found (slack %d)", L, slack)
            return res
        log.debug("no recurrence at order %d", L)
    raise NoRecurrenceFound(max_order)


def _identity_degree_bound(res: TelescoperResult) -> int:
    dc = max((c.degree() for c in res.certificate.num), default=0)
    dp = max(p.degree() for p in res.recurrence.coeffs) + max(res.certificate.den_n.degree(), 0)
    return max(dc + 1, dp) + 1


def verify_certificate(kernel: HyperexponentialKernel, res: TelescoperResult) -> bool:
    """Exact check of den_n(n) * [Q' + Q (n R'/R + S'/S) - sum p_i R^i] == 0.

    The bracket times den_n is a polynomial in n of bounded degree with
    coefficients in Q(x); checking it at more integer n than its degree
    proves the identity.  Each check is an exact rational-function identity in x.
    """
    try:
        R, S = kernel.R, kernel.S
        dR = R.log_derivative()
        dS = S.log_derivative() if S.num.degree() > 0 or S.den.degree() > 0 else RationalFunction(0)
        Rpows = [RationalFunction(1)]
        for _ in range(res.order):
            Rpows.append(Rpows[-1] * R)
        cert = res.certificate
        for t in range(_identity_degree_bound(res) + 1):
            P = Polynomial([c(t) for c in cert.num], "x")
            Q = RationalFunction(P, cert.den_x)
            lhs = Q.derivative() + Q * (dR * t + dS)
            rhs = RationalFunction(0)
            dn = cert.den_n(t)
            for p, Rp in zip(res.recurrence.coeffs, Rpows):
                c = p(t) * dn
                if c:
                    rhs = rhs + Rp * c
            if not (lhs - rhs).is_zero():
                return False
        return True
    except (ZeroDivisionError, ValueError):
        return False


def _generic_valuation(num: tuple[Polynomial, ...], point: Fraction) -> int:
    """Order at x = point of sum_j num[j](n) x**j for generic n."""
    if not any(num):
        return 10**9
    X = Polynomial([point, 1], "x")
    # Taylor coefficients at the point, each a polynomial in n
    coeffs: list[Polynomial] = []
    deg = len(num) - 1
    shifted = [Polynomial([1], "x")]
    for _ in range(deg):
        shifted.append(shifted[-1] * X)
    taylor = [Polynomial([], "n") for _ in range(deg + 1)]
    for j, c in enumerate(num):
        if c.is_zero():
            continue
        for k, coef in enumerate(shifted[j].coeffs):
            taylor[k] = taylor[k] + c * coef
    for k, t in enumerate(taylor):
        if t:
            return k
    return 10**9


def boundary_vanishing_check(kernel: HyperexponentialKernel, res: TelescoperResult) -> int:
    """Smallest n0 >= 0 such that Q R**n S vanishes at both endpoints for all n >= n0."""
    cert = res.certificate
    n0 = 0
    for e in (kernel.lo, kernel.hi):
        m_R = kernel.R.num.valuation_at(e) - kernel.R.den.valuation_at(e)
        ord_S = kernel.S.num.valuation_at(e) - kernel.S.den.valuation_at(e)
        ord_Q = _generic_valuation(cert.num, e) - cert.den_x.valuation_at(e)
        rest = ord_Q + ord_S
        if m_R <= 0:
            if rest > 0 and m_R == 0:
                continue
            raise NeverVanishes(
                f"R does not vanish at the endpoint x = {frac_to_str(e)}; boundary terms persist"
            )
        need = -rest // m_R + 1 if rest <= 0 else 0
        n0 = max(n0, need)
    if cert.den_n.degree() > 0:
        for r in rational_roots(cert.den_n):
            if r.denominator == 1 and r >= n0:
                n0 = int(r) + 1
    return n0


def kernel_from_json_text(text: str) -> HyperexponentialKernel:
    return HyperexponentialKernel.from_json(json.loads(text))


def warmup_kernel() -> HyperexponentialKernel:
    x = Polynomial([0, 1], "x")
    return HyperexponentialKernel(
        RationalFunction(x * (1 - x), 1 + x), RationalFunction(Polynomial([1], "x"), 1 + x), 0, 1
    )


def alladi_kernel(a: int, b: int, c: int = 0) -> HyperexponentialKernel:
    """R = x(1-x)/(a+bx+cx^2), S = 1/(a+bx+cx^2) on [0, 1]."""
    x = Polynomial([0, 1], "x")
    P = Polynomial([a, b, c], "x")
    return HyperexponentialKernel(RationalFunction(x * (1 - x), P), RationalFunction(Polynomial([1], "x"), P), 0, 1)


def gat_kernel(a: int, k: int) -> HyperexponentialKernel:
    """R = x(1-x)/(a+x^k), S = 1/(a+x^k) on [0, 1]."""
    x = Polynomial([0, 1], "x")
    P = Polynomial([a] + [0] * (k - 1) + [1], "x")
    return HyperexponentialKernel(RationalFunction(x * (1 - x), P), RationalFunction(Polynomial([1], "x"), P), 0, 1)


def salikhov_kernel(a: int, which: int = 1) -> HyperexponentialKernel:
    """E_1 (which=1, interval [0, 2a+1]) or E_2 (which=2, interval [0, 2a+3])."""
    x = Polynomial([0, 1], "x")
    A, B = 2 * a + 1, 2 * a + 3
    x2 = x * x
    base = x2 - A * A * B * B
    R = RationalFunction(x2 * (x2 - A * A) * (x2 - B * B), base * base)
    S = RationalFunction(Polynomial([1], "x"), base)
    return HyperexponentialKernel(R, S, 0, A if which == 1 else B)
