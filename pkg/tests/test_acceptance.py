"""End-to-end acceptance checks; each prints one PASS/FAIL line (see the summary section)."""

import random
import time
from fractions import Fraction

import mpmath
import pytest

from irrmeasure.beukers import (
    DILOG_CANDIDATES,
    E_series,
    beukers_family,
    reconstruct_base,
    recurrence_residual,
    select_dilog_convention,
    triple_delta,
)
from irrmeasure.cli import main
from irrmeasure.diophantine import (
    CongruenceViolated,
    ScalingRule,
    alladi_robinson_measure,
    apery_growth,
    apery_sequences,
    arctan_measure,
    empirical_delta,
    measure_bound,
    measure_from_logs,
    salikhov_K,
    salikhov_asymptote,
    salikhov_bound,
    salikhov_cubic,
    salikhov_nu,
    salikhov_root_check,
    scaling_search,
)
from irrmeasure.exactmath import Polynomial, RationalFunction, lcm_upto
from irrmeasure.hiprec import (
    arctan_rational,
    bits_for_digits,
    dilog_rational,
    log_rational,
    pi,
    sqrt_rational,
    zeta3,
)
from irrmeasure.integrate import AtomRegistry, ExactValue, LogAtom, initial_values, integrate_rational
from irrmeasure.pipeline import exact_sequence, joint_denominators, recon, salikhov_pipeline, salikhov_sequences
from irrmeasure.recurrence import characteristic_poly, growth_rates
from irrmeasure.telescope import (
    HyperexponentialKernel,
    derive_recurrence,
    salikhov_kernel,
    verify_certificate,
    warmup_kernel,
)

X = Polynomial([0, 1], "x")
ONE = Polynomial([1], "x")
N = Polynomial([0, 1], "N")
LOG2 = LogAtom(Fraction(2))


def within(got: Fraction, ref: str, tol: Fraction) -> bool:
    return abs(got - Fraction(ref)) <= tol


@pytest.fixture(scope="module")
def warm_res():
    t = time.perf_counter()
    res = derive_recurrence(warmup_kernel())
    return res, time.perf_counter() - t


@pytest.fixture(scope="module")
def warm_seq(warm_res):
    return exact_sequence(warmup_kernel(), warm_res[0], 1000, AtomRegistry())


@pytest.fixture(scope="module")
def warm_recon():
    t = time.perf_counter()
    rep = recon(warmup_kernel(), n_max=1000, digits=1200)
    return rep, time.perf_counter() - t


# --------------------------------------------------------------------------


def test_telescoper_flagship(warm_res, verdict):
    res, secs = warm_res
    chi = characteristic_poly(res.recurrence)
    ok = res.order == 2 and chi == N * N - 6 * N + 1 and verify_certificate(warmup_kernel(), res) and secs < 10
    verdict("telescoper flagship", ok, f"order {res.order}, characteristic {chi}, certificate exact, {secs:.2f} s")


def test_exact_initial_values(warm_res, warm_seq, verdict):
    res = warm_res[0]
    init = initial_values(warmup_kernel(), 3)
    expected = [ExactValue(0, {LOG2: 1}), ExactValue(-2, {LOG2: 3}), ExactValue(-9, {LOG2: 13})]
    B = [v.coord(LOG2) for v in warm_seq[:5]]
    printed_fails = res.recurrence.reversed().residual(warm_seq[:3], 0) != 0
    ok = init == expected and B == [1, 3, 13, 63, 321] and printed_fails
    verdict(
        "exact initial values",
        ok,
        f"I(0..2) = {', '.join(map(str, init))}; B(0..4) = {[int(b) for b in B]}; "
        f"reversed coefficient order fails on the exact values: {printed_fails}",
    )


def test_values_at_fifty(warm_res, verdict):
    t = time.perf_counter()
    v = exact_sequence(warmup_kernel(), warm_res[0], 50, AtomRegistry())[50]
    secs = time.perf_counter() - t + warm_res[1]
    A, B = v.rational, v.coord(LOG2)
    den = 2635924360893339481850468164186010894239049450495548604400
    ok = (
        B == 15310086199495855930932559804210504653
        and A == Fraction(-1827083538922494024488153994990786998947102154393958429773, 172169139124777594800)
        and den == B * A.denominator
        and secs < 5
    )
    verdict("n = 50 exact values", ok, f"B(50) = {B}, A(50) = {A}, {secs:.2f} s")


def test_empirical_deltas(warm_recon, verdict):
    rep, secs = warm_recon
    d = {r.n: r.delta.to_fraction() for r in rep.deltas}
    low = rep.min_window_delta()
    tol12 = Fraction(1, 10**12)
    ok = (
        within(d[50], "0.33269846131126944438", tol12)
        and within(d[51], "0.31992792581569268673", tol12)
        and within(d[53], "0.30031107795443952791", tol12)
        and within(low.delta.to_fraction(), "0.28193333613008344616", Fraction(1, 10**10))
        and within(low.measure_estimate.to_fraction(), "4.5469377751717949058", Fraction(1, 10**10))
        and 990 <= low.n <= 1000
        and secs < 600
    )
    verdict(
        "empirical deltas",
        ok,
        f"delta(50,51,53) = {', '.join(r.delta.to_decimal(20) for r in rep.deltas if r.n in (50, 51, 53))}; "
        f"window min {low.delta.to_decimal(20)} at n = {low.n}, estimate {low.measure_estimate.to_decimal(20)}; "
        f"{rep.digits} digits, {secs:.1f} s",
    )


@pytest.mark.xfail(strict=True, reason="1200 digits cannot resolve |log 2 - A/B| at n = 1000; about 1570 are needed")
def test_empirical_deltas_at_fixed_1200_digits(verdict):
    try:
        rep = recon(warmup_kernel(), n_max=1000, digits=1200, strict_digits=True)
        ok, detail = len(rep.deltas) > 0, "run completed"
    except ArithmeticError as exc:
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    verdict("empirical deltas at exactly 1200 digits", ok, detail)


def test_rigorous_bound(warm_res, verdict):
    growth = growth_rates(warm_res[0].recurrence, 40)
    bound = measure_bound(growth, ScalingRule(1))
    closed = alladi_robinson_measure(1, 1, 30)
    tol = Fraction(1, 10**12)
    ok = (
        within(bound.mu.to_fraction(), "4.6221008324542313342", tol)
        and abs(bound.mu.to_fraction() - closed.to_fraction()) <= tol
    )
    verdict("rigorous bound", ok, f"root route {bound.mu.to_decimal(20)}, closed form {closed.to_decimal(20)}")


def test_divisibility_evidence(warm_seq, verdict):
    bad = [
        n
        for n in range(1, 1001)
        if (warm_seq[n].rational * lcm_upto(n)).denominator != 1 or (warm_seq[n].coord(LOG2) * lcm_upto(n)).denominator != 1
    ]
    verdict("divisibility evidence", not bad, f"lcm(1..n) A(n), lcm(1..n) B(n) integral for 1 <= n <= 1000; failures {bad[:5]}")


def test_apery(verdict):
    ap = apery_sequences(60)
    integral = all(isinstance(p, int) and isinstance(q, int) for p, q in zip(ap.p, ap.q))
    m = measure_from_logs(*apery_growth(30))
    ok = (
        ap.b[:3] == [1, 5, 73]
        and integral
        and m.delta.to_decimal(4) == "0.08053"
        and m.mu.to_decimal(7) == "13.41782"
    )
    verdict("Apery sequences", ok, f"b(0..2) = {ap.b[:3]}, delta {m.delta.to_decimal(12)}, mu {m.mu.to_decimal(12)}")


@pytest.mark.xfail(strict=True, reason="at n = 60 the exponent is about 0.14; it approaches 0.0805 only slowly")
def test_apery_empirical_delta_at_sixty(verdict):
    ap = apery_sequences(60)
    r = empirical_delta(zeta3(bits_for_digits(200)), ap.p[60], ap.q[60], 60)
    ok = Fraction(6, 100) < r.delta.to_fraction() < Fraction(1, 10)
    verdict("Apery empirical delta at n = 60 in (0.06, 0.10)", ok, f"delta(60) = {r.delta.to_decimal(12)}")


def test_arctan_theorem(verdict):
    mu = arctan_measure(3, 30)
    try:
        arctan_measure(5)
        rejected = False
    except CongruenceViolated:
        rejected = True
    verdict("arctan measure", mu.to_fraction() > 2 and rejected, f"mu(3) = {mu.to_decimal(20)}, a = 5 rejected: {rejected}")


def test_salikhov(verdict):
    t = time.perf_counter()
    chars = all(
        characteristic_poly(derive_recurrence(salikhov_kernel(a, 1)).recurrence) == salikhov_cubic(a).primitive()
        for a in range(1, 5)
    )
    roots = all(salikhov_root_check(a) for a in range(1, 101))
    rules = {}
    for a in range(1, 6):
        _, A1, A2, B = salikhov_sequences(a, 200)
        rule = scaling_search(joint_denominators(A1, A2, B))
        rules[a] = (rule, rule.K == salikhov_K(a) and all(rule.integral_on(s) for s in (A1, A2, B)))
    nu1 = salikhov_bound(1, 30)
    run1 = salikhov_pipeline(1, n_max=60)
    even = float(salikhov_nu(10**4)) / float(salikhov_asymptote(10**4))
    secs = time.perf_counter() - t
    ok = (
        chars
        and roots
        and all(v for _, v in rules.values())
        and nu1.uses_c3
        and run1.agree()
        and abs(even - 1) < 0.1
        and secs < 900
    )
    verdict(
        "Salikhov family",
        ok,
        f"cubics match for a = 1..4: {chars}; root chain holds for a = 1..100: {roots}; "
        f"scalings {', '.join(f'a={a}: {r.describe()}' for a, (r, _) in rules.items())}; "
        f"nu(1) = {nu1.nu.to_decimal(15)} via |C3|; even ratio at a = 10^4: {even:.4f}; {secs:.1f} s",
    )


@pytest.mark.xfail(strict=True, reason="K(a)^n alone leaves lcm-type denominators; a factor lcm(1..2n) and a constant are needed")
def test_salikhov_geometric_scaling_alone(verdict):
    failing = []
    for a in range(1, 6):
        _, A1, A2, B = salikhov_sequences(a, 200)
        rule = ScalingRule(0, salikhov_K(a))
        failing += [(a, name) for name, s in (("A1", A1), ("A2", A2), ("B", B)) if not rule.integral_on(s)]
    verdict("Salikhov K(a)^n alone clears A1, A2, B for n <= 200", not failing, f"not integral: {failing}")


@pytest.mark.xfail(strict=True, reason="the odd-a ratio converges slowly; about 1.12 at a = 10^4 + 1")
def test_salikhov_odd_asymptote(verdict):
    a = 10**4 + 1
    ratio = float(salikhov_nu(a)) / float(salikhov_asymptote(a))
    verdict("Salikhov odd asymptotic ratio within 10%", abs(ratio - 1) < 0.1, f"ratio at a = {a}: {ratio:.4f}")


def test_beukers(verdict):
    tol = Fraction(1, 10**30)
    worst = max(
        recurrence_residual(beukers_family(a).recurrence, a, n, 60) for a in range(2, 6) for n in range(11)
    )
    conv = select_dilog_convention()
    prec = bits_for_digits(60)
    arg = DILOG_CANDIDATES[conv]
    e0 = max(
        abs(a * dilog_rational(arg(a), prec).to_fraction() - E_series(0, a, 60).to_fraction()) for a in range(2, 6)
    )
    base = reconstruct_base(2)
    run = triple_delta(2, range(40, 51))
    deltas = [r.delta for r in run.reports]
    ok = worst <= tol and e0 <= Fraction(1, 10**40) and len(base) == 3 and all(d is not None and d > 0 for d in deltas)
    verdict(
        "Beukers family",
        ok,
        f"max residual {float(worst):.2e}; convention {conv}, E(0,a) error {float(e0):.1e}; "
        f"base (A,B,C) {[(str(d.A), str(d.B), str(d.C)) for d in base]}; "
        f"delta(40..50) min {min(deltas).to_decimal(6)}",
    )


def _random_kernel(rng: random.Random) -> HyperexponentialKernel:
    i, j = rng.randint(1, 2), rng.randint(1, 2)
    base = Polynomial([rng.randint(1, 5), rng.randint(0, 5), rng.randint(0, 1)], "x") ** rng.randint(0, 1)
    S = RationalFunction(ONE, Polynomial([rng.randint(1, 5), rng.randint(0, 4)], "x") ** rng.randint(0, 1))
    return HyperexponentialKernel(RationalFunction(X**i * (1 - X) ** j, base), S, 0, 1)


_FACTORS = [1 + X, 2 + X, X + 3, X - 2, X * X + 1, X * X + X + 1, X * X - 2, X * X + 2 * X + 2, 2 * X * X + 3]


def _random_rational(rng: random.Random) -> RationalFunction:
    num = Polynomial([rng.randint(-6, 6) for _ in range(rng.randint(1, 5))], "x")
    if num.is_zero():
        num = ONE
    den = Polynomial([rng.randint(1, 4)], "x")
    for _ in range(rng.randint(1, 3)):
        den = den * rng.choice(_FACTORS) ** rng.randint(1, 2)
    return RationalFunction(num, den)


def test_property_suites(tmp_path, capsys, verdict):
    rng = random.Random(20240611)
    certs = all(verify_certificate(k, derive_recurrence(k, max_order=4)) for k in (_random_kernel(rng) for _ in range(25)))

    ctx = mpmath.mp.clone()
    ctx.dps = 45
    worst = ctx.mpf(0)
    for _ in range(50):
        f = _random_rational(rng)
        got = integrate_rational(f, 0, 1).numeric(200).to_fraction()

        def g(t, f=f):
            num = ctx.fsum(ctx.mpf(c.numerator) / c.denominator * t**k for k, c in enumerate(f.num.coeffs))
            den = ctx.fsum(ctx.mpf(c.numerator) / c.denominator * t**k for k, c in enumerate(f.den.coeffs))
            return num / den

        ref = ctx.quad(g, [0, 1])
        worst = max(worst, abs(ctx.mpf(got.numerator) / got.denominator - ref) / max(abs(ref), ctx.mpf(10) ** -5))
    quad_ok = worst <= ctx.mpf(10) ** -35

    def stable(fn, p):
        a, b = fn(p).to_fraction(), fn(2 * p).to_fraction()
        return abs(a - b) <= max(abs(b), Fraction(1)) / Fraction(2) ** (p - 8)

    ops = {
        "log": lambda p: log_rational(Fraction(7, 3), p),
        "arctan": lambda p: arctan_rational(Fraction(5, 4), p),
        "dilog": lambda p: dilog_rational(Fraction(-3, 2), p),
        "sqrt": lambda p: sqrt_rational(Fraction(11, 5), p),
        "pi": pi,
        "zeta3": zeta3,
    }
    doubling = all(stable(fn, p) for fn in ops.values() for p in (64, 300, 1000))

    outs = []
    for d in ("a", "b"):
        assert main(["recon", "--nmax", "60", "--out", str(tmp_path / d), "--cache", str(tmp_path / f"c{d}")]) == 0
        main(["report", "--cache", str(tmp_path / f"c{d}"), "--out", str(tmp_path / d)])
        outs.append({p.name: p.read_bytes() for p in sorted((tmp_path / d).iterdir())})
    capsys.readouterr()
    determinism = outs[0] == outs[1] and len(outs[0]) == 2

    ok = certs and quad_ok and doubling and determinism
    verdict(
        "property suites",
        ok,
        f"25 random certificates exact: {certs}; 50 integrals vs quadrature worst rel err {ctx.nstr(worst, 3)}; "
        f"precision doubling stable for {', '.join(ops)}: {doubling}; byte-identical reruns: {determinism}",
    )
