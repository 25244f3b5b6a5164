import json
import time
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from irrmeasure.exactmath import Polynomial, RationalFunction
from irrmeasure.recurrence import LinearRecurrence, characteristic_poly
from irrmeasure.telescope import (
    HyperexponentialKernel,
    NeverVanishes,
    NoRecurrenceFound,
    PoleOnPath,
    TelescoperResult,
    boundary_vanishing_check,
    derive_recurrence,
    salikhov_kernel,
    verify_certificate,
    warmup_kernel,
)

X = Polynomial([0, 1], "x")
ONE = Polynomial([1], "x")
n = Polynomial([0, 1], "n")


def quad_values(kernel: HyperexponentialKernel, count: int, dps: int = 50) -> list:
    ctx = mpmath.mp.clone()
    ctx.dps = dps

    def f(m):
        return lambda t: (ctx.mpf(kernel.R.num(t)) / kernel.R.den(t)) ** m * ctx.mpf(kernel.S.num(t)) / kernel.S.den(t)

    lo = ctx.mpf(kernel.lo.numerator) / kernel.lo.denominator
    hi = ctx.mpf(kernel.hi.numerator) / kernel.hi.denominator
    return [ctx.quad(f(m), [lo, hi]) for m in range(count)], ctx


def transfer_residuals(kernel: HyperexponentialKernel, res: TelescoperResult, span: int = 5) -> list:
    n0 = res.min_valid_n
    vals, ctx = quad_values(kernel, n0 + span + res.order + 1)
    out = []
    for m in range(n0, n0 + span + 1):
        terms = [ctx.mpf(p(m).numerator) / p(m).denominator * vals[m + i] for i, p in enumerate(res.recurrence.coeffs)]
        out.append(abs(ctx.fsum(terms)) / max(abs(t) for t in terms))
    return out


@pytest.fixture(scope="module")
def warmup():
    return warmup_kernel(), derive_recurrence(warmup_kernel())


class TestWarmUp:
    def test_recurrence(self, warmup):
        _, res = warmup
        assert res.order == 2
        assert res.recurrence.coeffs == (n + 1, -6 * n - 9, n + 2)
        assert characteristic_poly(res.recurrence) == Polynomial([1, -6, 1], "N")

    def test_certificate_verifies(self, warmup):
        k, res = warmup
        assert verify_certificate(k, res)

    def test_perturbed_coefficient_fails(self, warmup):
        k, res = warmup
        bad = list(res.recurrence.coeffs)
        bad[1] = bad[1] + 1
        broken = TelescoperResult(LinearRecurrence(bad, normalize=False), res.certificate, res.min_valid_n)
        assert not verify_certificate(k, broken)

    def test_printed_orientation_fails(self, warmup):
        k, res = warmup
        printed = LinearRecurrence([n + 2, -6 * n - 9, n + 1])
        assert not verify_certificate(k, TelescoperResult(printed, res.certificate, 0))

    def test_no_order_one_recurrence(self):
        with pytest.raises(NoRecurrenceFound):
            derive_recurrence(warmup_kernel(), max_order=1)

    def test_boundary(self, warmup):
        k, res = warmup
        assert boundary_vanishing_check(k, res) <= 1

    def test_integral_transfer(self, warmup):
        k, res = warmup
        assert max(transfer_residuals(k, res)) <= 1e-40

    def test_json_roundtrip(self, warmup):
        k, res = warmup
        again = TelescoperResult.from_json(json.loads(json.dumps(res.to_json())))
        assert again.recurrence == res.recurrence and again.certificate == res.certificate
        assert HyperexponentialKernel.from_json(k.to_json()) == k

    def test_deterministic(self, warmup):
        _, res = warmup
        assert derive_recurrence(warmup_kernel()).to_json() == res.to_json()


def test_beta_kernel_order_one():
    k = HyperexponentialKernel(RationalFunction(X * (1 - X)), RationalFunction(ONE), 0, 1)
    res = derive_recurrence(k)
    assert res.order == 1
    p0, p1 = res.recurrence.coeffs
    # brute-force expansion of int_0^1 (x(1-x))^m dx
    values = [((X * (1 - X)) ** m).integral()(1) for m in range(7)]
    for m in range(6):
        assert p0(m) * values[m] + p1(m) * values[m + 1] == 0
        assert Fraction(-p0(m), p1(m)) == Fraction((m + 1) ** 2, (2 * m + 2) * (2 * m + 3))


def test_salikhov_a1():
    k = salikhov_kernel(1, 1)
    res = derive_recurrence(k)
    assert res.order == 3
    assert characteristic_poly(res.recurrence) == Polynomial([1, -79, -4325, 3], "N")
    assert res.min_valid_n >= 0


def test_never_vanishes():
    k = HyperexponentialKernel(RationalFunction(ONE, 1 + X), RationalFunction(ONE), 0, 1)
    res = derive_recurrence(k)
    assert res.min_valid_n == -1
    with pytest.raises(NeverVanishes):
        boundary_vanishing_check(k, res)


def test_pole_on_path():
    k = HyperexponentialKernel(RationalFunction(X * (1 - X), 2 * X - 1), RationalFunction(ONE), 0, 1)
    with pytest.raises(PoleOnPath, match="1/2"):
        derive_recurrence(k)


def test_warmup_speed():
    t = time.perf_counter()
    derive_recurrence(warmup_kernel())
    assert time.perf_counter() - t < 10


@st.composite
def kernels(draw):
    i, j = draw(st.integers(1, 2)), draw(st.integers(1, 2))
    p, q, c = draw(st.integers(1, 5)), draw(st.integers(0, 5)), draw(st.integers(0, 1))
    k = draw(st.integers(0, 1))
    r, s = draw(st.integers(1, 5)), draw(st.integers(0, 4))
    m = draw(st.integers(0, 1))
    base = Polynomial([p, q, c], "x") ** k
    R = RationalFunction(X**i * (1 - X) ** j, base)
    S = RationalFunction(ONE, Polynomial([r, s], "x") ** m)
    return HyperexponentialKernel(R, S, 0, 1)


@settings(max_examples=25, deadline=None)
@given(kernels())
def test_random_kernels_certificates(kernel):
    res = derive_recurrence(kernel, max_order=4)
    assert verify_certificate(kernel, res)
    assert res.min_valid_n >= 0
    assert max(transfer_residuals(kernel, res, span=3)) <= 1e-40
