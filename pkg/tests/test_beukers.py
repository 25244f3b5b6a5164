from fractions import Fraction

import mpmath
import pytest

from irrmeasure.beukers import (
    PRINTED_COEFFICIENTS,
    Decomposition,
    E_series,
    ReconstructionFailed,
    beukers_family,
    integer_relation,
    lll_reduce,
    printed_coefficients,
    reconstruct_ABC,
    recurrence_residual,
    select_dilog_convention,
    triple_delta,
)
from irrmeasure.exactmath import Polynomial
from irrmeasure.recurrence import LinearRecurrence

N = Polynomial([0, 1], "n")
mp = mpmath.mp.clone()
mp.dps = 60


def mpf(q: Fraction):
    return mp.mpf(q.numerator) / q.denominator


def series(n: int, a: int, digits: int = 60):
    return mpf(E_series(n, a, digits).to_fraction())


@pytest.fixture(scope="module")
def run2():
    return triple_delta(2, [0, 1, 10, 30], digits=60)


class TestSeries:
    @pytest.mark.parametrize("n,a", [(n, a) for n in (0, 1, 2) for a in (2, 3)])
    def test_against_double_quadrature(self, n, a):
        q = mpmath.mp.clone()
        q.dps = 25

        def f(x, y):
            w = 1 - x * y / a
            return (x * (1 - x) * y * (1 - y) / w) ** n / w

        ref = q.quad(f, [0, 1], [0, 1])
        assert abs(series(n, a) - ref) <= 1e-15 * abs(ref)

    def test_e32(self):
        q = mpmath.mp.clone()
        q.dps = 25
        ref = q.quad(lambda x, y: (x * (1 - x) * y * (1 - y) / (1 - x * y / 2)) ** 3 / (1 - x * y / 2), [0, 1], [0, 1])
        assert abs(series(3, 2) - ref) <= 1e-15 * abs(ref)

    def test_e0_is_scaled_dilog(self):
        for a in (2, 3, 7):
            assert abs(series(0, a) - a * mp.polylog(2, mp.mpf(1) / a)) < mp.mpf(10) ** -55

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            E_series(0, 1, 20)
        with pytest.raises(ValueError):
            E_series(-1, 2, 20)


class TestRecurrence:
    def test_transcription_a2(self):
        p = printed_coefficients(2)
        assert p[0] == -8 * (N + 1) ** 2 * (37 * N + 86)
        assert p[3](0) == 441
        assert len(PRINTED_COEFFICIENTS) == 4

    @pytest.mark.parametrize("a", [2, 3, 5])
    def test_printed_orientation_fits(self, a):
        fam = beukers_family(a)
        assert fam.orientation == "printed"
        assert all(recurrence_residual(fam.recurrence, a, n, 80) < Fraction(1, 10**60) for n in range(8))

    def test_reversed_orientation_does_not_fit(self):
        rec = LinearRecurrence(printed_coefficients(2)[::-1], normalize=False)
        assert recurrence_residual(rec, 2, 3, 60) > Fraction(1, 10**3)

    def test_json(self):
        data = beukers_family(2).to_json()
        assert data["orientation"] == "printed" and len(data["coeffs"]) == 4


class TestConvention:
    def test_selected(self):
        assert select_dilog_convention() == "Li2(1-z)"

    def test_ambiguous_at_two(self):
        with pytest.raises(ArithmeticError):
            select_dilog_convention((2,))


class TestReconstruction:
    def test_known_a2(self):
        assert reconstruct_ABC(2, 0) == Decomposition(0, Fraction(0), Fraction(2), Fraction(0))
        assert reconstruct_ABC(2, 3) == Decomposition(3, Fraction(90692, 9), Fraction(-9488), Fraction(6568))

    @pytest.mark.parametrize("a", [2, 3])
    @pytest.mark.parametrize("n", [0, 1, 2, 3])
    def test_against_mpmath_constants(self, n, a):
        d = reconstruct_ABC(a, n)
        z = mp.mpf(a - 1) / a
        value = mpf(d.A) + mpf(d.B) * mp.polylog(2, 1 - z) + mpf(d.C) * mp.log(z)
        assert abs(value - series(n, a)) < mp.mpf(10) ** -50

    def test_propagation_agrees_with_direct_search(self):
        from irrmeasure.beukers import propagate, reconstruct_base

        seq = propagate(beukers_family(3), reconstruct_base(3), 6)
        assert seq[5] == reconstruct_ABC(3, 5, digits=80)

    def test_tiny_height_fails(self):
        with pytest.raises(ReconstructionFailed):
            reconstruct_ABC(2, 2, max_height=10)

    def test_lll_finds_planted_relation(self):
        prec = 200
        x = mp.sqrt(2)
        vals = [Fraction(int(v * 2**prec), 2**prec) for v in (x, 1 + 3 * x, mp.mpf(1))]
        rel = integer_relation(vals, prec - 8, 100)
        assert rel is not None
        assert sorted(map(abs, rel)) == [1, 1, 3]

    def test_lll_keeps_lattice(self):
        basis = [[1, 0, 0, 105], [0, 1, 0, 221], [0, 0, 1, 385]]
        red = lll_reduce(basis)
        det = lambda m: sum(
            (1 if p in ((0, 1, 2), (1, 2, 0), (2, 0, 1)) else -1) * m[0][p[0]] * m[1][p[1]] * m[2][p[2]]
            for p in ((0, 1, 2), (1, 2, 0), (2, 0, 1), (0, 2, 1), (1, 0, 2), (2, 1, 0))
        )
        assert abs(det([r[:3] for r in red])) == 1


class TestTripleDelta:
    def test_rule(self, run2):
        assert run2.rule.describe() == "lcm(1..n)^2"

    def test_near_trivial_flag(self, run2):
        r0 = run2.reports[0]
        assert r0.coeffs == (0, 2, 0) and r0.note == "near-trivial combination"

    def test_deltas_positive(self, run2):
        assert all(r.delta > 0 for r in run2.reports[1:])

    def test_coefficient_growth_below_dominant(self, run2):
        top = float(run2.dominant_log)
        g = [v for _, v in run2.coefficient_growth]
        assert all(x < y for x, y in zip(g, g[1:]))
        assert g[-1] < top < g[-1] + 0.25

    def test_json(self, run2):
        data = run2.to_json()
        assert data["a"] == 2 and len(data["reports"]) == 4
