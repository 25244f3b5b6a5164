"""End-to-end reconnaissance: kernel -> recurrence -> exact sequence -> deltas -> bound."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

from .diophantine import (
    DeltaReport,
    InsufficientPrecision,
    MeasureBound,
    NonpositiveDelta,
    ScalingRule,
    empirical_delta,
    measure_bound,
    required_digits,
    salikhov_bound,
    salikhov_cubic,
    salikhov_root_check,
    scaling_search,
)
from .hiprec import BigFloat, bits_for_digits
from .integrate import Atom, AtomRegistry, ExactValue, UnsupportedDenominator, initial_values
from .recurrence import (
    ComplexRootsPresent,
    GrowthAnalysis,
    LinearRecurrence,
    ModulusTie,
    characteristic_poly,
    evaluate_exact,
    growth_rates,
)
from .telescope import (
    HyperexponentialKernel,
    NeverVanishes,
    TelescoperResult,
    alladi_kernel,
    derive_recurrence,
    gat_kernel,
    salikhov_kernel,
    warmup_kernel,
)

FAMILIES = {
    "warmup": warmup_kernel,
    "alladi": alladi_kernel,
    "gat": gat_kernel,
    "salikhov": salikhov_kernel,
}

PROMISING = "promising"
NOT_PROMISING = "not-promising"
NOT_APPLICABLE = "not-applicable"


def kernel_from_spec(spec: dict) -> HyperexponentialKernel:
    """Either an explicit kernel ({"R", "S", "interval"}) or {"family": name, "params": [...]}."""
    if "family" in spec:
        name = spec["family"]
        if name not in FAMILIES:
            raise ValueError(f"unknown kernel family {name!r}; known: {sorted(FAMILIES)}")
        return FAMILIES[name](*[int(p) for p in spec.get("params", [])])
    return HyperexponentialKernel.from_json(spec)


def transfer_start(res: TelescoperResult) -> int:
    if res.min_valid_n < 0:
        raise NeverVanishes("boundary terms never vanish; the recurrence does not transfer to the integral")
    return res.min_valid_n


def exact_sequence(
    kernel: HyperexponentialKernel, res: TelescoperResult, n_max: int, registry: AtomRegistry
) -> list[ExactValue]:
    """I(0..n_max): direct integration below the transfer start, the recurrence above."""
    n0 = transfer_start(res)
    L = res.order
    direct = initial_values(kernel, min(n0 + L, n_max + 1), registry)
    if n_max < n0 + L:
        return direct
    return direct[:n0] + evaluate_exact(res.recurrence, direct[n0:], n_max, start=n0)


def orientation_note(rec: LinearRecurrence, values: Sequence[ExactValue], start: int) -> str | None:
    """Describe whether the coefficient list read backwards also fits the exact values."""
    rev = rec.reversed()
    if rev == rec or len(values) < start + rec.order + 1:
        return None
    window = values[start : start + rec.order + 1]
    if rev.residual(window, start) == 0:
        return None
    return (
        f"orientation: the recurrence with its coefficient list reversed fails on the exact values "
        f"I({start}..{start + rec.order}); the stated order p_0..p_L is the one certified"
    )


def joint_denominators(*seqs: Sequence[Fraction]) -> list[Fraction]:
    """1/lcm of the denominators at each index; a rule clearing these clears every sequence."""
    return [Fraction(1, math.lcm(*(v.denominator for v in vals))) for vals in zip(*seqs)]


@dataclass
class ReconReport:
    kernel: HyperexponentialKernel
    telescoper: TelescoperResult
    n_max: int
    digits: int
    initial: list[ExactValue]
    constant: Atom | None = None
    rule: ScalingRule | None = None
    growth: GrowthAnalysis | None = None
    deltas: list[DeltaReport] = field(default_factory=list)
    bound: MeasureBound | None = None
    verdict: str = NOT_APPLICABLE
    window: int = 11
    margin: float = 0.05
    notes: list[str] = field(default_factory=list)
    numeric_decay: list[tuple[int, str]] = field(default_factory=list)

    def window_deltas(self) -> list[DeltaReport]:
        return self.deltas[-self.window :]

    def min_window_delta(self) -> DeltaReport | None:
        w = self.window_deltas()
        return min(w, key=lambda r: r.delta.to_fraction()) if w else None

    def to_json(self) -> dict[str, Any]:
        lowest = self.min_window_delta()
        return {
            "kernel": self.kernel.to_json(),
            "kernel_key": self.kernel.key(),
            "telescoper": self.telescoper.to_json(),
            "certificate_digest": self.telescoper.certificate.digest(),
            "char_poly": characteristic_poly(self.telescoper.recurrence).to_json(),
            "n_max": self.n_max,
            "digits": self.digits,
            "initial_values": [v.to_json() for v in self.initial],
            "initial_values_text": [str(v) for v in self.initial],
            "constant": None if self.constant is None else str(self.constant),
            "scaling_rule": None if self.rule is None else {**self.rule.to_json(), "text": self.rule.describe()},
            "growth": None if self.growth is None else self.growth.to_json(),
            "deltas": [d.to_json() for d in self.deltas],
            "window": self.window,
            "margin": self.margin,
            "min_window_delta": None if lowest is None else lowest.to_json(),
            "bound": None if self.bound is None else self.bound.to_json(),
            "verdict": self.verdict,
            "notes": list(self.notes),
            "numeric_decay": [[n, v] for n, v in self.numeric_decay],
        }


def _delta_run(
    atom: Atom,
    A: Sequence[Fraction],
    B: Sequence[Fraction],
    rule: ScalingRule,
    ns: Sequence[int],
    digits: int,
    agree: int = 10,
) -> list[DeltaReport]:
    """Deltas of x = atom against -A'/B' at ``digits`` with a doubled-precision agreement check."""
    prec = bits_for_digits(digits)
    x1, x2 = atom.value(prec), atom.value(2 * prec)
    out = []
    for n in ns:
        Ap, Bp = int(rule.apply(n, A[n])), int(rule.apply(n, B[n]))
        if Bp == 0 or abs(Bp) == math.gcd(Ap, Bp):
            continue
        r1 = empirical_delta(x1, -Ap, Bp, n)
        r2 = empirical_delta(x2, -Ap, Bp, n)
        if abs(r1.delta.to_fraction() - r2.delta.to_fraction()) > abs(r2.delta.to_fraction()) / 10**agree:
            raise InsufficientPrecision(f"delta at n={n} changes under precision doubling")
        out.append(r1)
    return out


def recon(
    kernel: HyperexponentialKernel,
    n_max: int = 1000,
    digits: int = 1200,
    max_order: int = 6,
    window: int = 11,
    margin: float = 0.05,
    delta_from: int = 2,
    strict_digits: bool = False,
    numeric_terms: int = 30,
) -> ReconReport:
    """Run the reconnaissance pipeline on one kernel.

    With ``strict_digits`` the requested precision is used as is; otherwise it is
    raised to what the growth rates say is needed at ``n_max`` (and noted).
    """
    kernel.validate()
    res = derive_recurrence(kernel, max_order=max_order)
    n0 = transfer_start(res)
    registry = AtomRegistry()
    try:
        init = initial_values(kernel, n0 + res.order + 1, registry)
    except UnsupportedDenominator as exc:
        return _numeric_recon(kernel, res, n_max, window, margin, numeric_terms, str(exc))
    report = ReconReport(kernel, res, n_max, digits, init[: n0 + res.order], window=window, margin=margin)
    note = orientation_note(res.recurrence, init, n0)
    if note:
        report.notes.append(note)
    L = res.order
    if n_max < n0 + L:
        seq = init[: n_max + 1]
    else:
        seq = init[:n0] + evaluate_exact(res.recurrence, init[n0 : n0 + L], n_max, start=n0)
        if seq[n0 + L] != init[n0 + L]:
            raise ArithmeticError(f"recurrence disagrees with direct integration at n = {n0 + L}")
    atoms = sorted({a for v in seq for a in v.coords}, key=str)
    if not atoms:
        report.notes.append("I(n) is rational for every computed n; there is no target constant")
        return report
    if len(atoms) > 1:
        report.notes.append("I(n) spans several constants: " + ", ".join(map(str, atoms)))
        return report
    atom = atoms[0]
    report.constant = atom
    A = [v.rational for v in seq]
    B = [v.coord(atom) for v in seq]
    report.rule = scaling_search(joint_denominators(A, B), start=0)
    try:
        report.growth = growth_rates(res.recurrence, 40)
    except (ComplexRootsPresent, ModulusTie) as exc:
        report.notes.append(f"growth analysis unavailable: {exc}")
    need = required_digits(report.growth, n_max) if report.growth is not None else digits
    if not strict_digits and need > digits:
        report.notes.append(f"precision raised from {digits} to {need} digits to resolve n = {n_max}")
        digits = need
    report.digits = digits
    ns = [n for n in range(max(delta_from, n0), n_max + 1)]
    attempts = 1 if strict_digits else 3
    for k in range(attempts):
        try:
            report.deltas = _delta_run(atom, A, B, report.rule, ns, report.digits)
            break
        except InsufficientPrecision:
            if k == attempts - 1:
                raise
            report.digits *= 2
            report.notes.append(f"precision doubled to {report.digits} digits after a precision check failed")
    w = report.window_deltas()
    if w:
        report.verdict = PROMISING if all(r.delta.to_fraction() > Fraction(margin) for r in w) else NOT_PROMISING
    if report.growth is not None:
        try:
            report.bound = measure_bound(report.growth, report.rule, evidence_to=n_max, min_valid_n=n0)
        except NonpositiveDelta as exc:
            report.notes.append(f"no rigorous bound: {exc}")
    return report


def _numeric_recon(
    kernel: HyperexponentialKernel,
    res: TelescoperResult,
    n_max: int,
    window: int,
    margin: float,
    terms: int,
    reason: str,
) -> ReconReport:
    """Quadrature-only reconnaissance: I(n) numerically, its decay rate, the recurrence residual."""
    import mpmath

    ctx = mpmath.mp.clone()
    ctx.dps = 50
    count = min(terms, n_max + 1)

    def f(n):
        R, S = kernel.R, kernel.S
        return lambda t: (ctx.mpf(R.num(t)) / R.den(t)) ** n * ctx.mpf(S.num(t)) / S.den(t)

    lo, hi = ctx.mpf(kernel.lo.numerator) / kernel.lo.denominator, ctx.mpf(kernel.hi.numerator) / kernel.hi.denominator
    vals = [ctx.quad(f(n), [lo, hi]) for n in range(count)]
    report = ReconReport(kernel, res, n_max, 50, [], window=window, margin=margin)
    report.notes.append(f"exact decomposition unsupported ({reason}); numeric reconnaissance only")
    n0 = transfer_start(res)
    worst = ctx.mpf(0)
    for n in range(n0, count - res.order):
        terms_n = [ctx.mpf(p(n).numerator) / p(n).denominator * vals[n + i] for i, p in enumerate(res.recurrence.coeffs)]
        scale = max(abs(t) for t in terms_n)
        if scale:
            worst = max(worst, abs(ctx.fsum(terms_n)) / scale)
    report.notes.append(f"recurrence residual on quadrature values: {ctx.nstr(worst, 5)}")
    for n in range(1, count):
        if vals[n]:
            report.numeric_decay.append((n, ctx.nstr(ctx.log(abs(vals[n])) / n, 12)))
    try:
        report.growth = growth_rates(res.recurrence, 40)
        report.notes.append(
            f"decay per n {report.numeric_decay[-1][1]} vs subdominant root log "
            f"{report.growth.subdominant_log.to_decimal(12)}"
        )
    except (ComplexRootsPresent, ModulusTie) as exc:
        report.notes.append(f"growth analysis unavailable: {exc}")
    return report


# Salikhov ------------------------------------------------------------------


@dataclass
class SalikhovRun:
    a: int
    n_max: int
    char_matches: bool
    root_check: bool
    rule: ScalingRule
    nu_pipeline: BigFloat
    nu_closed: BigFloat
    branch: str
    min_valid_n: int

    def agree(self, tol: Fraction = Fraction(1, 10**15)) -> bool:
        return abs(self.nu_pipeline.to_fraction() - self.nu_closed.to_fraction()) <= tol

    def to_json(self, digits: int = 20) -> dict:
        return {
            "a": self.a,
            "n_max": self.n_max,
            "char_poly_matches_cubic": self.char_matches,
            "root_check": self.root_check,
            "scaling_rule": {**self.rule.to_json(), "text": self.rule.describe()},
            "nu_pipeline": self.nu_pipeline.to_decimal(digits),
            "nu_closed_form": self.nu_closed.to_decimal(digits),
            "branch": self.branch,
            "agree": self.agree(),
            "min_valid_n": self.min_valid_n,
        }


def salikhov_sequences(a: int, n_max: int) -> tuple[TelescoperResult, list[Fraction], list[Fraction], list[Fraction]]:
    """(result, A1, A2, B) with E1(n) = A1(n) + B(n) log(c1) and E2(n) = A2(n) + B(n) log(c2)."""
    k1, k2 = salikhov_kernel(a, 1), salikhov_kernel(a, 2)
    res = derive_recurrence(k1)
    reg = AtomRegistry()
    s1 = exact_sequence(k1, res, n_max, reg)
    s2 = exact_sequence(k2, res, n_max, reg)
    B1 = [sum(v.coords.values(), Fraction(0)) for v in s1]
    B2 = [sum(v.coords.values(), Fraction(0)) for v in s2]
    if any(len(v.coords) > 1 for v in s1 + s2) or B1 != B2:
        raise ArithmeticError(f"E1 and E2 at a = {a} do not share a single log coefficient sequence")
    return res, [v.rational for v in s1], [v.rational for v in s2], B1


def salikhov_pipeline(a: int, n_max: int = 200, digits: int = 30) -> SalikhovRun:
    """Telescoped recurrence, joint scaling rule and growth rates, compared with the closed form."""
    res, A1, A2, B = salikhov_sequences(a, n_max)
    rule = scaling_search(joint_denominators(A1, A2, B), start=0)
    growth = growth_rates(res.recurrence, digits)
    # the weaker of the two non-dominant roots governs both linear forms
    dom = max(range(len(growth.roots)), key=lambda i: abs(growth.roots[i].value.to_fraction()))
    rest = [i for i in range(len(growth.roots)) if i != dom]
    sub = max(rest, key=lambda i: abs(growth.roots[i].value.to_fraction()))
    bound = measure_bound(growth, rule, subdominant_override=sub, evidence_to=n_max, min_valid_n=res.min_valid_n)
    closed = salikhov_bound(a, digits)
    return SalikhovRun(
        a=a,
        n_max=n_max,
        char_matches=characteristic_poly(res.recurrence) == salikhov_cubic(a).primitive(),
        root_check=salikhov_root_check(a),
        rule=rule,
        nu_pipeline=1 / bound.delta,
        nu_closed=closed.nu,
        branch="|C3|" if closed.uses_c3 else "C2",
        min_valid_n=res.min_valid_n,
    )


def salikhov_scaling_holds(a: int, n_max: int, rule: ScalingRule) -> dict[str, bool]:
    """Whether ``rule`` makes each of A1, A2, B integral on 0..n_max."""
    _, A1, A2, B = salikhov_sequences(a, n_max)
    return {name: rule.integral_on(seq) for name, seq in (("A1", A1), ("A2", A2), ("B", B))}
