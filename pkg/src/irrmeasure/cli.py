"""Command-line front end: telescope, recon, scan, measure, salikhov, beukers, report.

Exit codes: 0 ok, 1 no positive delta, 2 invalid input, 3 internal check failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import product
from pathlib import Path
from typing import Any, Callable

from .beukers import (
    ReconstructionFailed,
    beukers_family,
    reconstruct_base,
    recurrence_residual,
    select_dilog_convention,
    triple_delta,
)
from .diophantine import (
    ConditionViolated,
    CongruenceViolated,
    InsufficientPrecision,
    NoRuleFound,
    NonpositiveDelta,
    alladi_robinson_measure,
    arctan_measure,
    salikhov_bound,
    salikhov_root_check,
)
from .pipeline import NOT_PROMISING, PROMISING, kernel_from_spec, recon, salikhov_pipeline
from .telescope import NeverVanishes, NoRecurrenceFound, PoleOnPath, derive_recurrence

log = logging.getLogger("irrmeasure")

EXIT_OK, EXIT_NO_DELTA, EXIT_INVALID, EXIT_CHECK = 0, 1, 2, 3


class CheckFailed(RuntimeError):
    """An internal consistency check did not hold."""


class NoPositiveDelta(RuntimeError):
    pass


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, (NonpositiveDelta, NoPositiveDelta)):
        return EXIT_NO_DELTA
    if isinstance(exc, (InsufficientPrecision, NoRecurrenceFound, NoRuleFound, CheckFailed, ReconstructionFailed)):
        return EXIT_CHECK
    if isinstance(
        exc,
        (PoleOnPath, NeverVanishes, ConditionViolated, CongruenceViolated, ValueError, KeyError, TypeError, OSError),
    ):
        return EXIT_INVALID
    return EXIT_CHECK


# configuration -------------------------------------------------------------


@dataclass
class PipelineConfig:
    kernel: dict[str, Any] = field(default_factory=lambda: {"family": "warmup"})
    n_max: int = 1000
    digits: int | None = None
    max_order: int = 6
    window: int = 11
    margin: float = 0.05
    scan: dict[str, Any] = field(default_factory=dict)
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError("n_max must be positive")
        floor = math.ceil(1.2 * self.n_max)
        if self.digits is None:
            self.digits = max(1200, floor) if self.n_max >= 1000 else max(60, floor)
        elif self.digits < floor:
            raise ValueError(f"digits = {self.digits} is below 1.2 * n_max = {floor}")

    def canonical(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))

    def key(self, command: str) -> str:
        return hashlib.sha256(f"{command}:{self.canonical()}".encode()).hexdigest()[:16]


def load_config(args: argparse.Namespace, defaults: dict[str, Any]) -> PipelineConfig:
    data = dict(defaults)
    if args.config:
        text = args.config if args.config.lstrip().startswith("{") else Path(args.config).read_text()
        data.update(json.loads(text))
    if args.nmax is not None:
        data["n_max"] = args.nmax
    if args.digits is not None:
        data["digits"] = args.digits
    known = set(PipelineConfig.__dataclass_fields__)
    extra = {k: v for k, v in data.items() if k not in known}
    base = {k: v for k, v in data.items() if k in known}
    base["params"] = {**base.get("params", {}), **extra}
    return PipelineConfig(**base)


def dump(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


class Cache:
    """Content-addressed JSON store; entries are never invalidated implicitly."""

    def __init__(self, root: Path | None):
        self.root = root
        if root is not None:
            root.mkdir(parents=True, exist_ok=True)

    def path(self, command: str, key: str) -> Path | None:
        return None if self.root is None else self.root / f"{command}-{key}.json"

    def get(self, command: str, key: str) -> str | None:
        p = self.path(command, key)
        if p is not None and p.exists():
            log.info("cache hit %s", p)
            return p.read_text()
        return None

    def put(self, command: str, key: str, text: str) -> None:
        p = self.path(command, key)
        if p is not None:
            p.write_text(text)


def run_cached(
    command: str, key: str, config: PipelineConfig, cache: Cache, compute: Callable[[], dict]
) -> dict:
    text = cache.get(command, key)
    if text is None:
        text = dump({"command": command, "key": key, "config": asdict(config), "result": compute()})
        cache.put(command, key, text)
    return json.loads(text)


def emit(args: argparse.Namespace, command: str, key: str, entry: dict, summary: str) -> None:
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{command}-{key}.json").write_text(dump(entry))
    print(summary)


# commands ------------------------------------------------------------------


def cmd_telescope(args) -> int:
    cfg = load_config(args, {})
    kernel = kernel_from_spec(cfg.kernel)
    kernel.validate()
    key = kernel.key()

    def compute():
        res = derive_recurrence(kernel, max_order=cfg.max_order)
        return {
            "kernel": kernel.to_json(),
            "telescoper": res.to_json(),
            "recurrence": str(res.recurrence),
            "certificate_digest": res.certificate.digest(),
        }

    entry = run_cached("telescope", key, cfg, Cache(_cache_dir(args)), compute)
    r = entry["result"]
    summary = (
        f"order {r['telescoper']['order']}: {r['recurrence']}\n"
        f"certificate {r['certificate_digest']}, boundary terms vanish for n >= {r['telescoper']['min_valid_n']}"
    )
    emit(args, "telescope", key, entry, summary)
    return EXIT_OK


def _recon_payload(cfg: PipelineConfig) -> dict:
    rep = recon(
        kernel_from_spec(cfg.kernel),
        n_max=cfg.n_max,
        digits=cfg.digits,
        max_order=cfg.max_order,
        window=cfg.window,
        margin=cfg.margin,
    )
    return rep.to_json()


def _recon_summary(r: dict) -> str:
    lines = [f"recurrence order {r['telescoper']['order']}, certificate {r['certificate_digest']}"]
    lines.append("I(0..): " + "; ".join(r["initial_values_text"]))
    if r["constant"]:
        lines.append(f"constant {r['constant']}, scaling {r['scaling_rule']['text']}, {r['digits']} digits")
    rows = [d for d in r["deltas"] if d["n"] in (50, 51, 53)] + r["deltas"][-r["window"] :]
    if rows:
        lines.append(f"{'n':>6}  {'delta':<28} measure estimate")
        seen = set()
        for d in rows:
            if d["n"] not in seen:
                seen.add(d["n"])
                lines.append(f"{d['n']:>6}  {d['delta'][:26]:<28} {d['measure_estimate'][:24]}")
    if r["min_window_delta"]:
        m = r["min_window_delta"]
        lines.append(f"min window delta {m['delta'][:24]} at n = {m['n']}")
    if r["bound"]:
        lines.append(f"rigorous bound mu = {r['bound']['mu'][:24]} (delta {r['bound']['delta'][:24]})")
    lines.extend(f"note: {n}" for n in r["notes"])
    lines.append(f"verdict: {r['verdict']}")
    return "\n".join(lines)


def cmd_recon(args) -> int:
    cfg = load_config(args, {})
    key = cfg.key("recon")
    entry = run_cached("recon", key, cfg, Cache(_cache_dir(args)), lambda: _recon_payload(cfg))
    emit(args, "recon", key, entry, _recon_summary(entry["result"]))
    return EXIT_NO_DELTA if entry["result"]["verdict"] == NOT_PROMISING else EXIT_OK


def scan_candidates(scan: dict) -> list[tuple[int, ...]]:
    """Integer parameter tuples from inclusive ranges, optionally with gcd = 1."""
    names = scan.get("names", ["a", "b", "c"])
    ranges = scan.get("ranges", {})
    axes = [range(int(ranges[k][0]), int(ranges[k][1]) + 1) for k in names]
    out = []
    for combo in product(*axes):
        if scan.get("gcd", True) and math.gcd(*combo) != 1:
            continue
        out.append(combo)
    return out


def _scan_one(job: tuple[dict, tuple[int, ...], int, int]) -> dict:
    base, params, n_max, digits = job
    cid = list(params)
    try:
        cfg = PipelineConfig(kernel={**base, "params": cid}, n_max=n_max, digits=digits)
        r = _recon_payload(cfg)
    except Exception as exc:  # a failing candidate never aborts the scan
        return {"id": cid, "status": "error", "kind": type(exc).__name__, "detail": str(exc)}
    if r["verdict"] == PROMISING:
        return {
            "id": cid,
            "status": "success",
            "constant": r["constant"],
            "min_window_delta": r["min_window_delta"],
            "bound": r["bound"],
        }
    if r["verdict"] == NOT_PROMISING:
        return {"id": cid, "status": "no-positive-delta", "min_window_delta": r["min_window_delta"]}
    return {"id": cid, "status": "error", "kind": "NotApplicable", "detail": "; ".join(r["notes"])}


def cmd_scan(args) -> int:
    cfg = load_config(
        args,
        {
            "n_max": 200,
            "scan": {"family": "alladi", "ranges": {"a": [1, 10], "b": [1, 10], "c": [1, 10]}, "gcd": True},
        },
    )
    key = cfg.key("scan")

    def compute():
        family = {"family": cfg.scan.get("family", "alladi")}
        cands = scan_candidates(cfg.scan)
        jobs = [(family, c, cfg.n_max, cfg.digits) for c in cands]
        if args.jobs and args.jobs > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                results = list(pool.map(_scan_one, jobs, chunksize=1))
        else:
            results = [_scan_one(j) for j in jobs]
        return {
            "candidate_count": len(cands),
            "successes": [r for r in results if r["status"] == "success"],
            "failures": [r for r in results if r["status"] != "success"],
        }

    entry = run_cached("scan", key, cfg, Cache(_cache_dir(args)), compute)
    r = entry["result"]
    lines = [f"{r['candidate_count']} candidates, {len(r['successes'])} successes"]
    for s in r["successes"]:
        mu = s["bound"]["mu"][:16] if s["bound"] else "none"
        lines.append(f"  {tuple(s['id'])}: {s['constant']}  min delta {s['min_window_delta']['delta'][:12]}  mu {mu}")
    kinds: dict[str, int] = {}
    for f in r["failures"]:
        k = f.get("kind", f["status"])
        kinds[k] = kinds.get(k, 0) + 1
    for k in sorted(kinds):
        lines.append(f"  not listed: {kinds[k]} x {k}")
    emit(args, "scan", key, entry, "\n".join(lines))
    return EXIT_OK


def cmd_measure(args) -> int:
    cfg = load_config(args, {"n_max": 1, "a": 1, "b": 1})
    p = cfg.params
    key = cfg.key("measure")

    def compute():
        digits = int(p.get("out_digits", 30))
        if p.get("theorem", "log") == "arctan":
            return {"theorem": "arctan", "a": p["a"], "mu": arctan_measure(int(p["a"]), digits).to_decimal(digits)}
        a, b = int(p["a"]), int(p["b"])
        return {"theorem": "log", "a": a, "b": b, "mu": alladi_robinson_measure(a, b, digits).to_decimal(digits)}

    entry = run_cached("measure", key, cfg, Cache(_cache_dir(args)), compute)
    r = entry["result"]
    emit(args, "measure", key, entry, f"mu = {r['mu']}")
    return EXIT_OK


def cmd_salikhov(args) -> int:
    cfg = load_config(args, {"n_max": 200, "a_from": 1, "a_to": 5, "pipeline_to": 2})
    p = cfg.params
    key = cfg.key("salikhov")

    def compute():
        rows = []
        for a in range(int(p["a_from"]), int(p["a_to"]) + 1):
            row = {**salikhov_bound(a).to_json(), "root_check": salikhov_root_check(a)}
            if a <= int(p["pipeline_to"]):
                run = salikhov_pipeline(a, n_max=cfg.n_max)
                if not (run.agree() and run.char_matches):
                    raise CheckFailed(f"pipeline and closed form disagree at a = {a}")
                row["pipeline"] = run.to_json()
            rows.append(row)
        return {"rows": rows}

    entry = run_cached("salikhov", key, cfg, Cache(_cache_dir(args)), compute)
    lines = [f"{'a':>4}  {'nu(a)':<24} branch  roots  pipeline"]
    for row in entry["result"]["rows"]:
        tick = "ok" if row["root_check"] else "FAIL"
        pipe = row["pipeline"]["scaling_rule"]["text"] if "pipeline" in row else "-"
        lines.append(f"{row['a']:>4}  {row['nu']:<24} {row['branch']:<6}  {tick:<5}  {pipe}")
    emit(args, "salikhov", key, entry, "\n".join(lines))
    return EXIT_OK


def cmd_beukers(args) -> int:
    cfg = load_config(args, {"n_max": 10, "digits": 60, "a": 2, "triple": [40, 50]})
    p = cfg.params
    key = cfg.key("beukers")

    def compute():
        a = int(p["a"])
        fam = beukers_family(a, cfg.digits)
        residuals = {
            str(n): f"{float(recurrence_residual(fam.recurrence, a, n, cfg.digits)):.3e}" for n in range(cfg.n_max + 1)
        }
        base = reconstruct_base(a, cfg.digits)
        lo, hi = p["triple"]
        run = triple_delta(a, range(int(lo), int(hi) + 1), cfg.digits)
        return {
            "family": fam.to_json(),
            "dilog_convention": select_dilog_convention(digits=cfg.digits),
            "residuals": residuals,
            "base": [d.to_json() for d in base],
            "triple_delta": run.to_json(),
        }

    entry = run_cached("beukers", key, cfg, Cache(_cache_dir(args)), compute)
    r = entry["result"]
    lines = [
        f"a = {r['family']['a']}: recurrence orientation {r['family']['orientation']}, "
        f"dilog convention {r['dilog_convention']}",
        "max residual " + max(r["residuals"].values(), key=float),
    ]
    lines += [f"n={d['n']}: A={d['A']} B={d['B']} C={d['C']}" for d in r["base"]]
    lines += [f"n={t['n']}: delta {t['delta']} {t['note']}".rstrip() for t in r["triple_delta"]["reports"]]
    emit(args, "beukers", key, entry, "\n".join(lines))
    return EXIT_OK


# report --------------------------------------------------------------------


def render_report(cache_dir: Path) -> str:
    entries = [json.loads(p.read_text()) for p in sorted(cache_dir.glob("*.json"))] if cache_dir.exists() else []
    if not entries:
        return "nothing to report\n"
    out = ["# Irrationality reconnaissance report", ""]
    for e in entries:
        render = _RENDERERS.get(e["command"])
        if render is not None:
            out += render(e) + [""]
    return "\n".join(out).rstrip() + "\n"


def _render_telescope(e: dict) -> list[str]:
    r = e["result"]
    return [
        f"## Recurrence `{e['key']}`",
        "",
        f"Kernel: `{json.dumps(r['kernel'], sort_keys=True)}`",
        "",
        f"Recurrence (order {r['telescoper']['order']}): `{r['recurrence']}`",
        "",
        f"Certificate hash `{r['certificate_digest']}`; boundary terms vanish for n >= {r['telescoper']['min_valid_n']}.",
    ]


def _render_recon(e: dict) -> list[str]:
    r = e["result"]
    t = r["telescoper"]
    lines = [
        f"## Reconnaissance `{e['key']}`",
        "",
        f"Kernel: `{json.dumps(r['kernel'], sort_keys=True)}`",
        "",
        f"Recurrence of order {t['order']} with certificate hash `{r['certificate_digest']}`, "
        f"valid for n >= {t['min_valid_n']}. Characteristic polynomial coefficients: {r['char_poly']}.",
        "",
        "Initial values:",
        "",
    ]
    lines += [f"- I({i}) = {v}" for i, v in enumerate(r["initial_values_text"])]
    if r["scaling_rule"]:
        lines += ["", f"Scaling evidence: {r['scaling_rule']['text']} clears every value for n <= {r['n_max']}."]
    if r["growth"]:
        g = r["growth"]
        lines += ["", f"Growth: dominant log {g['dominant_log'][:22]}, subdominant log {g['subdominant_log'][:22]}."]
    if r["deltas"]:
        lines += ["", "| n | delta | measure estimate |", "|---|---|---|"]
        shown = [d for d in r["deltas"] if d["n"] in (50, 51, 53)] + r["deltas"][-r["window"] :]
        seen = set()
        for d in shown:
            if d["n"] not in seen:
                seen.add(d["n"])
                lines.append(f"| {d['n']} | {d['delta'][:24]} | {d['measure_estimate'][:24]} |")
    if r["bound"]:
        b = r["bound"]
        lines += ["", f"Bound: delta = {b['delta'][:24]}, mu = {b['mu'][:24]}."]
        lines += [f"- caveat: {c}" for c in b["caveats"]]
    if r["notes"]:
        lines += ["", "Notes:", ""] + [f"- {n}" for n in r["notes"]]
    lines += ["", f"Verdict: **{r['verdict']}**."]
    return lines


def _render_scan(e: dict) -> list[str]:
    r = e["result"]
    lines = [f"## Scan `{e['key']}`", "", f"{r['candidate_count']} candidates; successes:", ""]
    for s in r["successes"]:
        mu = s["bound"]["mu"][:18] if s["bound"] else "no rigorous bound"
        lines.append(f"- {tuple(s['id'])}: {s['constant']}, min delta {s['min_window_delta']['delta'][:14]}, mu {mu}")
    lines += ["", f"{len(r['failures'])} candidates not listed."]
    return lines


def _render_measure(e: dict) -> list[str]:
    r = e["result"]
    what = f"a = {r['a']}" + (f", b = {r['b']}" if "b" in r else "")
    return [f"## Closed-form measure `{e['key']}`", "", f"{r['theorem']} family, {what}: mu = {r['mu']}."]


def _render_salikhov(e: dict) -> list[str]:
    lines = [f"## Linear independence measures `{e['key']}`", "", "| a | K | branch | nu | roots | pipeline |", "|---|---|---|---|---|---|"]
    for row in e["result"]["rows"]:
        pipe = f"agrees ({row['pipeline']['scaling_rule']['text']})" if "pipeline" in row else "-"
        lines.append(
            f"| {row['a']} | {row['K']} | {row['branch']} | {row['nu']} | {'ok' if row['root_check'] else 'FAIL'} | {pipe} |"
        )
    return lines


def _render_beukers(e: dict) -> list[str]:
    r = e["result"]
    lines = [
        f"## Double-integral family `{e['key']}`",
        "",
        f"a = {r['family']['a']}; printed recurrence kept in {r['family']['orientation']} orientation; "
        f"dilog read as {r['dilog_convention']}.",
        "",
    ]
    lines += [f"- E({d['n']}) = {d['A']} + ({d['B']}) dilog + ({d['C']}) log" for d in r["base"]]
    lines += ["", "| n | delta | note |", "|---|---|---|"]
    lines += [f"| {t['n']} | {t['delta']} | {t['note']} |" for t in r["triple_delta"]["reports"]]
    return lines


_RENDERERS = {
    "telescope": _render_telescope,
    "recon": _render_recon,
    "scan": _render_scan,
    "measure": _render_measure,
    "salikhov": _render_salikhov,
    "beukers": _render_beukers,
}


def cmd_report(args) -> int:
    text = render_report(_cache_dir(args) or Path(".irrmeasure-cache"))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.md").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


# entry point ---------------------------------------------------------------


def _cache_dir(args) -> Path | None:
    return Path(args.cache) if args.cache else None


COMMANDS = {
    "telescope": cmd_telescope,
    "recon": cmd_recon,
    "scan": cmd_scan,
    "measure": cmd_measure,
    "salikhov": cmd_salikhov,
    "beukers": cmd_beukers,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="irrmeasure", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON file or inline JSON object")
        p.add_argument("--nmax", type=int)
        p.add_argument("--digits", type=int)
        p.add_argument("--out", help="directory for result files")
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--cache", help="cache directory")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except Exception as exc:
        code = exit_code_for(exc)
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
