import json
import logging
from pathlib import Path

import pytest

from irrmeasure.cli import PipelineConfig, exit_code_for, main, render_report, scan_candidates
from irrmeasure.diophantine import NonpositiveDelta
from irrmeasure.telescope import NoRecurrenceFound, PoleOnPath

SMALL_SCAN = json.dumps(
    {"n_max": 60, "scan": {"family": "alladi", "ranges": {"a": [1, 2], "b": [1, 4], "c": [1, 3]}, "gcd": True}}
)


def run(capsys, *argv: str) -> tuple[int, str, str]:
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def files(d: Path) -> dict[str, bytes]:
    return {p.name: p.read_bytes() for p in sorted(d.glob("*.json"))}


class TestConfig:
    def test_defaults(self):
        assert PipelineConfig().digits == 1200
        assert PipelineConfig(n_max=1500).digits == 1800
        assert PipelineConfig(n_max=100).digits == 120

    def test_digits_floor(self):
        with pytest.raises(ValueError):
            PipelineConfig(n_max=1000, digits=1100)

    def test_key_depends_on_command_and_content(self):
        c = PipelineConfig(n_max=50)
        assert c.key("recon") != c.key("scan")
        assert c.key("recon") == PipelineConfig(n_max=50).key("recon")
        assert c.key("recon") != PipelineConfig(n_max=51).key("recon")


class TestExitCodes:
    def test_mapping(self):
        assert exit_code_for(NonpositiveDelta("x")) == 1
        assert exit_code_for(PoleOnPath("x")) == 2
        assert exit_code_for(NoRecurrenceFound("x")) == 3

    def test_digits_floor_exit(self, capsys, tmp_path):
        code, _, err = run(capsys, "recon", "--nmax", "100", "--digits", "50", "--cache", str(tmp_path))
        assert code == 2 and "below" in err

    def test_pole_on_path_exit(self, capsys, tmp_path):
        kernel = {"R": {"num": ["0", "1", "-1"], "den": ["-1", "2"]}, "S": {"num": ["1"], "den": ["1"]}, "interval": ["0", "1"]}
        code, _, err = run(capsys, "telescope", "--config", json.dumps({"kernel": kernel}), "--cache", str(tmp_path))
        assert code == 2 and "1/2" in err

    def test_not_promising_exit(self, capsys, tmp_path):
        cfg = json.dumps({"kernel": {"family": "alladi", "params": [1, 1, 2]}, "n_max": 60})
        code, out, _ = run(capsys, "recon", "--config", cfg, "--cache", str(tmp_path))
        assert code == 1 and "verdict: not-promising" in out


class TestCommands:
    def test_telescope_and_cache_hit(self, capsys, tmp_path, caplog):
        cache = tmp_path / "cache"
        code, out, _ = run(capsys, "telescope", "--cache", str(cache), "--out", str(tmp_path / "o1"))
        assert code == 0 and out.startswith("order 2:")
        first = files(cache)
        with caplog.at_level(logging.INFO, logger="irrmeasure"):
            code, out2, _ = run(capsys, "telescope", "--cache", str(cache), "--out", str(tmp_path / "o2"))
        assert out2 == out and files(cache) == first
        assert any("cache hit" in r.getMessage() for r in caplog.records)
        assert files(tmp_path / "o1") == files(tmp_path / "o2")

    def test_recon_warmup(self, capsys, tmp_path):
        code, out, _ = run(capsys, "recon", "--nmax", "60", "--cache", str(tmp_path))
        assert code == 0
        assert "0.3326984613112694443" in out and "0.3199279258156926867" in out
        assert "verdict: promising" in out and "4.622100832454231334" in out

    def test_recon_rerun_is_byte_identical_without_cache(self, tmp_path, capsys):
        for d in ("a", "b"):
            assert main(["recon", "--nmax", "40", "--out", str(tmp_path / d)]) == 0
        capsys.readouterr()
        assert files(tmp_path / "a") == files(tmp_path / "b")

    def test_measure(self, capsys, tmp_path):
        code, out, _ = run(capsys, "measure", "--config", '{"a": 1, "b": 1}', "--cache", str(tmp_path))
        assert code == 0 and out.startswith("mu = 4.6221008324542313342")
        code, _, _ = run(capsys, "measure", "--config", '{"theorem": "arctan", "a": 5}', "--cache", str(tmp_path))
        assert code == 2

    def test_salikhov(self, capsys, tmp_path):
        cfg = '{"a_to": 3, "pipeline_to": 1, "n_max": 40}'
        code, out, _ = run(capsys, "salikhov", "--config", cfg, "--cache", str(tmp_path))
        assert code == 0
        rows = out.splitlines()[1:]
        assert len(rows) == 3 and all(" ok " in r for r in rows)
        assert "20.0187204792888656" in rows[0] and "|C3|" in rows[0]

    def test_scan_empty(self, capsys, tmp_path):
        cfg = json.dumps({"n_max": 60, "scan": {"ranges": {"a": [1, 0], "b": [1, 1], "c": [1, 1]}}})
        code, out, _ = run(capsys, "scan", "--config", cfg, "--cache", str(tmp_path))
        assert code == 0 and out.startswith("0 candidates, 0 successes")

    def test_scan_parallel_matches_serial(self, capsys, tmp_path):
        outs = []
        for jobs in ("1", "2"):
            d = tmp_path / jobs
            code, out, _ = run(capsys, "scan", "--config", SMALL_SCAN, "--jobs", jobs, "--out", str(d))
            assert code == 0
            outs.append((out, files(d)))
        assert outs[0] == outs[1]
        result = json.loads(next(iter(outs[0][1].values())))["result"]
        ids = [tuple(r["id"]) for r in result["successes"] + result["failures"]]
        assert sorted(ids) == scan_candidates(json.loads(SMALL_SCAN)["scan"])
        assert [1, 4, 3] in [r["id"] for r in result["successes"]]


class TestReport:
    def test_empty(self, capsys, tmp_path):
        code, out, _ = run(capsys, "report", "--cache", str(tmp_path / "none"))
        assert code == 0 and out == "nothing to report\n"

    def test_deterministic_article(self, capsys, tmp_path):
        cache = tmp_path / "cache"
        assert main(["recon", "--nmax", "60", "--cache", str(cache)]) == 0
        assert main(["telescope", "--cache", str(cache)]) == 0
        assert main(["measure", "--config", '{"a": 1, "b": 1}', "--cache", str(cache)]) == 0
        capsys.readouterr()
        first = render_report(cache)
        code, out, _ = run(capsys, "report", "--cache", str(cache), "--out", str(tmp_path / "o"))
        assert code == 0 and out == first == render_report(cache)
        assert (tmp_path / "o" / "report.md").read_text() == first
        for needle in ("certificate hash", "I(1) = ", "| 50 | 0.33269846131126944438", "lcm(1..n)", "caveat", "orientation"):
            assert needle in first
