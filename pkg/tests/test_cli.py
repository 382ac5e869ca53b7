"""CLI exit codes, report files, config precedence, remote mode."""

import json
from fractions import Fraction

import pytest
from fastapi.testclient import TestClient

from hmodlab import cli
from hmodlab.service.app import app


def run(argv):
    return cli.main(argv)


def test_console_entry_point():
    import subprocess
    import sys

    out = subprocess.run(
        [sys.executable, "-m", "hmodlab", "--version"], capture_output=True, text=True
    )
    assert out.returncode == 0
    assert out.stdout.strip().startswith("hmodlab ")


class TestSuiteCommand:
    def test_prehilbert_writes_report(self, tmp_path):
        rc = run(["prehilbert", "--out", str(tmp_path)])
        assert rc == 0
        report = json.loads((tmp_path / "report-prehilbert.json").read_text())
        assert report["suite"] == "prehilbert"
        assert report["passed"] is True
        assert len(report["checks"]) == 3

    def test_all_writes_one_report_per_suite(self, tmp_path):
        rc = run(["all", "--trunc", "2,4", "--out", str(tmp_path)])
        assert rc == 0
        names = sorted(p.name for p in tmp_path.glob("report-*.json"))
        assert names == [
            "report-bound.json",
            "report-complement.json",
            "report-identity.json",
            "report-kernel.json",
            "report-prehilbert.json",
        ]

    def test_verified_failure_exits_one(self, tmp_path):
        seq = tmp_path / "qseq.txt"
        seq.write_text("\n".join(["1/2"] * 300) + "\n")
        rc = run(["complement", "--qseq", str(seq), "--out", str(tmp_path)])
        assert rc == 1
        report = json.loads((tmp_path / "report-complement.json").read_text())
        assert report["passed"] is False
        density = next(c for c in report["checks"] if c["check"] == "density")
        assert density["passed"] is False

    def test_bad_tolerance_exits_two(self, tmp_path):
        assert run(["kernel", "--tol", "-1", "--out", str(tmp_path)]) == 2
        assert run(["kernel", "--tol", "one-half", "--out", str(tmp_path)]) == 2

    def test_bad_config_file_exits_two(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("tol 1/2\n")
        assert run(["kernel", "--config", str(cfg), "--out", str(tmp_path)]) == 2

    def test_missing_qseq_file_exits_two(self, tmp_path):
        assert run(["kernel", "--qseq", str(tmp_path / "nope.txt"), "--out", str(tmp_path)]) == 2

    def test_unwritable_out_exits_two(self, tmp_path):
        blocker = tmp_path / "not-a-dir"
        blocker.write_text("occupied\n")
        assert run(["prehilbert", "--out", str(blocker)]) == 2

    def test_config_file_applies_and_flags_override(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        out_from_cfg = tmp_path / "from-config"
        cfg.write_text(f"tol=1/2048\ntrunc=2,4\nout={out_from_cfg}\n")
        rc = run(["identity", "--config", str(cfg), "--trunc", "2,8"])
        assert rc == 0
        report = json.loads((out_from_cfg / "report-identity.json").read_text())
        assert report["config"]["tol"] == "1/2048"
        assert report["config"]["trunc"] == "2,8"  # flag wins over file

    def test_env_var_overrides_out(self, tmp_path, monkeypatch):
        env_dir = tmp_path / "env-out"
        monkeypatch.setenv("HMODLAB_OUT", str(env_dir))
        rc = run(["prehilbert", "--out", str(tmp_path / "flag-out")])
        assert rc == 0
        assert (env_dir / "report-prehilbert.json").exists()
        assert not (tmp_path / "flag-out" / "report-prehilbert.json").exists()

    def test_reports_identical_modulo_timestamp(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert run(["bound", "--trunc", "2,4", "--out", str(out1)]) == 0
        assert run(["bound", "--trunc", "2,4", "--out", str(out2)]) == 0
        r1 = json.loads((out1 / "report-bound.json").read_text())
        r2 = json.loads((out2 / "report-bound.json").read_text())
        r1.pop("timestamp"), r2.pop("timestamp")
        assert r1 == r2


class TestCurvesCommand:
    def test_writes_csv_file(self, tmp_path):
        target = tmp_path / "curve.csv"
        rc = run(["curves", "f", "--params", "q=1/2,m=8", "--samples", "5", "--out", str(target)])
        assert rc == 0
        lines = target.read_text().strip().split("\n")
        assert lines[0] == "t,value"
        values = [Fraction(line.split(",")[1]) for line in lines[1:]]
        assert values == [1, 1, 0, 0, 0]

    def test_stdout_when_no_out(self, capsys):
        rc = run(["curves", "f", "--params", "q=1/2,m=2", "--samples", "3"])
        assert rc == 0
        out = capsys.readouterr().out
        assert out.startswith("t,value")

    def test_bad_params_exit_two(self, tmp_path):
        assert run(["curves", "f", "--params", "q=1/2", "--samples", "5"]) == 2
        assert run(["curves", "f", "--params", "q:1/2,m=8", "--samples", "5"]) == 2
        assert run(["curves", "f", "--params", "q=1/2,m=8", "--samples", "1"]) == 2


class TestRemoteMode:
    @pytest.fixture()
    def fake_server(self, monkeypatch):
        client = TestClient(app)

        def fake_post(url, json=None, timeout=None):
            assert url.startswith("http://fake-server")
            return client.post(url.removeprefix("http://fake-server"), json=json)

        monkeypatch.setattr(cli.httpx, "post", fake_post)
        return client

    def test_suite_over_http(self, tmp_path, fake_server):
        rc = run(["prehilbert", "--server", "http://fake-server", "--out", str(tmp_path)])
        assert rc == 0
        report = json.loads((tmp_path / "report-prehilbert.json").read_text())
        assert report["passed"] is True

    def test_remote_matches_local_modulo_timestamp(self, tmp_path, fake_server):
        assert run(["bound", "--trunc", "2,4", "--out", str(tmp_path / "remote"), "--server", "http://fake-server"]) == 0
        assert run(["bound", "--trunc", "2,4", "--out", str(tmp_path / "local")]) == 0
        remote = json.loads((tmp_path / "remote" / "report-bound.json").read_text())
        local = json.loads((tmp_path / "local" / "report-bound.json").read_text())
        remote.pop("timestamp"), local.pop("timestamp")
        assert remote == local

    def test_server_param_error_exits_two(self, tmp_path, fake_server):
        assert run(["kernel", "--tol=-1/4", "--server", "http://fake-server", "--out", str(tmp_path)]) == 2

    def test_unreachable_server_exits_two(self, tmp_path):
        assert run(["prehilbert", "--server", "http://127.0.0.1:1", "--out", str(tmp_path)]) == 2
