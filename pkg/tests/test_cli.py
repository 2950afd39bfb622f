import json
import math
import subprocess
import sys

import pytest

from besov_ns.cli import load_config_file, resolve, run, worker_count
from besov_ns.harness import ConfigError


def _read(path):
    with open(path) as fh:
        return json.load(fh)


class TestResolve:
    def test_defaults(self):
        cfg = resolve("ineq-check", {})
        assert cfg["pairs"] == [(0.5, 1.25), (1.0, 1.5), (1.2, 1.25)]
        assert cfg["formats"] == ["csv", "json"]

    def test_precedence(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text("inequality:\n  t_max: 200\n  n_t: 30\noutput:\n  dir: somewhere\n")
        cfg = resolve("ineq-check", {"config": str(path), "n_t": "40"})
        assert cfg["t_max"] == 200.0 and cfg["n_t"] == 40 and cfg["out"] == "somewhere"

    def test_model_params_section(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text("model:\n  preset: vdw\n  params:\n    alpha: 0.2\ngrid:\n  d: 3\n")
        cfg = resolve("symbol-spectrum", {"config": str(path)})
        assert cfg["preset"] == "vdw" and cfg["param"] == {"alpha": 0.2} and cfg["dim"] == 3

    @pytest.mark.parametrize("text", ["bogus:\n  x: 1\n", "grid:\n  zzz: 1\n", "grid: 3\n", "- 1\n", "a: [\n"])
    def test_bad_files(self, tmp_path, text):
        path = tmp_path / "c.yaml"
        path.write_text(text)
        with pytest.raises(ConfigError):
            load_config_file(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config_file(tmp_path / "none.yaml")

    def test_bad_values(self):
        with pytest.raises(ConfigError):
            resolve("ineq-check", {"n_t": "many"})
        with pytest.raises(ConfigError):
            resolve("ineq-check", {"formats": "csv,pdf"})


class TestWorkers:
    def test_env(self, monkeypatch):
        monkeypatch.setenv("BESOV_NS_THREADS", "3")
        assert worker_count() == 3
        for bad in ("0", "x"):
            monkeypatch.setenv("BESOV_NS_THREADS", bad)
            with pytest.raises(ConfigError):
                worker_count()

    def test_bad_env_is_config_error(self, monkeypatch, tmp_path):
        monkeypatch.setenv("BESOV_NS_THREADS", "-2")
        assert run(["ineq-check", "--out", str(tmp_path)]) == 2


class TestExitCodes:
    def test_usage_errors(self, capsys):
        assert run([]) == 2
        assert run(["frobnicate"]) == 2
        assert run(["ineq-check", "--no-such-flag", "1"]) == 2

    def test_config_errors(self, tmp_path, capsys):
        assert run(["linear-decay", "--p", "3", "--out", str(tmp_path)]) == 2
        assert run(["ineq-check", "--pairs", "1.5,1.2", "--out", str(tmp_path)]) == 2
        assert run(["symbol-spectrum", "--preset", "nope", "--out", str(tmp_path)]) == 2
        assert run(["symbol-spectrum", "--param", "bogus=1", "--out", str(tmp_path)]) == 2
        assert run(["report", "--out", str(tmp_path)]) == 2
        err = capsys.readouterr().err
        assert err.count("config error:") == 5

    def test_failing_gate(self, tmp_path, capsys):
        # a rejection list containing an admissible pair must fail the gate
        assert run(["ineq-check", "--pairs", "1,1.5", "--reject", "1,2", "--n-t", "20", "--out", str(tmp_path)]) == 1
        assert "FAIL ineq-check: rejects (1, 2)" in capsys.readouterr().out


class TestCommands:
    def test_ineq_check(self, tmp_path, capsys):
        assert run(["ineq-check", "--n-t", "30", "--out", str(tmp_path), "--formats", "csv,json"]) == 0
        doc = _read(tmp_path / "ineq-check.json")
        assert doc["schema"] == 1 and doc["passed"] and doc["command"] == "ineq-check"
        assert doc["results"]["rejected"] == [{"sigma1": 1.0, "sigma2": 1.0, "rejected": True}]
        header = (tmp_path / "ineq-check.csv").read_text().splitlines()[0]
        assert header == "sigma1,sigma2,sup_coarse,sup_fine,rel_change,t_at_sup"
        assert "PASS ineq-check: rejects (1, 1)" in capsys.readouterr().out

    def test_byte_identical_reruns(self, tmp_path):
        args = ["ineq-check", "--n-t", "20", "--out", str(tmp_path), "--formats", "csv,json,svg"]
        assert run(args) == 0
        first = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
        assert run(args) == 0
        assert {p.name: p.read_bytes() for p in tmp_path.iterdir()} == first
        assert {"ineq-check.csv", "ineq-check.json"} <= set(first)

    def test_symbol_spectrum(self, tmp_path):
        assert run(["symbol-spectrum", "--n-rho", "21", "--out", str(tmp_path)]) == 0
        doc = _read(tmp_path / "symbol-spectrum.json")
        assert doc["passed"]
        assert (tmp_path / "symbol-spectrum.csv").exists()

    def test_lp_check(self, tmp_path):
        assert run(["lp-check", "--n", "16", "--trials", "1", "--out", str(tmp_path)]) == 0
        assert _read(tmp_path / "lp-check.json")["passed"]

    def test_linear_decay_with_svg(self, tmp_path):
        assert run(["linear-decay", "--s", "0", "0.5", "--out", str(tmp_path), "--formats", "json,svg"]) == 0
        doc = _read(tmp_path / "linear-decay.json")
        assert doc["passed"]
        assert list(tmp_path.glob("*.svg"))
        assert not list(tmp_path.glob("*.csv"))

    def test_nonlinear_decay_small(self, tmp_path):
        argv = ["nonlinear-decay", "--n", "16", "--L", str(16 * math.pi), "--j0", "-1", "--tmax", "4", "--dt", "0.5",
                "--tol", "10", "--out", str(tmp_path)]
        assert run(argv) == 0
        doc = _read(tmp_path / "nonlinear-decay.json")
        assert doc["gates"]["density floor never hit"]
        assert doc["results"]["steps"] >= 8
        assert (tmp_path / "nonlinear-decay.csv").read_text().startswith("t,")

    def test_product_check_subset(self, tmp_path):
        assert run(["product-check", "--prop", "P2.3,E3.6", "--trials", "2", "--out", str(tmp_path)]) == 0
        doc = _read(tmp_path / "product-check.json")
        assert [e["prop"] for e in doc["results"]["estimates"]] == ["P2.3", "E3.6"]

    def test_report_merge(self, tmp_path):
        assert run(["ineq-check", "--n-t", "20", "--out", str(tmp_path)]) == 0
        assert run(["symbol-spectrum", "--n-rho", "11", "--out", str(tmp_path)]) == 0
        out = tmp_path / "merged"
        files = [str(tmp_path / "ineq-check.json"), str(tmp_path / "symbol-spectrum.json")]
        assert run(["report", *files, "--out", str(out)]) == 0
        doc = _read(out / "report.json")
        assert [e["command"] for e in doc["results"]["entries"]] == ["ineq-check", "symbol-spectrum"]
        (tmp_path / "junk.json").write_text("{}")
        assert run(["report", str(tmp_path / "junk.json"), "--out", str(out)]) == 2


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "besov_ns.cli", "ineq-check", "--n-t", "12", "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.count("PASS") == 4
