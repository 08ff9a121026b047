"""Command-line interface: flag validation, exit codes, machine output."""

import json

import numpy as np
import pytest

from odeaccel import cli
from odeaccel.driver import read_trace


def run_cli(*argv):
    return cli.main(list(argv))


class TestRunCommand:
    def test_basic_run_writes_trace(self, tmp_path, capsys):
        out = tmp_path / "t.csv"
        code = run_cli("run", "--objective", "quadratic", "--method", "ode",
                       "--q", "2", "--tableau", "rk4", "--N", "2000",
                       "--h", "0.01", "--seed", "7", "--out", str(out))
        assert code == 0
        printed = capsys.readouterr().out
        assert "outcome=" in printed and "final_f_gap=" in printed
        trace = read_trace(out)
        assert trace.iters[-1] == 2000
        assert np.all(np.diff(trace.t) > 0)

    def test_missing_objective_exits_1(self, capsys):
        assert run_cli("run", "--out", "x.csv") == 1

    def test_unknown_flag_exits_1(self):
        assert run_cli("run", "--objective", "quadratic", "--frobnicate",
                       "--out", "x.csv") == 1

    def test_divergent_run_exits_2(self, tmp_path):
        out = tmp_path / "d.csv"
        code = run_cli("run", "--objective", "quadratic", "--method", "ode",
                       "--q", "2", "--tableau", "euler", "--N", "5000",
                       "--h", "0.5", "--seed", "7", "--out", str(out))
        assert code == 2
        assert read_trace(out).outcome == "diverged"

    def test_config_file_defaults(self, tmp_path):
        conf = tmp_path / "run.conf"
        conf.write_text("# benchmark defaults\nobjective = quadratic\nh = 0.01\n")
        out = tmp_path / "t.csv"
        code = run_cli("run", "--N", "500", "--seed", "7",
                       "--out", str(out), "--config", str(conf))
        assert code == 0
        assert read_trace(out).iters[-1] == 500

    def test_config_file_unknown_key(self, tmp_path, capsys):
        conf = tmp_path / "bad.conf"
        conf.write_text("objectiv = quadratic\n")
        assert run_cli("run", "--objective", "quadratic", "--N", "100",
                       "--out", str(tmp_path / "t.csv"), "--config", str(conf)) == 1


class TestSweepCommand:
    def test_small_quad_sweep(self, tmp_path, capsys):
        out_dir = tmp_path / "sw"
        code = run_cli("sweep", "--figure", "quad", "--N", "2000",
                       "--out-dir", str(out_dir))
        assert code == 0
        names = {p.name for p in out_dir.iterdir()}
        assert names == {"gd.csv", "nag.csv", "ode_s1.csv", "ode_s2.csv",
                         "ode_s4.csv", "summary.csv"}
        summary = (out_dir / "summary.csv").read_text().splitlines()
        assert summary[0] == "name,q,s,h,outcome,slope,r2"
        assert len(summary) == 6

    def test_unknown_figure_exits_1(self, tmp_path):
        assert run_cli("sweep", "--figure", "fig9", "--out-dir", str(tmp_path)) == 1

    def test_missing_figure_exits_1(self, tmp_path):
        assert run_cli("sweep", "--out-dir", str(tmp_path)) == 1


class TestOrderCheck:
    def test_euler_json_report(self, capsys):
        code = run_cli("order-check", "--tableau", "euler", "--json")
        payload = json.loads(capsys.readouterr().out)
        assert code == 0
        assert payload["tableau"] == "euler" and payload["declared_order"] == 1
        assert abs(payload["estimated_order"] - 1.0) <= 0.3

    def test_tableau_file(self, tmp_path, capsys):
        path = tmp_path / "heun.txt"
        path.write_text("2 2 heun\n\n1.0\n0.5 0.5\n")
        code = run_cli("order-check", "--tableau-file", str(path), "--json")
        payload = json.loads(capsys.readouterr().out)
        assert code == 0
        assert abs(payload["estimated_order"] - 2.0) <= 0.3

    def test_requires_a_tableau(self, capsys):
        assert run_cli("order-check") == 1


class TestAssumptionsCommand:
    def test_quadratic_report(self, capsys):
        code = run_cli("assumptions", "--objective", "quadratic",
                       "--p", "2", "--i", "1", "--json")
        payload = json.loads(capsys.readouterr().out)
        assert code == 0
        assert payload["violations"] == 0
        assert payload["L_effective"] > 0

    def test_wrong_flatness_detected(self, capsys):
        code = run_cli("assumptions", "--objective", "quadratic",
                       "--p", "4", "--i", "1", "--json")
        payload = json.loads(capsys.readouterr().out)
        assert code == 2
        assert payload["violations"] > 0
        assert payload["L_effective"] == "diverged"

    def test_derivative_orders_flag(self, capsys):
        code = run_cli("assumptions", "--objective", "l4", "--seed", "11",
                       "--p", "4", "--i", "1", "--orders", "2,4", "--json")
        payload = json.loads(capsys.readouterr().out)
        assert code == 0
        assert set(payload["derivative_norms"]) == {"2", "4"}


class TestSlopeCommand:
    def test_slope_of_written_trace(self, tmp_path, capsys):
        out = tmp_path / "t.csv"
        assert run_cli("run", "--objective", "quadratic", "--method", "ode",
                       "--q", "2", "--tableau", "rk4", "--N", "20000",
                       "--auto-h", "--seed", "7", "--out", str(out)) == 0
        capsys.readouterr()
        code = run_cli("slope", "--trace", str(out), "--window", "0.3:1.0", "--json")
        payload = json.loads(capsys.readouterr().out)
        assert code == 0
        assert payload["slope"] < -1.0
        assert 0.0 <= payload["r2"] <= 1.0
