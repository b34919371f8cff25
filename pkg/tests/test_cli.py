"""End-to-end command-line workflows: solve, verify, oracle, variation."""

from __future__ import annotations

import json
import math

import numpy as np
import pytest

from chordflow.cli import main
from chordflow.support_geometry import AngleGrid, ellipse

from conftest import DISK1_BOUNDARY_V

CSV_HEADER = "step,t,dt,theta,I_gamma_q,Phi,residual_sup,h_min,h_max,K_min,K_max"


def write_config(path, **overrides):
    cfg = {
        "p": 1.0,
        "q": 3.0,
        "grid_N": 256,
        "f": {"kind": "constant", "c0": 1.0},
        "init": {"kind": "disk", "radius": 1.0},
    }
    cfg.update(overrides)
    path.write_text(json.dumps(cfg), encoding="utf-8")
    return path


def small_problem_config(path, outdir, flow=None, **extra):
    """Converging non-trivial run that finishes in about a second."""
    return write_config(
        path,
        grid_N=64,
        f={"kind": "fourier", "c0": 1.0, "even_harmonics": [[1, 0.1]]},
        flow={"eps_stationary": 1e-4} if flow is None else flow,
        outputs={
            "series_path": str(outdir / "series.csv"),
            "summary_path": str(outdir / "summary.json"),
        },
        **extra,
    )


class TestSolve:
    def test_stationary_disk(self, tmp_path):
        cfg = write_config(
            tmp_path / "cfg.json",
            outputs={
                "series_path": str(tmp_path / "series.csv"),
                "summary_path": str(tmp_path / "summary.json"),
            },
        )
        assert main(["solve", "--config", str(cfg)]) == 0
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["converged"] is True
        assert summary["steps"] == 0
        assert abs(summary["tau"] - 1.0 / DISK1_BOUNDARY_V) < 1e-6
        assert summary["residual_sup"] < 1e-6
        assert summary["conservation_drift"] == 0.0
        assert summary["max_phi_increment"] == 0.0
        assert len(summary["h_final"]) == 256
        lines = (tmp_path / "series.csv").read_text().splitlines()
        assert lines[0] == CSV_HEADER
        assert len(lines) == 2
        assert lines[1].startswith("0,")

    def test_summary_to_stdout_when_no_outputs(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "cfg.json", grid_N=64)
        assert main(["solve", "--config", str(cfg)]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["converged"] is True

    def test_reruns_are_byte_identical(self, tmp_path):
        d1, d2 = tmp_path / "a", tmp_path / "b"
        d1.mkdir(), d2.mkdir()
        c1 = small_problem_config(tmp_path / "c1.json", d1)
        c2 = small_problem_config(tmp_path / "c2.json", d2)
        assert main(["solve", "--config", str(c1)]) == 0
        assert main(["solve", "--config", str(c2)]) == 0
        assert (d1 / "series.csv").read_bytes() == (d2 / "series.csv").read_bytes()
        s1 = json.loads((d1 / "summary.json").read_text())
        s2 = json.loads((d2 / "summary.json").read_text())
        assert s1 == s2

    def test_series_steps_strictly_increase(self, tmp_path):
        cfg = small_problem_config(tmp_path / "cfg.json", tmp_path)
        assert main(["solve", "--config", str(cfg)]) == 0
        rows = (tmp_path / "series.csv").read_text().splitlines()[1:]
        steps = [int(r.split(",", 1)[0]) for r in rows]
        assert steps == sorted(set(steps))
        assert steps[0] == 0

    def test_nonconvergence_exit_code_and_partials(self, tmp_path):
        cfg = small_problem_config(
            tmp_path / "cfg.json",
            tmp_path,
            flow={"max_steps": 5, "eps_stationary": 1e-9},
        )
        assert main(["solve", "--config", str(cfg)]) == 2
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["converged"] is False
        assert summary["steps"] == 5
        rows = (tmp_path / "series.csv").read_text().splitlines()[1:]
        assert int(rows[-1].split(",", 1)[0]) == 5

    def test_underflow_exit_code(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path / "cfg.json",
            p=2.0,
            grid_N=64,
            init={"kind": "fourier", "c0": 1.0, "even_harmonics": [[1, 0.3]]},
            flow={"dt0": 0.5, "dt_min": 0.4},
            outputs={"summary_path": str(tmp_path / "summary.json")},
        )
        assert main(["solve", "--config", str(cfg)]) == 3
        assert "step size underflow" in capsys.readouterr().err
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["converged"] is False


class TestVerify:
    def test_round_trip_matches_solve_bitwise(self, tmp_path):
        solve_cfg = small_problem_config(tmp_path / "solve.json", tmp_path)
        assert main(["solve", "--config", str(solve_cfg)]) == 0
        solve_summary = json.loads((tmp_path / "summary.json").read_text())

        verify_cfg = write_config(
            tmp_path / "verify.json",
            grid_N=64,
            f={"kind": "fourier", "c0": 1.0, "even_harmonics": [[1, 0.1]]},
            outputs={"summary_path": str(tmp_path / "report.json")},
        )
        code = main(
            [
                "verify",
                "--config",
                str(verify_cfg),
                "--h-file",
                str(tmp_path / "summary.json"),
            ]
        )
        assert code == 0
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["theta"] == solve_summary["final_theta"]
        assert report["tau"] == solve_summary["tau"]
        assert report["residual_sup"] == solve_summary["residual_sup"]
        for key in ("max_gap", "min_gap", "support_slack", "radial_slack"):
            assert report["lemma41"][key] <= 1e-3
        for key in ("h_min", "h_max", "rho_min", "rho_max", "K_min", "K_max", "grad_max"):
            assert key in report["bounds"]
        assert 0.1 <= report["bounds"]["h_min"] <= report["bounds"]["h_max"] <= 10.0

    def test_requires_h_file(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "cfg.json", grid_N=64)
        assert main(["verify", "--config", str(cfg)]) == 1
        assert "h-file" in capsys.readouterr().err

    def test_wrong_length_h_file(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "cfg.json", grid_N=64)
        hfile = tmp_path / "h.json"
        hfile.write_text(json.dumps([1.0] * 100))
        assert main(["verify", "--config", str(cfg), "--h-file", str(hfile)]) == 1
        assert "error" in capsys.readouterr().err

    def test_reports_nonzero_residual_for_wrong_tau(self, tmp_path):
        grid = AngleGrid(256)
        body = ellipse(2.0, 1.0, grid)
        hfile = tmp_path / "h.json"
        hfile.write_text(json.dumps([float(v) for v in body.h]))
        cfg = write_config(
            tmp_path / "cfg.json",
            tau=1.0,
            outputs={"summary_path": str(tmp_path / "report.json")},
        )
        assert main(["verify", "--config", str(cfg), "--h-file", str(hfile)]) == 0
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["tau"] == 1.0
        assert report["residual_sup"] > 0.1


class TestOracle:
    def test_disk_q3_report(self, tmp_path):
        cfg = write_config(
            tmp_path / "cfg.json",
            oracle={"cell_size": 0.02},
            outputs={"summary_path": str(tmp_path / "oracle.json")},
        )
        assert main(["oracle", "--config", str(cfg)]) == 0
        report = json.loads((tmp_path / "oracle.json").read_text())
        assert report["cell_size"] == 0.02
        assert report["rel_diff"] < 1e-2
        assert report["q3_identity_rel_err"] < 1e-3
        exact_gv = 2.0 * math.pi * (1.0 - math.exp(-0.5))
        assert abs(report["gaussian_volume"] - exact_gv) / exact_gv < 1e-6

    def test_singular_exponent_skips_oracle(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path / "cfg.json",
            q=2.5,
            outputs={"summary_path": str(tmp_path / "oracle.json")},
        )
        assert main(["oracle", "--config", str(cfg)]) == 0
        assert "oracle skipped" in capsys.readouterr().err
        report = json.loads((tmp_path / "oracle.json").read_text())
        assert report["I_oracle"] is None
        assert report["rel_diff"] is None
        assert report["I_polar"] > 0.0
        assert "q3_identity_rel_err" not in report


class TestVariation:
    def test_survey_hits_disk_closed_form(self, tmp_path):
        cfg = write_config(
            tmp_path / "cfg.json",
            grid_N=128,
            outputs={"summary_path": str(tmp_path / "var.json")},
        )
        assert main(["variation", "--config", str(cfg)]) == 0
        report = json.loads((tmp_path / "var.json").read_text())
        rows = {row["body"]: row for row in report["rows"]}
        assert set(rows) == {"init", "disk_0.5", "disk_1", "disk_2", "ellipse_2_1", "fourier_0.1"}
        closed = 2.0 * (2.0 * math.pi * (1.0 - math.exp(-0.5))) * 2.0 * math.pi * math.exp(-0.5)
        assert abs(rows["disk_1"]["fd_derivative"] - closed) / closed < 1e-3
        ratios = [row["ratio"] for row in report["rows"]]
        mid = sum(ratios) / len(ratios)
        assert (max(ratios) - min(ratios)) / mid < 1e-2

    def test_nonconvex_probe_exits_with_code_four(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path / "cfg.json",
            grid_N=64,
            g={"kind": "fourier", "c0": 1.0, "even_harmonics": [[8, 0.9]]},
            variation={"t_step": 0.9},
        )
        assert main(["variation", "--config", str(cfg)]) == 4
        assert "at t=" in capsys.readouterr().err


class TestConfigErrors:
    def assert_config_error(self, tmp_path, capsys, fragment, **overrides):
        cfg = write_config(tmp_path / "cfg.json", **overrides)
        raw = json.loads(cfg.read_text())
        for key, value in overrides.items():
            if value is None:
                raw.pop(key, None)
        cfg.write_text(json.dumps(raw))
        assert main(["solve", "--config", str(cfg)]) == 1
        err = capsys.readouterr().err
        assert "config error" in err
        assert fragment in err

    def test_missing_p(self, tmp_path, capsys):
        self.assert_config_error(tmp_path, capsys, "p", p=None)

    def test_odd_grid(self, tmp_path, capsys):
        self.assert_config_error(tmp_path, capsys, "grid_N", grid_N=63)

    def test_unknown_density_kind(self, tmp_path, capsys):
        self.assert_config_error(tmp_path, capsys, "f", f={"kind": "spline"})

    def test_density_must_stay_positive(self, tmp_path, capsys):
        self.assert_config_error(
            tmp_path,
            capsys,
            "f",
            f={"kind": "fourier", "c0": 1.0, "even_harmonics": [[1, 1.5]]},
        )

    def test_invalid_initial_body(self, tmp_path, capsys):
        self.assert_config_error(
            tmp_path,
            capsys,
            "init",
            init={"kind": "fourier", "c0": 1.0, "even_harmonics": [[1, 0.4]]},
        )

    def test_unreadable_config(self, tmp_path, capsys):
        missing = tmp_path / "nope.json"
        assert main(["solve", "--config", str(missing)]) == 1
        assert "config error" in capsys.readouterr().err

    def test_malformed_json(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["solve", "--config", str(bad)]) == 1
        assert "config error" in capsys.readouterr().err
