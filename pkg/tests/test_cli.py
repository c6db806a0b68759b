import json
import math
import os
import shutil

import numpy as np
import pytest

from drivendicke import cli
from drivendicke.errors import ConfigError, GoldenChecksumError

BASE_CONFIG = """
solver = "rwa_block"
N = 2
gamma_c = 0.02
gamma_d = 0.02
lambda_eff = 0.01
n_max = 12
t_final = 120.0
n_points = 241
rtol = 1e-9
atol = 1e-11
"""


def write_config(tmp_path, text, name="run.toml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestConfigParsing:
    def test_minimal_valid(self, tmp_path):
        cfg = cli.parse_config(write_config(tmp_path, BASE_CONFIG))
        assert cfg.solver == "rwa_block"
        assert cfg.N == 2 and cfg.effective_lambda == 0.01
        assert cfg.n_crit() == pytest.approx(1.0)

    def test_unknown_key_reports_line(self, tmp_path):
        with pytest.raises(ConfigError) as err:
            cli.parse_config(write_config(
                tmp_path, BASE_CONFIG + "\nmystery_knob = 3\n"))
        assert err.value.field == "mystery_knob"
        assert err.value.line is not None

    def test_missing_required(self, tmp_path):
        with pytest.raises(ConfigError) as err:
            cli.parse_config(write_config(tmp_path, 'solver = "hp"\n'))
        assert err.value.field in ("N", "lambda_eff")

    def test_bad_solver(self, tmp_path):
        with pytest.raises(ConfigError):
            cli.parse_config(write_config(
                tmp_path, BASE_CONFIG.replace("rwa_block", "magic")))

    def test_solver_domain_violation(self, tmp_path):
        with pytest.raises(ConfigError) as err:
            cli.parse_config(write_config(
                tmp_path, BASE_CONFIG.replace("N = 2", "N = 40")))
        assert err.value.field == "N"

    def test_empty_sweep_rejected(self, tmp_path):
        with pytest.raises(ConfigError) as err:
            cli.parse_config(write_config(
                tmp_path, BASE_CONFIG + "\nsweep_N = []\n"))
        assert err.value.field == "sweep_N"

    def test_physical_parameter_path(self, tmp_path):
        text = """
solver = "full_td"
N = 2
gamma_c = 0.0
gamma_d = 0.0
omega_c = 1.0
omega_d0 = 1.0
lambda0 = 0.5
A = 1e-4
c_light = 1.0
n_max = 6
t_final = 10.0
"""
        cfg = cli.parse_config(write_config(tmp_path, text))
        # resonance is imposed automatically: Omega_m = omega_c + omega_d
        assert cfg.physical.Omega_m == pytest.approx(
            1.0 + cfg.derived.omega_d, rel=1e-12)
        assert cfg.derived.lambda_eff > 0

    def test_default_truncation_suggestion(self, tmp_path):
        cfg = cli.parse_config(write_config(
            tmp_path, BASE_CONFIG.replace("n_max = 12", "")))
        # steady n ~ 0.7: suggestion = 4*max(1, n_ss) with floor 8
        assert cfg.n_max >= 8


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("run")
    cfg = cli.parse_config(write_config(tmp, BASE_CONFIG))
    out = str(tmp / "out")
    os.makedirs(out)
    cli.run_single(cfg, out)
    return out


class TestRunArtifacts:
    def test_trajectory_roundtrip(self, run_dir):
        cols = cli.read_trajectory_csv(os.path.join(run_dir, "trajectory.csv"))
        assert len(cols["t"]) == 241
        assert np.all(np.diff(cols["t"]) > 0)
        assert np.nanmin(cols["n"]) >= -1e-9
        assert math.isnan(cols["fano"][0])      # vacuum: Fano undefined
        assert math.isnan(cols["E_N"][0])       # not requested

    def test_summary_echoes_config(self, run_dir, tmp_path):
        summary = json.load(open(os.path.join(run_dir, "summary.json")))
        assert summary["config"]["lambda_eff"] == 0.01
        assert summary["config"]["n_points"] == 241
        assert summary["N_crit"] == pytest.approx(1.0)
        assert "burst" in summary

    def test_rerun_reproduces_exactly(self, run_dir, tmp_path):
        cfg = cli.parse_config(write_config(tmp_path, BASE_CONFIG))
        out2 = str(tmp_path / "out2")
        os.makedirs(out2)
        cli.run_single(cfg, out2)
        a = open(os.path.join(run_dir, "trajectory.csv")).read()
        b = open(os.path.join(out2, "trajectory.csv")).read()
        assert a == b


class TestSolverPipelines:
    def test_cumulant_run(self, tmp_path):
        text = BASE_CONFIG.replace('"rwa_block"', '"cumulant_fourth"')
        cfg = cli.parse_config(write_config(tmp_path, text))
        out = str(tmp_path / "out")
        os.makedirs(out)
        summary = cli.run_single(cfg, out)
        cols = cli.read_trajectory_csv(os.path.join(out, "trajectory.csv"))
        assert "steady_state_fourth" in summary
        assert math.isnan(cols["fano"][5])      # moments carry no <n^2>
        assert np.nanmax(cols["n"]) > 0

    def test_hp_run(self, tmp_path):
        text = BASE_CONFIG.replace('"rwa_block"', '"hp"')
        cfg = cli.parse_config(write_config(tmp_path, text))
        out = str(tmp_path / "out")
        os.makedirs(out)
        summary = cli.run_single(cfg, out)
        assert summary["threshold_ratio"] == pytest.approx(2.0)
        assert summary["above_threshold"]

    def test_wigner_and_snapshot_roundtrip(self, tmp_path):
        text = BASE_CONFIG + (
            'wigner_snapshots = "fano"\nwigner_extent = 5.0\n'
            "wigner_points = 41\nsave_states = true\n"
            "compute_entanglement = true\nentanglement_stride = 40\n")
        cfg = cli.parse_config(write_config(tmp_path, text))
        out = str(tmp_path / "out")
        os.makedirs(out)
        cli.run_single(cfg, out)
        meta, vals = cli.read_wigner_csv(
            os.path.join(out, "wigner_final.csv"))
        assert vals.shape == (41, 41)
        assert abs(float(meta["normalization"]) - 1.0) < 1e-3
        states = cli.load_block_states(os.path.join(out, "snapshots.npz"))
        assert "final" in states and "initial" in states
        t_val, bdm = states["final"]
        bdm.validate()
        assert t_val == pytest.approx(120.0)

    def test_sweep_pipeline(self, tmp_path):
        text = """
solver = "cumulant_fourth"
N = 100
gamma_c = 0.02
gamma_d = 0.02
lambda_eff = 0.001
t_final = 1.0
sweep_N_min = 1000
sweep_N_max = 100000
sweep_N_points = 6
"""
        cfg = cli.parse_config(write_config(tmp_path, text))
        out = str(tmp_path / "out")
        os.makedirs(out)
        summary = cli.run_sweep(cfg, out, threads=1)
        assert len(summary["rows"]) == 6
        assert "peak_power_fit" in summary
        lines = open(os.path.join(out, "sweep.csv")).read().splitlines()
        assert lines[0] == "N,N_over_Ncrit,n_ss_third,n_ss_fourth,peak,t_d"
        assert len(lines) == 7


class TestGoldens:
    def test_shipped_goldens_verify(self):
        names = cli.check_goldens()
        assert any("trajectory.csv" in n for n in names)

    def test_corruption_detected(self, tmp_path):
        work = str(tmp_path / "golden")
        shutil.copytree(cli.golden_dir(), work)
        victim = os.path.join(work, "fig2_n15", "trajectory.csv")
        data = open(victim).read()
        open(victim, "w").write(data.replace("0", "1", 1))
        with pytest.raises(GoldenChecksumError):
            cli.check_goldens(work)


class TestMainEntry:
    def test_config_error_exit_code(self, tmp_path):
        bad = write_config(tmp_path, 'solver = "nope"\n')
        assert cli.main(["run", "--config", bad]) == cli.EXIT_CONFIG

    def test_run_exit_code(self, tmp_path):
        cfgp = write_config(tmp_path, BASE_CONFIG)
        out = str(tmp_path / "out")
        assert cli.main(["run", "--config", cfgp, "--out", out]) == cli.EXIT_OK

    def test_numerical_abort_exit_code(self, tmp_path):
        # tiny truncation forces a top-level population abort
        text = BASE_CONFIG.replace("n_max = 12", "n_max = 2").replace(
            "lambda_eff = 0.01", "lambda_eff = 0.08")
        cfgp = write_config(tmp_path, text)
        out = str(tmp_path / "out")
        assert cli.main(["run", "--config", cfgp, "--out", out]) == \
            cli.EXIT_NUMERICAL
