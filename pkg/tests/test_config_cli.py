import json
import subprocess
import sys

import numpy as np
import pytest

from fhtrack import cli
from fhtrack.config import ExperimentConfig, SCENARIOS
from fhtrack.errors import ConfigError


class TestConfig:
    def test_defaults_validate(self):
        cfg = ExperimentConfig().validate()
        assert cfg.lattice.L == 10
        assert cfg.pulse.e0 == 10.0
        assert cfg.numerics.steps_per_cycle == 2000

    def test_json_round_trip(self, tmp_path):
        cfg = ExperimentConfig()
        cfg.scenario = "mimicry"
        cfg.lattice.L = 6
        cfg.lattice.n_up = cfg.lattice.n_down = 3
        cfg.tracking.mode = "k-scale"
        path = tmp_path / "cfg.json"
        cfg.to_json(path)
        loaded = ExperimentConfig.from_json(path)
        assert loaded.to_dict() == cfg.to_dict()

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown key"):
            ExperimentConfig.from_dict({"scenaro": "reference"})
        with pytest.raises(ConfigError, match="unknown key"):
            ExperimentConfig.from_dict({"lattice": {"sites": 10}})

    def test_bad_values_rejected(self):
        with pytest.raises(ConfigError, match="scenario"):
            ExperimentConfig.from_dict({"scenario": "nope"})
        with pytest.raises(ConfigError, match="positive"):
            ExperimentConfig.from_dict({"lattice": {"t0": -1.0}})
        with pytest.raises(ConfigError, match="mode"):
            ExperimentConfig.from_dict({"tracking": {"mode": "b-scale"}})
        with pytest.raises(ConfigError, match="non-negative"):
            ExperimentConfig.from_dict({"u_over_t0": [-1.0]})

    def test_missing_file(self):
        with pytest.raises(ConfigError, match="not found"):
            ExperimentConfig.from_json("/nonexistent/cfg.json")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{nope")
        with pytest.raises(ConfigError, match="valid JSON"):
            ExperimentConfig.from_json(path)


def _small_argv(scenario, outdir, extra=()):
    return [scenario, "-o", str(outdir), "--sites", "6",
            "--cycles", "2", "--steps-per-cycle", "2000",
            "--no-plots", *extra]


class TestCli:
    def test_all_scenarios_have_subcommands(self):
        parser = cli.build_parser()
        text = parser.format_help()
        for scenario in SCENARIOS:
            assert scenario in text

    def test_config_error_exit_code(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"lattice": {"L": -3}}))
        rc = cli.main(["reference", "--config", str(bad)])
        assert rc == cli.EXIT_CONFIG

    def test_reference_scenario_artifacts(self, tmp_path):
        rc = cli.main(_small_argv("reference", tmp_path,
                                  ("--u-list", "0", "4")))
        assert rc == 0
        out = tmp_path / "reference"
        for name in ("trajectory_u0.csv", "trajectory_u4.csv",
                     "spectrum_u0.csv", "spectrum_u4.csv", "manifest.json"):
            assert (out / name).exists()
        header = (out / "trajectory_u0.csv").read_text().splitlines()[0]
        assert header == ("t_fs,t_natural,phi_rad,current,R,theta_rad,"
                          "doublon,norm,margin_X,margin_R")
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["scenario"] == "reference"
        assert manifest["derived"]["phase_amplitude"] == pytest.approx(
            2.9397, abs=2e-4)
        assert "per_u" in manifest

    def test_runs_are_deterministic(self, tmp_path):
        argv_a = _small_argv("reference", tmp_path / "a", ("--u-list", "4"))
        argv_b = _small_argv("reference", tmp_path / "b", ("--u-list", "4"))
        assert cli.main(argv_a) == 0
        assert cli.main(argv_b) == 0
        for name in ("trajectory_u4.csv", "spectrum_u4.csv"):
            bytes_a = (tmp_path / "a" / "reference" / name).read_bytes()
            bytes_b = (tmp_path / "b" / "reference" / name).read_bytes()
            assert bytes_a == bytes_b

    def test_constraint_violation_exit_code(self, tmp_path):
        # shrinking the rescued lattice constant makes direction B's ratio
        # blow through |X| < 1 - eps1 almost immediately
        cfg = {"tracking": {"a_scale": 1e-6}}
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        rc = cli.main(_small_argv("mimicry", tmp_path,
                                  ("--config", str(path))))
        assert rc == cli.EXIT_CONSTRAINT

    def test_trajectory_columns_parse(self, tmp_path):
        assert cli.main(_small_argv("reference", tmp_path,
                                    ("--u-list", "4"))) == 0
        path = tmp_path / "reference" / "trajectory_u4.csv"
        data = np.genfromtxt(path, delimiter=",", names=True)
        assert len(data) == 2 * 2000 + 1
        assert np.max(np.abs(data["norm"] - 1.0)) < 1e-8
        assert np.all(np.isnan(data["margin_X"]))  # driven run

    def test_plots_rendered_next_to_csv(self, tmp_path):
        argv = ["reference", "-o", str(tmp_path), "--sites", "6",
                "--cycles", "2", "--steps-per-cycle", "2000",
                "--u-list", "4"]
        assert cli.main(argv) == 0
        out = tmp_path / "reference"
        assert (out / "currents.svg").exists()
        assert (out / "spectra.svg").exists()

    def test_console_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "fhtrack.cli", "--help"],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        assert "reference" in proc.stdout
