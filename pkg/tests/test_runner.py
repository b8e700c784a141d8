import json

import numpy as np
import pytest

from fhtrack.config import ExperimentConfig
from fhtrack.runner import ExperimentRunner, _u_tag


def _small_config(tmp_path, scenario, u_list, cycles=2, **tracking):
    cfg = ExperimentConfig()
    cfg.scenario = scenario
    cfg.outdir = str(tmp_path)
    cfg.plots = False
    cfg.lattice.L = 6
    cfg.lattice.n_up = cfg.lattice.n_down = 3
    cfg.pulse.cycles = cycles
    cfg.u_over_t0 = u_list
    for name, value in tracking.items():
        setattr(cfg.tracking, name, value)
    return cfg.validate()


class TestTags:
    def test_integer_and_fractional(self):
        assert _u_tag(7.0) == "u7"
        assert _u_tag(0.0) == "u0"
        assert _u_tag(6.5) == "u6p5"


class TestDoublonSweep:
    def test_thresholds_and_traces(self, tmp_path):
        cfg = _small_config(tmp_path, "doublon-sweep", [0.0, 4.0, 7.0])
        paths = ExperimentRunner(cfg).run()
        rows = (tmp_path / "doublon-sweep" / "thresholds.csv") \
            .read_text().splitlines()
        assert rows[0] == "u_over_t0,delta_ev,xi_sites,e_th_mv_cm,t_th_natural"
        by_u = {float(r.split(",")[0]): r.split(",") for r in rows[1:]}
        assert float(by_u[0.0][3]) == 0.0         # metal: no threshold field
        assert float(by_u[4.0][4]) > 0.0          # breakdown reachable
        assert by_u[7.0][4] == ""                 # threshold never reached
        data = np.genfromtxt(paths["doublon"], delimiter=",", names=True)
        assert {"doublon_u0", "doublon_u4", "doublon_u7"} <= set(
            data.dtype.names)


@pytest.fixture(scope="module")
def mimicry(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("mimicry")
    cfg = _small_config(tmp, "mimicry", [0.0, 7.0])
    runner = ExperimentRunner(cfg)
    paths = runner.run()
    return runner, paths, tmp


class TestMimicry:
    def test_four_trajectories_written(self, mimicry):
        _, paths, tmp = mimicry
        for name in ("ref_u0", "ref_u7", "tracked_u0", "tracked_u7"):
            assert (tmp / "mimicry" / f"trajectory_{name}.csv").exists()
            assert (tmp / "mimicry" / f"spectrum_{name}.csv").exists()

    def test_tracked_currents_match_targets(self, mimicry):
        runner, _, tmp = mimicry
        manifest = json.loads((tmp / "mimicry" / "manifest.json").read_text())
        fid = manifest["tracking_fidelity"]
        assert fid["max_rel_error_src_tracks_tgt"] < 1e-5
        assert fid["max_rel_error_tgt_tracks_src"] < 1e-5

    def test_direction_b_uses_rescued_lattice(self, mimicry):
        _, _, tmp = mimicry
        manifest = json.loads((tmp / "mimicry" / "manifest.json").read_text())
        assert manifest["direction_b"]["mode"] == "a-scale"
        assert manifest["direction_b"]["a_track"] == pytest.approx(
            ExperimentConfig().tracking.a_scale * 4.0)
        assert manifest["direction_a"]["mode"] is None

    def test_doublon_tracking_reuses_runs(self, mimicry):
        runner, _, tmp = mimicry
        runner.cfg.scenario = "doublon-tracking"
        paths = runner.run()
        data = np.genfromtxt(paths["doublon"], delimiter=",", names=True)
        for name in ("doublon_ref_u0", "doublon_tracked_u0",
                     "doublon_ref_u7", "doublon_tracked_u7"):
            assert name in data.dtype.names
        manifest = json.loads(
            (tmp / "doublon-tracking" / "manifest.json").read_text())
        assert "doublon_contrast" in manifest
        assert manifest["doublon_contrast"]["target_tail_ratio"] > 0


class TestKScaleMode:
    def test_mimicry_k_scale(self, tmp_path):
        cfg = _small_config(tmp_path, "mimicry", [0.0, 7.0], mode="k-scale")
        runner = ExperimentRunner(cfg)
        runner.run()
        manifest = json.loads((tmp_path / "mimicry" / "manifest.json")
                              .read_text())
        info_b = manifest["direction_b"]
        assert info_b["mode"] == "k-scale"
        assert 0 < info_b["k_scale"] < 1.0

    def test_k_scale_comparable_to_a_scale_factor(self, tmp_path):
        # the two feasibility rescues should demand a similar reduction:
        # k_scale within a factor ~2 of 1/a_scale
        cfg = _small_config(tmp_path, "mimicry", [0.0, 7.0], mode="k-scale")
        runner = ExperimentRunner(cfg)
        runner.run()
        manifest = json.loads((tmp_path / "mimicry" / "manifest.json")
                              .read_text())
        k_scale = manifest["direction_b"]["k_scale"]
        assert 1 / (2 * 60.0) <= k_scale <= 2 / 60.0


class TestRoundTrip:
    def test_redriven_run_matches(self, tmp_path):
        cfg = _small_config(tmp_path, "round-trip", [0.0, 7.0])
        result = ExperimentRunner(cfg).run()
        report = result["report"]
        assert report["final_state_fidelity"] > 1 - 1e-8
        assert report["max_current_deviation_rel"] < 1e-5


class TestHarmonicBoost:
    def test_boosted_run_artifacts(self, tmp_path):
        cfg = _small_config(tmp_path, "harmonic-boost", [0.0, 7.0], cycles=4)
        paths = ExperimentRunner(cfg).run()
        manifest = json.loads((tmp_path / "harmonic-boost" / "manifest.json")
                              .read_text())
        for tag in ("u0", "u7"):
            assert (tmp_path / "harmonic-boost" / f"trajectory_{tag}.csv") \
                .exists()
            assert "ninth_to_first_db" in manifest["per_u"][tag]
        assert manifest["field_l2_distances"]["u0_vs_u7"] > 0
