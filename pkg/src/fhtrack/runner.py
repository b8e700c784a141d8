"""Scenario runner: reproduces the reference, sweep, mimicry, doublon,
harmonic-boost and round-trip experiments and persists their artifacts.

Artifacts per run: one CSV per trajectory, one CSV per spectrum, a JSON
manifest with the fully resolved configuration and derived constants, and
(optionally) SVG figures rendered from the same data.  All heavy pieces
(ground states, reference trajectories) are cached on the runner instance so
scenario compositions do not recompute them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from . import plotting
from .config import ExperimentConfig
from .groundstate import LanczosConfig, ground_state
from .lattice import (LatticeSpec, assemble_hamiltonian, build_basis,
                      build_doublon_operator, build_hop_forward)
from .observables import hop_expectation
from .propagation import TimeGrid, Trajectory, evolve_driven, evolve_tracking
from .pulses import (BreakdownInputs, PulseSpec, breakdown_threshold,
                     correlation_length, mott_gap, reference_phase,
                     threshold_time)
from .spectra import (Spectrum, boosted_target_current, dipole_acceleration,
                      hhg_spectrum, peak_power)
from .tracking import TrackingConfig, scale_target
from .units import HBAR_EV_FS, field_times_a_ev

TRAJECTORY_HEADER = ("t_fs,t_natural,phi_rad,current,R,theta_rad,doublon,"
                     "norm,margin_X,margin_R")


@dataclass
class ReferenceRun:
    u_over_t0: float
    spec: LatticeSpec
    energy: float
    trajectory: Trajectory
    spectrum: Spectrum
    ground_r: float


class ExperimentRunner:
    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg.validate()
        self.outdir = Path(cfg.outdir)
        self._basis = None
        self._k = None
        self._d = None
        self._grounds: dict[float, tuple] = {}
        self._references: dict[float, ReferenceRun] = {}

    # -- shared building blocks -------------------------------------------

    @property
    def pulse(self) -> PulseSpec:
        p = self.cfg.pulse
        return PulseSpec(e0=p.e0, freq_thz=p.freq_thz, cycles=p.cycles,
                         a=self.cfg.lattice.a, angular=p.angular)

    def spec_for(self, u_over_t0: float) -> LatticeSpec:
        lat = self.cfg.lattice
        return LatticeSpec(L=lat.L, n_up=lat.n_up, n_down=lat.n_down,
                           t0=lat.t0, u=u_over_t0 * lat.t0, a=lat.a,
                           periodic=lat.periodic)

    def operators(self):
        if self._k is None:
            spec = self.spec_for(0.0)
            self._basis = build_basis(spec)
            self._k = build_hop_forward(self._basis, spec)
            self._d = build_doublon_operator(self._basis, spec)
        return self._k, self._d

    def grid(self) -> TimeGrid:
        return TimeGrid.for_cycles(self.pulse.omega0_ev, self.cfg.pulse.cycles,
                                   self.cfg.numerics.steps_per_cycle)

    def tracking_config(self, a_track: float | None = None) -> TrackingConfig:
        num = self.cfg.numerics
        return TrackingConfig(eps1=num.eps1, eps2=num.eps2, a_track=a_track)

    def ground(self, u_over_t0: float):
        if u_over_t0 not in self._grounds:
            k, d = self.operators()
            spec = self.spec_for(u_over_t0)
            h0 = assemble_hamiltonian(k, d, spec, 0.0)
            num = self.cfg.numerics
            cfg = LanczosConfig(max_krylov=num.lanczos_max_krylov,
                                tol=num.lanczos_tol, seed=num.lanczos_seed)
            self._grounds[u_over_t0] = ground_state(h0, cfg)
        return self._grounds[u_over_t0]

    def reference(self, u_over_t0: float) -> ReferenceRun:
        if u_over_t0 not in self._references:
            k, d = self.operators()
            spec = self.spec_for(u_over_t0)
            energy, psi = self.ground(u_over_t0)
            pulse = self.pulse
            traj = evolve_driven(psi, k, d, spec,
                                 lambda t: reference_phase(t, pulse),
                                 self.grid())
            spectrum = self._spectrum_of(traj)
            self._references[u_over_t0] = ReferenceRun(
                u_over_t0=u_over_t0, spec=spec, energy=energy,
                trajectory=traj, spectrum=spectrum,
                ground_r=hop_expectation(psi, k).R)
        return self._references[u_over_t0]

    def _spectrum_of(self, traj: Trajectory) -> Spectrum:
        accel = dipole_acceleration(traj.t, traj.current)
        return hhg_spectrum(accel, traj.t[1] - traj.t[0], self.pulse.omega0_ev)

    def breakdown(self, u_over_t0: float) -> dict:
        spec = self.spec_for(u_over_t0)
        if spec.u == 0.0:
            return {"delta_ev": 0.0, "xi_sites": None, "e_th_mv_cm": 0.0,
                    "t_th_natural": 0.0}
        delta = mott_gap(spec.u, spec.t0)
        xi = correlation_length(spec.u, spec.t0)
        inputs = BreakdownInputs(delta=delta, xi=xi)
        return {
            "delta_ev": delta,
            "xi_sites": xi,
            "e_th_mv_cm": breakdown_threshold(inputs, spec.a),
            "t_th_natural": threshold_time(self.pulse, inputs),
        }

    # -- tracking helpers -------------------------------------------------

    def track_in_system(self, system_u: float, target: Trajectory,
                        apply_scaling: bool):
        """Track a recorded current in the ``system_u`` system.

        ``apply_scaling`` engages the configured feasibility mode (lattice
        rescaling or target rescaling); without it the target is tracked
        verbatim.  Returns (trajectory, info dict).
        """
        k, d = self.operators()
        spec = self.spec_for(system_u)
        _, psi = self.ground(system_u)
        trk = self.cfg.tracking
        info = {"system_u_over_t0": system_u, "mode": None, "k_scale": 1.0,
                "a_track": spec.a}
        j_values = target.current
        tcfg = self.tracking_config()
        if apply_scaling:
            info["mode"] = trk.mode
            if trk.mode == "a-scale":
                tcfg = self.tracking_config(a_track=trk.a_scale * spec.a)
                info["a_track"] = trk.a_scale * spec.a
            else:
                floor = trk.r_floor_safety * hop_expectation(psi, k).R
                k_scale, j_values = scale_target(target.current, spec, floor,
                                                 tcfg)
                info["k_scale"] = k_scale
        j_callable = CubicSpline(target.t, j_values)
        traj = evolve_tracking(psi, k, d, spec, j_callable, self.grid(), tcfg)
        info["branch_jumps"] = traj.meta.get("branch_jumps", 0)
        return traj, info

    # -- scenarios --------------------------------------------------------

    def run_reference(self) -> dict:
        out = self._prepare_outdir("reference")
        paths, per_u = {}, {}
        for u in self.cfg.u_over_t0:
            ref = self.reference(u)
            tag = _u_tag(u)
            paths[f"trajectory_{tag}"] = self._write_trajectory(
                out / f"trajectory_{tag}.csv", ref.trajectory)
            paths[f"spectrum_{tag}"] = self._write_spectrum(
                out / f"spectrum_{tag}.csv", ref.spectrum)
            per_u[tag] = {"ground_energy_ev": ref.energy,
                          "ground_r": ref.ground_r, **self.breakdown(u)}
        if self.cfg.plots:
            refs = {f"U={u:g}t0": self.reference(u) for u in self.cfg.u_over_t0}
            paths["figure_currents"] = plotting.time_series_figure(
                out / "currents.svg",
                {k: (r.trajectory.t * HBAR_EV_FS, r.trajectory.current)
                 for k, r in refs.items()},
                ylabel="current (a t0)")
            paths["figure_spectra"] = plotting.spectrum_figure(
                out / "spectra.svg", {k: r.spectrum for k, r in refs.items()})
        self._write_manifest(out, scenario="reference", extra={"per_u": per_u})
        return paths

    def run_doublon_sweep(self) -> dict:
        out = self._prepare_outdir("doublon-sweep")
        u_list = list(self.cfg.u_over_t0)
        refs = {u: self.reference(u) for u in u_list}
        thresholds = {u: self.breakdown(u) for u in u_list}

        t = refs[u_list[0]].trajectory.t
        columns = [("t_fs", t * HBAR_EV_FS), ("t_natural", t)]
        columns += [(f"doublon_{_u_tag(u)}", refs[u].trajectory.doublon)
                    for u in u_list]
        paths = {"doublon": self._write_columns(out / "doublon.csv", columns)}

        rows = []
        for u in u_list:
            th = thresholds[u]
            t_th = th["t_th_natural"]
            rows.append([f"{u:.6g}", _fmt(th["delta_ev"]),
                         _fmt(th["xi_sites"]), _fmt(th["e_th_mv_cm"]),
                         "" if t_th is None else _fmt(t_th)])
        paths["thresholds"] = self._write_table(
            out / "thresholds.csv",
            "u_over_t0,delta_ev,xi_sites,e_th_mv_cm,t_th_natural", rows)
        if self.cfg.plots:
            paths["figure"] = plotting.doublon_sweep_figure(
                out / "doublon_sweep.svg",
                {u: (t * HBAR_EV_FS, refs[u].trajectory.doublon) for u in u_list},
                {u: (None if thresholds[u]["t_th_natural"] is None
                     else thresholds[u]["t_th_natural"] * HBAR_EV_FS)
                 for u in u_list})
        self._write_manifest(out, scenario="doublon-sweep",
                             extra={"thresholds": _jsonable(thresholds)})
        return paths

    def run_mimicry(self) -> dict:
        """Swap the currents of the source and target systems.

        Direction A: the source-U system tracks the target-U current
        verbatim.  Direction B: the target-U system tracks the source-U
        current with the configured feasibility mode engaged (the source
        current is the metallic, large one in the reference setup).
        """
        out = self._prepare_outdir("mimicry")
        trk = self.cfg.tracking
        u_src, u_tgt = trk.source_u_over_t0, trk.target_u_over_t0
        ref_src, ref_tgt = self.reference(u_src), self.reference(u_tgt)

        tracked_src, info_a = self.track_in_system(u_src, ref_tgt.trajectory,
                                                   apply_scaling=False)
        tracked_tgt, info_b = self.track_in_system(u_tgt, ref_src.trajectory,
                                                   apply_scaling=True)

        paths = {}
        runs = {
            f"ref_{_u_tag(u_src)}": ref_src.trajectory,
            f"ref_{_u_tag(u_tgt)}": ref_tgt.trajectory,
            f"tracked_{_u_tag(u_src)}": tracked_src,
            f"tracked_{_u_tag(u_tgt)}": tracked_tgt,
        }
        spectra = {}
        for name, traj in runs.items():
            paths[f"trajectory_{name}"] = self._write_trajectory(
                out / f"trajectory_{name}.csv", traj)
            spectra[name] = self._spectrum_of(traj)
            paths[f"spectrum_{name}"] = self._write_spectrum(
                out / f"spectrum_{name}.csv", spectra[name])

        fidelity = {
            "max_rel_error_src_tracks_tgt": _tracking_error(
                tracked_src, ref_tgt.trajectory.current * 1.0),
            "max_rel_error_tgt_tracks_src": _tracking_error(
                tracked_tgt, ref_src.trajectory.current * info_b["k_scale"]),
        }
        if self.cfg.plots:
            paths["figure_fields"] = plotting.time_series_figure(
                out / "fields.svg",
                {name: (traj.t * HBAR_EV_FS, traj.phi)
                 for name, traj in runs.items()},
                ylabel="Peierls phase (rad)")
            paths["figure_spectra"] = plotting.spectrum_figure(
                out / "spectra.svg", spectra)
        self._write_manifest(out, scenario="mimicry", extra={
            "direction_a": info_a, "direction_b": info_b,
            "tracking_fidelity": fidelity})
        self._mimicry_cache = (runs, info_a, info_b)
        return paths

    def run_doublon_tracking(self) -> dict:
        out = self._prepare_outdir("doublon-tracking")
        if not hasattr(self, "_mimicry_cache"):
            self.run_mimicry()
        runs, info_a, info_b = self._mimicry_cache
        trk = self.cfg.tracking
        u_src, u_tgt = trk.source_u_over_t0, trk.target_u_over_t0
        tag_s, tag_t = _u_tag(u_src), _u_tag(u_tgt)

        t = runs[f"ref_{tag_s}"].t
        columns = [("t_fs", t * HBAR_EV_FS), ("t_natural", t)]
        for name in (f"ref_{tag_s}", f"tracked_{tag_s}",
                     f"ref_{tag_t}", f"tracked_{tag_t}"):
            columns.append((f"doublon_{name}", runs[name].doublon))
        paths = {"doublon": self._write_columns(out / "doublon_tracking.csv",
                                                columns)}

        # Predicted breakdown of the tracked insulating system: first time
        # the field implied by the tracking phase exceeds E_th of that U.
        tracked = runs[f"tracked_{tag_t}"]
        breakdown = self.breakdown(u_tgt)
        t_break = _field_threshold_time(tracked, info_b["a_track"],
                                        breakdown["e_th_mv_cm"])
        contrast = _doublon_contrast(runs, tag_s, tag_t, self.pulse,
                                     self.grid())
        if self.cfg.plots:
            paths["figure"] = plotting.doublon_tracking_figure(
                out / "doublon_tracking.svg", t * HBAR_EV_FS,
                {name: runs[name].doublon for name in
                 (f"ref_{tag_s}", f"tracked_{tag_s}",
                  f"ref_{tag_t}", f"tracked_{tag_t}")},
                None if t_break is None else t_break * HBAR_EV_FS)
        self._write_manifest(out, scenario="doublon-tracking", extra={
            "breakdown_target_u": _jsonable(breakdown),
            "tracked_field_threshold_time_natural": t_break,
            "doublon_contrast": contrast})
        return paths

    def run_harmonic_boost(self) -> dict:
        out = self._prepare_outdir("harmonic-boost")
        trk = self.cfg.tracking
        source = self.reference(self.cfg.u_over_t0[0])
        k_op, _ = self.operators()

        paths, tracked_runs, info = {}, {}, {}
        target_callable = None
        for u in self.cfg.u_over_t0:
            spec = self.spec_for(u)
            _, psi = self.ground(u)
            tcfg = self.tracking_config()
            floor = trk.r_floor_safety * hop_expectation(psi, k_op).R
            j_call, k_scale, j_scaled = boosted_target_current(
                source.trajectory.t, source.trajectory.current,
                self.pulse.omega0_ev, spec, tcfg, floor,
                boost_harmonic=trk.boost_harmonic, boost_ratio=trk.boost_ratio)
            if target_callable is None:
                target_callable = j_call
            traj = evolve_tracking(psi, self.operators()[0],
                                   self.operators()[1], spec, j_call,
                                   self.grid(), tcfg)
            tag = _u_tag(u)
            tracked_runs[tag] = traj
            spectrum = self._spectrum_of(traj)
            info[tag] = {
                "k_scale": k_scale,
                "ninth_to_first_db": 10.0 * np.log10(
                    peak_power(spectrum, trk.boost_harmonic)
                    / peak_power(spectrum, 1.0)),
            }
            paths[f"trajectory_{tag}"] = self._write_trajectory(
                out / f"trajectory_{tag}.csv", traj)
            paths[f"spectrum_{tag}"] = self._write_spectrum(
                out / f"spectrum_{tag}.csv", spectrum)

        tags = [_u_tag(u) for u in self.cfg.u_over_t0]
        distances = {}
        for i, tag_a in enumerate(tags):
            for tag_b in tags[i + 1:]:
                distances[f"{tag_a}_vs_{tag_b}"] = _normalized_l2(
                    tracked_runs[tag_a].phi, tracked_runs[tag_b].phi)
        if self.cfg.plots:
            paths["figure_fields"] = plotting.time_series_figure(
                out / "fields.svg",
                {tag: (traj.t * HBAR_EV_FS, traj.phi)
                 for tag, traj in tracked_runs.items()},
                ylabel="tracking phase (rad)")
            paths["figure_spectra"] = plotting.spectrum_figure(
                out / "spectra.svg",
                {tag: self._spectrum_of(traj)
                 for tag, traj in tracked_runs.items()})
        self._write_manifest(out, scenario="harmonic-boost", extra={
            "per_u": info, "field_l2_distances": distances})
        return paths

    def run_round_trip(self) -> dict:
        """Re-drive a tracking run with its own recorded field and compare."""
        out = self._prepare_outdir("round-trip")
        trk = self.cfg.tracking
        u_sys, u_src = trk.source_u_over_t0, trk.target_u_over_t0
        target = self.reference(u_src)
        tracked, info = self.track_in_system(u_sys, target.trajectory,
                                             apply_scaling=False)
        k, d = self.operators()
        spec = self.spec_for(u_sys)
        _, psi = self.ground(u_sys)
        phi_spline = CubicSpline(tracked.t, np.unwrap(tracked.phi))
        redriven = evolve_driven(psi, k, d, spec, phi_spline, self.grid())

        dev = np.max(np.abs(redriven.current - tracked.current)) \
            / max(np.max(np.abs(tracked.current)), 1e-300)
        fidelity = abs(np.vdot(tracked.final_state, redriven.final_state))
        report = {"max_current_deviation_rel": float(dev),
                  "final_state_fidelity": float(fidelity),
                  "tracking_info": info}
        paths = {
            "trajectory_tracked": self._write_trajectory(
                out / "trajectory_tracked.csv", tracked),
            "trajectory_redriven": self._write_trajectory(
                out / "trajectory_redriven.csv", redriven),
        }
        self._write_manifest(out, scenario="round-trip", extra=report)
        return {**paths, "report": report}

    def run(self) -> dict:
        dispatch = {
            "reference": self.run_reference,
            "doublon-sweep": self.run_doublon_sweep,
            "mimicry": self.run_mimicry,
            "doublon-tracking": self.run_doublon_tracking,
            "harmonic-boost": self.run_harmonic_boost,
            "round-trip": self.run_round_trip,
        }
        return dispatch[self.cfg.scenario]()

    # -- artifact writers -------------------------------------------------

    def _prepare_outdir(self, scenario: str) -> Path:
        out = self.outdir / scenario
        out.mkdir(parents=True, exist_ok=True)
        return out

    def _write_trajectory(self, path: Path, traj: Trajectory) -> Path:
        rows = np.column_stack([
            traj.t * HBAR_EV_FS, traj.t, traj.phi, traj.current, traj.hop_r,
            traj.hop_theta, traj.doublon, traj.norm, traj.margin_x,
            traj.margin_r])
        return self._write_table(path, TRAJECTORY_HEADER,
                                 [[_fmt(v) for v in row] for row in rows])

    def _write_spectrum(self, path: Path, spectrum: Spectrum) -> Path:
        rows = [[_fmt(o), _fmt(p)]
                for o, p in zip(spectrum.order, spectrum.power)]
        return self._write_table(path, "harmonic_order,power", rows)

    def _write_columns(self, path: Path, columns) -> Path:
        header = ",".join(name for name, _ in columns)
        data = np.column_stack([values for _, values in columns])
        return self._write_table(path, header,
                                 [[_fmt(v) for v in row] for row in data])

    def _write_table(self, path: Path, header: str, rows) -> Path:
        with open(path, "w", newline="\n") as fh:
            fh.write(header + "\n")
            for row in rows:
                fh.write(",".join(row) + "\n")
        return path

    def _write_manifest(self, out: Path, scenario: str, extra: dict) -> Path:
        pulse = self.pulse
        manifest = {
            "scenario": scenario,
            "config": self.cfg.to_dict(),
            "derived": {
                "omega0_ev": pulse.omega0_ev,
                "a_e0_ev": field_times_a_ev(pulse.e0, pulse.a),
                "phase_amplitude": pulse.amplitude,
                "pulse_duration_natural": pulse.duration,
                "dt_natural": self.grid().dt,
                "hbar_ev_fs": HBAR_EV_FS,
            },
            **_jsonable(extra),
        }
        path = out / "manifest.json"
        path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        return path


# -- small helpers --------------------------------------------------------


def _u_tag(u_over_t0: float) -> str:
    return f"u{u_over_t0:g}".replace(".", "p")


def _fmt(value) -> str:
    if value is None:
        return ""
    return f"{value:.12e}"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _tracking_error(traj: Trajectory, target_current: np.ndarray) -> float:
    scale = max(np.max(np.abs(target_current)), 1e-300)
    return float(np.max(np.abs(traj.current - target_current)) / scale)


def _normalized_l2(a: np.ndarray, b: np.ndarray) -> float:
    denom = max(np.linalg.norm(a), np.linalg.norm(b), 1e-300)
    return float(np.linalg.norm(a - b) / denom)


def _field_threshold_time(traj: Trajectory, a_track: float,
                          e_th_mv_cm: float):
    """First time |E| from the (unwrapped) tracking phase exceeds E_th."""
    phi = np.unwrap(traj.phi)
    dt = traj.t[1] - traj.t[0]
    e_field = -np.gradient(phi, dt) / (a_track * 1e-2)  # MV/cm
    above = np.nonzero(np.abs(e_field) >= e_th_mv_cm)[0]
    if len(above) == 0:
        return None
    return float(traj.t[above[0]])


def _doublon_contrast(runs, tag_s, tag_t, pulse, grid) -> dict:
    """Late-time doublon statistics used for the mimicry contrast claims."""
    steps_per_cycle = grid.steps // pulse.cycles
    tail = slice(-3 * steps_per_cycle, None)
    d_ref_t = runs[f"ref_{tag_t}"].doublon
    d_trk_t = runs[f"tracked_{tag_t}"].doublon
    d_ref_s = runs[f"ref_{tag_s}"].doublon
    d_trk_s = runs[f"tracked_{tag_s}"].doublon
    return {
        "target_tail_mean_ref": float(np.mean(d_ref_t[tail])),
        "target_tail_mean_tracked": float(np.mean(d_trk_t[tail])),
        "target_tail_ratio": float(np.mean(d_trk_t[tail])
                                   / max(np.mean(d_ref_t[tail]), 1e-300)),
        "source_max_abs_diff": float(np.max(np.abs(d_trk_s - d_ref_s))),
        "source_ref_peak_to_peak": float(np.ptp(d_ref_s)),
    }
