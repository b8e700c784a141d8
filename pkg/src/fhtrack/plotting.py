"""Static figure rendering for run artifacts.

Batch output only: every function takes data already computed by the runner
and writes an SVG next to the CSVs.  Uses the Agg backend so runs never need
a display.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_FIG_KW = {"figsize": (7.0, 4.2), "dpi": 120}


def _finish(fig, ax, path: Path) -> Path:
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def time_series_figure(path, series: dict, ylabel: str,
                       xlabel: str = "t (fs)") -> Path:
    """One panel of labelled time traces; ``series`` maps label -> (t, y)."""
    fig, ax = plt.subplots(**_FIG_KW)
    for label, (t, y) in series.items():
        ax.plot(t, y, label=label, lw=0.9)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend(fontsize=8)
    return _finish(fig, ax, Path(path))


def spectrum_figure(path, spectra: dict, max_order: float = 40.0) -> Path:
    """Log-power spectra against harmonic order."""
    fig, ax = plt.subplots(**_FIG_KW)
    for label, spectrum in spectra.items():
        mask = spectrum.order <= max_order
        ax.semilogy(spectrum.order[mask], spectrum.power[mask],
                    label=label, lw=0.9)
    ax.set_xlabel("harmonic order $\\omega/\\omega_0$")
    ax.set_ylabel("power (arb. units)")
    ax.legend(fontsize=8)
    return _finish(fig, ax, Path(path))


def doublon_sweep_figure(path, traces: dict, thresholds: dict) -> Path:
    """Doublon traces for a U sweep with predicted breakdown times marked."""
    fig, ax = plt.subplots(**_FIG_KW)
    cmap = plt.get_cmap("viridis")
    n = max(len(traces) - 1, 1)
    for i, (u, (t, d)) in enumerate(sorted(traces.items())):
        color = cmap(i / n)
        ax.plot(t, d, color=color, lw=0.9, label=f"U={u:g}$t_0$")
        t_th = thresholds.get(u)
        if t_th is not None and t_th > 0:
            idx = min(range(len(t)), key=lambda j: abs(t[j] - t_th))
            ax.plot([t_th], [d[idx]], "k.", ms=7)
    ax.set_xlabel("t (fs)")
    ax.set_ylabel("doublon occupation $D(t)$")
    ax.legend(fontsize=7, ncols=2)
    return _finish(fig, ax, Path(path))


def doublon_tracking_figure(path, t_fs, traces: dict, t_break_fs) -> Path:
    """Reference vs tracked doublon densities, breakdown time marked."""
    fig, ax = plt.subplots(**_FIG_KW)
    for label, d in traces.items():
        style = "--" if label.startswith("tracked") else "-"
        ax.plot(t_fs, d, style, lw=1.0, label=label)
    if t_break_fs is not None:
        ax.axvline(t_break_fs, color="k", lw=0.8, ls=":",
                   label="predicted breakdown")
    ax.set_xlabel("t (fs)")
    ax.set_ylabel("doublon occupation $D(t)$")
    ax.legend(fontsize=8)
    return _finish(fig, ax, Path(path))
