"""Matplotlib renderings of the exported data products."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from scipy import stats  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "lines.linewidth": 1.0,
    "figure.dpi": 100,
}
THEORY_COLOR = "tab:orange"
WINDOW = 100  # samples shown in waveform panels (100 ms at 1 ms steps)


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_survival(hist, path) -> Path:
    amb = hist.ambiguous_frac
    nz = np.flatnonzero(hist.ambiguous > 0)
    last = min(int(nz[-1]) + 2 if nz.size else 1, hist.ambiguous.size - 1)
    n = hist.steps[: last + 1]
    with plt.rc_context(STYLE):
        fig, (ax_a, ax_b) = plt.subplots(1, 2, figsize=(7.0, 2.8))
        ax_a.bar(n, amb[: last + 1], width=0.8, color="tab:blue", label="simulation")
        ax_a.plot(n, hist.theory[: last + 1], color=THEORY_COLOR, label=r"$2^{-n}$")
        ax_a.set_yscale("log")
        ax_a.set_xlabel("Nyquist steps n")
        ax_a.set_ylabel("P(still secure)")
        ax_a.legend()
        cum = hist.cumulative_cracked / hist.secure_count
        ax_b.bar(n, cum[: last + 1], width=0.8, color="tab:blue", label="simulation")
        ax_b.plot(n, 1.0 - hist.theory[: last + 1], color=THEORY_COLOR, label=r"$1-2^{-n}$")
        ax_b.set_xlabel("Nyquist steps n")
        ax_b.set_ylabel("P(cracked)")
        ax_b.legend(loc="lower right")
        return _save(fig, Path(path))


def plot_generators(demo, path) -> Path:
    t = demo["time_s"][:WINDOW] * 1e3
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(4, 1, figsize=(6.0, 6.0), sharex=True)
        for ax, key, label in zip(axes, ("u_ha", "u_la", "u_hb", "u_lb"), ("$U_{H,A}$", "$U_{L,A}$", "$U_{H,B}$", "$U_{L,B}$")):
            ax.plot(t, demo[key][:WINDOW])
            ax.set_ylabel(label + " [V]")
        axes[-1].set_xlabel("time [ms]")
        return _save(fig, Path(path))


def plot_hypotheses(demo, path) -> Path:
    t = demo["time_s"][:WINDOW] * 1e3
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(5, 1, figsize=(6.0, 7.5), sharex=True)
        for ax, key in zip(axes, ("hh", "ll", "hl", "lh")):
            p = demo[f"p_{key}"][:WINDOW]
            ax.plot(t, p, color="tab:blue")
            ax.plot(t, demo[f"s_{key}"][:WINDOW] * np.max(np.abs(p)), "--", color=THEORY_COLOR)
            ax.set_ylabel(f"$P_{{{key.upper()}}}$ [W]")
        axes[-1].step(t, demo["s_measured"][:WINDOW], where="mid", color="k")
        axes[-1].set_ylabel("1-bit $P_w$")
        axes[-1].set_xlabel("time [ms]")
        fig.suptitle(f"true situation {demo['situation'].value}")
        return _save(fig, Path(path))


def plot_wire(demo, path) -> Path:
    t = demo["time_s"][:WINDOW] * 1e3
    with plt.rc_context(STYLE):
        fig, (ax_u, ax_i) = plt.subplots(2, 1, figsize=(6.0, 3.6), sharex=True)
        ax_u.plot(t, demo["u_w"][:WINDOW])
        ax_u.set_ylabel("$U_w$ [V]")
        ax_i.plot(t, demo["i_w"][:WINDOW] * 1e3)
        ax_i.set_ylabel("$I_w$ [mA]")
        ax_i.set_xlabel("time [ms]")
        return _save(fig, Path(path))


def plot_reconstruction(demo, path) -> Path:
    t = demo["time_s"][:WINDOW] * 1e3
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(2, 2, figsize=(7.0, 4.0), sharex=True)
        axes[0, 0].plot(t, demo["drop_rl"][:WINDOW])
        axes[0, 0].set_ylabel("$I_w R_L$ [V]")
        axes[0, 1].plot(t, demo["drop_rh"][:WINDOW])
        axes[0, 1].set_ylabel("$I_w R_H$ [V]")
        axes[1, 0].plot(t, demo["u_la"][:WINDOW], label="$U_{L,A}$")
        axes[1, 0].plot(t, demo["u_star_rl"][:WINDOW], "--", color=THEORY_COLOR, label="$U^*_{R_L}$")
        axes[1, 1].plot(t, demo["u_ha"][:WINDOW], label="$U_{H,A}$")
        axes[1, 1].plot(t, demo["u_star_rh"][:WINDOW], "--", color=THEORY_COLOR, label="$U^*_{R_H}$")
        for ax in axes[1]:
            ax.set_xlabel("time [ms]")
            ax.legend()
        return _save(fig, Path(path))


def plot_psd(spectrum, path, band_hz=None) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5.0, 3.0))
        floor = spectrum.density[spectrum.density > 0].min() if np.any(spectrum.density > 0) else 1.0
        ax.semilogy(spectrum.frequencies, np.maximum(spectrum.density, floor))
        if band_hz:
            ax.axvline(band_hz, color=THEORY_COLOR, ls="--")
        ax.set_xlabel("frequency [Hz]")
        ax.set_ylabel("PSD [1/Hz]")
        return _save(fig, Path(path))


def plot_probability(series, path) -> Path:
    (osm, osr), (slope, intercept, _) = stats.probplot(series.samples, dist="norm")
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.0, 4.0))
        ax.plot(osm, osr, ".", ms=2)
        ax.plot(osm, slope * osm + intercept, color=THEORY_COLOR)
        ax.set_xlabel("normal quantile")
        ax.set_ylabel("ordered sample")
        return _save(fig, Path(path))


def render_all(hist, out_dir, demo=None, noise=None, spectrum=None, band_hz=None) -> list[Path]:
    out = Path(out_dir)
    files = []
    if hist.secure_count:
        files.append(plot_survival(hist, out / "survival.png"))
    if demo is not None:
        files.append(plot_generators(demo, out / "generators.png"))
        files.append(plot_hypotheses(demo, out / "hypotheses.png"))
        files.append(plot_wire(demo, out / "wire.png"))
        files.append(plot_reconstruction(demo, out / "reconstruction.png"))
    if spectrum is not None:
        files.append(plot_psd(spectrum, out / "psd.png", band_hz))
    if noise is not None:
        files.append(plot_probability(noise, out / "probplot.png"))
    return files
