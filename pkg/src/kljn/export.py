"""CSV data products and run manifests.

File names and columns written by :func:`export_figures`:

``survival.csv``       n, t_s, ambiguous_frac, theory_frac
``crack.csv``          n, t_s, cracked_count, cumulative_cracked_frac, theory_frac
``trials.csv``         one row per trial, columns depend on the attack mode
``waveforms.csv``      time_s, u_ha, u_la, u_hb, u_lb, u_w, i_w, p_w
``hypotheses.csv``     time_s, p_hh, p_hl, p_lh, p_ll, s_hh, s_hl, s_lh, s_ll, s_measured
``reconstruction.csv`` time_s, drop_rl, drop_rh, u_star_rl, u_star_rh, u_la, u_ha
``noise.csv``          time_s, value_v  (anti-aliased unit noise behind the PSD)
``psd.csv``            freq_hz, density_v2_per_hz
``manifest.txt``       key=value provenance record

Floats are written with ``repr`` so re-exports are byte-identical.
"""

from __future__ import annotations

import csv
import os
from importlib import metadata
from pathlib import Path

import numpy as np

from . import seeds
from .attacks import BilateralVerdict, UnilateralVerdict, hypothetical_powers, reconstruct_alice_voltage, sign_quantize
from .channel import make_bank, power_flow, simulate_wire
from .harness import Experiment, ExperimentConfig, SurvivalHistogram, TrialRecord, trial_situation
from .noise_gen import NoiseSeries, Spectrum, band_limited_noise, psd_estimate

SURVIVAL_COLUMNS = ["n", "t_s", "ambiguous_frac", "theory_frac"]
CRACK_COLUMNS = ["n", "t_s", "cracked_count", "cumulative_cracked_frac", "theory_frac"]
BILATERAL_TRIAL_COLUMNS = ["trial_id", "true_situation", "decided_situation", "decision_step", "secure_ambiguous_steps", "correct", "error"]
UNILATERAL_TRIAL_COLUMNS = ["trial_id", "true_situation", "alice_resistor", "bob_resistor", "residual_low", "residual_high", "estimated_rp", "estimated_rb", "correct", "error"]
WAVEFORM_COLUMNS = ["time_s", "u_ha", "u_la", "u_hb", "u_lb", "u_w", "i_w", "p_w"]


def package_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def _write(path: Path, header: list[str], rows) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def _columns(*arrays):
    return zip(*(np.asarray(a).tolist() for a in arrays))


def write_series_csv(series: NoiseSeries, path) -> Path:
    return _write(Path(path), ["time_s", "value_v"], _columns(series.times, series.samples))


def write_spectrum_csv(spectrum: Spectrum, path) -> Path:
    return _write(Path(path), ["freq_hz", "density_v2_per_hz"], _columns(spectrum.frequencies, spectrum.density))


def write_bilateral_trace(verdict: BilateralVerdict, path) -> Path:
    rows = zip(
        range(1, len(verdict.surviving_hypotheses_per_step) + 1),
        verdict.surviving_hypotheses_per_step.tolist(),
        verdict.survivor_masks(),
    )
    return _write(Path(path), ["step", "surviving_count", "survivor_mask"], rows)


def write_unilateral_residuals(verdict: UnilateralVerdict, path) -> Path:
    rows = [("R_L", verdict.residual_low), ("R_H", verdict.residual_high)]
    return _write(Path(path), ["hypothesis", "rms_residual"], rows)


def write_survival_csv(hist: SurvivalHistogram, path) -> Path:
    if hist.secure_count == 0:
        return _write(Path(path), SURVIVAL_COLUMNS, [])
    n = hist.steps
    return _write(Path(path), SURVIVAL_COLUMNS, _columns(n, n * hist.tau_s, hist.ambiguous_frac, hist.theory))


def write_crack_csv(hist: SurvivalHistogram, path) -> Path:
    if hist.secure_count == 0:
        return _write(Path(path), CRACK_COLUMNS, [])
    n = hist.steps
    rows = _columns(n, n * hist.tau_s, hist.cracked, hist.cumulative_cracked / hist.secure_count, 1.0 - hist.theory)
    return _write(Path(path), CRACK_COLUMNS, rows)


def _trial_row(r: TrialRecord, bep_samples: int):
    v = r.verdict
    if r.attack_mode == "bilateral":
        decided = v.decided_situation.value if v is not None and v.decided else ""
        step = v.decision_step if v is not None and v.decided else ""
        amb = r.ambiguous_steps(bep_samples) if r.secure else ""
        return [r.trial_id, r.true_situation.value, decided, step, amb, int(r.correct), r.error]
    if v is None:
        return [r.trial_id, r.true_situation.value, "", "", "", "", "", "", 0, r.error]
    return [
        r.trial_id, r.true_situation.value, v.alice_resistor.value, v.bob_resistor.value,
        v.residual_low, v.residual_high, v.estimated_rp, v.estimated_rb, int(r.correct), r.error,
    ]


def write_trials_csv(records: list[TrialRecord], path, bep_samples: int, attack_mode: str = "bilateral") -> Path:
    header = BILATERAL_TRIAL_COLUMNS if attack_mode == "bilateral" else UNILATERAL_TRIAL_COLUMNS
    return _write(Path(path), header, (_trial_row(r, bep_samples) for r in records))


def demo_products(cfg: ExperimentConfig, trial_id: int) -> dict[str, np.ndarray]:
    """Every waveform of one BEP: generators, wire, hypotheses, reconstructions."""
    situation = trial_situation(cfg, trial_id)
    bank = make_bank(cfg.master_seed, trial_id, cfg.bep_samples, cfg.pair, cfg.noise)
    obs = simulate_wire(bank, situation, cfg.pair)
    p = power_flow(obs).p_w
    out = {
        "situation": situation,
        "time_s": bank.u_ha.times,
        "u_ha": bank.u_ha.samples, "u_la": bank.u_la.samples,
        "u_hb": bank.u_hb.samples, "u_lb": bank.u_lb.samples,
        "u_w": obs.u_w.samples, "i_w": obs.i_w.samples, "p_w": p,
        "s_measured": sign_quantize(power_flow(obs)).bits,
    }
    for h, ph in hypothetical_powers(bank, cfg.pair).items():
        key = h.value.lower()
        out[f"p_{key}"] = ph.p_w
        out[f"s_{key}"] = sign_quantize(ph).bits
    out["drop_rl"] = obs.i_w.samples * cfg.pair.r_low_ohm
    out["drop_rh"] = obs.i_w.samples * cfg.pair.r_high_ohm
    out["u_star_rl"] = reconstruct_alice_voltage(obs, cfg.pair.r_low_ohm).samples
    out["u_star_rh"] = reconstruct_alice_voltage(obs, cfg.pair.r_high_ohm).samples
    return out


def write_demo_csvs(demo: dict, out_dir: Path) -> list[Path]:
    t = demo["time_s"]
    hyp_cols = ["p_hh", "p_hl", "p_lh", "p_ll", "s_hh", "s_hl", "s_lh", "s_ll", "s_measured"]
    rec_cols = ["drop_rl", "drop_rh", "u_star_rl", "u_star_rh", "u_la", "u_ha"]
    return [
        _write(out_dir / "waveforms.csv", WAVEFORM_COLUMNS, _columns(t, *(demo[c] for c in WAVEFORM_COLUMNS[1:]))),
        _write(out_dir / "hypotheses.csv", ["time_s"] + hyp_cols, _columns(t, *(demo[c] for c in hyp_cols))),
        _write(out_dir / "reconstruction.csv", ["time_s"] + rec_cols, _columns(t, *(demo[c] for c in rec_cols))),
    ]


def psd_segment(n: int) -> int:
    """Largest power of two giving at least 16 segments, floor 16."""
    seg = 16
    while seg * 2 * 16 <= n:
        seg *= 2
    return min(seg, 1 << (n.bit_length() - 1))


def demo_noise(cfg: ExperimentConfig, trial_id: int) -> tuple[NoiseSeries, Spectrum]:
    """Anti-aliased unit noise of Alice's R_L generator and its PSD."""
    seed = seeds.role_seed(cfg.master_seed, trial_id, "u_la")
    fine = band_limited_noise(seed, cfg.bep_samples, cfg.noise)
    return fine, psd_estimate(fine, psd_segment(len(fine)))


def config_items(cfg: ExperimentConfig) -> list[tuple[str, object]]:
    n = cfg.noise
    return [
        ("master_seed", cfg.master_seed),
        ("trials", cfg.trials),
        ("bep_samples", cfg.bep_samples),
        ("attack_mode", cfg.attack_mode),
        ("secure_only", str(cfg.secure_only).lower()),
        ("bandwidth_hz", n.bandwidth_hz),
        ("temperature_k", n.temperature_k),
        ("raw_length", n.raw_length),
        ("ensemble_count", n.ensemble_count),
        ("oversample_factor", n.oversample_factor),
        ("r_low_ohm", cfg.pair.r_low_ohm),
        ("r_high_ohm", cfg.pair.r_high_ohm),
    ]


def write_manifest(cfg: ExperimentConfig, path, extra: dict | None = None) -> Path:
    lines = [f"{k}={v}" for k, v in config_items(cfg)]
    lines.append(f"boltzmann={cfg.noise.boltzmann!r}")
    for k, v in (extra or {}).items():
        lines.append(f"{k}={v}")
    lines.append(f"software_version={package_version()}")
    lines.append(f"numpy_version={np.__version__}")
    Path(path).write_text("\n".join(lines) + "\n")
    return Path(path)


def export_figures(
    records: list[TrialRecord],
    histogram: SurvivalHistogram,
    out_dir,
    cfg: ExperimentConfig | None = None,
    figures: bool = True,
) -> list[Path]:
    """Write the CSV data products (and PNG figures) of a finished experiment.

    Demonstration waveforms need ``cfg`` and at least one record; they are
    taken from the first recorded trial.
    """
    out = Path(os.fspath(out_dir))
    out.mkdir(parents=True, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise PermissionError(f"output directory {out} is not writable")

    mode = cfg.attack_mode if cfg is not None else (records[0].attack_mode if records else "bilateral")
    bep = cfg.bep_samples if cfg is not None else max(histogram.ambiguous.size - 1, 0)
    files = [
        write_survival_csv(histogram, out / "survival.csv"),
        write_crack_csv(histogram, out / "crack.csv"),
        write_trials_csv(records, out / "trials.csv", bep, mode),
    ]
    demo = noise = spectrum = None
    if cfg is not None and records:
        trial_id = records[0].trial_id
        demo = demo_products(cfg, trial_id)
        files += write_demo_csvs(demo, out)
        noise, spectrum = demo_noise(cfg, trial_id)
        files.append(write_series_csv(noise, out / "noise.csv"))
        files.append(write_spectrum_csv(spectrum, out / "psd.csv"))
    if cfg is not None:
        files.append(write_manifest(cfg, out / "manifest.txt", {"secure_trials": histogram.secure_count}))
    if figures:
        from . import plotting

        files += plotting.render_all(histogram, out, demo=demo, noise=noise, spectrum=spectrum, band_hz=cfg.noise.bandwidth_hz if cfg else None)
    return files


def export_experiment(exp: Experiment, out_dir, figures: bool = True) -> list[Path]:
    return export_figures(exp.records, exp.histogram, out_dir, exp.config, figures)

