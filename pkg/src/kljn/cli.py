"""Command-line front end.

Exit codes:

    0  success
    1  a noise-check threshold failed
    2  usage error (unknown flag or subcommand)
    3  unknown config key
    4  invalid config value or violated invariant
    5  I/O error (unreadable config, unwritable output directory)
    6  runtime error during computation

The output directory is ``--out-dir``, else ``$KLJN_OUT_DIR``, else
``kljn_out``.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import config as cfgmod

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_UNKNOWN_KEY = 3
EXIT_INVALID = 4
EXIT_IO = 5
EXIT_RUNTIME = 6

SUBCOMMANDS = ("noise-check", "demo-bep", "attack-bilateral", "attack-unilateral", "monte-carlo")
OUT_DIR_ENV = "KLJN_OUT_DIR"

# noise-check thresholds
MAX_ABS_SKEW = 0.02
MAX_ABS_EXCESS_KURTOSIS = 0.05
MAX_PSD_DEVIATION = 0.20
MIN_REJECTION_DB = 60.0


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class CliInvocation:
    subcommand: str
    config_path: Path | None
    overrides: tuple[str, ...]
    out_dir: Path
    seed: int | None
    figures: bool = True
    settings: cfgmod.RunSettings = field(default=None, repr=False)


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kljn", description="KLJN key exchange and compromised-RNG attack simulator")
    sub = parser.add_subparsers(dest="subcommand", required=True, metavar="SUBCOMMAND")
    helps = {
        "noise-check": "validate Gaussianity, spectrum and Johnson scaling of the noise generator",
        "demo-bep": "dump every waveform of one bit exchange period",
        "attack-bilateral": "run the attack with both parties' seeds on one BEP",
        "attack-unilateral": "run the attack with Alice's seeds on one BEP",
        "monte-carlo": "run the batch experiment and export survival statistics",
    }
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--config", type=Path, help="key=value config file")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE", help="override one config key (repeatable)")
        p.add_argument("--out-dir", type=Path, help=f"output directory (default ${OUT_DIR_ENV} or ./kljn_out)")
        p.add_argument("--seed", type=lambda s: int(s, 0), help="master seed, overrides the config")
        p.add_argument("--no-figures", dest="figures", action="store_false", help="skip PNG rendering")
    return parser


def parse_and_validate(argv) -> CliInvocation:
    """Parse ``argv`` and resolve the full configuration.

    Raises :class:`CliError` for config problems; argparse itself exits
    with code 2 on unknown flags.
    """
    args = _parser().parse_args(argv)
    if args.config is not None and not args.config.is_file():
        raise CliError(EXIT_IO, f"cannot read config file {args.config}")
    try:
        settings = cfgmod.resolve(args.config, args.overrides, args.seed)
    except cfgmod.ConfigKeyError as exc:
        raise CliError(EXIT_UNKNOWN_KEY, str(exc)) from None
    except cfgmod.ConfigValueError as exc:
        raise CliError(EXIT_INVALID, f"invalid value for {exc.key}: {exc}") from None
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read config file {args.config}: {exc.strerror}") from None

    out_dir = args.out_dir or Path(os.environ.get(OUT_DIR_ENV, "kljn_out"))
    if out_dir.exists() and not out_dir.is_dir():
        raise CliError(EXIT_IO, f"output path {out_dir} is not a directory")
    if args.subcommand == "attack-bilateral":
        settings = replace(settings, experiment=replace(settings.experiment, attack_mode="bilateral"))
    elif args.subcommand == "attack-unilateral":
        settings = replace(settings, experiment=replace(settings.experiment, attack_mode="unilateral"))
    return CliInvocation(args.subcommand, args.config, tuple(args.overrides), out_dir, args.seed, args.figures, settings)


def _prepare_out(out_dir: Path) -> Path:
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot create output directory {out_dir}: {exc.strerror}") from None
    if not os.access(out_dir, os.W_OK):
        raise CliError(EXIT_IO, f"output directory {out_dir} is not writable")
    return out_dir


def _noise_check(inv: CliInvocation) -> int:
    from .channel import mean_square
    from .export import write_manifest, write_spectrum_csv
    from .noise_gen import band_limited_noise, band_metrics, gaussianity_stats, psd_estimate, scale_to_johnson

    s = inv.settings
    noise, pair = s.noise, s.experiment.pair
    fine = band_limited_noise(s.experiment.master_seed, noise.raw_length, noise)
    nyquist = fine.with_samples(fine.samples[:: noise.oversample_factor], dt=noise.tau)
    mean, var, skew, kurt = gaussianity_stats(nyquist)
    spectrum = psd_estimate(fine, s.segment_length)
    flat, rejection = band_metrics(spectrum, noise.bandwidth_hz)

    checks = [
        ("skewness", skew, abs(skew) < MAX_ABS_SKEW, f"|x| < {MAX_ABS_SKEW}"),
        ("excess_kurtosis", kurt, abs(kurt) < MAX_ABS_EXCESS_KURTOSIS, f"|x| < {MAX_ABS_EXCESS_KURTOSIS}"),
        ("psd_max_rel_deviation", flat, flat <= MAX_PSD_DEVIATION, f"x <= {MAX_PSD_DEVIATION}"),
        ("out_of_band_rejection_db", rejection, rejection >= MIN_REJECTION_DB, f"x >= {MIN_REJECTION_DB}"),
    ]
    for label, r in (("R_L", pair.r_low_ohm), ("R_H", pair.r_high_ohm)):
        ms = mean_square(scale_to_johnson(nyquist, r, noise))
        target = noise.johnson_ms(r)
        checks.append((f"johnson_ms_{label}_v2", ms, abs(ms / target - 1) < 1e-9, f"{target:.6g} +/- 1e-9 rel"))

    print(f"samples={len(nyquist)} mean={mean:.6g} variance={var:.6g}")
    for name, value, ok, rule in checks:
        print(f"{'PASS' if ok else 'FAIL'} {name}={value:.6g} ({rule})")

    out = _prepare_out(inv.out_dir)
    write_spectrum_csv(spectrum, out / "noise_psd.csv")
    write_manifest(s.experiment, out / "manifest.txt", {"subcommand": inv.subcommand, "segment_length": s.segment_length})
    if inv.figures:
        from . import plotting

        plotting.plot_psd(spectrum, out / "noise_psd.png", noise.bandwidth_hz)
        plotting.plot_probability(nyquist.with_samples(nyquist.samples[:65536]), out / "noise_probplot.png")
    return EXIT_OK if all(ok for *_, ok, _ in checks) else EXIT_CHECK_FAILED


def _demo_bep(inv: CliInvocation) -> int:
    from .export import demo_noise, demo_products, write_demo_csvs, write_manifest, write_series_csv, write_spectrum_csv

    s = inv.settings
    demo = demo_products(s.experiment, s.trial_id)
    noise, spectrum = demo_noise(s.experiment, s.trial_id)
    out = _prepare_out(inv.out_dir)
    write_demo_csvs(demo, out)
    write_series_csv(noise, out / "noise.csv")
    write_spectrum_csv(spectrum, out / "psd.csv")
    write_manifest(s.experiment, out / "manifest.txt", {"subcommand": inv.subcommand, "trial_id": s.trial_id})
    if inv.figures:
        from . import plotting

        plotting.render_all(_empty_hist(s), out, demo=demo, noise=noise, spectrum=spectrum, band_hz=s.noise.bandwidth_hz)
    print(f"trial_id={s.trial_id} situation={demo['situation'].value} samples={len(demo['time_s'])} out_dir={out}")
    return EXIT_OK


def _empty_hist(s):
    from .harness import survival_histogram

    return survival_histogram([], s.experiment.bep_samples, s.noise.tau)


def _attack(inv: CliInvocation) -> int:
    from .export import write_bilateral_trace, write_manifest, write_unilateral_residuals
    from .harness import run_trial

    s = inv.settings
    rec = run_trial(s.experiment, s.trial_id)
    out = _prepare_out(inv.out_dir)
    write_manifest(s.experiment, out / "manifest.txt", {"subcommand": inv.subcommand, "trial_id": s.trial_id})
    print(f"trial_id={rec.trial_id} true_situation={rec.true_situation.value}")
    if rec.error:
        print(f"error={rec.error}")
        return EXIT_RUNTIME
    v = rec.verdict
    if rec.attack_mode == "bilateral":
        write_bilateral_trace(v, out / "bilateral_trace.csv")
        decided = v.decided_situation.value if v.decided else "undecided"
        print(f"decided_situation={decided} decision_step={v.decision_step}")
        print(f"decision_time_s={v.decision_step * s.noise.tau if v.decided else 'nan'}")
    else:
        write_unilateral_residuals(v, out / "unilateral_residuals.csv")
        print(f"alice_resistor={v.alice_resistor.value} bob_resistor={v.bob_resistor.value}")
        print(f"residual_low={v.residual_low:.6g} residual_high={v.residual_high:.6g} ratio={v.residual_ratio:.6g}")
        print(f"estimated_rp={v.estimated_rp:.6g} estimated_rb={v.estimated_rb:.6g}")
    print(f"correct={str(rec.correct).lower()}")
    return EXIT_OK


def _monte_carlo(inv: CliInvocation) -> int:
    import numpy as np

    from .export import export_experiment
    from .harness import monte_carlo

    exp = monte_carlo(inv.settings.experiment)
    out = _prepare_out(inv.out_dir)
    export_experiment(exp, out, figures=inv.figures)
    hist = exp.histogram
    correct = sum(r.correct for r in exp.records)
    print(f"trials={len(exp.records)} secure={hist.secure_count} correct={correct}")
    if hist.secure_count:
        for n in range(1, min(8, hist.ambiguous.size)):
            print(f"n={n} ambiguous_frac={hist.ambiguous_frac[n]:.4f} theory={2.0 ** -n:.4f}")
    steps = [r.verdict.decision_step for r in exp.records if r.attack_mode == "bilateral" and r.verdict is not None and r.verdict.decided]
    if steps:
        print(f"decision_step median={np.median(steps):g} p99={np.percentile(steps, 99):g} max={max(steps)}")
    print(f"out_dir={out}")
    return EXIT_OK


HANDLERS = {
    "noise-check": _noise_check,
    "demo-bep": _demo_bep,
    "attack-bilateral": _attack,
    "attack-unilateral": _attack,
    "monte-carlo": _monte_carlo,
}


def dispatch(inv: CliInvocation) -> int:
    try:
        return HANDLERS[inv.subcommand](inv)
    except CliError:
        raise
    except OSError as exc:
        raise CliError(EXIT_IO, f"I/O error: {exc}") from None
    except Exception as exc:  # noqa: BLE001
        raise CliError(EXIT_RUNTIME, f"{type(exc).__name__}: {exc}") from None


def main(argv=None) -> int:
    try:
        inv = parse_and_validate(sys.argv[1:] if argv is None else argv)
        return dispatch(inv)
    except CliError as exc:
        print(f"kljn: error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
