import csv
import math

import numpy as np
import pytest

from kljn.channel import BitSituation
from kljn.export import export_experiment, export_figures
from kljn.harness import (
    ExperimentConfig,
    monte_carlo,
    run_trial,
    survival_histogram,
    theory_overlay,
    trial_ids,
)

SMALL = ExperimentConfig(trials=20, bep_samples=200, master_seed=77)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_run_trial_deterministic():
    a = run_trial(SMALL, 3)
    b = run_trial(SMALL, 3)
    assert a.true_situation is b.true_situation
    assert a.verdict.decision_step == b.verdict.decision_step
    assert a.verdict.survival_steps == b.verdict.survival_steps
    assert np.array_equal(a.verdict.surviving_hypotheses_per_step, b.verdict.surviving_hypotheses_per_step)


def test_bilateral_secure_trials_correct():
    for t in trial_ids(SMALL):
        rec = run_trial(SMALL, t)
        assert rec.secure and rec.correct and rec.error == ""


def test_unilateral_trial():
    cfg = ExperimentConfig(trials=1, bep_samples=10_000, attack_mode="unilateral")
    t = trial_ids(cfg)[0]
    rec = run_trial(cfg, t)
    assert rec.correct
    assert rec.verdict.estimated_rp == pytest.approx(9090.9, rel=0.05)


def test_attack_errors_are_recorded():
    # far too short a BEP for the mean-square inversion; failures land in records
    cfg = ExperimentConfig(trials=200, bep_samples=2, attack_mode="unilateral", secure_only=False)
    exp = monte_carlo(cfg)
    assert len(exp.records) == 200
    assert any(r.error for r in exp.records)
    assert all(not r.correct for r in exp.records if r.error)


def test_secure_only_filtering():
    exp = monte_carlo(SMALL)
    assert len(exp.records) == 20
    assert all(r.secure for r in exp.records)
    every = monte_carlo(ExperimentConfig(trials=40, bep_samples=50, master_seed=77, secure_only=False))
    assert len(every.records) == 40
    assert any(not r.secure for r in every.records)
    assert every.histogram.secure_count == sum(r.secure for r in every.records)


def test_histogram_invariants(bilateral_experiment):
    h = bilateral_experiment.histogram
    assert h.secure_count == 1000
    assert h.ambiguous[0] == 1000
    assert np.all(np.diff(h.ambiguous) <= 0)
    assert np.array_equal(h.ambiguous + h.cumulative_cracked, np.full(h.ambiguous.size, h.secure_count))
    assert h.cracked.sum() == sum(r.ambiguous_steps(2000) < 2000 for r in bilateral_experiment.records)


def test_monte_carlo_fractions(bilateral_experiment):
    frac = bilateral_experiment.histogram.ambiguous_frac
    assert abs(frac[1] - 0.5) < 0.05
    assert abs(frac[2] - 0.25) < 0.04
    assert abs(frac[3] - 0.125) < 0.03


def test_theory_agreement(bilateral_experiment):
    h = bilateral_experiment.histogram
    m = h.secure_count
    for n in range(1, h.ambiguous.size):
        p = 2.0**-n
        if m * p < 5:
            break
        assert abs(h.ambiguous_frac[n] - p) <= 3 * math.sqrt(p * (1 - p) / m)


def test_single_trial_histogram():
    exp = monte_carlo(ExperimentConfig(trials=1, bep_samples=100, master_seed=5))
    h = exp.histogram
    k = exp.records[0].ambiguous_steps(100)
    assert h.ambiguous[: k + 1].tolist() == [1] * (k + 1)
    assert h.ambiguous[k + 1 :].sum() == 0
    assert h.cracked.sum() == 1


def test_unilateral_crack_fraction(unilateral_experiment):
    h = unilateral_experiment.histogram
    assert h.secure_count == 500
    assert h.cumulative_cracked[-1] / h.secure_count == 1.0
    # nothing is resolved before the BEP is over
    assert h.ambiguous[-2] == 500


def test_parallel_matches_serial():
    serial = monte_carlo(SMALL)
    parallel = monte_carlo(ExperimentConfig(trials=20, bep_samples=200, master_seed=77, workers=3))
    assert [r.trial_id for r in serial.records] == [r.trial_id for r in parallel.records]
    assert np.array_equal(serial.histogram.ambiguous, parallel.histogram.ambiguous)


def test_theory_overlay():
    rows = theory_overlay(3, 1e-3)
    assert rows[0] == (0, 0.0, 1.0)
    n, t, p = rows[3]
    assert n == 3 and t == pytest.approx(3e-3) and p == 0.125
    # t = 2 ms at tau = 2 ms is one step
    assert theory_overlay(1, 2e-3)[1][2] == 0.5
    with pytest.raises(ValueError):
        theory_overlay(0, 1e-3)


@pytest.mark.parametrize(
    "kwargs", [{"trials": 0}, {"bep_samples": 0}, {"attack_mode": "passive"}, {"master_seed": -1}]
)
def test_experiment_config_invariants(kwargs):
    with pytest.raises(ValueError):
        ExperimentConfig(**kwargs)


def test_export_empty(tmp_path):
    hist = survival_histogram([], 100, 1e-3)
    export_figures([], hist, tmp_path)
    for name in ("survival.csv", "crack.csv", "trials.csv"):
        assert len(read_csv(tmp_path / name)) == 1


def test_export_schema(tmp_path, bilateral_experiment):
    export_experiment(bilateral_experiment, tmp_path, figures=False)
    rows = read_csv(tmp_path / "survival.csv")
    assert rows[0] == ["n", "t_s", "ambiguous_frac", "theory_frac"]
    assert len(rows) == 1 + 2001
    assert [int(r[0]) for r in rows[1:4]] == [0, 1, 2]
    assert float(rows[2][3]) == 0.5
    assert read_csv(tmp_path / "waveforms.csv")[0] == ["time_s", "u_ha", "u_la", "u_hb", "u_lb", "u_w", "i_w", "p_w"]
    assert read_csv(tmp_path / "psd.csv")[0] == ["freq_hz", "density_v2_per_hz"]
    manifest = (tmp_path / "manifest.txt").read_text()
    assert "master_seed=20240101" in manifest and "software_version=" in manifest


def test_export_figures_written(tmp_path):
    exp = monte_carlo(SMALL)
    files = export_experiment(exp, tmp_path)
    names = {f.name for f in files}
    assert {"survival.png", "hypotheses.png", "psd.png", "probplot.png"} <= names
    assert all(f.stat().st_size > 0 for f in files)


def test_reexport_byte_identical(tmp_path):
    exp = monte_carlo(SMALL)
    export_experiment(exp, tmp_path / "a", figures=False)
    export_experiment(exp, tmp_path / "b", figures=False)
    for f in sorted((tmp_path / "a").iterdir()):
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_trials_csv_unilateral(tmp_path):
    exp = monte_carlo(ExperimentConfig(trials=3, bep_samples=2000, attack_mode="unilateral"))
    export_experiment(exp, tmp_path, figures=False)
    rows = read_csv(tmp_path / "trials.csv")
    assert rows[0][:4] == ["trial_id", "true_situation", "alice_resistor", "bob_resistor"]
    for r in rows[1:]:
        assert r[1] == r[2] + r[3]
        assert BitSituation(r[1]).secure
