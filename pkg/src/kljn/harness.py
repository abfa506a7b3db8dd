"""Monte Carlo runner for the compromised-RNG attacks."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import seeds
from .attacks import (
    AttackError,
    BilateralVerdict,
    UnilateralVerdict,
    bilateral_attack,
    sign_quantize,
    survival_theory,
    unilateral_attack,
)
from .channel import (
    BitSituation,
    GeneratorBank,
    ResistorPair,
    choose_situation,
    make_bank,
    power_flow,
    series_from_seeds,
    simulate_wire,
)
from .noise_gen import NoiseConfig

ATTACK_MODES = ("bilateral", "unilateral")


@dataclass(frozen=True)
class ExperimentConfig:
    master_seed: int = 20240101
    trials: int = 1000
    bep_samples: int = 2000
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    pair: ResistorPair = field(default_factory=ResistorPair)
    attack_mode: str = "bilateral"
    secure_only: bool = True
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.bep_samples < 1:
            raise ValueError("bep_samples must be at least 1")
        if self.attack_mode not in ATTACK_MODES:
            raise ValueError(f"attack_mode must be one of {ATTACK_MODES}")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must fit in 64 bits")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


@dataclass(frozen=True, eq=False)
class TrialRecord:
    trial_id: int
    true_situation: BitSituation
    attack_mode: str
    verdict: BilateralVerdict | UnilateralVerdict | None
    correct: bool
    error: str = ""

    @property
    def secure(self) -> bool:
        return self.true_situation.secure

    def ambiguous_steps(self, bep_samples: int) -> int:
        """Steps for which the two secure situations stayed indistinguishable.

        ``bep_samples`` means never resolved within the BEP.
        """
        v = self.verdict
        if isinstance(v, BilateralVerdict):
            wrong = BitSituation.HL if self.true_situation is BitSituation.LH else BitSituation.LH
            return v.survival_steps[wrong]
        if isinstance(v, UnilateralVerdict) and self.correct:
            # the verdict needs the whole BEP's mean square
            return bep_samples - 1
        return bep_samples


@dataclass(frozen=True, eq=False)
class SurvivalHistogram:
    """Per-step counts over secure trials, ``n = 0 .. bep_samples``."""

    tau_s: float
    secure_count: int
    ambiguous: np.ndarray
    cracked: np.ndarray

    @property
    def steps(self) -> np.ndarray:
        return np.arange(self.ambiguous.size)

    @property
    def ambiguous_frac(self) -> np.ndarray:
        return self.ambiguous / self.secure_count

    @property
    def cumulative_cracked(self) -> np.ndarray:
        return np.cumsum(self.cracked)

    @property
    def theory(self) -> np.ndarray:
        return np.array([survival_theory(int(n)) for n in self.steps])


@dataclass(frozen=True, eq=False)
class Experiment:
    config: ExperimentConfig
    records: list[TrialRecord]
    histogram: SurvivalHistogram


def _bilateral(cfg, trial_id, situation, bank):
    measured = sign_quantize(power_flow(simulate_wire(bank, situation, cfg.pair)))
    known = seeds.eve_seeds(cfg.master_seed, trial_id, "bilateral")
    eve_bank = GeneratorBank(**series_from_seeds(known, cfg.bep_samples, cfg.pair, cfg.noise))
    verdict = bilateral_attack(eve_bank, measured, cfg.pair)
    return verdict, verdict.decided_situation is situation


def _unilateral(cfg, trial_id, situation, bank):
    obs = simulate_wire(bank, situation, cfg.pair)
    known = series_from_seeds(
        seeds.eve_seeds(cfg.master_seed, trial_id, "unilateral"), cfg.bep_samples, cfg.pair, cfg.noise
    )
    verdict = unilateral_attack((known["u_ha"], known["u_la"]), obs, cfg.pair, cfg.noise)
    return verdict, verdict.situation is situation


def trial_situation(cfg: ExperimentConfig, trial_id: int) -> BitSituation:
    return choose_situation(seeds.switch_seed(cfg.master_seed), trial_id)


def run_trial(cfg: ExperimentConfig, trial_id: int) -> TrialRecord:
    situation = trial_situation(cfg, trial_id)
    bank = make_bank(cfg.master_seed, trial_id, cfg.bep_samples, cfg.pair, cfg.noise)
    attack = _bilateral if cfg.attack_mode == "bilateral" else _unilateral
    try:
        verdict, correct = attack(cfg, trial_id, situation, bank)
    except AttackError as exc:
        return TrialRecord(trial_id, situation, cfg.attack_mode, None, False, f"{type(exc).__name__}: {exc}")
    return TrialRecord(trial_id, situation, cfg.attack_mode, verdict, bool(correct))


def trial_ids(cfg: ExperimentConfig) -> list[int]:
    """Trial indices to run.

    With ``secure_only`` the BEP index keeps advancing until ``trials``
    secure exchanges are collected; insecure BEPs are discarded.
    """
    if not cfg.secure_only:
        return list(range(cfg.trials))
    ids, t = [], 0
    while len(ids) < cfg.trials:
        if trial_situation(cfg, t).secure:
            ids.append(t)
        t += 1
    return ids


def survival_histogram(records: list[TrialRecord], bep_samples: int, tau_s: float) -> SurvivalHistogram:
    secure = [r for r in records if r.secure]
    ambiguous = np.zeros(bep_samples + 1, dtype=int)
    cracked = np.zeros(bep_samples + 1, dtype=int)
    for r in secure:
        k = r.ambiguous_steps(bep_samples)
        ambiguous[: k + 1] += 1
        if k < bep_samples:
            cracked[k + 1] += 1
    if not secure:
        ambiguous = ambiguous[:0]
        cracked = cracked[:0]
    return SurvivalHistogram(tau_s, len(secure), ambiguous, cracked)


def _run_chunk(args):
    cfg, ids = args
    return [run_trial(cfg, t) for t in ids]


def monte_carlo(cfg: ExperimentConfig) -> Experiment:
    ids = trial_ids(cfg)
    if cfg.workers == 1:
        records = [run_trial(cfg, t) for t in ids]
    else:
        chunks = [ids[i :: cfg.workers] for i in range(cfg.workers)]
        with ProcessPoolExecutor(cfg.workers) as pool:
            parts = list(pool.map(_run_chunk, [(cfg, c) for c in chunks]))
        records = sorted((r for part in parts for r in part), key=lambda r: r.trial_id)
    hist = survival_histogram(records, cfg.bep_samples, cfg.noise.tau)
    return Experiment(cfg, records, hist)


def theory_overlay(max_n: int, tau_s: float) -> list[tuple[int, float, float]]:
    """``(n, t, P)`` rows with ``t = n * tau`` and ``P = 2**-n``."""
    if max_n < 1:
        raise ValueError("max_n must be at least 1")
    if not tau_s > 0:
        raise ValueError("tau_s must be positive")
    return [(n, n * tau_s, survival_theory(n)) for n in range(max_n + 1)]
