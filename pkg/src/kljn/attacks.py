"""Eavesdropper attacks that exploit compromised noise generators.

Bilateral: Eve knows all four generator waveforms. She builds the power-flow
waveform of each of the four resistor situations and keeps only those whose
1-bit power direction agrees with her measurement, step by step.

Unilateral: Eve knows only Alice's two generators. She reconstructs Alice's
source voltage from the wire under both resistor hypotheses, keeps the one
that reproduces a known generator, then reads Bob's resistor off the wire
mean-square level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import (
    BitSituation,
    Choice,
    GeneratorBank,
    PowerSeries,
    ResistorPair,
    WireObservation,
    mean_square,
    power_flow,
    simulate_wire,
)
from .noise_gen import NoiseConfig, NoiseSeries

HYPOTHESES = (BitSituation.HH, BitSituation.LL, BitSituation.HL, BitSituation.LH)
# bit order of the survivor mask strings in traces
MASK_ORDER = (BitSituation.HH, BitSituation.HL, BitSituation.LH, BitSituation.LL)

MATCH_RATIO = 1e3


class AttackError(ValueError):
    pass


class AmbiguousMatchError(AttackError):
    """Neither reconstruction clearly matches a known generator."""


class InconsistentMeasurementError(AttackError):
    """The wire mean square implies no physical resistor for Bob."""


@dataclass(frozen=True, eq=False)
class SignSeries:
    bits: np.ndarray
    dt: float

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=np.int8)
        if np.any((bits != 1) & (bits != -1)):
            raise ValueError("sign series may only hold +1 and -1")
        object.__setattr__(self, "bits", bits)

    def __len__(self):
        return self.bits.size


@dataclass(frozen=True, eq=False)
class BilateralVerdict:
    decided_situation: BitSituation | None
    decision_step: int | None
    surviving_hypotheses_per_step: np.ndarray
    # number of leading steps each hypothesis agreed with the measurement
    survival_steps: dict[BitSituation, int] = field(default_factory=dict)

    @property
    def decided(self) -> bool:
        return self.decided_situation is not None

    def survivor_masks(self) -> list[str]:
        n = len(self.surviving_hypotheses_per_step)
        steps = np.arange(1, n + 1)
        cols = [(self.survival_steps[h] >= steps) for h in MASK_ORDER]
        return ["".join("1" if c[i] else "0" for c in cols) for i in range(n)]


@dataclass(frozen=True)
class UnilateralVerdict:
    alice_resistor: Choice
    bob_resistor: Choice
    residual_low: float
    residual_high: float
    estimated_rp: float
    estimated_rb: float

    @property
    def situation(self) -> BitSituation:
        return BitSituation.of(self.alice_resistor, self.bob_resistor)

    @property
    def residual_ratio(self) -> float:
        lo, hi = sorted((self.residual_low, self.residual_high))
        return math.inf if lo == 0 else hi / lo


def sign_quantize(p: PowerSeries) -> SignSeries:
    """1-bit power direction: +1 towards Bob (ties included), -1 towards Alice."""
    return SignSeries(np.where(np.asarray(p.p_w) < 0, -1, 1), p.dt)


def hypothetical_powers(bank: GeneratorBank, pair: ResistorPair) -> dict[BitSituation, PowerSeries]:
    return {h: power_flow(simulate_wire(bank, h, pair)) for h in HYPOTHESES}


def bilateral_attack(bank: GeneratorBank, measured: SignSeries, pair: ResistorPair) -> BilateralVerdict:
    """Eliminate hypotheses whose 1-bit power direction disagrees with ``measured``.

    The verdict is decided at the first step after which exactly one of the
    four hypotheses still agrees with every measured sign so far.
    """
    n = len(measured)
    if n < 1:
        raise AttackError("measured sign series is empty")
    if len(bank.u_ha) < n:
        raise AttackError("generator bank shorter than the measurement")

    survival = {}
    for h, p in hypothetical_powers(bank, pair).items():
        agree = sign_quantize(PowerSeries(p.p_w[:n], p.dt)).bits == measured.bits
        bad = np.flatnonzero(~agree)
        survival[h] = int(bad[0]) if bad.size else n

    steps = np.arange(1, n + 1)
    counts = np.zeros(n, dtype=int)
    for k in survival.values():
        counts += k >= steps

    decided, step = None, None
    hit = np.flatnonzero(counts == 1)
    if hit.size and not np.any(counts[: hit[0]] == 0):
        step = int(hit[0]) + 1
        decided = next(h for h, k in survival.items() if k >= step)
    return BilateralVerdict(decided, step, counts, survival)


def reconstruct_alice_voltage(obs: WireObservation, r: float) -> NoiseSeries:
    """Alice's source voltage assuming she connected resistance ``r``."""
    return obs.u_w.with_samples(obs.u_w.samples + obs.i_w.samples * r, units="V")


def invert_rp(rp: float, r_a: float) -> float:
    """Bob's resistance from the parallel resultant and Alice's resistance."""
    if not 0 < rp < r_a:
        raise InconsistentMeasurementError(
            f"parallel resistance {rp:.6g} ohm has no solution for R_A={r_a:.6g} ohm"
        )
    return r_a * rp / (r_a - rp)


def _rms(x: np.ndarray) -> float:
    return math.sqrt(float(np.mean(x * x)))


def unilateral_attack(
    alice_known: tuple[NoiseSeries, NoiseSeries],
    obs: WireObservation,
    pair: ResistorPair,
    cfg: NoiseConfig,
) -> UnilateralVerdict:
    """Identify both resistors from Alice's known generators and the wire record.

    ``alice_known`` is ``(u_ha, u_la)``.
    """
    u_ha, u_la = alice_known
    n = len(obs.u_w)
    if len(u_ha) < n or len(u_la) < n:
        raise AttackError("known generator series shorter than the observation")

    res_low = _rms(reconstruct_alice_voltage(obs, pair.r_low_ohm).samples - u_la.samples[:n])
    res_high = _rms(reconstruct_alice_voltage(obs, pair.r_high_ohm).samples - u_ha.samples[:n])
    lo, hi = sorted((res_low, res_high))
    if not (lo == 0 or hi / lo >= MATCH_RATIO):
        raise AmbiguousMatchError(
            f"residual ratio {hi / lo:.3g} below {MATCH_RATIO:g} (low={res_low:.3g} V, high={res_high:.3g} V)"
        )
    alice = Choice.L if res_low < res_high else Choice.H
    r_a = pair.resistance(alice)

    rp = mean_square(obs.u_w) / cfg.johnson_ms(1.0)
    rb = invert_rp(rp, r_a)
    bob = min(
        (Choice.L, Choice.H),
        key=lambda c: abs(math.log(rb / pair.resistance(c))),
    )
    return UnilateralVerdict(alice, bob, res_low, res_high, rp, rb)


def survival_theory(n: int) -> float:
    """Probability that two independent fair sign sequences agree for ``n`` steps."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return 2.0 ** (-n)
