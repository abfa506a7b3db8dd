"""Ideal KLJN core: resistor choice, wire signals and mean-square levels."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import seeds
from .noise_gen import NoiseConfig, NoiseSeries, johnson_noise


class Choice(str, enum.Enum):
    H = "H"
    L = "L"


class BitSituation(str, enum.Enum):
    """Resistor situation, Alice's choice first."""

    HH = "HH"
    HL = "HL"
    LH = "LH"
    LL = "LL"

    @classmethod
    def of(cls, alice: Choice, bob: Choice) -> "BitSituation":
        return cls(Choice(alice).value + Choice(bob).value)

    @property
    def alice(self) -> Choice:
        return Choice(self.value[0])

    @property
    def bob(self) -> Choice:
        return Choice(self.value[1])

    @property
    def secure(self) -> bool:
        return self.value[0] != self.value[1]


class Level(str, enum.Enum):
    LL = "LL"
    MID = "MID"
    HH = "HH"


@dataclass(frozen=True)
class ResistorPair:
    r_low_ohm: float = 10e3
    r_high_ohm: float = 100e3

    def __post_init__(self):
        if not 0 < self.r_low_ohm < self.r_high_ohm:
            raise ValueError("need 0 < r_low_ohm < r_high_ohm")

    def resistance(self, choice: Choice) -> float:
        return self.r_high_ohm if Choice(choice) is Choice.H else self.r_low_ohm


@dataclass(frozen=True, eq=False)
class GeneratorBank:
    u_ha: NoiseSeries
    u_la: NoiseSeries
    u_hb: NoiseSeries
    u_lb: NoiseSeries

    def __post_init__(self):
        ref = self.u_ha
        for s in (self.u_la, self.u_hb, self.u_lb):
            if len(s) != len(ref) or s.dt != ref.dt:
                raise ValueError("generator series differ in length or dt")

    def alice(self, choice: Choice) -> NoiseSeries:
        return self.u_ha if Choice(choice) is Choice.H else self.u_la

    def bob(self, choice: Choice) -> NoiseSeries:
        return self.u_hb if Choice(choice) is Choice.H else self.u_lb

    def swapped(self) -> "GeneratorBank":
        """Bank with Alice's and Bob's generators exchanged."""
        return GeneratorBank(self.u_hb, self.u_lb, self.u_ha, self.u_la)


@dataclass(frozen=True, eq=False)
class WireObservation:
    u_w: NoiseSeries
    i_w: NoiseSeries

    def __post_init__(self):
        if len(self.u_w) != len(self.i_w) or self.u_w.dt != self.i_w.dt:
            raise ValueError("u_w and i_w differ in length or dt")


@dataclass(frozen=True, eq=False)
class PowerSeries:
    p_w: np.ndarray
    dt: float


def choose_situation(switch_seed: int, bep_index: int) -> BitSituation:
    """Draw Alice's and Bob's resistor choices for one bit exchange period."""
    seq = np.random.SeedSequence(switch_seed, spawn_key=(int(bep_index),))
    a, b = np.random.Generator(np.random.PCG64(seq)).integers(0, 2, size=2)
    return BitSituation.of(Choice.H if a else Choice.L, Choice.H if b else Choice.L)


def series_from_seeds(role_seeds: dict[str, int], n: int, pair: ResistorPair, cfg: NoiseConfig) -> dict[str, NoiseSeries]:
    """Regenerate generator voltages from their sub-seeds.

    This is also the attacker's route: given the seeds she knows, she gets
    bit-identical copies of the corresponding generators.
    """
    out = {}
    for role, seed in role_seeds.items():
        r = pair.r_high_ohm if role in ("u_ha", "u_hb") else pair.r_low_ohm
        out[role] = johnson_noise(seed, n, r, cfg)
    return out


def make_bank(master_seed: int, trial_id: int, n: int, pair: ResistorPair, cfg: NoiseConfig) -> GeneratorBank:
    """Synthesize the four generator voltages of one BEP from the seed schedule."""
    role_seeds = {
        role: seeds.role_seed(master_seed, trial_id, role)
        for role in seeds.ALICE_ROLES + seeds.BOB_ROLES
    }
    return GeneratorBank(**series_from_seeds(role_seeds, n, pair, cfg))


def wire_signals(u_a: NoiseSeries, u_b: NoiseSeries, r_a: float, r_b: float) -> WireObservation:
    if len(u_a) != len(u_b) or u_a.dt != u_b.dt:
        raise ValueError("u_a and u_b differ in length or dt")
    if not (r_a > 0 and r_b > 0):
        raise ValueError("resistances must be positive")
    i_w = (u_a.samples - u_b.samples) / (r_a + r_b)
    u_w = i_w * r_b + u_b.samples
    return WireObservation(
        NoiseSeries(u_w, u_a.dt, units="V"),
        NoiseSeries(i_w, u_a.dt, units="A"),
    )


def simulate_wire(bank: GeneratorBank, situation: BitSituation, pair: ResistorPair) -> WireObservation:
    return wire_signals(
        bank.alice(situation.alice),
        bank.bob(situation.bob),
        pair.resistance(situation.alice),
        pair.resistance(situation.bob),
    )


def power_flow(obs: WireObservation) -> PowerSeries:
    """Instantaneous power, positive when flowing from Alice to Bob."""
    return PowerSeries(obs.u_w.samples * obs.i_w.samples, obs.u_w.dt)


def parallel_resistance(r_a: float, r_b: float) -> float:
    if not (r_a > 0 and r_b > 0):
        raise ValueError("resistances must be positive")
    return r_a * r_b / (r_a + r_b)


def theoretical_msv(r_a: float, r_b: float, cfg: NoiseConfig) -> float:
    return cfg.johnson_ms(parallel_resistance(r_a, r_b))


def mean_square(series: NoiseSeries | np.ndarray) -> float:
    x = series.samples if isinstance(series, NoiseSeries) else np.asarray(series, dtype=float)
    if x.size == 0:
        raise ValueError("empty series")
    return float(np.mean(x * x))


def level_values(pair: ResistorPair, cfg: NoiseConfig) -> dict[Level, float]:
    lo, hi = pair.r_low_ohm, pair.r_high_ohm
    return {
        Level.LL: theoretical_msv(lo, lo, cfg),
        Level.MID: theoretical_msv(lo, hi, cfg),
        Level.HH: theoretical_msv(hi, hi, cfg),
    }


def classify_level(msv: float, pair: ResistorPair, cfg: NoiseConfig) -> Level:
    """Nearest theoretical mean-square level in log distance."""
    if not msv > 0:
        raise ValueError("mean-square voltage must be positive")
    levels = level_values(pair, cfg)
    return min(levels, key=lambda lv: abs(math.log(msv / levels[lv])))


def situation_level(situation: BitSituation) -> Level:
    if situation.secure:
        return Level.MID
    return Level(situation.value)
