"""Ideal KLJN key exchange simulator with compromised-RNG attacks."""

from .attacks import bilateral_attack, unilateral_attack
from .channel import BitSituation, GeneratorBank, ResistorPair, WireObservation
from .harness import ExperimentConfig, monte_carlo, run_trial
from .noise_gen import NoiseConfig, NoiseSeries

__all__ = [
    "BitSituation",
    "ExperimentConfig",
    "GeneratorBank",
    "NoiseConfig",
    "NoiseSeries",
    "ResistorPair",
    "WireObservation",
    "bilateral_attack",
    "monte_carlo",
    "run_trial",
    "unilateral_attack",
]
