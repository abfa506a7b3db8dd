"""Band-limited Gaussian white noise with Johnson-noise amplitude.

Pipeline for one generator:

1. ``ensemble_count`` seeded standard-normal raw series are drawn,
2. averaged pointwise,
3. zero padded in the frequency domain (anti-aliasing, ``oversample_factor``),
4. decimated back to the Nyquist step for protocol use,
5. renormalised to unit RMS and scaled to ``sqrt(4 k T R df)``.

Steps 3 and 4 cancel exactly on the Nyquist grid; the oversampled series is
kept for waveform and spectrum checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal

from . import seeds

BOLTZMANN = 1.380649e-23  # J/K, exact SI value


@dataclass(frozen=True)
class NoiseConfig:
    bandwidth_hz: float = 500.0
    temperature_k: float = 1e18
    boltzmann: float = BOLTZMANN
    raw_length: int = 2**20
    ensemble_count: int = 10
    oversample_factor: int = 2

    def __post_init__(self):
        if not self.bandwidth_hz > 0:
            raise ValueError("bandwidth_hz must be positive")
        if not self.temperature_k > 0:
            raise ValueError("temperature_k must be positive")
        if self.raw_length < 2 or self.raw_length % 2:
            raise ValueError("raw_length must be even and at least 2")
        if self.ensemble_count < 1:
            raise ValueError("ensemble_count must be at least 1")
        if self.oversample_factor < 1:
            raise ValueError("oversample_factor must be at least 1")

    @property
    def tau(self) -> float:
        """Nyquist time step in seconds."""
        return 1.0 / (2.0 * self.bandwidth_hz)

    def johnson_ms(self, resistance_ohm: float) -> float:
        """Johnson mean-square voltage ``4 k T R df`` in V^2."""
        return 4.0 * self.boltzmann * self.temperature_k * resistance_ohm * self.bandwidth_hz


@dataclass(frozen=True, eq=False)
class NoiseSeries:
    """Uniformly sampled waveform."""

    samples: np.ndarray
    dt: float
    seed_tag: str = ""
    units: str = "V"

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("samples must be a nonempty 1-D sequence")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return self.samples.size

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.samples.size) * self.dt

    def with_samples(self, samples, dt=None, units=None) -> "NoiseSeries":
        return NoiseSeries(
            samples,
            self.dt if dt is None else dt,
            self.seed_tag,
            self.units if units is None else units,
        )


@dataclass(frozen=True, eq=False)
class Spectrum:
    frequencies: np.ndarray
    density: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        d = np.asarray(self.density, dtype=float)
        if f.shape != d.shape:
            raise ValueError("frequencies and density differ in length")
        if f.size and (f[0] < 0 or np.any(np.diff(f) <= 0)):
            raise ValueError("frequencies must be nonnegative and strictly increasing")
        if np.any(d < 0):
            raise ValueError("density must be nonnegative")
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "density", d)


def generate_raw_gaussian(seed: int, n: int, dt: float = 1.0) -> NoiseSeries:
    """Draw ``n`` standard-normal samples from a PCG64 stream seeded by ``seed``."""
    if n < 2:
        raise ValueError(f"need at least 2 samples, got {n}")
    rng = np.random.Generator(np.random.PCG64(seed))
    return NoiseSeries(rng.standard_normal(n), dt, seed_tag=f"{seed:#018x}", units="1")


def ensemble_average(series: list[NoiseSeries]) -> NoiseSeries:
    if not series:
        raise ValueError("cannot average an empty list")
    first = series[0]
    for s in series[1:]:
        if len(s) != len(first) or s.dt != first.dt:
            raise ValueError("series differ in length or dt")
    mean = np.mean(np.stack([s.samples for s in series]), axis=0)
    return first.with_samples(mean)


def anti_alias(series: NoiseSeries, oversample_factor: int) -> NoiseSeries:
    """Zero-pad the spectrum of ``series`` to raise its sample rate.

    The returned series has ``len(series) * oversample_factor`` samples at
    ``dt / oversample_factor``. Its content above the original band is zero,
    and every ``oversample_factor``-th sample reproduces the input.
    """
    n = len(series)
    if n % 2:
        raise ValueError("anti_alias needs an even-length series")
    if oversample_factor < 1:
        raise ValueError("oversample_factor must be at least 1")
    if oversample_factor == 1:
        return series.with_samples(series.samples.copy())
    spectrum = np.fft.rfft(series.samples)
    m = n * oversample_factor
    padded = np.zeros(m // 2 + 1, dtype=complex)
    padded[: n // 2 + 1] = spectrum
    # the old Nyquist bin becomes an interior bin; split it between +f and -f
    padded[n // 2] *= 0.5
    out = np.fft.irfft(padded, n=m) * oversample_factor
    return series.with_samples(out, dt=series.dt / oversample_factor)


def scale_to_johnson(series: NoiseSeries, resistance_ohm: float, cfg: NoiseConfig) -> NoiseSeries:
    """Rescale to the Johnson RMS of ``resistance_ohm``.

    The series is first renormalised to unit RMS, so the prior ensemble
    averaging never biases the amplitude.
    """
    if not resistance_ohm > 0:
        raise ValueError("resistance must be positive")
    rms = math.sqrt(float(np.mean(series.samples**2)))
    if not math.isfinite(rms) or rms == 0.0:
        raise ValueError("cannot scale a series with zero or non-finite RMS")
    target = math.sqrt(cfg.johnson_ms(resistance_ohm))
    return series.with_samples(series.samples * (target / rms), units="V")


def psd_estimate(series: NoiseSeries, segment_length: int, window: str = "blackmanharris") -> Spectrum:
    """One-sided averaged-periodogram density (Welch, 50 % overlap).

    The default 4-term Blackman-Harris window keeps leakage below -90 dB
    outside the main lobe, which the out-of-band check relies on.
    """
    if segment_length < 2 or segment_length & (segment_length - 1):
        raise ValueError("segment_length must be a power of two")
    if segment_length > len(series):
        raise ValueError(
            f"segment_length {segment_length} exceeds series length {len(series)}"
        )
    f, pxx = signal.welch(
        series.samples,
        fs=1.0 / series.dt,
        window=window,
        nperseg=segment_length,
        detrend=False,
        scaling="density",
    )
    return Spectrum(f, np.maximum(pxx, 0.0))


def band_metrics(spectrum: Spectrum, band_hz: float, guard_bins: int = 4) -> tuple[float, float]:
    """Flatness and out-of-band rejection of a band-limited density.

    Returns ``(max_rel_dev, rejection_db)``: the largest relative deviation of
    an in-band bin from the in-band mean, and how far the strongest bin above
    the band sits below that mean. DC and ``guard_bins`` bins on either side
    of the band edge (the window main lobe) are excluded.
    """
    f, d = spectrum.frequencies, spectrum.density
    df = f[1] - f[0]
    in_band = (f > guard_bins * df) & (f < band_hz - guard_bins * df)
    out_band = f > band_hz + guard_bins * df
    mean = d[in_band].mean()
    max_dev = float(np.max(np.abs(d[in_band] / mean - 1.0)))
    if not out_band.any():
        return max_dev, math.inf
    peak = d[out_band].max()
    rejection = math.inf if peak == 0 else 10.0 * math.log10(mean / peak)
    return max_dev, rejection


def gaussianity_stats(series: NoiseSeries) -> tuple[float, float, float, float]:
    """Sample mean, variance, skewness and excess kurtosis.

    Skewness and kurtosis are NaN for a constant series.
    """
    x = series.samples
    if x.size < 4:
        raise ValueError("need at least 4 samples")
    mean = float(x.mean())
    c = x - mean
    var = float(np.mean(c**2))
    if var == 0.0:
        return mean, 0.0, math.nan, math.nan
    skew = float(np.mean(c**3)) / var**1.5
    kurt = float(np.mean(c**4)) / var**2 - 3.0
    return mean, var, skew, kurt


def band_limited_noise(seed: int, n: int, cfg: NoiseConfig) -> NoiseSeries:
    """Unit-scale anti-aliased noise, ``n * oversample_factor`` samples.

    ``n`` is rounded up to even for the transform.
    """
    n_even = max(2, n + (n % 2))
    raw = [
        generate_raw_gaussian(seeds.member_seed(seed, j), n_even, dt=cfg.tau)
        for j in range(cfg.ensemble_count)
    ]
    avg = ensemble_average(raw)
    out = anti_alias(avg, cfg.oversample_factor)
    return NoiseSeries(out.samples[: n * cfg.oversample_factor], out.dt, f"{seed:#018x}", "1")


def nyquist_noise(seed: int, n: int, cfg: NoiseConfig) -> NoiseSeries:
    """Anti-aliased noise decimated to the Nyquist step ``tau``."""
    fine = band_limited_noise(seed, n, cfg)
    k = cfg.oversample_factor
    return NoiseSeries(fine.samples[::k][:n], cfg.tau, fine.seed_tag, "1")


def johnson_noise(seed: int, n: int, resistance_ohm: float, cfg: NoiseConfig) -> NoiseSeries:
    """Nyquist-rate Johnson noise voltage of one resistor."""
    return scale_to_johnson(nyquist_noise(seed, n, cfg), resistance_ohm, cfg)
