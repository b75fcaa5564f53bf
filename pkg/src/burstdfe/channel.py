"""Dispersion-uncompensated IM/DD link model.

Two fidelities are offered. The small-signal model multiplies the intensity
spectrum by the power-fading response ``cos(2*pi**2*beta2*L*f**2)``. The
full-field model modulates an optical field, disperses it with the all-pass
fiber response and detects it with a square law.
"""

import logging
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.signal

from .exceptions import ConfigurationError
from .signal import Waveform
from .utils import check_random_state, check_scalar

logger = logging.getLogger(__name__)

PS2_PER_KM = 1e-24 / 1e3  # ps^2/km expressed in s^2/m
DEFAULT_BETA2 = -21.7 * PS2_PER_KM
DEFAULT_LENGTH = 18.8e3


@dataclass(frozen=True)
class BurstConfig:
    """Poisson-arriving intervals of inflated receiver noise.

    Parameters
    ----------
    rate : float
        Expected number of bursts per 1e6 symbols.
    duration : int
        Burst length in symbols.
    amplitude : float
        Factor by which the noise standard deviation is multiplied inside a burst.
    seed : int
        Seed of the burst placement and burst-noise generator.
    scales_with_rop : bool
        If true the inflated noise follows the received power like the
        background noise. If false it is pinned to the reference power, which
        models a disturbance proportional to the signal itself.
    """

    rate: float = 0.0
    duration: int = 1
    amplitude: float = 1.0
    seed: int = 0
    scales_with_rop: bool = True

    def __post_init__(self):
        check_scalar(self.rate, "burst.rate", min_val=0.0)
        check_scalar(self.duration, "burst.duration", int, min_val=1)
        check_scalar(self.amplitude, "burst.amplitude", min_val=1.0)
        check_scalar(self.seed, "burst.seed", int)


@dataclass(frozen=True)
class ChannelConfig:
    """Physical parameters of the simulated link.

    ``noise_ref`` is the post-detection noise standard deviation, relative to
    a unit-RMS received signal, at the reference power ``rop_ref_dbm``.
    """

    beta2: float = DEFAULT_BETA2
    length: float = DEFAULT_LENGTH
    tx_bandwidths: tuple = (16e9,)
    rx_bandwidths: tuple = (31e9, 36e9)
    rop_dbm: float = -4.0
    rop_ref_dbm: float = -4.0
    noise_ref: float = 0.0
    fidelity: str = "smallsignal"
    modulation_index: float = 0.1
    burst: BurstConfig = field(default_factory=BurstConfig)

    def __post_init__(self):
        check_scalar(self.length, "length", min_val=0.0)
        if not np.isfinite(self.beta2 * self.length):
            raise ConfigurationError("beta2 * length must be finite")
        object.__setattr__(self, "tx_bandwidths", tuple(float(b) for b in self.tx_bandwidths))
        object.__setattr__(self, "rx_bandwidths", tuple(float(b) for b in self.rx_bandwidths))
        for bw in self.device_bandwidths:
            if not bw > 0:
                raise ConfigurationError(f"device bandwidths must be positive, got {bw}")
        check_scalar(self.noise_ref, "noise_ref", min_val=0.0)
        if self.fidelity not in ("smallsignal", "fullfield"):
            raise ConfigurationError(f"unknown channel fidelity {self.fidelity!r}")
        check_scalar(self.modulation_index, "modulation_index", min_val=0.0, max_val=1.0,
                     include_min=False)
        if isinstance(self.burst, dict):
            object.__setattr__(self, "burst", BurstConfig(**self.burst))

    @property
    def device_bandwidths(self):
        return self.tx_bandwidths + self.rx_bandwidths

    @property
    def noise_sigma(self):
        """Noise standard deviation at the configured received power."""
        return self.noise_ref * 10.0 ** (-(self.rop_dbm - self.rop_ref_dbm) / 10.0)

    def to_dict(self):
        d = asdict(self)
        d["tx_bandwidths"] = list(self.tx_bandwidths)
        d["rx_bandwidths"] = list(self.rx_bandwidths)
        return d


@dataclass(frozen=True)
class BurstLog:
    """Symbol intervals ``[start, stop)`` that received inflated noise."""

    starts: np.ndarray
    stops: np.ndarray

    def __len__(self):
        return self.starts.size

    def mask(self, n_symbols):
        m = np.zeros(n_symbols, dtype=bool)
        for a, b in zip(self.starts, self.stops):
            m[a:b] = True
        return m


def cd_frequency_response(f, cfg):
    """Intensity transfer of the dispersive fiber, ``cos(2*pi**2*beta2*L*f**2)``."""
    f = np.asarray(f, dtype=np.float64)
    return np.cos(2.0 * np.pi ** 2 * cfg.beta2 * cfg.length * f ** 2)


def cd_null_frequencies(cfg, f_max):
    """Closed-form zeros of :func:`cd_frequency_response` in ``(0, f_max]``.

    The n-th null sits at ``f1 * sqrt(2n + 1)`` with ``f1 = 1/sqrt(4*pi*|beta2|*L)``.
    """
    bl = abs(cfg.beta2 * cfg.length)
    if bl == 0:
        return np.array([])
    f1 = 1.0 / np.sqrt(4.0 * np.pi * bl)
    n_max = int(np.floor(((f_max / f1) ** 2 - 1) / 2))
    return f1 * np.sqrt(2.0 * np.arange(n_max + 1) + 1.0)


def beta2_for_first_null(f1, length):
    """Dispersion that places the first power-fading null at ``f1``."""
    return -1.0 / (4.0 * np.pi * length * f1 ** 2)


def _rfreq(n, fs):
    return np.fft.rfftfreq(n, d=1.0 / fs)


def apply_smallsignal_channel(w, cfg):
    """Filter the intensity waveform with the power-fading response."""
    x = w.samples
    if x.size == 0:
        raise ValueError("waveform must be non-empty")
    h = cd_frequency_response(_rfreq(x.size, w.sample_rate), cfg)
    y = np.fft.irfft(np.fft.rfft(x) * h, n=x.size)
    return w.with_samples(y)


def apply_fullfield_channel(w, cfg, modulation_index=None):
    """Square-law detection of a dispersed, intensity-modulated optical field.

    The drive ``x`` is peak-normalized to ``[-1, 1]`` and mapped to the field
    ``sqrt(1 + m*x)``. After dispersion and detection the mean is removed and
    the result rescaled by ``max|x| / m`` so that, for small ``m``, the output
    matches :func:`apply_smallsignal_channel`.
    """
    m = cfg.modulation_index if modulation_index is None else modulation_index
    check_scalar(m, "modulation_index", min_val=0.0, max_val=1.0, include_min=False)
    x = w.samples
    peak = np.max(np.abs(x))
    if peak == 0:
        return w.with_samples(np.zeros_like(x))
    drive = 1.0 + m * x / peak
    if np.any(drive < 0):
        warnings.warn("optical drive clipped at zero intensity", RuntimeWarning, stacklevel=2)
        logger.warning("full-field channel clipped %d samples", int(np.sum(drive < 0)))
        drive = np.maximum(drive, 0.0)
    field_t = np.sqrt(drive).astype(np.complex128)
    omega = 2.0 * np.pi * np.fft.fftfreq(x.size, d=1.0 / w.sample_rate)
    disp = np.exp(-1j * (cfg.beta2 / 2.0) * omega ** 2 * cfg.length)
    field_rx = np.fft.ifft(np.fft.fft(field_t) * disp)
    intensity = np.abs(field_rx) ** 2
    y = (intensity - intensity.mean()) * peak / m
    return w.with_samples(y)


def apply_channel(w, cfg):
    if cfg.fidelity == "fullfield":
        return apply_fullfield_channel(w, cfg)
    return apply_smallsignal_channel(w, cfg)


def bessel_response(f, cutoff_hz, order=5):
    """Complex response of an analog Bessel low-pass, DC group delay removed."""
    b, a = scipy.signal.bessel(order, 2.0 * np.pi * cutoff_hz, analog=True, norm="mag")
    omega = 2.0 * np.pi * np.asarray(f, dtype=np.float64)
    _, h = scipy.signal.freqs(b, a, worN=omega)
    tau0 = a[-2] / a[-1]
    return h * np.exp(1j * omega * tau0)


def lowpass_device(w, cutoff_hz, order=5):
    """Model a bandwidth-limited component as a 5th-order Bessel low-pass.

    Applied in the frequency domain with its DC group delay removed, so the
    output stays time-aligned with the input.
    """
    nyq = w.sample_rate / 2.0
    if not 0 < cutoff_hz < nyq:
        raise ConfigurationError(f"cutoff {cutoff_hz:g} Hz must lie in (0, {nyq:g})")
    x = w.samples
    h = bessel_response(_rfreq(x.size, w.sample_rate), cutoff_hz, order)
    return w.with_samples(np.fft.irfft(np.fft.rfft(x) * h, n=x.size))


def add_noise(w, cfg, seed=None):
    """Add white Gaussian noise whose level follows the received optical power."""
    sigma = cfg.noise_sigma
    if sigma == 0:
        return w.with_samples(w.samples.copy())
    rng = check_random_state(seed)
    return w.with_samples(w.samples + sigma * rng.standard_normal(w.samples.size))


def inject_bursts(w, cfg, symbol_rate=72e9, seed=None):
    """Inflate the noise inside Poisson-placed intervals.

    Inside a burst the total noise standard deviation becomes
    ``burst.amplitude * cfg.noise_sigma``: the extra component added here has
    standard deviation ``sigma * sqrt(amplitude**2 - 1)``. Call after
    :func:`add_noise`.

    Parameters
    ----------
    w : Waveform
    cfg : ChannelConfig
    symbol_rate : float
        Used to convert burst durations from symbols to samples.
    seed : int, optional
        Mixed with ``cfg.burst.seed``, so distinct runs get distinct bursts.

    Returns
    -------
    (Waveform, BurstLog)
    """
    burst = cfg.burst
    sps = w.sample_rate / symbol_rate
    n_sym = int(np.floor(len(w) / sps))
    empty = BurstLog(np.array([], dtype=np.int64), np.array([], dtype=np.int64))
    if burst.rate == 0 or n_sym <= burst.duration:
        return w.with_samples(w.samples.copy()), empty
    entropy = [burst.seed] if seed is None else [burst.seed, int(seed)]
    rng = np.random.default_rng(np.random.SeedSequence(entropy))
    count = rng.poisson(burst.rate * n_sym / 1e6)
    starts = np.sort(rng.integers(0, n_sym - burst.duration + 1, size=count))
    stops = starts + burst.duration
    log = BurstLog(starts.astype(np.int64), stops.astype(np.int64))
    base = cfg.noise_sigma if burst.scales_with_rop else cfg.noise_ref
    extra = base * np.sqrt(burst.amplitude ** 2 - 1.0)
    if extra == 0 or count == 0:
        return w.with_samples(w.samples.copy()), log
    sample_mask = np.zeros(len(w), dtype=bool)
    for a, b in zip(starts, stops):
        sample_mask[int(np.floor(a * sps)):int(np.ceil(b * sps))] = True
    y = w.samples.copy()
    n_hit = int(sample_mask.sum())
    y[sample_mask] += extra * rng.standard_normal(n_hit)
    return w.with_samples(y), log
