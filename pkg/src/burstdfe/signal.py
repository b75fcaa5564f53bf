"""PAM2 frame generation, Nyquist pulse shaping, rate conversion and timing.

All functions are pure: they never mutate their inputs and hold no state.
"""

from dataclasses import dataclass, field

import numba
import numpy as np
import scipy.signal
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import ConfigurationError, SynchronizationError
from .utils import check_bits, check_scalar, check_stream, check_symbols

# Fibonacci LFSR feedback taps (x^n + x^m + 1) for the standard ITU-T patterns.
PRBS_TAPS = {7: (7, 6), 9: (9, 5), 15: (15, 14), 23: (23, 18), 31: (31, 28)}

DEFAULT_TRAINING_LENGTH = 5000


@dataclass(frozen=True)
class SymbolSequence:
    """PAM2 amplitudes together with the bits they were mapped from."""

    amplitudes: np.ndarray
    source_bits: np.ndarray
    symbol_rate: float = 72e9

    def __post_init__(self):
        amps = check_symbols(self.amplitudes, "amplitudes")
        bits = check_bits(self.source_bits, "source_bits")
        if amps.shape != bits.shape:
            raise ValueError("amplitudes and source_bits differ in length")
        if not np.array_equal(amps, 2.0 * bits - 1.0):
            raise ValueError("amplitudes must equal 2*bit - 1")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "source_bits", bits)

    def __len__(self):
        return self.amplitudes.size

    def __getitem__(self, item):
        return SymbolSequence(self.amplitudes[item], self.source_bits[item], self.symbol_rate)

    @classmethod
    def from_amplitudes(cls, amplitudes, symbol_rate=72e9):
        amps = check_symbols(amplitudes, "amplitudes")
        return cls(amps, (amps > 0).astype(np.int8), symbol_rate)


@dataclass(frozen=True)
class Waveform:
    """A uniformly sampled real signal."""

    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        if not self.sample_rate > 0:
            raise ConfigurationError(f"sample_rate must be positive, got {self.sample_rate}")
        arr = check_stream(self.samples, "samples", allow_empty=True)
        object.__setattr__(self, "samples", arr)

    def __len__(self):
        return self.samples.size

    def with_samples(self, samples):
        return Waveform(samples, self.sample_rate)

    @property
    def duration(self):
        return self.samples.size / self.sample_rate


@dataclass(frozen=True)
class RrcFilter:
    """Root-raised-cosine FIR taps, unit energy and even-symmetric."""

    taps: np.ndarray
    roll_off: float
    span: int
    samples_per_symbol: float
    center: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "center", (self.taps.size - 1) // 2)

    def apply(self, x):
        """Filter ``x`` with the taps, compensating the filter delay."""
        y = scipy.signal.fftconvolve(x, self.taps, mode="full")
        return y[self.center:self.center + len(x)]


@numba.njit(cache=True)
def _lfsr(state, n_bits, tap_a, tap_b, length):
    out = np.empty(length, dtype=np.int8)
    for k in range(length):
        new = ((state >> (tap_a - 1)) ^ (state >> (tap_b - 1))) & 1
        state = ((state << 1) | new) & ((1 << n_bits) - 1)
        out[k] = new
    return out


def generate_prbs(order, length, seed=1):
    """Pseudo-random binary sequence from a maximal-length Fibonacci LFSR.

    Parameters
    ----------
    order : int
        Register length, one of 7, 9, 15, 23 or 31.
    length : int
        Number of bits to emit.
    seed : int
        Selects the initial register state. Any integer is accepted; it is
        folded onto the non-zero states so every seed yields a valid sequence.

    Returns
    -------
    numpy.ndarray of int8
        Bits in {0, 1}. The sequence repeats with period ``2**order - 1``.
    """
    if order not in PRBS_TAPS:
        raise ConfigurationError(f"unsupported PRBS order {order}; choose from {sorted(PRBS_TAPS)}")
    check_scalar(length, "length", int, min_val=1)
    period = (1 << order) - 1
    state = 1 + (int(seed) - 1) % period
    tap_a, tap_b = PRBS_TAPS[order]
    return _lfsr(np.int64(state), order, tap_a, tap_b, int(length))


def map_pam2(bits, symbol_rate=72e9):
    """Map bits to PAM2 amplitudes: 0 -> -1, 1 -> +1."""
    b = check_bits(bits)
    return SymbolSequence(2.0 * b - 1.0, b, symbol_rate)


def demap_pam2(amplitudes):
    """Inverse of :func:`map_pam2` on hard decisions (ties at 0 resolve to 1)."""
    return (np.asarray(amplitudes, dtype=np.float64) >= 0).astype(np.int8)


def _rrc_response(t, beta):
    t = np.asarray(t, dtype=np.float64)
    h = np.empty_like(t)
    zero = np.isclose(t, 0.0, atol=1e-12)
    h[zero] = 1.0 - beta + 4.0 * beta / np.pi
    sing = np.zeros_like(zero)
    if beta > 0:
        sing = np.isclose(np.abs(t), 1.0 / (4.0 * beta), atol=1e-9) & ~zero
        if sing.any():
            h[sing] = (beta / np.sqrt(2.0)) * (
                (1 + 2 / np.pi) * np.sin(np.pi / (4 * beta))
                + (1 - 2 / np.pi) * np.cos(np.pi / (4 * beta))
            )
    rest = ~(zero | sing)
    tr = t[rest]
    num = np.sin(np.pi * tr * (1 - beta)) + 4 * beta * tr * np.cos(np.pi * tr * (1 + beta))
    den = np.pi * tr * (1 - (4 * beta * tr) ** 2)
    h[rest] = num / den
    return h


def design_rrc(roll_off=0.02, span=32, samples_per_symbol=2):
    """Design a unit-energy root-raised-cosine filter.

    Parameters
    ----------
    roll_off : float
        Excess bandwidth factor in [0, 1].
    span : int
        Filter length in symbols (at least 4).
    samples_per_symbol : float
        Oversampling ratio, at least 1.25. Need not be an integer.

    Returns
    -------
    RrcFilter
    """
    check_scalar(roll_off, "roll_off", min_val=0.0, max_val=1.0)
    check_scalar(span, "span", int, min_val=4)
    check_scalar(samples_per_symbol, "samples_per_symbol", min_val=1.25)
    half = int(np.floor(span * samples_per_symbol / 2))
    t_pos = np.arange(half + 1) / samples_per_symbol
    h_pos = _rrc_response(t_pos, float(roll_off))
    # mirror so the symmetry is exact rather than merely numerical
    taps = np.concatenate([h_pos[:0:-1], h_pos])
    taps /= np.sqrt(np.sum(taps ** 2))
    return RrcFilter(taps, float(roll_off), int(span), float(samples_per_symbol))


def upsample(symbols, samples_per_symbol):
    """Zero-stuff a symbol stream by an integer factor."""
    amps = np.asarray(getattr(symbols, "amplitudes", symbols), dtype=np.float64)
    out = np.zeros(amps.size * samples_per_symbol)
    out[::samples_per_symbol] = amps
    return out


def pulse_shape(symbols, rrc):
    """Upsample and RRC-filter a symbol sequence into a transmit waveform.

    The output is scaled so that sampling the matched-filter output at the
    symbol instants returns the original amplitudes.
    """
    sps = int(round(rrc.samples_per_symbol))
    if sps != rrc.samples_per_symbol:
        raise ConfigurationError("pulse shaping needs an integer samples_per_symbol")
    x = rrc.apply(upsample(symbols, sps))
    rate = getattr(symbols, "symbol_rate", 72e9) * sps
    return Waveform(x, rate)


def resample(w, target_rate):
    """Band-limited (FFT) resampling of ``w`` to ``target_rate``.

    The number of output samples is ``round(len(w) * target_rate / rate)``;
    equal rates return an unmodified copy.
    """
    check_scalar(target_rate, "target_rate", min_val=0.0, include_min=False)
    if np.isclose(target_rate, w.sample_rate, rtol=1e-15, atol=0.0):
        return Waveform(w.samples.copy(), float(target_rate))
    n_out = int(round(len(w) * target_rate / w.sample_rate))
    y = scipy.signal.resample(w.samples, n_out)
    return Waveform(y, float(target_rate))


def synchronize(rx, training, window=None, min_correlation=0.2):
    """Locate ``training`` inside ``rx`` by normalized cross-correlation.

    Parameters
    ----------
    rx : Waveform, SymbolSequence or array_like
        Received stream at one sample per symbol.
    training : SymbolSequence or array_like
        Known training symbols.
    window : int, optional
        Largest absolute lag searched. Defaults to ``len(training)``.
    min_correlation : float
        Peak normalized correlation below which the search is declared failed.

    Returns
    -------
    int
        Lag ``d`` such that ``rx[d:d + len(training)]`` best matches the training.

    Raises
    ------
    SynchronizationError
        If the correlation peak is below ``min_correlation``.
    """
    r = np.asarray(getattr(rx, "samples", getattr(rx, "amplitudes", rx)), dtype=np.float64)
    t = np.asarray(getattr(training, "amplitudes", training), dtype=np.float64)
    n = t.size
    if n < 64:
        raise ConfigurationError(f"training must hold at least 64 symbols, got {n}")
    w = n if window is None else int(window)
    # zero-pad so every lag in [-w, w] sees a full-length (possibly padded) segment
    seg = np.concatenate([np.zeros(w), r[: n + w], np.zeros(max(0, n + w - r.size))])
    corr = scipy.signal.correlate(seg, t, mode="valid", method="fft")[: 2 * w + 1]
    energy = np.concatenate([[0.0], np.cumsum(seg ** 2)])
    seg_energy = energy[n:n + 2 * w + 1] - energy[: 2 * w + 1]
    denom = np.sqrt(np.maximum(seg_energy, 1e-300) * np.sum(t ** 2))
    ncc = np.where(seg_energy > 0, corr / denom, 0.0)
    best = int(np.argmax(ncc))
    if ncc[best] < min_correlation:
        raise SynchronizationError(
            f"peak normalized correlation {ncc[best]:.3f} below {min_correlation}"
        )
    return best - w


class RrcMatchedFilter(TransformerMixin, BaseEstimator):
    """Matched RRC filter followed by symbol-rate decimation.

    Parameters
    ----------
    roll_off : float
    span : int
    samples_per_symbol : int
    phase : int
        Sampling phase (in samples) used when decimating.
    """

    def __init__(self, roll_off=0.02, span=32, samples_per_symbol=2, phase=0):
        self.roll_off = roll_off
        self.span = span
        self.samples_per_symbol = samples_per_symbol
        self.phase = phase

    def fit(self, X, y=None):
        self.filter_ = design_rrc(self.roll_off, self.span, self.samples_per_symbol)
        return self

    def transform(self, X):
        check_is_fitted(self, "filter_")
        x = check_stream(getattr(X, "samples", X))
        y = self.filter_.apply(x)
        return y[self.phase::self.samples_per_symbol]
