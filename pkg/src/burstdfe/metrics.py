"""Error counting, Q factor, burst run-length statistics and spectra."""

from collections import Counter
from dataclasses import dataclass, field

import numpy as np
import scipy.signal
from scipy.special import erfc, erfcinv

from .exceptions import AlignmentError
from .utils import check_scalar

HD_FEC_BER = 3.8e-3  # pre-FEC threshold of 7 % overhead hard-decision FEC


@dataclass(frozen=True)
class BerResult:
    bit_errors: int
    bits_compared: int
    ber: float
    q_db: float = float("nan")


@dataclass(frozen=True)
class RunLengthHistogram:
    """Occurrences of maximal consecutive-error runs, keyed by run length."""

    counts: dict = field(default_factory=dict)

    @property
    def total_runs(self):
        return int(sum(self.counts.values()))

    @property
    def max_length(self):
        return max(self.counts, default=0)

    @property
    def lengths(self):
        return np.array(sorted(self.counts), dtype=np.int64)

    def pdf(self):
        """Map run length to its fraction of all runs."""
        total = self.total_runs
        return {k: self.counts[k] / total for k in sorted(self.counts)} if total else {}

    def cdf(self):
        total = self.total_runs
        out, acc = {}, 0
        for k in sorted(self.counts):
            acc += self.counts[k]
            out[k] = acc / total
        return out

    def fraction(self, length):
        total = self.total_runs
        return self.counts.get(length, 0) / total if total else float("nan")

    def __add__(self, other):
        return RunLengthHistogram(dict(Counter(self.counts) + Counter(other.counts)))

    def __eq__(self, other):
        return isinstance(other, RunLengthHistogram) and self.counts == other.counts


def _amps(x):
    return np.asarray(getattr(x, "amplitudes", x), dtype=np.float64)


def count_errors(decided, truth):
    """Compare two aligned symbol sequences.

    ``q_db`` is filled only when ``0 < ber < 0.5``.
    """
    d, t = _amps(decided), _amps(truth)
    if d.shape != t.shape:
        raise AlignmentError(f"length mismatch: {d.size} decided vs {t.size} reference")
    n = int(d.size)
    errors = int(np.count_nonzero(d != t))
    ber = errors / n if n else 0.0
    q = q_from_ber(ber) if 0 < ber < 0.5 else float("nan")
    return BerResult(errors, n, ber, q)


def q_from_ber(ber):
    """Gaussian Q factor in dB: ``20 log10(sqrt(2) * erfcinv(2 * ber))``."""
    check_scalar(ber, "ber", min_val=0.0, max_val=0.5, include_min=False, include_max=False)
    return float(20.0 * np.log10(np.sqrt(2.0) * erfcinv(2.0 * ber)))


def ber_from_q(q_db):
    """Inverse of :func:`q_from_ber`."""
    q = 10.0 ** (q_db / 20.0)
    return float(0.5 * erfc(q / np.sqrt(2.0)))


def run_length_stats(error_mask):
    """Histogram of maximal runs of consecutive errors in a boolean mask."""
    m = np.asarray(error_mask).astype(bool).astype(np.int8)
    if m.size == 0 or not m.any():
        return RunLengthHistogram({})
    edges = np.diff(np.concatenate([[0], m, [0]]))
    starts = np.flatnonzero(edges == 1)
    stops = np.flatnonzero(edges == -1)
    lengths, counts = np.unique(stops - starts, return_counts=True)
    return RunLengthHistogram({int(k): int(c) for k, c in zip(lengths, counts)})


def welch_spectrum(w, segment=4096, overlap=0.5):
    """Hann-windowed averaged periodogram.

    Returns
    -------
    freqs : numpy.ndarray
        One-sided frequency grid in Hz.
    power_db : numpy.ndarray
        Power spectral density in dB relative to the DC bin.
    psd : numpy.ndarray
        Linear one-sided density (units^2/Hz), for energy checks.
    """
    x = np.asarray(getattr(w, "samples", w), dtype=np.float64)
    fs = getattr(w, "sample_rate", 1.0)
    check_scalar(segment, "segment", int, min_val=2, max_val=x.size)
    check_scalar(overlap, "overlap", min_val=0.0, max_val=1.0, include_max=False)
    f, psd = scipy.signal.welch(x, fs=fs, window="hann", nperseg=segment,
                                noverlap=int(overlap * segment), detrend=False,
                                scaling="density", return_onesided=True)
    ref = psd[0] if psd[0] > 0 else psd.max()
    with np.errstate(divide="ignore"):
        power_db = 10.0 * np.log10(psd / ref)
    return f, power_db, psd
