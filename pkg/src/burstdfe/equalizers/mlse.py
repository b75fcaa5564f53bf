"""Maximum likelihood sequence estimation for binary ISI channels.

The detector minimizes the squared Euclidean distance

    D(s, t) = sum_k (s[k] - sum_{i=0..P} w[i] * t[k-i]) ** 2

over all +/-1 sequences ``t``. Symbols before the start of the block are
either supplied (``initial``) or treated as absent, i.e. their taps do not
contribute. Among equal-metric sequences the one with +1 at the earliest
differing position wins, in both the Viterbi search and the exhaustive oracle.
"""

from dataclasses import dataclass

import numba
import numpy as np

from ..exceptions import ConfigurationError, EstimationError, StateSpaceTooLargeError
from ..signal import SymbolSequence
from ..utils import check_scalar, check_stream, check_symbols

DEFAULT_MAX_MEMORY = 20
BRUTE_FORCE_MAX_LENGTH = 16


@dataclass(frozen=True)
class MlseModel:
    """Channel taps seen by the detector; ``memory`` equals ``len(isi_taps) - 1``."""

    isi_taps: np.ndarray
    residual: float = float("nan")
    alphabet: tuple = (-1.0, 1.0)

    def __post_init__(self):
        taps = check_stream(self.isi_taps, "isi_taps")
        if taps[0] == 0:
            raise ConfigurationError("the leading ISI tap must be non-zero")
        object.__setattr__(self, "isi_taps", taps)

    @property
    def memory(self):
        return self.isi_taps.size - 1


def _prediction_table(taps):
    """Noise-free output for every (P+1)-symbol window.

    Bit ``i`` of the index is 1 when ``t[k-i] == +1``.
    """
    n_taps = taps.size
    idx = np.arange(1 << n_taps)
    bits = (idx[:, None] >> np.arange(n_taps)[None, :]) & 1
    return (2.0 * bits - 1.0) @ taps


def _startup_correction(taps):
    # Absent pre-block symbols are encoded as +1; subtracting the sum of their
    # taps removes their contribution exactly.
    P = taps.size - 1
    return np.array([np.sum(taps[k + 1:]) for k in range(P)], dtype=np.float64)


def _initial_state(initial, P):
    if initial is None:
        return (1 << P) - 1, True
    init = check_symbols(getattr(initial, "amplitudes", initial), "initial")
    if init.size < P:
        raise ValueError(f"initial must hold at least {P} symbols")
    state = 0
    for i in range(P):
        # bit i holds t[-1-i]
        if init[init.size - 1 - i] > 0:
            state |= 1 << i
    return state, False


def sequence_metric(soft, symbols, model, initial=None):
    """Euclidean metric ``D(s, t)`` of a candidate sequence."""
    s = check_stream(soft)
    t = check_symbols(getattr(symbols, "amplitudes", symbols), "symbols")
    if t.size != s.size:
        raise ValueError("soft and symbols differ in length")
    return float(_metrics_for(s, t[None, :], model, initial)[0])


def _metrics_for(s, seqs, model, initial):
    taps = model.isi_taps
    P = model.memory
    table = _prediction_table(taps)
    corr = _startup_correction(taps)
    init_state, phantom = _initial_state(initial, P)
    bits = (seqs > 0).astype(np.int64)
    n = s.size
    D = np.zeros(seqs.shape[0])
    for k in range(n):
        idx = np.zeros(seqs.shape[0], dtype=np.int64)
        for i in range(P + 1):
            j = k - i
            if j >= 0:
                b = bits[:, j]
            else:
                b = np.full(seqs.shape[0], (init_state >> (-j - 1)) & 1, dtype=np.int64)
            idx |= b << i
        pred = table[idx]
        if phantom and k < P:
            pred = pred - corr[k]
        d = s[k] - pred
        D = D + d * d
    return D


def brute_force_mlse(soft, model, initial=None):
    """Exhaustive minimizer of the sequence metric (testing oracle).

    Refuses blocks longer than 16 symbols.
    """
    s = check_stream(soft)
    n = s.size
    if n > BRUTE_FORCE_MAX_LENGTH:
        raise ConfigurationError(
            f"brute force limited to {BRUTE_FORCE_MAX_LENGTH} symbols, got {n}")
    codes = np.arange(1 << n, dtype=np.int64)
    # code bit (n-1-j) carries t[j], so a larger code means +1 earlier
    seqs = 2.0 * ((codes[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1) - 1.0
    D = _metrics_for(s, seqs, model, initial)
    best = codes[D == D.min()].max()
    return SymbolSequence.from_amplitudes(seqs[best])


@numba.njit(cache=True)
def _prefer_first(a, b, m, k_min, surv, depth, P):
    """True when the survivor ending in state ``a`` at time ``m`` has +1 at the
    earliest position where it differs from the one ending in ``b``."""
    pref = True
    while a != b and m >= k_min:
        ba = a & 1
        bb = b & 1
        if ba != bb:
            pref = ba == 1
        slot = m % depth
        a = (a >> 1) | (np.int64(surv[slot, a]) << (P - 1))
        b = (b >> 1) | (np.int64(surv[slot, b]) << (P - 1))
        m -= 1
    if a != b:
        # buffer exhausted: decide on the oldest differing bit still in the state
        for j in range(P - 1, -1, -1):
            ba = (a >> j) & 1
            bb = (b >> j) & 1
            if ba != bb:
                return ba == 1
    return pref


@numba.njit(cache=True)
def _traceback(state, m_from, m_to, surv, depth, P, out):
    # walk from time m_from down to m_to, writing bit 0 of each state
    for m in range(m_from, m_to - 1, -1):
        out[m] = 1.0 if (state & 1) == 1 else -1.0
        if m > m_to:
            state = (state >> 1) | (np.int64(surv[m % depth, state]) << (P - 1))


@numba.njit(cache=True)
def _viterbi(s, table, corr, P, init_state, phantom, depth, out):
    S = 1 << P
    inf = np.inf
    pm = np.full(S, inf)
    pm[init_state] = 0.0
    new = np.empty(S)
    surv = np.zeros((depth, S), dtype=np.uint8)
    n = s.size
    hi = np.int64(1) << (P - 1)
    for k in range(n):
        c_k = corr[k] if (phantom and k < P) else 0.0
        slot = k % depth
        sk = s[k]
        k_min = k - depth + 1
        if k_min < 0:
            k_min = 0
        for st in range(S):
            p0 = st >> 1
            p1 = p0 | hi
            d0 = sk - (table[st] - c_k)
            d1 = sk - (table[st | S] - c_k)
            m0 = pm[p0] + d0 * d0
            m1 = pm[p1] + d1 * d1
            if m0 < m1:
                c = 0
            elif m1 < m0:
                c = 1
            elif m0 == inf:
                c = 0
            else:
                c = 0 if _prefer_first(p0, p1, k - 1, k_min, surv, depth, P) else 1
            new[st] = m1 if c == 1 else m0
            surv[slot, st] = c
        for st in range(S):
            pm[st] = new[st]
        # emit the symbol that has left the traceback window
        if k >= depth - 1 and k <= n - 2:
            best = 0
            for st in range(1, S):
                if pm[st] < pm[best]:
                    best = st
            state = np.int64(best)
            for m in range(k, k - depth + 1, -1):
                state = (state >> 1) | (np.int64(surv[m % depth, state]) << (P - 1))
            out[k - depth + 1] = 1.0 if (state & 1) == 1 else -1.0
    best = 0
    for st in range(1, S):
        if pm[st] < pm[best]:
            best = st
        elif pm[st] == pm[best] and pm[st] < inf:
            k_min = n - depth
            if k_min < 0:
                k_min = 0
            if _prefer_first(np.int64(st), np.int64(best), n - 1, k_min, surv, depth, P):
                best = st
    m_to = n - depth
    if m_to < 0:
        m_to = 0
    _traceback(np.int64(best), n - 1, m_to, surv, depth, P, out)
    return pm[best]


def mlse_viterbi(soft, model, max_memory=DEFAULT_MAX_MEMORY, traceback_depth=None,
                 initial=None):
    """Viterbi search for the minimum-distance +/-1 sequence.

    Parameters
    ----------
    soft : array_like
        Received (equalized) samples, one per symbol.
    model : MlseModel
        ISI taps ``w[0..P]``; the trellis has ``2**P`` states.
    max_memory : int
        Largest memory accepted before refusing the trellis.
    traceback_depth : int, optional
        Decisions are released this many symbols behind the search front.
        Blocks no longer than the depth are decoded exactly. Defaults to
        ``max(64, 10 * (P + 1))``.
    initial : array_like, optional
        The ``P`` symbols preceding the block, oldest first. Without it the
        pre-block taps are dropped.

    Returns
    -------
    SymbolSequence
    """
    s = check_stream(soft)
    P = model.memory
    if P > max_memory:
        raise StateSpaceTooLargeError(
            f"memory {P} exceeds the cap of {max_memory} ({1 << P} states)")
    taps = model.isi_taps
    table = _prediction_table(taps)
    if P == 0:
        d_plus = (s - table[1]) ** 2
        d_minus = (s - table[0]) ** 2
        return SymbolSequence.from_amplitudes(np.where(d_plus <= d_minus, 1.0, -1.0))
    depth = max(64, 10 * (P + 1)) if traceback_depth is None else int(traceback_depth)
    check_scalar(depth, "traceback_depth", int, min_val=P + 1)
    corr = _startup_correction(taps)
    init_state, phantom = _initial_state(initial, P)
    out = np.empty(s.size)
    _viterbi(s, table, corr, P, np.int64(init_state), phantom, depth, out)
    return SymbolSequence.from_amplitudes(out)


def estimate_isi_taps(soft, known, memory):
    """Least-squares fit of ``memory + 1`` ISI taps from soft outputs and known symbols.

    Parameters
    ----------
    soft : array_like
        Equalizer outputs aligned with ``known``.
    known : SymbolSequence or array_like
        Transmitted symbols; at least ``10 * (memory + 1)`` of them.
    memory : int

    Returns
    -------
    MlseModel
        ``residual`` holds the mean squared fit residual.
    """
    check_scalar(memory, "memory", int, min_val=0)
    t = check_symbols(getattr(known, "amplitudes", known), "known")
    s = check_stream(soft)[: t.size]
    if s.size < t.size:
        raise ValueError("fewer soft samples than known symbols")
    if t.size < 10 * (memory + 1):
        raise EstimationError(
            f"need at least {10 * (memory + 1)} known symbols for memory {memory}, got {t.size}")
    rows = t.size - memory
    A = np.empty((rows, memory + 1))
    for i in range(memory + 1):
        A[:, i] = t[memory - i: t.size - i]
    b = s[memory:]
    taps, _, rank, _ = np.linalg.lstsq(A, b, rcond=None)
    if rank < memory + 1:
        raise EstimationError(f"rank-deficient training matrix (rank {rank} < {memory + 1})")
    if taps[0] == 0:
        raise EstimationError("estimated leading tap is zero")
    residual = float(np.mean((b - A @ taps) ** 2))
    return MlseModel(taps, residual)
