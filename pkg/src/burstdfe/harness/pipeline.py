"""Transmitter, channel and receiver chain for a single simulated frame."""

from dataclasses import dataclass, field

import numpy as np

from ..channel import add_noise, apply_channel, inject_bursts, lowpass_device
from ..equalizers import (
    EqualizerState,
    PnleState,
    equalize_frame,
    estimate_isi_taps,
    mlse_viterbi,
    pnle_equalize,
    post_filter,
    whitening_alpha,
)
from ..metrics import count_errors, run_length_stats
from ..signal import design_rrc, generate_prbs, map_pam2, pulse_shape, resample, synchronize


@dataclass(frozen=True)
class ReceivedFrame:
    """Symbol-spaced receiver input together with the ground truth."""

    samples: np.ndarray
    symbols: object
    burst_log: object
    waveforms: dict = field(default_factory=dict)


def simulate_link(channel, frame, link, seed, keep_waveforms=False):
    """Generate a PAM2 frame, send it over ``channel`` and return the synchronized
    symbol-spaced stream after matched filtering."""
    n_sym = frame.training_length + frame.payload_length
    bits = generate_prbs(frame.prbs_order, n_sym, seed=seed)
    symbols = map_pam2(bits, link.symbol_rate)
    rrc = design_rrc(link.roll_off, link.rrc_span, link.samples_per_symbol)
    keep = {}

    tx = pulse_shape(symbols, rrc)
    for bw in channel.tx_bandwidths:
        tx = lowpass_device(tx, bw)
    rx = apply_channel(tx, channel)
    rx = rx.with_samples(rx.samples / np.sqrt(np.mean(rx.samples ** 2)))
    if keep_waveforms:
        keep["received"] = rx
    rx_bws = list(channel.rx_bandwidths)
    if rx_bws:
        rx = lowpass_device(rx, rx_bws[0])
    rx = add_noise(rx, channel, seed=np.random.SeedSequence([seed, 1]))
    rx, log = inject_bursts(rx, channel, link.symbol_rate, seed=seed)
    for bw in rx_bws[1:]:
        rx = lowpass_device(rx, bw)
    if link.adc_rate:
        rx = resample(resample(rx, link.adc_rate), tx.sample_rate)
    sps = int(link.samples_per_symbol)
    y = rrc.apply(rx.samples)[::sps][:n_sym]
    train = symbols.amplitudes[: frame.training_length]
    lag = synchronize(y, train, window=link.sync_window or None)
    y = np.roll(y, -lag)
    y = y / np.sqrt(np.mean(y ** 2))
    if keep_waveforms:
        keep["detected"] = rx
    return ReceivedFrame(y, symbols, log, keep)


@dataclass(frozen=True)
class StageOutputs:
    """Per-mode receiver outputs and payload statistics of one frame."""

    mode: str
    soft: np.ndarray
    hard: np.ndarray
    mlse_input: np.ndarray
    mlse_hard: np.ndarray
    model: object
    pf_alpha: float
    eq_errors: object
    eq_runs: object
    mlse_errors: object
    mlse_runs: object


def _stage_stats(decided, truth):
    return count_errors(decided, truth), run_length_stats(decided != truth)


def front_end(received, eq, frame):
    """PNLE stage shared by all equalizer modes; identity when disabled."""
    x = received.samples
    if not eq.pnle_taps:
        return x
    train = received.symbols.amplitudes[: frame.training_length]
    pstate = PnleState.cold_start(*eq.pnle_taps, mu=tuple(eq.pnle_mu))
    x, _ = pnle_equalize(x, pstate, train, training_passes=eq.training_passes)
    return x


def equalize(x, truth, eq, frame, mode):
    """Run (W)DFE -> post filter -> MLSE on a symbol-spaced stream.

    ``eq.mlse_memory == 0`` means no sequence detection: the post filter is
    bypassed and the MLSE stage repeats the equalizer decisions. Statistics
    cover the payload only.
    """
    n_tr = frame.training_length
    truth = np.asarray(getattr(truth, "amplitudes", truth))
    train = truth[:n_tr]
    state = EqualizerState.cold_start(eq.dfe_taps[0], eq.dfe_taps[1], eq.mu1, eq.mu2, mode)
    res = equalize_frame(x, state, train, mu_decay=eq.mu_decay, mu_floor=eq.mu_floor,
                         training_passes=eq.training_passes,
                         weight_exponent=eq.weight_exponent)
    P = eq.mlse_memory
    if P == 0:
        alpha, z, model, decided = 0.0, res.soft, None, res.hard
    else:
        alpha = whitening_alpha(res.soft, train, P) if eq.pf_alpha == "auto" else float(eq.pf_alpha)
        z = post_filter(res.soft, alpha)
        model = estimate_isi_taps(z[:n_tr], train, P)
        depth = eq.traceback_depth or None
        decided = mlse_viterbi(z, model, max_memory=eq.max_memory,
                               traceback_depth=depth).amplitudes
    payload = slice(n_tr, None)
    eq_err, eq_runs = _stage_stats(res.hard[payload], truth[payload])
    ml_err, ml_runs = _stage_stats(decided[payload], truth[payload])
    return StageOutputs(mode, res.soft, res.hard, z, decided, model, alpha,
                        eq_err, eq_runs, ml_err, ml_runs)
