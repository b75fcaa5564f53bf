"""Classical and reliability-weighted decision feedback equalization.

A feedforward tap vector ``omega`` acts on a window of received samples and a
feedback vector ``rho`` acts on previously fed-back symbols. The classical DFE
feeds back its hard decision. The weighted DFE feeds back

    s_tilde = gamma * s_hat + (1 - gamma) * s

where ``gamma`` measures how far the soft output ``s`` sits from the decision
border. Both adapt by decision-directed LMS with the step scaled by ``gamma``.
"""

from dataclasses import dataclass, replace

import numba
import numpy as np

from ..exceptions import ConfigurationError, DivergenceError
from ..utils import check_scalar, check_stream, check_symbols

CLASSICAL = "classical_dfe"
WEIGHTED = "weighted_dfe"
MODES = (CLASSICAL, WEIGHTED)
MODE_ALIASES = {"dfe": CLASSICAL, "wdfe": WEIGHTED, CLASSICAL: CLASSICAL, WEIGHTED: WEIGHTED}

DIVERGENCE_LIMIT = 1e6


def resolve_mode(mode):
    try:
        return MODE_ALIASES[mode]
    except KeyError:
        raise ConfigurationError(f"unknown equalizer mode {mode!r}; use 'dfe' or 'wdfe'") from None


def hard_decision(s):
    """PAM2 slicer with threshold 0; a tie resolves to +1."""
    return np.where(np.asarray(s) >= 0, 1.0, -1.0) if np.ndim(s) else (1.0 if s >= 0 else -1.0)


def reliability(s, s_hat):
    """Confidence of a soft symbol relative to its decision.

    ``1 - |s - s_hat|`` inside the constellation, 1 outside it. The value is
    floored at 0 so a reference symbol on the far side of the border (as can
    happen with a training symbol) cannot produce a negative weight.
    """
    s = np.asarray(s, dtype=np.float64)
    g = np.where(np.abs(s) > 1.0, 1.0, 1.0 - np.abs(s - s_hat))
    g = np.clip(g, 0.0, 1.0)
    return float(g) if g.ndim == 0 else g


def weighted_feedback(s, s_hat, gamma):
    """Convex blend of decision and soft output, ``gamma*s_hat + (1-gamma)*s``."""
    return gamma * s_hat + (1.0 - gamma) * s


@dataclass(frozen=True)
class WdfeStep:
    """Intermediate quantities of one equalizer iteration."""

    s: float
    s_hat: float
    delta_d: float
    gamma: float
    s_tilde: float
    e: float


@dataclass(frozen=True)
class EqualizerState:
    """Taps, step sizes and feedback memory of a (weighted) DFE.

    ``feedback_history[0]`` is the most recent fed-back symbol.
    """

    omega: np.ndarray
    rho: np.ndarray
    mu1: float = 1e-3
    mu2: float = 1e-3
    feedback_history: np.ndarray = None
    mode: str = CLASSICAL

    def __post_init__(self):
        omega = np.array(self.omega, dtype=np.float64)
        rho = np.array(self.rho, dtype=np.float64)
        hist = (np.zeros_like(rho) if self.feedback_history is None
                else np.array(self.feedback_history, dtype=np.float64))
        if hist.shape != rho.shape:
            raise ConfigurationError("feedback_history must have the same length as rho")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "feedback_history", hist)
        object.__setattr__(self, "mode", resolve_mode(self.mode))

    @classmethod
    def cold_start(cls, n_ff, n_fb, mu1=1e-3, mu2=1e-3, mode=CLASSICAL):
        """Feedforward center tap 1, every other tap and the history 0."""
        check_scalar(n_ff, "n_ff", int, min_val=1)
        check_scalar(n_fb, "n_fb", int, min_val=0)
        omega = np.zeros(n_ff)
        omega[n_ff // 2] = 1.0
        return cls(omega, np.zeros(n_fb), mu1, mu2, None, mode)

    @property
    def decision_delay(self):
        return self.omega.size // 2


def dfe_step(x_window, state, train_symbol=None, gamma_override=None):
    """Run one equalizer iteration and return the step record and new state.

    Parameters
    ----------
    x_window : array_like
        Received samples aligned with ``state.omega``.
    state : EqualizerState
    train_symbol : float, optional
        Known symbol; when given it replaces the hard decision in the error
        and in the feedback.
    gamma_override : float, optional
        Force the reliability to this value (weighted mode only).

    Returns
    -------
    (WdfeStep, EqualizerState)
    """
    x = np.asarray(x_window, dtype=np.float64)
    if x.shape != state.omega.shape:
        raise ValueError(f"x_window has length {x.size}, expected {state.omega.size}")
    hist = state.feedback_history
    s = float(np.dot(state.omega, x) + np.dot(state.rho, hist))
    s_hat = 1.0 if s >= 0 else -1.0
    ref = s_hat if train_symbol is None else float(train_symbol)
    delta_d = abs(s - s_hat)
    if state.mode == CLASSICAL:
        gamma = 1.0
    elif gamma_override is not None:
        gamma = float(gamma_override)
    else:
        gamma = 1.0 if abs(s) > 1.0 else max(0.0, 1.0 - delta_d)
    s_tilde = gamma * ref + (1.0 - gamma) * s
    e = ref - s
    omega = state.omega + state.mu1 * gamma * e * x
    rho = state.rho + state.mu2 * gamma * e * hist
    if not (np.all(np.isfinite(omega)) and np.all(np.isfinite(rho))
            and np.max(np.abs(omega), initial=0) <= DIVERGENCE_LIMIT
            and np.max(np.abs(rho), initial=0) <= DIVERGENCE_LIMIT):
        raise DivergenceError("equalizer taps diverged", step=0)
    new_hist = np.concatenate([[s_tilde], hist[:-1]]) if hist.size else hist
    step = WdfeStep(s, s_hat, delta_d, gamma, s_tilde, e)
    return step, replace(state, omega=omega, rho=rho, feedback_history=new_hist)


@numba.njit(cache=True)
def _dfe_frame(xp, n, omega, rho, hist, mu1, mu2, train, n_train, weighted,
               gamma_force, weight_exponent, mu_decay, mu_floor,
               soft, hard, gammas, traj):
    n_ff = omega.size
    n_fb = rho.size
    record = traj.shape[0] == n
    uses = 0
    scale = 1.0
    for k in range(n):
        s = 0.0
        for i in range(n_ff):
            s += omega[i] * xp[k + i]
        for j in range(n_fb):
            s += rho[j] * hist[j]
        s_hat = 1.0 if s >= 0.0 else -1.0
        training = k < n_train
        ref = train[k] if training else s_hat
        if weighted:
            if gamma_force >= 0.0:
                gamma = gamma_force
            elif abs(s) > 1.0:
                gamma = 1.0
            else:
                gamma = 1.0 - abs(s - s_hat)
                if gamma < 0.0:
                    gamma = 0.0
        else:
            gamma = 1.0
        fw = gamma if weight_exponent == 1.0 else gamma ** weight_exponent
        s_tilde = fw * ref + (1.0 - fw) * s
        e = ref - s
        if not training:
            if gamma != 0.0 or fw != 0.0:
                uses += 1
            if scale > mu_floor:
                scale *= mu_decay
                if scale < mu_floor:
                    scale = mu_floor
        g1 = mu1 * scale * gamma * e
        g2 = mu2 * scale * gamma * e
        bad = False
        for i in range(n_ff):
            omega[i] += g1 * xp[k + i]
            if not (abs(omega[i]) <= 1e6):
                bad = True
        for j in range(n_fb):
            rho[j] += g2 * hist[j]
            if not (abs(rho[j]) <= 1e6):
                bad = True
        if bad:
            return 1, k, uses
        for j in range(n_fb - 1, 0, -1):
            hist[j] = hist[j - 1]
        if n_fb > 0:
            hist[0] = s_tilde
        soft[k] = s
        hard[k] = s_hat
        gammas[k] = gamma
        if record:
            for i in range(n_ff):
                traj[k, i] = omega[i]
            for j in range(n_fb):
                traj[k, n_ff + j] = rho[j]
    return 0, n, uses


@dataclass
class FrameResult:
    """Outputs of :func:`equalize_frame`, aligned with the input samples."""

    soft: np.ndarray
    hard: np.ndarray
    gamma: np.ndarray
    state: EqualizerState
    decision_uses: int
    trajectory: np.ndarray = None


def equalize_frame(x, state, training=None, gamma_override=None, weight_exponent=1.0,
                   mu_decay=1.0, mu_floor=1.0, training_passes=1, record_taps=False):
    """Equalize a symbol-spaced stream, training first then decision-directed.

    Parameters
    ----------
    x : array_like
        Synchronized samples at one sample per symbol. Output ``k`` is the
        estimate of the symbol carried by ``x[k]``.
    state : EqualizerState
        Initial taps; the returned state holds the adapted taps.
    training : SymbolSequence or array_like, optional
        Known symbols for the first ``len(training)`` outputs.
    gamma_override : float, optional
        Force the reliability to a constant in weighted mode.
    weight_exponent : float
        Feedback weight is ``gamma ** weight_exponent``; 1 is the identity.
    mu_decay, mu_floor : float
        After training the step sizes shrink by ``mu_decay`` per symbol, down
        to ``mu_floor`` times their initial value.
    training_passes : int
        Number of sweeps over the training prefix. Extra sweeps only adapt
        the taps; outputs come from the final pass.
    record_taps : bool
        Store the concatenated ``(omega, rho)`` after every step.

    Returns
    -------
    FrameResult
    """
    x = check_stream(x)
    train = np.zeros(0) if training is None else check_symbols(
        getattr(training, "amplitudes", training), "training")
    if train.size > x.size:
        raise ValueError("training is longer than the stream")
    if gamma_override is not None:
        check_scalar(gamma_override, "gamma_override", min_val=0.0, max_val=1.0)
    check_scalar(training_passes, "training_passes", int, min_val=1)
    n_ff = state.omega.size
    delay = n_ff // 2
    omega = state.omega.copy()
    rho = state.rho.copy()
    weighted = state.mode == WEIGHTED
    force = -1.0 if gamma_override is None else float(gamma_override)

    def run(stream, hist, n_train, traj):
        # xp[k:k + n_ff] is the window x[k - delay .. k + delay], oldest first
        xp = np.concatenate([np.zeros(n_ff - 1 - delay), stream, np.zeros(delay)])
        n = stream.size
        soft = np.empty(n)
        hard = np.empty(n)
        gam = np.empty(n)
        status, step, uses = _dfe_frame(
            xp, n, omega, rho, hist, state.mu1, state.mu2,
            train, n_train, weighted, force, float(weight_exponent),
            float(mu_decay), float(mu_floor), soft, hard, gam, traj,
        )
        if status:
            raise DivergenceError(f"equalizer taps diverged at symbol {step}", step=step)
        return soft, hard, gam, uses

    empty = np.zeros((0, n_ff + rho.size))
    for _ in range(training_passes - 1):
        run(x[: train.size], np.zeros_like(rho), train.size, empty)
    traj = np.zeros((x.size, n_ff + rho.size)) if record_taps else empty
    hist = state.feedback_history.copy()
    soft, hard, gam, uses = run(x, hist, train.size, traj)
    final = replace(state, omega=omega, rho=rho, feedback_history=hist)
    return FrameResult(soft, hard, gam, final, uses, traj if record_taps else None)
