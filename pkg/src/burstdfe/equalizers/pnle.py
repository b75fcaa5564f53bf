"""Third-order polynomial (diagonal Volterra / memory polynomial) equalizer."""

from dataclasses import dataclass, replace

import numba
import numpy as np

from ..exceptions import DivergenceError
from ..utils import check_odd_length, check_stream, check_symbols


@dataclass(frozen=True)
class PnleState:
    """Linear, square and cubic tap vectors with their LMS step sizes."""

    w1: np.ndarray
    w2: np.ndarray
    w3: np.ndarray
    mu: tuple = (1e-3, 1e-4, 1e-4)

    def __post_init__(self):
        for name in ("w1", "w2", "w3"):
            arr = np.array(getattr(self, name), dtype=np.float64)
            check_odd_length(arr.size, f"len({name})")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite taps")
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "mu", tuple(float(m) for m in self.mu))

    @classmethod
    def cold_start(cls, n1=81, n2=71, n3=51, mu=(1e-3, 1e-4, 1e-4)):
        w1 = np.zeros(check_odd_length(n1, "n1"))
        w1[n1 // 2] = 1.0
        return cls(w1, np.zeros(check_odd_length(n2, "n2")),
                   np.zeros(check_odd_length(n3, "n3")), mu)

    @property
    def lengths(self):
        return self.w1.size, self.w2.size, self.w3.size


@numba.njit(cache=True)
def _pnle_frame(xp, pad, n, w1, w2, w3, mu1, mu2, mu3, train, n_train, adapt_dd, out):
    h1 = w1.size // 2
    h2 = w2.size // 2
    h3 = w3.size // 2
    for k in range(n):
        c = k + pad
        y = 0.0
        for i in range(w1.size):
            y += w1[i] * xp[c - h1 + i]
        for i in range(w2.size):
            v = xp[c - h2 + i]
            y += w2[i] * v * v
        for i in range(w3.size):
            v = xp[c - h3 + i]
            y += w3[i] * v * v * v
        out[k] = y
        if k < n_train:
            e = train[k] - y
        elif adapt_dd:
            e = (1.0 if y >= 0.0 else -1.0) - y
        else:
            continue
        bad = False
        for i in range(w1.size):
            w1[i] += mu1 * e * xp[c - h1 + i]
            if not (abs(w1[i]) <= 1e6):
                bad = True
        for i in range(w2.size):
            v = xp[c - h2 + i]
            w2[i] += mu2 * e * v * v
            if not (abs(w2[i]) <= 1e6):
                bad = True
        for i in range(w3.size):
            v = xp[c - h3 + i]
            w3[i] += mu3 * e * v * v * v
            if not (abs(w3[i]) <= 1e6):
                bad = True
        if bad:
            return k
    return -1


def pnle_equalize(x, state, training=None, adapt_dd=False, training_passes=1):
    """Apply the polynomial equalizer, adapting it by LMS on the training prefix.

    ``y[k] = sum w1[i] x[k-i] + sum w2[i] x[k-i]**2 + sum w3[i] x[k-i]**3``
    with every window centered on ``x[k]``.

    Parameters
    ----------
    x : array_like
        Stream at one sample per symbol.
    state : PnleState
    training : SymbolSequence or array_like, optional
        Known symbols for the first outputs; taps adapt only while they last
        unless ``adapt_dd`` is set.
    adapt_dd : bool
        Keep adapting after training using hard decisions.
    training_passes : int
        Sweeps over the training prefix before the output pass.

    Returns
    -------
    (numpy.ndarray, PnleState)
        Equalized stream and adapted state.

    Raises
    ------
    DivergenceError
        If any tap leaves ``[-1e6, 1e6]``.
    """
    x = check_stream(x, allow_empty=True)
    train = np.zeros(0) if training is None else check_symbols(
        getattr(training, "amplitudes", training), "training")
    w1, w2, w3 = state.w1.copy(), state.w2.copy(), state.w3.copy()
    pad = max(state.lengths) // 2
    xp = np.concatenate([np.zeros(pad), x, np.zeros(pad)])
    out = np.empty(x.size)
    mu1, mu2, mu3 = state.mu
    n_train = min(train.size, x.size)
    for p in range(training_passes):
        last = p == training_passes - 1
        n = x.size if last else n_train
        bad = _pnle_frame(xp, pad, n, w1, w2, w3, mu1, mu2, mu3, train, n_train,
                          adapt_dd, out)
        if bad >= 0:
            raise DivergenceError(f"PNLE taps diverged at symbol {bad}", step=bad)
    return out, replace(state, w1=w1, w2=w2, w3=w3)
