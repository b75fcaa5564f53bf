"""Two-tap partial-response post filter placed in front of the MLSE."""

import numpy as np

from ..utils import check_scalar, check_stream, check_symbols
from .mlse import estimate_isi_taps

MAX_AUTO_ALPHA = 0.9


def post_filter(y, alpha=0.0):
    """Two-tap partial-response filter ``z[k] = y[k] + alpha * y[k-1]``."""
    y = check_stream(y, allow_empty=True)
    z = y.copy()
    if alpha != 0.0 and y.size > 1:
        z[1:] += alpha * y[:-1]
    return z


def compose_target(isi_taps, alpha):
    """ISI response seen after the post filter: ``isi_taps * (1, alpha)``."""
    return np.convolve(np.asarray(isi_taps, dtype=np.float64), [1.0, alpha])


def whitening_alpha(soft, known, memory):
    """Post-filter coefficient that whitens the residual of an ISI fit.

    The residual ``r`` of a ``memory``-tap least-squares fit over the known
    prefix is treated as the noise entering the MLSE. ``r[k] + alpha*r[k-1]``
    has minimum variance at ``alpha = -acf(1)``, which is returned clipped
    to ``[-0.9, 0.9]``. An exact fit returns 0.

    Parameters
    ----------
    soft : array_like
        Equalizer outputs, at least as long as ``known``.
    known : SymbolSequence or array_like
    memory : int

    Returns
    -------
    float
    """
    check_scalar(memory, "memory", int, min_val=0)
    t = check_symbols(getattr(known, "amplitudes", known), "known")
    s = check_stream(soft)[: t.size]
    model = estimate_isi_taps(s, t, memory)
    A = np.stack([t[memory - i: t.size - i] for i in range(memory + 1)], axis=1)
    r = s[memory:] - A @ model.isi_taps
    energy = float(np.dot(r, r))
    if energy <= 1e-20 * float(np.dot(s, s)):  # exact fit; the residual is rounding noise
        return 0.0
    rho1 = float(np.dot(r[1:], r[:-1])) / energy
    return float(np.clip(-rho1, -MAX_AUTO_ALPHA, MAX_AUTO_ALPHA))
