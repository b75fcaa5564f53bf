"""scikit-learn compatible wrappers around the equalizer kernels.

Streams are 1-D arrays at one sample per symbol. ``y`` is always a sequence
of known training symbols covering a prefix of ``X``.
"""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ..utils import check_scalar, check_stream, check_symbols
from .dfe import EqualizerState, equalize_frame, resolve_mode
from .mlse import estimate_isi_taps, mlse_viterbi
from .pnle import PnleState, pnle_equalize
from .postfilter import post_filter, whitening_alpha


def _training(y):
    if y is None:
        return None
    return check_symbols(getattr(y, "amplitudes", y), "y")


class PolynomialEqualizer(TransformerMixin, BaseEstimator):
    """Memory-polynomial equalizer with linear, square and cubic branches.

    Parameters
    ----------
    n_taps : tuple of int
        Odd tap counts of the three branches.
    mu : tuple of float
        LMS step sizes per branch.
    adapt_dd : bool
        Keep adapting decision-directed after the training prefix.
    training_passes : int
    """

    def __init__(self, n_taps=(81, 71, 51), mu=(1e-3, 1e-4, 1e-4), adapt_dd=False,
                 training_passes=1):
        self.n_taps = n_taps
        self.mu = mu
        self.adapt_dd = adapt_dd
        self.training_passes = training_passes

    def fit(self, X, y):
        self.fit_transform(X, y)
        return self

    def fit_transform(self, X, y=None, **fit_params):
        x = check_stream(X)
        state = PnleState.cold_start(*self.n_taps, mu=self.mu)
        out, self.state_ = pnle_equalize(x, state, _training(y), self.adapt_dd,
                                         self.training_passes)
        return out

    def transform(self, X):
        check_is_fitted(self, "state_")
        out, _ = pnle_equalize(check_stream(X), self.state_, None, False)
        return out


class DecisionFeedbackEqualizer(ClassifierMixin, BaseEstimator):
    """Classical or reliability-weighted DFE with LMS adaptation.

    ``fit_predict(X, y)`` runs the whole frame in one pass: trained on the
    ``len(y)``-symbol prefix, decision-directed afterwards. ``decision_function``
    returns the soft outputs of that pass.

    Parameters
    ----------
    mode : {'dfe', 'wdfe'}
    n_feedforward, n_feedback : int
    mu1, mu2 : float
        Feedforward and feedback LMS step sizes.
    mu_decay, mu_floor : float
        Per-symbol geometric decay of the steps after training, and its floor
        relative to the initial steps.
    gamma_override : float, optional
        Fix the reliability weight (weighted mode).
    weight_exponent : float
        Feedback weight ``gamma ** weight_exponent``.
    training_passes : int
    """

    def __init__(self, mode="wdfe", n_feedforward=71, n_feedback=51, mu1=1e-3, mu2=1e-3,
                 mu_decay=0.9995, mu_floor=0.1, gamma_override=None, weight_exponent=1.0,
                 training_passes=10):
        self.mode = mode
        self.n_feedforward = n_feedforward
        self.n_feedback = n_feedback
        self.mu1 = mu1
        self.mu2 = mu2
        self.mu_decay = mu_decay
        self.mu_floor = mu_floor
        self.gamma_override = gamma_override
        self.weight_exponent = weight_exponent
        self.training_passes = training_passes

    def _run(self, x, y, state):
        res = equalize_frame(
            x, state, y, gamma_override=self.gamma_override,
            weight_exponent=self.weight_exponent, mu_decay=self.mu_decay,
            mu_floor=self.mu_floor, training_passes=self.training_passes,
        )
        self.state_ = res.state
        self.soft_ = res.soft
        self.gamma_ = res.gamma
        self.decision_uses_ = res.decision_uses
        self.classes_ = np.array([-1.0, 1.0])
        return res

    def fit(self, X, y):
        self.fit_predict(X, y)
        return self

    def fit_predict(self, X, y=None):
        check_scalar(self.n_feedforward, "n_feedforward", int, min_val=1)
        state = EqualizerState.cold_start(self.n_feedforward, self.n_feedback, self.mu1,
                                          self.mu2, resolve_mode(self.mode))
        return self._run(check_stream(X), _training(y), state).hard

    def predict(self, X):
        """Continue decision-directed on a new stream from the fitted taps."""
        check_is_fitted(self, "state_")
        return self._run(check_stream(X), None, self.state_).hard

    def decision_function(self, X=None):
        check_is_fitted(self, "soft_")
        if X is None:
            return self.soft_
        self.predict(X)
        return self.soft_

    @property
    def coef_(self):
        check_is_fitted(self, "state_")
        return self.state_.omega

    @property
    def feedback_coef_(self):
        check_is_fitted(self, "state_")
        return self.state_.rho


class PostFilter(TransformerMixin, BaseEstimator):
    """Two-tap ``1 + alpha z^-1`` filter.

    Parameters
    ----------
    alpha : float or 'auto'
        With ``'auto'``, :meth:`fit` picks the coefficient that whitens the
        residual of a ``memory``-tap ISI fit (see :func:`whitening_alpha`)
        and needs the training symbols ``y``.
    memory : int
        ISI memory used by the ``'auto'`` fit.
    """

    def __init__(self, alpha=0.0, memory=6):
        self.alpha = alpha
        self.memory = memory

    def fit(self, X, y=None):
        if isinstance(self.alpha, str):
            if self.alpha != "auto":
                raise ValueError(f"alpha must be a number or 'auto', got {self.alpha!r}")
            if y is None:
                raise ValueError("alpha='auto' needs training symbols y")
            self.alpha_ = whitening_alpha(X, _training(y), self.memory)
        else:
            self.alpha_ = float(check_scalar(self.alpha, "alpha"))
        return self

    def transform(self, X):
        if isinstance(self.alpha, str):
            check_is_fitted(self, "alpha_")
            return post_filter(X, self.alpha_)
        return post_filter(X, float(self.alpha))

    def __sklearn_tags__(self):
        tags = super().__sklearn_tags__()
        tags.requires_fit = self.alpha == "auto"
        return tags


class MLSEDetector(ClassifierMixin, BaseEstimator):
    """Viterbi sequence detector whose ISI taps are fitted by least squares.

    Parameters
    ----------
    memory : int
        Channel memory ``P``; the trellis has ``2**P`` states.
    max_memory : int
    traceback_depth : int, optional
    """

    def __init__(self, memory=6, max_memory=20, traceback_depth=None):
        self.memory = memory
        self.max_memory = max_memory
        self.traceback_depth = traceback_depth

    def fit(self, X, y):
        self.model_ = estimate_isi_taps(check_stream(X), _training(y), self.memory)
        self.classes_ = np.array([-1.0, 1.0])
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        seq = mlse_viterbi(X, self.model_, self.max_memory, self.traceback_depth)
        return seq.amplitudes

    @property
    def coef_(self):
        check_is_fitted(self, "model_")
        return self.model_.isi_taps
