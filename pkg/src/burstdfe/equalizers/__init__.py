from .dfe import (
    CLASSICAL,
    WEIGHTED,
    EqualizerState,
    FrameResult,
    WdfeStep,
    dfe_step,
    equalize_frame,
    hard_decision,
    reliability,
    weighted_feedback,
)
from .estimators import (
    DecisionFeedbackEqualizer,
    MLSEDetector,
    PolynomialEqualizer,
    PostFilter,
)
from .mlse import (
    MlseModel,
    brute_force_mlse,
    estimate_isi_taps,
    mlse_viterbi,
    sequence_metric,
)
from .pnle import PnleState, pnle_equalize
from .postfilter import compose_target, post_filter, whitening_alpha

__all__ = [
    "CLASSICAL",
    "WEIGHTED",
    "DecisionFeedbackEqualizer",
    "EqualizerState",
    "FrameResult",
    "MLSEDetector",
    "MlseModel",
    "PnleState",
    "PolynomialEqualizer",
    "PostFilter",
    "WdfeStep",
    "brute_force_mlse",
    "compose_target",
    "dfe_step",
    "equalize_frame",
    "estimate_isi_taps",
    "hard_decision",
    "mlse_viterbi",
    "pnle_equalize",
    "post_filter",
    "reliability",
    "sequence_metric",
    "weighted_feedback",
    "whitening_alpha",
]
