"""Desk-scale IM/DD link simulator with DFE, weighted DFE and MLSE receivers."""

from .channel import BurstConfig, ChannelConfig
from .exceptions import (
    AlignmentError,
    BurstDFEError,
    ConfigurationError,
    DivergenceError,
    EstimationError,
    StateSpaceTooLargeError,
    SynchronizationError,
)
from .signal import RrcFilter, SymbolSequence, Waveform

__version__ = "0.1.0"

__all__ = [
    "AlignmentError",
    "BurstConfig",
    "BurstDFEError",
    "ChannelConfig",
    "ConfigurationError",
    "DivergenceError",
    "EstimationError",
    "RrcFilter",
    "StateSpaceTooLargeError",
    "SymbolSequence",
    "SynchronizationError",
    "Waveform",
]
