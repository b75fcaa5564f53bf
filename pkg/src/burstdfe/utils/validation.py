"""Input validation helpers in the spirit of ``sklearn.utils.validation``."""

import numbers

import numpy as np

from ..exceptions import ConfigurationError


def check_stream(x, name="x", allow_empty=False):
    """Return ``x`` as a contiguous 1-D float64 array of finite values."""
    arr = np.ascontiguousarray(np.asarray(x, dtype=np.float64))
    if arr.ndim == 2 and 1 in arr.shape:
        arr = arr.ravel()
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not allow_empty and arr.size == 0:
        raise ValueError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or infinite values")
    return arr


def check_symbols(t, name="symbols"):
    """Return ``t`` as a float64 array whose entries are all -1 or +1."""
    arr = check_stream(t, name=name, allow_empty=True)
    if arr.size and not np.all(np.abs(arr) == 1.0):
        raise ValueError(f"{name} must contain only -1 and +1")
    return arr


def check_bits(bits, name="bits"):
    arr = np.asarray(bits)
    if arr.ndim != 1:
        arr = arr.ravel()
    if arr.size and not np.all((arr == 0) | (arr == 1)):
        raise ValueError(f"{name} must contain only 0 and 1")
    return arr.astype(np.int8)


def check_scalar(value, name, target_type=numbers.Real, min_val=None, max_val=None,
                 include_min=True, include_max=True):
    """Validate a scalar parameter, raising :class:`ConfigurationError` on failure."""
    if isinstance(value, bool) or not isinstance(value, target_type):
        raise ConfigurationError(f"{name} must be {target_type}, got {type(value).__name__}")
    if min_val is not None:
        bad = value < min_val if include_min else value <= min_val
        if bad:
            op = ">=" if include_min else ">"
            raise ConfigurationError(f"{name} must be {op} {min_val}, got {value}")
    if max_val is not None:
        bad = value > max_val if include_max else value >= max_val
        if bad:
            op = "<=" if include_max else "<"
            raise ConfigurationError(f"{name} must be {op} {max_val}, got {value}")
    return value


def check_odd_length(n, name):
    check_scalar(n, name, numbers.Integral, min_val=1)
    if n % 2 == 0:
        raise ConfigurationError(f"{name} must be odd (center-referenced), got {n}")
    return int(n)


def check_random_state(seed):
    """Turn ``seed`` into a :class:`numpy.random.Generator`."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
