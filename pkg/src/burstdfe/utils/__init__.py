from .validation import (
    check_bits,
    check_odd_length,
    check_random_state,
    check_scalar,
    check_stream,
    check_symbols,
)

__all__ = [
    "check_bits",
    "check_odd_length",
    "check_random_state",
    "check_scalar",
    "check_stream",
    "check_symbols",
]
