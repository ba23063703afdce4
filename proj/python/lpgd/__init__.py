"""Low-precision gradient descent experiments."""

from ._core import (
    ConfigError,
    FormatMismatchError,
    IoError,
    LpgdError,
    OverflowError,
    PreconditionError,
    config_schema,
    estimate_pl,
    expected_round,
    format_info,
    prob_round_down,
    round,
    run_config,
    run_config_text,
    verify,
)

__all__ = [
    "ConfigError",
    "FormatMismatchError",
    "IoError",
    "LpgdError",
    "OverflowError",
    "PreconditionError",
    "config_schema",
    "estimate_pl",
    "expected_round",
    "format_info",
    "prob_round_down",
    "round",
    "run_config",
    "run_config_text",
    "verify",
]
