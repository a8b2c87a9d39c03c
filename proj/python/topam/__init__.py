"""Self-supporting topology optimization with build-orientation selection."""

from ._core import (
    InputError,
    NumericalError,
    compliance,
    filter_density,
    format_preset,
    heaviside,
    power_mean,
    preset_names,
    run,
)

__all__ = [
    "InputError",
    "NumericalError",
    "compliance",
    "filter_density",
    "format_preset",
    "heaviside",
    "power_mean",
    "preset_names",
    "run",
]
