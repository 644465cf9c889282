"""Squeezed microwave emission from a chirally coupled, Floquet-driven cavity-magnon system."""

__version__ = "0.1.0"

from .model import EffectiveParams, PhysicalParams, kittel_frequency, load_config, validate
from .floquet import bessel_j, effective_couplings, hybridized_coupling, rwa_margin, sideband_conditions
from .spectra import (
    build_linear_model,
    lyapunov_steady_state,
    noise_reduction_db,
    spectrum_closed_form,
    spectrum_ideal,
    spectrum_numeric_oracle,
    squeezed_frame_check,
    stability,
)
from .dynamics import compare_rwa, propagate_effective, propagate_full, validation_set

__all__ = [
    "EffectiveParams",
    "PhysicalParams",
    "bessel_j",
    "build_linear_model",
    "compare_rwa",
    "effective_couplings",
    "hybridized_coupling",
    "kittel_frequency",
    "load_config",
    "lyapunov_steady_state",
    "noise_reduction_db",
    "propagate_effective",
    "propagate_full",
    "rwa_margin",
    "sideband_conditions",
    "spectrum_closed_form",
    "spectrum_ideal",
    "spectrum_numeric_oracle",
    "squeezed_frame_check",
    "stability",
    "validate",
    "validation_set",
]
