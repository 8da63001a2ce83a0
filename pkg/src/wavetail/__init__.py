"""
wavetail __init__.py
"""

# Package information
__version__ = "0.1.0"  # remember to sync with setup.py
__author__ = "Tiago Tresoldi"
__email__ = "tiago.tresoldi@lingfil.uu.se"

# Import from the various modules
from wavetail.common import (
    ConditioningError,
    ConfigError,
    OrderUndeterminedError,
    ZeroEnergyResonanceError,
)
from wavetail.potential import (
    PiecewiseConstant,
    ScatteringData,
    SquareBarrier,
    amplitudes,
    dk_phi_at_zero,
    g_minus_derivatives,
    phi_at_zero,
    piecewise_constant,
    scattering_state,
    square_barrier,
)
from wavetail.packets import (
    PacketSpec,
    free_evolution,
    momentum_amplitude,
    normalize,
    position_amplitude,
)
from wavetail.spectral import (
    SpectralAmplitude,
    derivatives_at_zero,
    spectral_amplitude,
    vanishing_order,
)
from wavetail.propagation import WaveField, evolve_grid, evolve_spectral
from wavetail.asymptotics import TailExpansion, asymptotic_nonescape, tail_expansion, tail_value
from wavetail.observables import (
    ProbabilitySeries,
    fit_power_law,
    nonescape,
    nonescape_series,
)
from wavetail.config import ExperimentConfig, load_config

# Build the exported namespace; numerical helpers from the common module
# are not included (but they are available with full qualified usage, like
# `wavetail.common.gauss_panels`)
__all__ = [
    "ConditioningError",
    "ConfigError",
    "OrderUndeterminedError",
    "ZeroEnergyResonanceError",
    "PiecewiseConstant",
    "ScatteringData",
    "SquareBarrier",
    "amplitudes",
    "dk_phi_at_zero",
    "g_minus_derivatives",
    "phi_at_zero",
    "piecewise_constant",
    "scattering_state",
    "square_barrier",
    "PacketSpec",
    "free_evolution",
    "momentum_amplitude",
    "normalize",
    "position_amplitude",
    "SpectralAmplitude",
    "derivatives_at_zero",
    "spectral_amplitude",
    "vanishing_order",
    "WaveField",
    "evolve_grid",
    "evolve_spectral",
    "TailExpansion",
    "asymptotic_nonescape",
    "tail_expansion",
    "tail_value",
    "ProbabilitySeries",
    "fit_power_law",
    "nonescape",
    "nonescape_series",
    "ExperimentConfig",
    "load_config",
]
