"""Semiclassical (WKB) spectrum of the valence electron of 87Rb.

Quantum defects and fine-structure splittings from a parametric core
potential with a cut-off spin-orbit term, plus a Numerov shooting solver
for independent checks.
"""

from .action import action_integral, action_scan, coulomb_action, turning_points
from .errors import (ConfigurationError, DomainError, NumericalError, ParameterError,
                     RydbergModelError)
from .oracle import oracle_eigenvalue, oracle_level, wavefunction_profile
from .params import Channel, ModelParams, channels_for, load_params
from .spectrum import (energy_from_defect, fine_splitting_direct, fine_splitting_leading,
                       quantum_defect, solve_eigenvalue, solve_level, to_mhz)

__version__ = "0.1.0"

__all__ = [
    "Channel", "ConfigurationError", "DomainError", "ModelParams", "NumericalError",
    "ParameterError", "RydbergModelError", "action_integral", "action_scan", "channels_for",
    "coulomb_action", "energy_from_defect", "fine_splitting_direct", "fine_splitting_leading",
    "load_params", "oracle_eigenvalue", "oracle_level", "quantum_defect", "solve_eigenvalue",
    "solve_level", "to_mhz", "turning_points", "wavefunction_profile",
]
