"""Tracking control of observables in the driven 1D Fermi-Hubbard model."""

from .config import ExperimentConfig
from .groundstate import LanczosConfig, ground_state
from .lattice import (FockBasis, LatticeSpec, assemble_hamiltonian,
                      build_basis, build_doublon_operator, build_hop_forward)
from .observables import (HopExpectation, commutator_expectations,
                          current_expectation, current_operator,
                          doublon_occupation, hop_expectation)
from .propagation import TimeGrid, Trajectory, evolve_driven, evolve_tracking
from .pulses import (BreakdownInputs, PulseSpec, breakdown_threshold,
                     correlation_length, electric_field, mott_gap,
                     reference_phase, threshold_time)
from .runner import ExperimentRunner
from .spectra import (Spectrum, boosted_target_current, dipole_acceleration,
                      hhg_spectrum)
from .tracking import (TrackingConfig, build_tracking_hamiltonian,
                       observable_tracking_ratio, scale_target,
                       tracking_coefficients, tracking_field, tracking_ratio)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
