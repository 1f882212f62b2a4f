"""Adiabatic superposition synthesis in the J=0 <-> J=1 <-> J=2 six-level Lambda system."""

from stirap6.angular import Q, coupling_ratio_q, wigner3j
from stirap6.hamiltonian import (
    EnvelopeSample,
    PulseConfig,
    build_hamiltonian,
    envelopes,
    load_config,
    reduce_phases,
)
from stirap6.frame import (
    DarkFrame,
    bright_eigensystem,
    build_U,
    dark_frame,
    dark_state_D1,
    dark_state_D2,
)
from stirap6.propagator import (
    IntegratorSettings,
    Trajectory,
    integrate,
    max_bright_population,
    transfer_efficiency,
)
from stirap6.statespace import (
    StateCoords,
    TargetState,
    adjust_phases,
    analytic_final_state,
    coords_to_state,
    design_pulses,
    state_to_coords,
)

__all__ = [
    "Q",
    "coupling_ratio_q",
    "wigner3j",
    "EnvelopeSample",
    "PulseConfig",
    "build_hamiltonian",
    "envelopes",
    "load_config",
    "reduce_phases",
    "DarkFrame",
    "bright_eigensystem",
    "build_U",
    "dark_frame",
    "dark_state_D1",
    "dark_state_D2",
    "IntegratorSettings",
    "Trajectory",
    "integrate",
    "max_bright_population",
    "transfer_efficiency",
    "StateCoords",
    "TargetState",
    "adjust_phases",
    "analytic_final_state",
    "coords_to_state",
    "design_pulses",
    "state_to_coords",
]
