"""Simulation and design toolkit for suture adiabatic pulses (SAPn).

Frequencies are angular, in rad/us; times are in us.
"""
from __future__ import annotations

__version__ = "0.1.0"

from ._accel import get_backend, set_backend
from .errors import DomainError, SapError, SolverError, ValidationError
from .pulse import (
    HshParams,
    LinearChirp,
    SapPulse,
    build_sap,
    chirp_phase,
    chirp_span,
    hsh_chirp,
    hsh_envelope,
)
from .dynamics import (
    QubitState,
    RotatingFrameHamiltonian,
    SolverOptions,
    evolve,
    evolve_compact_sap2,
    hamiltonian_at,
    propagate_batch,
    transfer_fidelity,
)
from .suture import (
    SutureSeries,
    crossing_times,
    leibniz_tail_bound,
    phi_numeric,
    phi_series,
    suture_fidelity,
    theta,
)
from .analysis import (
    FidelityMap,
    bandwidth_at_threshold,
    chirp_direction_comparison,
    detuning_sweep,
    freq_shift_scan,
    phase_average,
    rabi_error_scan,
    scaling_study,
    threshold_boundary,
)
from .optimizer import Objective, OptimizationResult, optimize, reoptimize_per_condition
