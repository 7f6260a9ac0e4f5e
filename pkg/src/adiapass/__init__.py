"""Adiabatic state transfer in an unevenly coupled triple-dot chain.

Library + CLI for simulating gate-voltage-driven adiabatic passage:
instantaneous spectra, perturbative fidelity, exact von Neumann / Schrodinger
time evolution, and the parameter sweeps that map the transfer-fidelity
landscape.
"""

from .errors import (
    AdiapassError,
    ConvergenceError,
    IntegrationAccuracyError,
    SingularGapError,
    ValidationError,
)
from .model import (
    CouplingPair,
    PulseSchedule,
    SystemConfig,
    gate_voltage_left,
    gate_voltage_rates,
    gate_voltage_right,
    hamiltonian_at,
    hamiltonian_rate_at,
)
from .spectral import (
    EigenSystem,
    adiabaticity_metric,
    eigensystem,
    eigensystem_grid,
    eigensystem_path,
    energy_gap,
    level_crossing_scan,
)
from .perturbation import (
    PerturbativeGroundState,
    analytic_fidelity,
    corrected_ground_state,
)
from .dynamics import (
    IntegratorOptions,
    Trajectory,
    evolve_density,
    evolve_state,
    left_dot_density,
    left_dot_state,
    pure_density,
    transfer_fidelity,
)
from .experiments import (
    CompareRow,
    GapProfile,
    SweepRecord,
    SweepResult,
    SweepSpec,
    compare_analytic,
    compare_grid_from_mu0,
    gap_profile,
    population_trace,
    run_sweep,
    sweep_mu0,
    sweep_ratio,
    sweep_tau,
)

__version__ = "0.1.0"

__all__ = [
    "AdiapassError",
    "ConvergenceError",
    "IntegrationAccuracyError",
    "SingularGapError",
    "ValidationError",
    "CouplingPair",
    "PulseSchedule",
    "SystemConfig",
    "gate_voltage_left",
    "gate_voltage_right",
    "gate_voltage_rates",
    "hamiltonian_at",
    "hamiltonian_rate_at",
    "EigenSystem",
    "eigensystem",
    "eigensystem_grid",
    "eigensystem_path",
    "energy_gap",
    "adiabaticity_metric",
    "level_crossing_scan",
    "PerturbativeGroundState",
    "corrected_ground_state",
    "analytic_fidelity",
    "IntegratorOptions",
    "Trajectory",
    "evolve_density",
    "evolve_state",
    "left_dot_density",
    "left_dot_state",
    "pure_density",
    "transfer_fidelity",
    "SweepSpec",
    "SweepRecord",
    "SweepResult",
    "GapProfile",
    "CompareRow",
    "run_sweep",
    "sweep_tau",
    "sweep_mu0",
    "sweep_ratio",
    "gap_profile",
    "population_trace",
    "compare_analytic",
    "compare_grid_from_mu0",
    "__version__",
]
