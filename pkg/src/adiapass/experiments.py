"""Parameter-sweep harness: gap profiles, population traces, fidelity sweeps.

Sweep points are independent fixed-step integrations, so they run in a
thread pool (the kernels release the GIL) with order-preserving assembly;
results are bit-identical regardless of worker count. ADIAPASS_THREADS caps
the pool size.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .dynamics import (
    DEFAULT_OPTIONS,
    IntegratorOptions,
    Trajectory,
    evolve_density,
    transfer_fidelity,
)
from .errors import IntegrationAccuracyError, ValidationError
from .model import SystemConfig
from .perturbation import analytic_fidelity
from .spectral import diagnostics, eigensystem_grid

# Time grid used for per-point spectral diagnostics (min gap, adiabaticity).
DIAG_GRID_POINTS = 2001

TAU_UNIT_MULTIPLIERS = (0.2, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0)


@dataclass(frozen=True)
class SweepSpec:
    """One-dimensional parameter sweep around a base configuration."""

    base: SystemConfig
    parameter: str  # one of: alpha, tau, mu0, j1_over_j2
    values: tuple[float, ...]
    options: IntegratorOptions = DEFAULT_OPTIONS

    def __post_init__(self):
        if self.parameter not in ("alpha", "tau", "mu0", "j1_over_j2"):
            raise ValidationError(f"unknown sweep parameter {self.parameter!r}")
        vals = np.asarray(self.values, dtype=float)
        if vals.size == 0:
            raise ValidationError("sweep values must be nonempty")
        if not np.all(np.isfinite(vals)):
            raise ValidationError("sweep values must be finite")
        if vals.size > 1:
            d = np.diff(vals)
            if not (np.all(d > 0) or np.all(d < 0)):
                raise ValidationError("sweep values must be strictly monotone")


@dataclass(frozen=True)
class SweepRecord:
    """Outcome of one sweep point; error holds the message if the run failed."""

    value: float
    fidelity_sq: float
    min_gap: float
    max_adiab_metric: float
    wall_time: float
    error: Optional[str] = None


@dataclass(frozen=True)
class SweepResult:
    parameter: str
    records: tuple[SweepRecord, ...]

    @property
    def values(self) -> np.ndarray:
        return np.array([r.value for r in self.records])

    @property
    def fidelities(self) -> np.ndarray:
        return np.array([r.fidelity_sq for r in self.records])

    @property
    def failed(self) -> bool:
        return any(r.error is not None for r in self.records)


@dataclass(frozen=True)
class GapProfile:
    times: np.ndarray
    alphas: tuple[float, ...]
    gaps: np.ndarray  # shape (len(alphas), len(times))

    @property
    def min_gaps(self) -> np.ndarray:
        return self.gaps.min(axis=1)


@dataclass(frozen=True)
class CompareRow:
    mu0: float
    j1: float
    j2: float
    numeric: float
    analytic: float

    @property
    def abs_diff(self) -> float:
        return abs(self.numeric - self.analytic)


def max_workers() -> int:
    env = os.environ.get("ADIAPASS_THREADS")
    if env is None:
        return os.cpu_count() or 1
    try:
        n = int(env)
    except ValueError:
        raise ValidationError(f"ADIAPASS_THREADS must be an integer, got {env!r}") from None
    if n <= 0:
        raise ValidationError(f"ADIAPASS_THREADS must be positive, got {n}")
    return n


def _parallel_map(fn, items):
    items = list(items)
    workers = min(max_workers(), max(1, len(items)))
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _with_schedule(config: SystemConfig, **changes) -> SystemConfig:
    return SystemConfig(config.couplings, replace(config.schedule, **changes))


def _sweep_point(config: SystemConfig, value: float, opts: IntegratorOptions) -> SweepRecord:
    start = time.perf_counter()
    try:
        traj = evolve_density(config, opts=opts)
        fidelity = transfer_fidelity(traj)
        grid = np.linspace(0.0, config.schedule.tau, DIAG_GRID_POINTS)
        min_gap, _, max_metric = diagnostics(config, grid)
        return SweepRecord(
            value=value,
            fidelity_sq=fidelity,
            min_gap=min_gap,
            max_adiab_metric=max_metric,
            wall_time=time.perf_counter() - start,
        )
    except IntegrationAccuracyError as exc:
        return SweepRecord(
            value=value,
            fidelity_sq=float("nan"),
            min_gap=float("nan"),
            max_adiab_metric=float("nan"),
            wall_time=time.perf_counter() - start,
            error=str(exc),
        )


def run_sweep(spec: SweepSpec) -> SweepResult:
    """Execute every point of a sweep, preserving input order."""
    configs = [_point_config(spec, v) for v in spec.values]
    records = _parallel_map(
        lambda cv: _sweep_point(cv[0], cv[1], spec.options),
        list(zip(configs, spec.values)),
    )
    return SweepResult(parameter=spec.parameter, records=tuple(records))


def _point_config(spec: SweepSpec, value: float) -> SystemConfig:
    base = spec.base
    if spec.parameter == "alpha":
        return _with_schedule(base, alpha=value)
    if spec.parameter == "tau":
        # keep the dimensionless pulse shape: alpha scales as k/tau
        k = base.schedule.alpha * base.schedule.tau
        return _with_schedule(base, alpha=k / value, tau=value)
    if spec.parameter == "mu0":
        return _with_schedule(base, mu0=value)
    # j1_over_j2
    if base.couplings.j2 != 1.0:
        raise ValidationError("coupling-ratio sweeps require j2 = 1.0")
    return SystemConfig.create(
        j1=value * base.couplings.j2,
        j2=base.couplings.j2,
        mu0=base.schedule.mu0,
        alpha=base.schedule.alpha,
        tau=base.schedule.tau,
    )


def default_tau_values(base: SystemConfig) -> tuple[float, ...]:
    """Multiples of the adiabatic time unit mu0/j1^2 spanning both regimes."""
    j1 = base.couplings.j1
    if j1 == 0.0:
        raise ValidationError("tau sweep needs j1 != 0 to set the time unit mu0/j1^2")
    unit = base.schedule.mu0 / (j1 * j1)
    return tuple(m * unit for m in TAU_UNIT_MULTIPLIERS)


def default_mu0_values() -> tuple[float, ...]:
    return tuple(float(v) for v in range(2, 41, 2))


def default_ratio_values() -> tuple[float, ...]:
    return tuple(i / 20.0 for i in range(2, 31))


def default_compare_mu0_values() -> tuple[float, ...]:
    return tuple(float(v) for v in range(10, 41, 2))


def sweep_tau(base: SystemConfig, tau_values=None,
              opts: IntegratorOptions = DEFAULT_OPTIONS) -> SweepResult:
    values = tuple(tau_values) if tau_values is not None else default_tau_values(base)
    return run_sweep(SweepSpec(base=base, parameter="tau", values=values, options=opts))


def sweep_mu0(base: SystemConfig, mu0_values=None,
              opts: IntegratorOptions = DEFAULT_OPTIONS) -> SweepResult:
    values = tuple(mu0_values) if mu0_values is not None else default_mu0_values()
    return run_sweep(SweepSpec(base=base, parameter="mu0", values=values, options=opts))


def sweep_ratio(base: SystemConfig, ratio_values=None,
                opts: IntegratorOptions = DEFAULT_OPTIONS) -> SweepResult:
    values = tuple(ratio_values) if ratio_values is not None else default_ratio_values()
    return run_sweep(SweepSpec(base=base, parameter="j1_over_j2", values=values, options=opts))


def gap_profile(config: SystemConfig, alphas, n_grid: int = DIAG_GRID_POINTS) -> GapProfile:
    """Gap curves on a uniform time grid, one per pulse width."""
    if n_grid < 100:
        raise ValidationError(f"n_grid must be >= 100, got {n_grid}")
    alphas = tuple(float(a) for a in alphas)
    if not alphas:
        raise ValidationError("at least one alpha is required")
    times = np.linspace(0.0, config.schedule.tau, n_grid)
    gaps = np.empty((len(alphas), n_grid))
    for i, alpha in enumerate(alphas):
        cfg = _with_schedule(config, alpha=alpha)
        energies, _ = eigensystem_grid(cfg, times)
        gaps[i] = energies[:, 1] - energies[:, 0]
    return GapProfile(times=times, alphas=alphas, gaps=gaps)


def population_trace(config: SystemConfig,
                     opts: IntegratorOptions = DEFAULT_OPTIONS) -> Trajectory:
    """Density-matrix evolution from the electron-in-left-dot initial state."""
    return evolve_density(config, opts=opts)


def _compare_point(config: SystemConfig, opts: IntegratorOptions) -> CompareRow:
    numeric = transfer_fidelity(evolve_density(config, opts=opts))
    c = config.couplings
    return CompareRow(
        mu0=config.schedule.mu0,
        j1=c.j1,
        j2=c.j2,
        numeric=numeric,
        analytic=analytic_fidelity(c.j1, c.j2, config.schedule.mu0),
    )


def compare_analytic(configs, opts: IntegratorOptions = DEFAULT_OPTIONS) -> list[CompareRow]:
    """Numeric vs closed-form fidelity over a validity-domain config grid.

    Every config must be deep in the adiabatic, strong-trapping regime:
    mu0 >= 10 |j2| and tau * j1^2 >= 4 mu0.
    """
    configs = list(configs)
    for cfg in configs:
        mu0, tau = cfg.schedule.mu0, cfg.schedule.tau
        j1, j2 = cfg.couplings.j1, cfg.couplings.j2
        if mu0 < 10.0 * abs(j2):
            raise ValidationError(
                f"compare grid requires mu0 >= 10*|j2|; got mu0={mu0}, j2={j2}"
            )
        if tau * j1 * j1 < 4.0 * mu0:
            raise ValidationError(
                f"compare grid requires tau*j1^2 >= 4*mu0; got tau={tau}, j1={j1}, mu0={mu0}"
            )
    return _parallel_map(lambda cfg: _compare_point(cfg, opts), configs)


def compare_grid_from_mu0(base: SystemConfig, mu0_values=None) -> list[SystemConfig]:
    """Config grid for compare_analytic: vary mu0, keep couplings and pulse."""
    values = tuple(mu0_values) if mu0_values is not None else default_compare_mu0_values()
    return [_with_schedule(base, mu0=v) for v in values]
