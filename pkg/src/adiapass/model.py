"""Triple-dot chain model: couplings, Gaussian gate pulses, Hamiltonian assembly.

Basis ordering is {|L>, |M>, |R>} throughout. Energies are expressed in
units of the M-R coupling, times in its inverse (hbar = 1), so all config
values are dimensionless.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

# Below this pulse-separation product the two Gaussians overlap appreciably
# inside the window and the window-edge residuals stop being negligible.
MIN_ALPHA_TAU = 3.0


@dataclass(frozen=True)
class CouplingPair:
    """Fixed nearest-neighbor tunneling energies (j1: L-M bond, j2: M-R bond)."""

    j1: float
    j2: float

    def __post_init__(self):
        for name in ("j1", "j2"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ValidationError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class PulseSchedule:
    """Gaussian gate-voltage drive: depth mu0, inverse-width alpha, duration tau.

    The left pulse is centered at t=0, the right at t=tau; both have depth
    mu0 and standard deviation 1/alpha in time.
    """

    mu0: float
    alpha: float
    tau: float

    def __post_init__(self):
        if not np.isfinite(self.mu0) or self.mu0 < 0:
            raise ValidationError(f"mu0 must be >= 0, got {self.mu0!r}")
        if not np.isfinite(self.alpha) or self.alpha <= 0:
            raise ValidationError(f"alpha must be > 0, got {self.alpha!r}")
        if not np.isfinite(self.tau) or self.tau <= 0:
            raise ValidationError(f"tau must be > 0, got {self.tau!r}")
        if self.alpha * self.tau < MIN_ALPHA_TAU:
            warnings.warn(
                f"alpha*tau = {self.alpha * self.tau:.3g} < {MIN_ALPHA_TAU:g}: "
                "pulses overlap significantly inside the window and results "
                "may not reflect a clean two-pulse protocol",
                stacklevel=2,
            )


@dataclass(frozen=True)
class SystemConfig:
    """Complete physical configuration of a transfer run."""

    couplings: CouplingPair
    schedule: PulseSchedule

    @classmethod
    def create(cls, j1: float, j2: float, mu0: float, alpha: float, tau: float) -> "SystemConfig":
        return cls(CouplingPair(j1, j2), PulseSchedule(mu0, alpha, tau))


def gate_voltage_left(schedule: PulseSchedule, t):
    """On-site energy of the left dot, -mu0 * exp(-alpha^2 t^2 / 2).

    Accepts scalar or array t; the pulse is evaluated as defined for any t,
    inside or outside [0, tau].
    """
    a = schedule.alpha
    return -schedule.mu0 * np.exp(-0.5 * a * a * np.square(t))


def gate_voltage_right(schedule: PulseSchedule, t):
    """On-site energy of the right dot; left pulse mirrored about t = tau/2."""
    a = schedule.alpha
    dt = np.asarray(t, dtype=float) - schedule.tau
    return -schedule.mu0 * np.exp(-0.5 * a * a * np.square(dt))


def gate_voltage_rates(schedule: PulseSchedule, t):
    """Analytic time derivatives (dmu_L/dt, dmu_R/dt) of the two pulses."""
    a2 = schedule.alpha * schedule.alpha
    tl = np.asarray(t, dtype=float)
    tr = tl - schedule.tau
    rate_l = schedule.mu0 * a2 * tl * np.exp(-0.5 * a2 * np.square(tl))
    rate_r = schedule.mu0 * a2 * tr * np.exp(-0.5 * a2 * np.square(tr))
    return rate_l, rate_r


def hamiltonian_at(config: SystemConfig, t: float) -> np.ndarray:
    """Instantaneous 3x3 Hamiltonian in the {|L>, |M>, |R>} basis.

    Real symmetric by construction; the (L,R) corner is exactly zero since
    the end dots are not directly coupled.
    """
    c, s = config.couplings, config.schedule
    ml = float(gate_voltage_left(s, t))
    mr = float(gate_voltage_right(s, t))
    return np.array(
        [
            [ml, c.j1, 0.0],
            [c.j1, 0.0, c.j2],
            [0.0, c.j2, mr],
        ]
    )


def hamiltonian_rate_at(config: SystemConfig, t: float) -> np.ndarray:
    """dH/dt at time t: diagonal matrix of the two pulse rates."""
    rate_l, rate_r = gate_voltage_rates(config.schedule, t)
    return np.diag([float(rate_l), 0.0, float(rate_r)])
