"""First-order perturbative ground state at the end of the drive.

At the end of the protocol the right dot sits at depth -mu0 while the L-M
pair forms a weakly split doublet; treating the M-R bond as the perturbation
gives a closed-form corrected ground state and transfer fidelity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

# Reject parameter sets this close to the mu0^2 = j1^2 resonance, where the
# first-order formulas blow up.
RESONANCE_RTOL = 1e-9


@dataclass(frozen=True)
class PerturbativeGroundState:
    """Unnormalized corrected ground state (a_L, a_M, a_R) with a_R = 1."""

    amplitudes: tuple[float, float, float]
    j1: float
    j2: float
    mu0: float

    @property
    def normalized(self) -> np.ndarray:
        v = np.asarray(self.amplitudes)
        return v / np.linalg.norm(v)


def _check_away_from_resonance(j1: float, mu0: float) -> float:
    denom = mu0 * mu0 - j1 * j1
    if abs(denom) <= RESONANCE_RTOL * mu0 * mu0:
        raise ValidationError(
            f"mu0^2 - j1^2 = {denom:.3e} is (nearly) resonant; "
            "perturbation theory is invalid there"
        )
    return denom


def corrected_ground_state(j1: float, j2: float, mu0: float) -> PerturbativeGroundState:
    """First-order ground state of the end-of-drive Hamiltonian.

    Valid away from the mu0^2 = j1^2 resonance and for mu0 > 0 (a trapping
    well must exist).
    """
    if mu0 <= 0:
        raise ValidationError(f"mu0 must be > 0, got {mu0!r}")
    denom = _check_away_from_resonance(j1, mu0)
    a_l = j1 * j2 / denom
    a_m = -mu0 * j2 / denom
    return PerturbativeGroundState(amplitudes=(a_l, a_m, 1.0), j1=j1, j2=j2, mu0=mu0)


def analytic_fidelity(j1: float, j2: float, mu0: float) -> float:
    """Closed-form squared transfer fidelity |F(tau)|^2.

    Equals the squared right-dot amplitude of the normalized corrected ground
    state: 1 / (1 + j2^2 (mu0^2 + j1^2) / (mu0^2 - j1^2)^2).
    """
    denom = _check_away_from_resonance(j1, mu0)
    return 1.0 / (1.0 + j2 * j2 * (mu0 * mu0 + j1 * j1) / (denom * denom))
