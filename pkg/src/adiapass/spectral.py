"""Instantaneous eigen-decomposition, gap tracking, and the adiabaticity metric.

The eigensolver is a cyclic Jacobi rotation scheme specialized to 3x3 real
symmetric matrices: unconditionally stable, convergence measured against the
input's Frobenius norm, and cheap enough to call tens of thousands of times
per parameter sweep.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ConvergenceError, SingularGapError, ValidationError
from .model import SystemConfig, hamiltonian_at, hamiltonian_rate_at

# Off-diagonal Frobenius norm below OFF_DIAG_RTOL * ||H||_F counts as diagonal.
OFF_DIAG_RTOL = 1e-14
MAX_SWEEPS = 100
# Gaps at or below this are treated as level crossings.
DEGENERACY_TOL = 1e-12


@dataclass(frozen=True)
class EigenSystem:
    """Sorted eigen-decomposition of one instantaneous Hamiltonian.

    energies are ascending; vectors[:, n] is the unit eigenvector of
    energies[n] with its largest-magnitude component made positive (unless a
    path alignment overrode the sign for continuity). t records the
    evaluation time when known.
    """

    energies: np.ndarray
    vectors: np.ndarray
    t: float | None = None

    @property
    def gap(self) -> float:
        return float(self.energies[1] - self.energies[0])


@njit(cache=True, nogil=True)
def _jacobi3(h):
    """Cyclic Jacobi diagonalization of a 3x3 symmetric matrix.

    Returns (energies ascending, column eigenvectors, converged flag). The
    sign convention (largest-|component| positive) is applied here so every
    caller sees the same deterministic vectors.
    """
    a = h.copy()
    v = np.eye(3)
    norm_f = 0.0
    for i in range(3):
        for j in range(3):
            norm_f += h[i, j] * h[i, j]
    norm_f = np.sqrt(norm_f)
    thresh = OFF_DIAG_RTOL * norm_f

    converged = False
    for _ in range(MAX_SWEEPS):
        off = np.sqrt(2.0 * (a[0, 1] ** 2 + a[0, 2] ** 2 + a[1, 2] ** 2))
        if off <= thresh:
            converged = True
            break
        for p in range(2):
            for q in range(p + 1, 3):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = 0.5 * (a[q, q] - a[p, p]) / apq
                if np.abs(theta) > 1e10:
                    t = 0.5 / theta
                elif theta >= 0.0:
                    t = 1.0 / (theta + np.sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                app = a[p, p]
                aqq = a[q, q]
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                for r in range(3):
                    if r != p and r != q:
                        arp = a[r, p]
                        arq = a[r, q]
                        a[r, p] = c * arp - s * arq
                        a[p, r] = a[r, p]
                        a[r, q] = s * arp + c * arq
                        a[q, r] = a[r, q]
                for r in range(3):
                    vrp = v[r, p]
                    vrq = v[r, q]
                    v[r, p] = c * vrp - s * vrq
                    v[r, q] = s * vrp + c * vrq

    w = np.empty(3)
    for i in range(3):
        w[i] = a[i, i]
    # insertion sort of the three (eigenvalue, column) pairs
    order = np.array([0, 1, 2])
    for i in range(1, 3):
        j = i
        while j > 0 and w[order[j - 1]] > w[order[j]]:
            tmp = order[j - 1]
            order[j - 1] = order[j]
            order[j] = tmp
            j -= 1
    w_sorted = np.empty(3)
    v_sorted = np.empty((3, 3))
    for n in range(3):
        w_sorted[n] = w[order[n]]
        for r in range(3):
            v_sorted[r, n] = v[r, order[n]]
    for n in range(3):
        imax = 0
        amax = np.abs(v_sorted[0, n])
        for r in range(1, 3):
            ar = np.abs(v_sorted[r, n])
            if ar > amax:
                amax = ar
                imax = r
        if v_sorted[imax, n] < 0.0:
            for r in range(3):
                v_sorted[r, n] = -v_sorted[r, n]
    return w_sorted, v_sorted, converged


@njit(cache=True, nogil=True)
def _eigen_grid(j1, j2, mu0, alpha, tau, times):
    """Eigen-decompositions along a time grid with sign continuity.

    The first point uses the static sign rule; later points flip any vector
    whose overlap with its predecessor is negative.
    """
    n = times.shape[0]
    energies = np.empty((n, 3))
    vectors = np.empty((n, 3, 3))
    ok = True
    h = np.empty((3, 3))
    for k in range(n):
        t = times[k]
        ml = -mu0 * np.exp(-0.5 * alpha * alpha * t * t)
        dt = t - tau
        mr = -mu0 * np.exp(-0.5 * alpha * alpha * dt * dt)
        h[0, 0] = ml
        h[0, 1] = j1
        h[0, 2] = 0.0
        h[1, 0] = j1
        h[1, 1] = 0.0
        h[1, 2] = j2
        h[2, 0] = 0.0
        h[2, 1] = j2
        h[2, 2] = mr
        w, v, conv = _jacobi3(h)
        if not conv:
            ok = False
        if k > 0:
            for col in range(3):
                dot = 0.0
                for r in range(3):
                    dot += vectors[k - 1, r, col] * v[r, col]
                if dot < 0.0:
                    for r in range(3):
                        v[r, col] = -v[r, col]
        energies[k] = w
        vectors[k] = v
    return energies, vectors, ok


@njit(cache=True, nogil=True)
def _diagnostics_grid(j1, j2, mu0, alpha, tau, times):
    """(min gap, its time, max adiabaticity metric) over a time grid."""
    min_gap = np.inf
    t_min = times[0]
    max_metric = 0.0
    h = np.empty((3, 3))
    for k in range(times.shape[0]):
        t = times[k]
        a2 = alpha * alpha
        ml = -mu0 * np.exp(-0.5 * a2 * t * t)
        dt = t - tau
        mr = -mu0 * np.exp(-0.5 * a2 * dt * dt)
        h[0, 0] = ml
        h[0, 1] = j1
        h[0, 2] = 0.0
        h[1, 0] = j1
        h[1, 1] = 0.0
        h[1, 2] = j2
        h[2, 0] = 0.0
        h[2, 1] = j2
        h[2, 2] = mr
        w, v, conv = _jacobi3(h)
        gap = w[1] - w[0]
        if gap < min_gap:
            min_gap = gap
            t_min = t
        rate_l = mu0 * a2 * t * np.exp(-0.5 * a2 * t * t)
        rate_r = mu0 * a2 * dt * np.exp(-0.5 * a2 * dt * dt)
        if gap > DEGENERACY_TOL:
            for m in range(1, 3):
                num = np.abs(
                    v[0, m] * rate_l * v[0, 0] + v[2, m] * rate_r * v[2, 0]
                )
                denom = w[m] - w[0]
                metric = num / (denom * denom)
                if metric > max_metric:
                    max_metric = metric
    return min_gap, t_min, max_metric


def _as_symmetric3(h) -> np.ndarray:
    arr = np.asarray(h)
    if arr.shape != (3, 3):
        raise ValidationError(f"expected a 3x3 matrix, got shape {arr.shape}")
    if np.iscomplexobj(arr):
        if np.abs(arr.imag).max() > 1e-12:
            raise ValidationError("matrix has a non-negligible imaginary part")
        arr = arr.real
    arr = arr.astype(float)
    if not np.all(np.isfinite(arr)):
        raise ValidationError("matrix entries must be finite")
    if np.abs(arr - arr.T).max() > 1e-12 * max(1.0, np.abs(arr).max()):
        raise ValidationError("matrix is not symmetric")
    return arr


def eigensystem(h, t: float | None = None) -> EigenSystem:
    """Sorted, orthonormal, sign-fixed eigen-decomposition of a symmetric 3x3."""
    arr = _as_symmetric3(h)
    w, v, converged = _jacobi3(arr)
    if not converged:
        raise ConvergenceError(
            f"Jacobi sweep cap ({MAX_SWEEPS}) exceeded; input likely malformed"
        )
    return EigenSystem(energies=w, vectors=v, t=t)


def _validated_grid(config: SystemConfig, grid) -> np.ndarray:
    times = np.asarray(grid, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValidationError("time grid must be a nonempty 1-d sequence")
    if times.size > 1 and not np.all(np.diff(times) > 0):
        raise ValidationError("time grid must be strictly increasing")
    if times[0] < 0.0 or times[-1] > config.schedule.tau * (1 + 1e-12):
        raise ValidationError("time grid must lie within [0, tau]")
    return times


def eigensystem_grid(config: SystemConfig, grid) -> tuple[np.ndarray, np.ndarray]:
    """Array form of eigensystem_path: (energies (n,3), vectors (n,3,3)).

    Eigenvector signs are aligned point-to-point for continuity.
    """
    times = _validated_grid(config, grid)
    c, s = config.couplings, config.schedule
    energies, vectors, ok = _eigen_grid(c.j1, c.j2, s.mu0, s.alpha, s.tau, times)
    if not ok:
        raise ConvergenceError(f"Jacobi sweep cap ({MAX_SWEEPS}) exceeded on grid")
    return energies, vectors


def eigensystem_path(config: SystemConfig, grid) -> list[EigenSystem]:
    """Continuously sign-aligned eigen-decompositions along a time grid."""
    times = _validated_grid(config, grid)
    energies, vectors = eigensystem_grid(config, times)
    return [
        EigenSystem(energies=energies[k], vectors=vectors[k], t=float(times[k]))
        for k in range(times.size)
    ]


def energy_gap(config: SystemConfig, t: float) -> float:
    """First excitation gap eps1(t) - eps0(t) of the instantaneous Hamiltonian."""
    return eigensystem(hamiltonian_at(config, t), t=t).gap


def adiabaticity_metric(config: SystemConfig, t: float) -> float:
    """max_m |<psi_m|dH/dt|psi_0>| / (eps_m - eps_0)^2 over both excited states.

    Values much below one indicate the drive is slow enough for the system to
    track the instantaneous ground state (Hellmann-Feynman form of the
    adiabatic condition).
    """
    es = eigensystem(hamiltonian_at(config, t), t=t)
    if es.gap <= DEGENERACY_TOL:
        raise SingularGapError(f"ground-state gap {es.gap:.3e} at t={t!r} is degenerate")
    hdot = hamiltonian_rate_at(config, t)
    v0 = es.vectors[:, 0]
    metric = 0.0
    for m in (1, 2):
        num = abs(es.vectors[:, m] @ hdot @ v0)
        denom = es.energies[m] - es.energies[0]
        metric = max(metric, num / denom**2)
    return metric


def level_crossing_scan(config: SystemConfig, grid) -> tuple[float, float]:
    """Minimum gap over a grid and the time where it occurs.

    A positive minimum certifies no level crossing on the sampled grid.
    """
    times = _validated_grid(config, grid)
    c, s = config.couplings, config.schedule
    min_gap, t_min, _ = _diagnostics_grid(c.j1, c.j2, s.mu0, s.alpha, s.tau, times)
    return float(min_gap), float(t_min)


def diagnostics(config: SystemConfig, grid) -> tuple[float, float, float]:
    """(min gap, time of min gap, max adiabaticity metric) over a grid."""
    times = _validated_grid(config, grid)
    c, s = config.couplings, config.schedule
    min_gap, t_min, max_metric = _diagnostics_grid(
        c.j1, c.j2, s.mu0, s.alpha, s.tau, times
    )
    return float(min_gap), float(t_min), float(max_metric)
