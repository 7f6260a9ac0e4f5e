import numpy as np
import pytest
from scipy.linalg import expm

from adiapass import (
    IntegrationAccuracyError,
    IntegratorOptions,
    SystemConfig,
    ValidationError,
    analytic_fidelity,
    eigensystem_grid,
    evolve_density,
    evolve_state,
    hamiltonian_at,
    left_dot_density,
    left_dot_state,
    pure_density,
    transfer_fidelity,
)
from adiapass.dynamics import _density_rk4, resolve_step

from conftest import assert_density_conserved

SMALL = SystemConfig.create(j1=0.8, j2=1.0, mu0=20.0, alpha=5.0 / 40.0, tau=40.0)


def expm_propagate(config, n_slices=20000):
    """Independent oracle: midpoint piecewise-constant propagator."""
    tau = config.schedule.tau
    h = tau / n_slices
    psi = left_dot_state()
    for k in range(n_slices):
        hm = hamiltonian_at(config, (k + 0.5) * h)
        psi = expm(-1j * hm * h) @ psi
    return psi


class TestResolveStep:
    def test_auto_divides_tau_exactly(self):
        h, n = resolve_step(SMALL, IntegratorOptions())
        assert n * h == pytest.approx(40.0, rel=1e-15)
        # spread bound mu0 + 2(|j1|+|j2|) = 23.6, target phase 0.005 rad
        assert h == pytest.approx(0.005 / 23.6, rel=1e-6)

    def test_explicit_step(self):
        h, n = resolve_step(SMALL, IntegratorOptions(step=0.5))
        assert n == 80 and h == 0.5

    def test_step_cap_for_weak_hamiltonians(self):
        cfg = SystemConfig.create(j1=0.0, j2=0.0, mu0=0.0, alpha=0.1, tau=100.0)
        h, n = resolve_step(cfg, IntegratorOptions())
        assert n == 20000

    def test_rejects_bad_step(self):
        with pytest.raises(ValidationError):
            resolve_step(SMALL, IntegratorOptions(step=-1.0))
        with pytest.raises(ValidationError):
            resolve_step(SMALL, IntegratorOptions(step=100.0))
        with pytest.raises(ValidationError):
            resolve_step(SMALL, IntegratorOptions(step="fast"))

    def test_rejects_unknown_method(self):
        with pytest.raises(ValidationError, match="method"):
            resolve_step(SMALL, IntegratorOptions(method="euler"))


class TestInitialStates:
    def test_invalid_density_rejected(self):
        bad = np.eye(3, dtype=complex) / 3
        bad[0, 1] = 0.5  # not Hermitian
        with pytest.raises(ValidationError, match="Hermitian"):
            evolve_density(SMALL, rho0=bad)
        with pytest.raises(ValidationError, match="trace"):
            evolve_density(SMALL, rho0=np.eye(3, dtype=complex))
        neg = np.diag([1.2, -0.2, 0.0]).astype(complex)
        with pytest.raises(ValidationError, match="negative"):
            evolve_density(SMALL, rho0=neg)

    def test_unnormalized_state_rejected(self):
        with pytest.raises(ValidationError, match="norm"):
            evolve_state(SMALL, psi0=np.array([1.0, 1.0, 0.0]))

    def test_bad_stride_rejected(self):
        with pytest.raises(ValidationError, match="sample_stride"):
            evolve_state(SMALL, opts=IntegratorOptions(sample_stride=0))


class TestTrajectoryShape:
    def test_window_and_normalization(self):
        traj = evolve_density(SMALL)
        assert traj.times[0] == 0.0
        assert traj.times[-1] == pytest.approx(40.0, rel=1e-15)
        assert np.all(np.diff(traj.times) > 0)
        sums = traj.populations.sum(axis=1)
        assert np.abs(sums - 1.0).max() <= 1e-9
        assert traj.kind == "density"

    def test_initial_row_is_left_dot(self):
        traj = evolve_density(SMALL)
        np.testing.assert_array_equal(traj.populations[0], [1.0, 0.0, 0.0])

    def test_explicit_stride(self):
        traj = evolve_state(SMALL, opts=IntegratorOptions(sample_stride=1000))
        assert np.all(np.diff(traj.times)[:-1] == pytest.approx(1000 * traj.step))


class TestDegenerateConfigs:
    def test_fully_decoupled_dot_is_frozen(self):
        cfg = SystemConfig.create(j1=0.0, j2=0.0, mu0=20.0, alpha=5.0 / 40.0, tau=40.0)
        traj = evolve_density(cfg)
        assert np.abs(traj.populations - traj.populations[0]).max() <= 1e-12
        assert transfer_fidelity(traj) == pytest.approx(0.0, abs=1e-12)

    def test_static_diagonal_preserves_any_populations(self):
        cfg = SystemConfig.create(j1=0.0, j2=0.0, mu0=20.0, alpha=5.0 / 40.0, tau=40.0)
        psi0 = np.array([0.6, 0.8j, 0.0])
        traj = evolve_state(cfg, psi0=psi0)
        # only a global phase evolves; population drift is pure integrator noise
        assert np.abs(traj.populations - traj.populations[0]).max() <= 1e-9

    def test_disconnected_left_dot_never_transfers(self):
        cfg = SystemConfig.create(j1=0.0, j2=1.0, mu0=20.0, alpha=5.0 / 40.0, tau=40.0)
        assert transfer_fidelity(evolve_density(cfg)) <= 1e-9


class TestOracles:
    def test_density_matches_state_integrator(self, baseline_traj, baseline_state_traj):
        np.testing.assert_array_equal(baseline_traj.times, baseline_state_traj.times)
        gap = np.abs(baseline_traj.populations - baseline_state_traj.populations).max()
        assert gap <= 1e-8

    def test_both_match_expm_propagator(self):
        psi_oracle = expm_propagate(SMALL)
        pops_oracle = np.abs(psi_oracle) ** 2
        traj_s = evolve_state(SMALL)
        traj_d = evolve_density(SMALL)
        assert np.abs(traj_s.populations[-1] - pops_oracle).max() <= 1e-6
        assert np.abs(traj_d.populations[-1] - pops_oracle).max() <= 1e-6

    def test_pure_density_of_initial_state_matches(self):
        traj_a = evolve_density(SMALL, rho0=pure_density(left_dot_state()))
        traj_b = evolve_density(SMALL, rho0=left_dot_density())
        np.testing.assert_array_equal(traj_a.populations, traj_b.populations)


class TestConservation:
    def test_density_invariants_along_reference_run(self, baseline_traj):
        assert_density_conserved(baseline_traj)
        rhos = baseline_traj.rhos
        herm = np.abs(rhos - np.conj(np.transpose(rhos, (0, 2, 1)))).max()
        assert herm <= 1e-10
        assert np.linalg.eigvalsh(rhos).min() >= -1e-9
        imag_diag = np.abs(np.einsum("sii->si", rhos).imag).max()
        assert imag_diag <= 1e-12

    def test_state_norm_drift(self, baseline_state_traj):
        norms = np.sum(np.abs(baseline_state_traj.psis) ** 2, axis=1)
        assert np.abs(norms - 1.0).max() <= 1e-9

    def test_energy_tracks_ground_level(self, baseline_config, baseline_traj):
        energies, _ = eigensystem_grid(baseline_config, baseline_traj.times)
        gaps = energies[:, 1] - energies[:, 0]
        mean_energy = np.array(
            [
                np.trace(baseline_traj.rhos[k] @ hamiltonian_at(baseline_config, t)).real
                for k, t in enumerate(baseline_traj.times)
            ]
        )
        budget = (1.0 - analytic_fidelity(0.8, 1.0, 20.0) + 0.01) * gaps
        assert np.all(np.abs(mean_energy - energies[:, 0]) <= budget)


class TestGaugeInvariance:
    @pytest.mark.parametrize("signs", [(-1, 1), (1, -1), (-1, -1)])
    def test_coupling_signs_do_not_move_populations(self, baseline_traj, signs):
        flipped = SystemConfig.create(
            j1=signs[0] * 0.8, j2=signs[1] * 1.0, mu0=20.0, alpha=5.0 / 400.0, tau=400.0
        )
        traj = evolve_density(flipped)
        assert np.abs(traj.populations - baseline_traj.populations).max() <= 1e-10


class TestAccuracyControl:
    def test_reference_run_hits_known_fidelity(self, baseline_traj):
        # converged value cross-checked against DOP853 and expm oracles
        assert transfer_fidelity(baseline_traj) == pytest.approx(0.9942297, abs=1e-6)

    def test_step_halving_converged(self, baseline_config, baseline_traj):
        halved = evolve_density(baseline_config, opts=IntegratorOptions(step=baseline_traj.step / 2))
        assert abs(transfer_fidelity(halved) - transfer_fidelity(baseline_traj)) <= 1e-7

    def test_empirical_rk4_order(self):
        # raw kernel: coarse steps intentionally violate the conservation gate
        tau, alpha = 400.0, 5.0 / 400.0
        values = []
        for h0 in (0.016, 0.008, 0.004, 0.002):
            n = int(round(tau / h0))
            idx = np.array([n], dtype=np.int64)
            rhos = _density_rk4(0.8, 1.0, 20.0, alpha, tau, tau / n, n, idx, left_dot_density())
            values.append(rhos[-1, 2, 2].real)
        d1 = abs(values[1] - values[0])
        d2 = abs(values[2] - values[1])
        d3 = abs(values[3] - values[2])
        assert np.log2(d1 / d2) >= 3.8
        assert np.log2(d2 / d3) >= 3.8

    def test_coarse_step_raises_named_invariant(self):
        cfg = SystemConfig.create(j1=0.8, j2=1.0, mu0=20.0, alpha=5.0 / 400.0, tau=400.0)
        with pytest.raises(IntegrationAccuracyError, match=r"purity .* t="):
            evolve_density(cfg, opts=IntegratorOptions(step=0.016))


class TestTransferFidelity:
    def test_requires_full_window(self, baseline_config):
        traj = evolve_density(baseline_config)
        clipped = type(traj)(
            config=traj.config,
            times=traj.times[:-1],
            populations=traj.populations[:-1],
            rhos=traj.rhos[:-1],
            step=traj.step,
            n_steps=traj.n_steps,
        )
        with pytest.raises(ValidationError, match="tau"):
            transfer_fidelity(clipped)

    def test_long_slow_drive_approaches_analytic(self):
        cfg = SystemConfig.create(j1=0.8, j2=1.0, mu0=20.0, alpha=5.0 / 750.0, tau=750.0)
        fid = transfer_fidelity(evolve_density(cfg))
        assert fid == pytest.approx(analytic_fidelity(0.8, 1.0, 20.0), abs=3e-3)
