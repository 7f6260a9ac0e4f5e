"""Figure rendering for the CLI report path.

Every renderer takes the already-computed result object and writes one PNG
next to the delimited output. Uses the Agg backend so it works headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .dynamics import Trajectory
from .experiments import CompareRow, GapProfile, SweepResult

_SITE_LABELS = ("left", "middle", "right")
_SITE_COLORS = ("black", "tab:blue", "tab:red")


def plot_populations(traj: Trajectory, path: str) -> None:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for i in range(3):
        ax.plot(traj.times, traj.populations[:, i],
                color=_SITE_COLORS[i], label=_SITE_LABELS[i])
    ax.set_xlabel("time (1/J2)")
    ax.set_ylabel("population")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(loc="center right")
    ax.set_title(f"final right-dot population {traj.populations[-1, 2]:.4f}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_gap_profile(profile: GapProfile, path: str) -> None:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    tau = profile.times[-1]
    for alpha, gaps in zip(profile.alphas, profile.gaps):
        ax.plot(profile.times, gaps, label=f"alpha = {alpha * tau:.3g}/tau")
    ax.set_xlabel("time (1/J2)")
    ax.set_ylabel("energy gap (J2)")
    ax.set_yscale("log")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


_SWEEP_AXIS_LABELS = {
    "tau": "total evolution time tau (1/J2)",
    "mu0": "peak gate voltage mu0 (J2)",
    "alpha": "pulse inverse width alpha (J2)",
    "j1_over_j2": "coupling ratio J1/J2",
}


def plot_sweep(result: SweepResult, path: str) -> None:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(result.values, result.fidelities, "o-", color="tab:red")
    ax.set_xlabel(_SWEEP_AXIS_LABELS.get(result.parameter, result.parameter))
    ax.set_ylabel("fidelity |F(tau)|^2")
    ax.set_ylim(top=1.005)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_compare(rows: list[CompareRow], path: str) -> None:
    mu0 = np.array([r.mu0 for r in rows])
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(mu0, [r.numeric for r in rows], "o", color="tab:red", label="numeric")
    ax.plot(mu0, [r.analytic for r in rows], "-", color="black", label="analytic")
    ax.set_xlabel("peak gate voltage mu0 (J2)")
    ax.set_ylabel("fidelity |F(tau)|^2")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
