"""Static vector plots of a run: infected count and applied medication."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def plot_infected(traj, path, title="Infected individuals"):
    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.plot(traj.t, traj.I, lw=1.8, color="tab:red")
    ax.set_xlabel("time (years)")
    ax.set_ylabel("I (individuals)")
    ax.set_title(title)
    ax.grid(alpha=0.4)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_control(traj, path, title="PrEP medication rate"):
    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.plot(traj.t, traj.u, lw=1.8, color="tab:blue")
    ax.set_xlabel("time (years)")
    ax.set_ylabel("u (fraction)")
    ax.set_ylim(-0.02, 1.02)
    ax.set_title(title)
    ax.grid(alpha=0.4)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
