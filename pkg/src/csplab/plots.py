"""Figure rendering for the CLI report paths.

Every command that writes delimited output can also render a PNG next to it.
All figures go through Agg so runs are headless and deterministic.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=140)
    plt.close(fig)


def plot_scatter_table(table, path):
    """|a|, |r| and the unitarity defect against k."""
    ks = table.k
    fig, axes = plt.subplots(1, 2, figsize=(9.0, 3.4))
    axes[0].plot(ks, np.abs(table.a), label="|a|")
    axes[0].plot(ks, np.abs(table.r), label="|r|")
    axes[0].set_xlabel("k")
    axes[0].legend(frameon=False)
    defect = np.array([e.unitarity_defect() for e in table.entries])
    axes[1].semilogy(ks, np.maximum(defect, 1e-18))
    axes[1].set_xlabel("k")
    axes[1].set_ylabel(r"$||a|^2+|b|^2-1|$")
    _save(fig, path)


def plot_profile(p, path, title=None):
    """|u|, Re u, Im u over x."""
    x = p.x
    fig, ax = plt.subplots(figsize=(7.0, 3.2))
    ax.plot(x, np.abs(p.u), label="|u|", lw=1.6)
    ax.plot(x, p.u.real, label="Re u", lw=0.8)
    ax.plot(x, p.u.imag, label="Im u", lw=0.8)
    ax.set_xlabel("x")
    if title:
        ax.set_title(title)
    ax.legend(frameon=False)
    _save(fig, path)


def plot_parametric_soliton(y, x_of_y, u_of_y, path):
    """Parametric x(y) and |u|(y) for cuspon/loop data (no x-graph exists)."""
    fig, axes = plt.subplots(1, 2, figsize=(9.0, 3.4))
    axes[0].plot(x_of_y, np.abs(u_of_y))
    axes[0].set_xlabel("x(y)")
    axes[0].set_ylabel("|u|")
    axes[1].plot(y, x_of_y)
    axes[1].set_xlabel("y")
    axes[1].set_ylabel("x(y)")
    _save(fig, path)


def plot_drift(drift, path):
    """Conserved-quantity drift along a trajectory."""
    arr = np.asarray(drift, float)
    t = arr[:, 0]
    fig, ax = plt.subplots(figsize=(7.0, 3.2))
    ax.semilogy(t[1:], np.maximum(np.abs(arr[1:, 1] - arr[0, 1]), 1e-18), label="|c drift|")
    ax.semilogy(t[1:], np.maximum(np.abs(arr[1:, 2] - arr[0, 2]), 1e-18), label="|d drift|")
    ax.semilogy(t[1:], np.maximum(arr[1:, 3], 1e-18), label="|mean|")
    ax.set_xlabel("t")
    ax.legend(frameon=False)
    _save(fig, path)


def plot_trajectory(traj, path, n_shown=5):
    """A few |u| snapshots over the box."""
    idx = np.unique(np.linspace(0, len(traj.states) - 1, n_shown).astype(int))
    fig, ax = plt.subplots(figsize=(8.0, 3.4))
    for i in idx:
        snap = traj.states[i]
        ax.plot(snap.x, np.abs(snap.u), lw=0.9, label=f"t={traj.times[i]:g}")
    ax.set_xlabel("x")
    ax.set_ylabel("|u|")
    ax.legend(frameon=False, fontsize=8)
    _save(fig, path)


def plot_prediction(rows, path):
    """Leading-order output: A1+A2 and |u| sqrt(t) against x."""
    arr = np.asarray(rows, float)
    fig, ax = plt.subplots(figsize=(7.0, 3.2))
    ax.plot(arr[:, 0], arr[:, 3] + arr[:, 4], label="A1+A2")
    ax.plot(arr[:, 0], np.sqrt(arr[:, 1]) * np.hypot(arr[:, 7], arr[:, 8]),
            lw=0.8, label=r"$\sqrt{t}\,|u_{pred}|$")
    ax.set_xlabel("x")
    ax.legend(frameon=False)
    _save(fig, path)


def plot_compare(right_rows, left_report, path):
    """Envelope ratios in the oscillatory window plus left-sector decay."""
    fig, axes = plt.subplots(1, 2, figsize=(9.5, 3.4))
    arr = np.asarray(right_rows, float)
    for t in np.unique(arr[:, 0]):
        sel = arr[:, 0] == t
        axes[0].plot(arr[sel, 1] / t, arr[sel, 4], ".", ms=4, label=f"t={t:g}")
    axes[0].axhline(1.0, color="k", lw=0.6)
    axes[0].axhline(0.8, color="k", lw=0.6, ls="--")
    axes[0].axhline(1.2, color="k", lw=0.6, ls="--")
    axes[0].set_xlabel("x/t")
    axes[0].set_ylabel(r"$\sqrt{t}\,\max|u| \,/\, (A_1+A_2)$")
    axes[0].legend(frameon=False, fontsize=8)
    if left_report is not None:
        axes[1].loglog(left_report.times, np.maximum(left_report.sups, 1e-18), "o-")
        axes[1].set_xlabel("t")
        axes[1].set_ylabel(r"$\sup_{x<-\epsilon t}|u|$")
        axes[1].set_title(f"decay exponent {left_report.decay_exponent:.2f}", fontsize=9)
    _save(fig, path)
