"""Figure rendering for the command-line reports.

Every report command writes its delimited data first; these helpers render
a companion PNG next to it.  Rendering is file-only (Agg backend), never
interactive.
"""

from __future__ import annotations

import math

import matplotlib
import numpy as np

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from . import model  # noqa: E402

__all__ = [
    "trajectory_figure",
    "portrait_figure",
    "period_figure",
    "holonomy_figure",
    "degree_figure",
    "equilibria_figure",
]


def _wrap_breaks(angles: np.ndarray) -> np.ndarray:
    """Wrap to (-pi, pi] and insert NaN at branch jumps for clean plotting."""
    w = model.wrap_angle(angles)
    out = w.copy()
    jumps = np.where(np.abs(np.diff(w)) > math.pi)[0]
    out = out.astype(float)
    for j in jumps:
        out[j + 1] = np.nan
    return out


def trajectory_figure(traj, path) -> None:
    """Time series of the reduced state, plus the planar path if present."""
    ncols = 2 if traj.poses is not None else 1
    fig, axes = plt.subplots(1, ncols, figsize=(6 * ncols, 4.5))
    ax = axes[0] if ncols == 2 else axes
    ax.plot(traj.times, traj.states[:, 0], label="u")
    ax.plot(traj.times, traj.states[:, 1], label="omega")
    for i in range(traj.n):
        ax.plot(traj.times, traj.states[:, 2 + i], label=f"alpha{i + 1}",
                lw=0.9)
    ax.set_xlabel("t")
    ax.legend(loc="best", fontsize=8)
    ax.set_title("reduced state")
    if traj.poses is not None:
        ax2 = axes[1]
        ax2.plot(traj.poses[:, 0], traj.poses[:, 1], lw=0.9)
        ax2.plot(traj.poses[0, 0], traj.poses[0, 1], "o", ms=4)
        ax2.set_aspect("equal", adjustable="datalim")
        ax2.set_xlabel("x")
        ax2.set_ylabel("y")
        ax2.set_title("leading-car path")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def portrait_figure(runs, points, path) -> None:
    """Phase portrait on the (alpha1, beta) fundamental region."""
    fig, ax = plt.subplots(figsize=(6, 5))
    for tt in runs:
        beta = _wrap_breaks(tt.angles[:, 0])
        a1 = _wrap_breaks(tt.angles[:, 1]) if tt.angles.shape[1] > 1 else \
            np.zeros_like(beta)
        ax.plot(a1, beta, lw=0.7, color="tab:blue", alpha=0.7)
    colors = {"stable_node": "tab:green", "unstable_node": "tab:red",
              "saddle": "tab:orange"}
    for pt in points:
        a1 = model.wrap_angle(pt.alpha[0]) if pt.alpha.size else 0.0
        ax.plot(a1, model.wrap_angle(pt.beta), "o", ms=7,
                color=colors.get(pt.stability, "k"), zorder=5)
    ax.set_xlabel("alpha1")
    ax.set_ylabel("beta")
    ax.set_xlim(-math.pi, math.pi)
    ax.set_ylim(-math.pi, math.pi)
    ax.set_title("flow on the energy torus")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def period_figure(energies, periods, e_critical, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.plot(energies, periods, "o-", ms=3)
    ax.axvline(e_critical, color="tab:red", ls="--", lw=1,
               label="critical energy")
    ax.set_xlabel("E")
    ax.set_ylabel("period T(E)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def holonomy_figure(poses, path) -> None:
    fig, ax = plt.subplots(figsize=(5.5, 5.5))
    ax.plot(poses[:, 0], poses[:, 1], lw=0.8)
    ax.plot(poses[0, 0], poses[0, 1], "o", ms=4)
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title("leading-car path over several hitch periods")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def degree_figure(params, reports, grid_resolution, path) -> None:
    """Degree map over the hitch angles (heatmap for n = 2, line for n = 1)."""
    degs = np.array([r.degree if r.degree is not None else -1
                     for r in reports], dtype=float)
    fig, ax = plt.subplots(figsize=(6, 5))
    if params.n == 2:
        img = degs.reshape(grid_resolution, grid_resolution)
        im = ax.imshow(img.T, origin="lower",
                       extent=(-math.pi, math.pi, -math.pi, math.pi))
        fig.colorbar(im, ax=ax, label="degree of nonholonomy")
        ax.set_xlabel("alpha1")
        ax.set_ylabel("alpha2")
    else:
        alphas = np.array([r.q[3] for r in reports])
        ax.plot(alphas, degs, ".")
        ax.set_xlabel("alpha1")
        ax.set_ylabel("degree of nonholonomy")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def equilibria_figure(points, path) -> None:
    """Positions of the equilibria on the (alpha1, beta) face of the torus."""
    fig, ax = plt.subplots(figsize=(5.5, 5))
    colors = {"stable_node": "tab:green", "unstable_node": "tab:red",
              "saddle": "tab:orange"}
    seen = set()
    for pt in points:
        a1 = model.wrap_angle(pt.alpha[0]) if pt.alpha.size else 0.0
        label = pt.stability if pt.stability not in seen else None
        seen.add(pt.stability)
        ax.plot(a1, model.wrap_angle(pt.beta), "o", ms=8,
                color=colors.get(pt.stability, "k"), label=label)
    ax.set_xlabel("alpha1")
    ax.set_ylabel("beta")
    ax.set_xlim(-3.5, 3.5)
    ax.set_ylim(-3.5, 3.5)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
