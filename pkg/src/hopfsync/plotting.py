"""Figure rendering for the CLI report path.

Every function draws one figure from in-memory results and saves it to
``path``; nothing is shown interactively.
"""
from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import LogNorm  # noqa: E402

RC = {
    "figure.figsize": (6.0, 4.0),
    "figure.dpi": 120,
    "axes.labelsize": 11,
    "axes.titlesize": 11,
    "legend.fontsize": 9,
    "xtick.labelsize": 9,
    "ytick.labelsize": 9,
    "lines.linewidth": 1.2,
    "savefig.bbox": "tight",
}

LABELS = {
    "delta1": r"$\delta_1$",
    "delta2": r"$\delta_2$",
    "d1": r"$d_1$",
    "d2": r"$d_2$",
    "lambda0": r"$\lambda_0$",
    "abs_dphi": r"$|\Delta\varphi|$",
    "R": r"$R$",
    "rho": r"$\rho$",
}


def _save(fig, path):
    fig.savefig(path)
    plt.close(fig)


def plot_trajectory(traj, path, title=None):
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(8, 3))
        ax.plot(traj.t, traj.x1, label=r"$x_1$")
        ax.plot(traj.t, traj.x2, label=r"$x_2$")
        ax.set_xlabel("t")
        ax.legend(loc="upper right")
        if title:
            ax.set_title(title)
        _save(fig, path)


def plot_density(density, path, label=None):
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        ax.step(density.centers, density.density, where="mid", label=label)
        ax.set_xlim(-math.pi, math.pi)
        ax.set_xlabel(r"$\Delta\varphi$")
        ax.set_ylabel("density")
        if label:
            ax.legend()
        _save(fig, path)


def plot_branches(hb1, hb2, mode, path):
    axis = {"symmetric": 0, "vary-d1": 0, "vary-d2": 1}[mode]
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        d = [pt[0][axis] for pt in hb1.points]
        ax.plot([pt[1] for pt in hb1.points], d, "-", color="C0", label="HB1")
        pts2 = [(pt[1], pt[0][axis]) for pt in hb2.points if pt[1] is not None]
        if pts2:
            lam, dd = zip(*pts2)
            ax.plot(lam, dd, "--", color="C0", label="HB2")
        ax.set_xlabel(LABELS["lambda0"])
        ax.set_ylabel(r"$d$" if mode == "symmetric" else LABELS["d1" if axis == 0 else "d2"])
        ax.legend()
        _save(fig, path)


def plot_diagram(diagram, path):
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        lam = diagram.lambda0
        fp = np.array([np.nan if v is None else v for v in diagram.fixed_point])
        ax.plot(lam, fp, "k-", label="stable fixed point")
        for amps, style, name in ((diagram.amp1, "C0-", r"$r_1$"), (diagram.amp2, "C1--", r"$r_2$")):
            ax.plot(lam, [np.nan if a is None else a for a in amps], style, label=f"stable orbit {name}")
        ax.set_xlabel(LABELS["lambda0"])
        ax.set_ylabel("amplitude")
        ax.legend()
        _save(fig, path)


def plot_snr(rows, path):
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        d = [r[0] for r in rows]
        b = [np.nan if r[1] is None else r[1] for r in rows]
        ax.semilogx(d, b, "o-")
        ax.set_xlabel(r"$\delta$")
        ax.set_ylabel(r"$\beta$")
        _save(fig, path)


def plot_sweep(result, path, metric="abs_dphi"):
    """Curve for one-axis sweeps, heat map for two-axis sweeps."""
    axes = result.grid.axes
    values = result.array(metric)
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        if len(axes) == 1:
            x = np.array(axes[0].values)
            for m, c in (("abs_dphi", "C0"), ("R", "C1"), ("rho", "k")):
                ax.plot(x, result.array(m), "o-", color=c, ms=3, label=LABELS[m])
            if axes[0].spacing == "log":
                ax.set_xscale("log")
            ax.set_xlabel(LABELS[axes[0].param])
            ax.legend()
        else:
            x, y = np.array(axes[0].values), np.array(axes[1].values)
            mesh = ax.pcolormesh(y, x, values, shading="nearest", cmap="viridis")
            fig.colorbar(mesh, ax=ax, label=LABELS.get(metric, metric))
            if axes[1].spacing == "log":
                ax.set_xscale("log")
            if axes[0].spacing == "log":
                ax.set_yscale("log")
            ax.set_xlabel(LABELS[axes[1].param])
            ax.set_ylabel(LABELS[axes[0].param])
        _save(fig, path)


def plot_optima_map(rows, outer_axes, path):
    """Optimal noise ratio and minimum |dphi| over a two-axis outer grid."""
    if len(outer_axes) != 2:
        with plt.rc_context(RC):
            fig, (a1, a2) = plt.subplots(1, 2, figsize=(9, 3.5))
            x = [r[0][outer_axes[0].param] for r in rows]
            a1.plot(x, [np.nan if r[1] is None else r[1].min_abs_dphi for r in rows], "o-")
            a1.set_ylabel(r"min $|\Delta\varphi|$")
            a2.plot(x, [np.nan if r[1] is None else r[1].noise_sum for r in rows], "o-")
            a2.set_ylabel(r"$\delta_1+\delta_2$ at optimum")
            for a in (a1, a2):
                a.set_xlabel(LABELS[outer_axes[0].param])
            _save(fig, path)
        return
    shape = (len(outer_axes[0].values), len(outer_axes[1].values))
    ratio = np.full(shape, np.nan)
    best = np.full(shape, np.nan)
    for k, (_, rep, _) in enumerate(rows):
        if rep is not None:
            idx = np.unravel_index(k, shape)
            ratio[idx] = np.nan if rep.optimal_noise_ratio is None else rep.optimal_noise_ratio
            best[idx] = rep.min_abs_dphi
    x, y = np.array(outer_axes[0].values), np.array(outer_axes[1].values)
    with plt.rc_context(RC):
        fig, (a1, a2) = plt.subplots(1, 2, figsize=(10, 4))
        finite = ratio[np.isfinite(ratio)]
        norm = LogNorm(vmin=finite.min(), vmax=finite.max()) if finite.size and finite.min() > 0 else None
        m1 = a1.pcolormesh(x, y, ratio.T, shading="nearest", norm=norm, cmap="coolwarm")
        fig.colorbar(m1, ax=a1, label=r"$\delta_1/\delta_2$")
        m2 = a2.pcolormesh(x, y, best.T, shading="nearest", cmap="viridis")
        fig.colorbar(m2, ax=a2, label=r"min $|\Delta\varphi|$")
        for a in (a1, a2):
            a.set_xlabel(LABELS[outer_axes[0].param])
            a.set_ylabel(LABELS[outer_axes[1].param])
        _save(fig, path)
