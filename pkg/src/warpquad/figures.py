"""Diagnostic figures rendered to files alongside the verification report."""

from __future__ import annotations

import math
import os
from typing import Sequence

import numpy as np

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .embed import EmbeddingModel  # noqa: E402
from .verify import VerificationReport  # noqa: E402
from .warped import WINDOW_GAPS  # noqa: E402


def _window_ts(model: EmbeddingModel, per_gap: int = 64) -> np.ndarray:
    pts = []
    for k in range(-WINDOW_GAPS, WINDOW_GAPS):
        pts.extend(model.spec.gap_points(k, per_gap))
    pts.append(model.pair.breakpoint(WINDOW_GAPS))
    return np.asarray(pts)


def fig_blanusa(model: EmbeddingModel, path: str) -> None:
    ts = _window_ts(model)
    pair = model.pair
    p1 = [pair.psi(1, t) for t in ts]
    p2 = [pair.psi(2, t) for t in ts]
    fig, ax = plt.subplots(figsize=(8, 3))
    ax.plot(ts, p1, label="psi1", lw=1.0)
    ax.plot(ts, p2, label="psi2", lw=1.0)
    for k in range(-WINDOW_GAPS, WINDOW_GAPS + 1):
        ax.axvline(pair.breakpoint(k), color="0.85", lw=0.5, zorder=0)
    ax.set_xlabel("t")
    ax.set_title("periodic pair over the verification window")
    ax.legend(loc="upper right")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def fig_steps(model: EmbeddingModel, path: str) -> None:
    steps = model.steps
    pair = model.pair
    fig, ax = plt.subplots(figsize=(8, 3))
    if steps.trivial:
        ax.text(0.5, 0.5, "trivial steps (b = 0)", ha="center", va="center",
                transform=ax.transAxes)
    else:
        for (table, label, color) in (
            (steps.s1, "S1", "tab:blue"),
            (steps.s2, "S2", "tab:orange"),
        ):
            first = True
            for l, v in sorted(table.items()):
                k0 = 2 * l + 1 if label == "S1" else 2 * l
                lo = pair.breakpoint(k0)
                hi = pair.breakpoint(k0 + 2)
                ax.hlines(v, lo, hi, color=color, lw=1.5,
                          label=label if first else None)
                first = False
        ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("step value")
    ax.set_title("synthesized step functions")
    ax.legend(loc="upper right")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def fig_isometry(ts: Sequence[float], errs: Sequence[float], path: str) -> None:
    fig, ax = plt.subplots(figsize=(8, 3))
    ax.semilogy(ts, np.maximum(errs, 1e-18), lw=0.8)
    ax.set_xlabel("t")
    ax.set_ylabel("max relative pullback error")
    ax.set_title("isometry error over the grid")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def fig_surface(model: EmbeddingModel, path: str,
                project: tuple[int, int, int] = (0, 1, 2),
                nt: int = 80, nx: int = 80, x_box: float = 3.0) -> None:
    """A (t, x_1) slice through x = 0, projected to three ambient axes."""
    spec = model.spec
    t_lo = model.pair.breakpoint(-3)
    t_hi = model.pair.breakpoint(3)
    ts = np.linspace(t_lo, t_hi, nt)
    us = np.linspace(-x_box, x_box, nx)
    X = np.zeros((nt, nx))
    Y = np.zeros((nt, nx))
    Z = np.zeros((nt, nx))
    x = np.zeros(spec.n - 1)
    for i, t in enumerate(ts):
        for j, u in enumerate(us):
            x[:] = 0.0
            x[-1] = u  # vary a periodic coordinate when one exists
            y = model.eval(t, x)
            X[i, j] = y[project[0]]
            Y[i, j] = y[project[1]]
            Z[i, j] = y[project[2]]
    fig = plt.figure(figsize=(6, 5))
    ax = fig.add_subplot(projection="3d")
    ax.plot_surface(X, Y, Z, rcount=40, ccount=40, cmap="viridis",
                    linewidth=0, antialiased=True)
    ax.set_title(
        f"{model.kind} slice projected to axes {project[0]},{project[1]},{project[2]}"
    )
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_report_figures(
    model: EmbeddingModel,
    report: VerificationReport,
    ts: Sequence[float],
    errs: Sequence[float],
    outdir: str,
) -> list[str]:
    """Write the standard figure set; returns the created file names."""
    os.makedirs(outdir, exist_ok=True)
    created = []
    jobs = [
        ("fig_blanusa.png", lambda p: fig_blanusa(model, p)),
        ("fig_steps.png", lambda p: fig_steps(model, p)),
        ("fig_isometry.png", lambda p: fig_isometry(ts, errs, p)),
        ("fig_surface.png", lambda p: fig_surface(model, p)),
    ]
    for name, job in jobs:
        path = os.path.join(outdir, name)
        job(path)
        created.append(name)
    return created
