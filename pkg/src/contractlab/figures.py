"""Matplotlib renderers for the experiment harness.

Every renderer writes a PNG next to the delimited data it illustrates.
Rendering is kept out of the numeric modules so reports stay importable
without a toolkit; the harness calls these after the data files are final.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_decay_png(path, report, title):
    """Log-log error curves, one line per metric, with slope annotations."""
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    t = np.asarray(report.t_values, dtype=np.float64)
    for metric in sorted(report.errors):
        errs = np.asarray(report.errors[metric], dtype=np.float64)
        order = report.fitted_order[metric]
        label = f"{metric} (order {order:.2f})" if np.isfinite(order) else metric
        ax.loglog(t, np.maximum(errs, 1e-18), marker="o", label=label)
    ax.set_xlabel("scale t")
    ax.set_ylabel("error")
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_wave_png(path, frame):
    """Real part of one wave frame as an image over its square range."""
    extent = frame["envelope"]["range"]
    fig, ax = plt.subplots(figsize=(5.5, 5.0))
    image = ax.imshow(
        np.real(frame["values"]),
        extent=(-extent, extent, -extent, extent),
        origin="lower",
        cmap="RdBu_r",
    )
    ax.set_title(f"wave real part, t = {frame['t']:g}")
    ax.set_xlabel("a1")
    ax.set_ylabel("a2")
    fig.colorbar(image, ax=ax, shrink=0.85)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_wave_sequence_png(path, frames):
    """Panel grid of wave real parts along the scale ladder."""
    count = len(frames)
    cols = 2 if count > 1 else 1
    rows = (count + cols - 1) // cols
    fig, axes = plt.subplots(rows, cols, figsize=(5.0 * cols, 4.6 * rows))
    axes = np.atleast_1d(axes).ravel()
    for ax, frame in zip(axes, frames):
        extent = frame["envelope"]["range"]
        ax.imshow(
            np.real(frame["values"]),
            extent=(-extent, extent, -extent, extent),
            origin="lower",
            cmap="RdBu_r",
        )
        ax.set_title(f"t = {frame['t']:g}")
    for ax in axes[count:]:
        ax.axis("off")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_orbit_png(path, orbit_frames):
    """Coadjoint orbits as 3d curves (rotation coefficient as height)."""
    fig = plt.figure(figsize=(6.5, 5.5))
    ax = fig.add_subplot(projection="3d")
    for frame in orbit_frames:
        pts = frame["points"]
        ax.plot(pts[:, 1], pts[:, 2], pts[:, 0], lw=0.8,
                label=f"t = {frame['t']:g}")
    ax.set_xlabel("a1")
    ax.set_ylabel("a2")
    ax.set_zlabel("rotation coefficient")
    ax.set_title("orbit sweep across scales")
    ax.legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
