"""SVG figures: decision-boundary panels and kernel profile curves.

Output is byte-deterministic: the SVG id salt is fixed and the date stamp is
dropped.
"""

from __future__ import annotations

import io
import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .bench import atomic_write  # noqa: E402
from .kernels import (  # noqa: E402
    coherent_phase_kernel_re,
    exp_sine_squared_kernel,
    gaussian_kernel,
    squeezing_amplitude_kernel,
    squeezing_phase_kernel_re,
)

STYLE = {
    "svg.hashsalt": "sqkernels",
    "svg.fonttype": "path",
    "font.size": 10,
    "axes.linewidth": 0.8,
    "xtick.direction": "in",
    "ytick.direction": "in",
    "figure.dpi": 100,
}
CLASS_COLORS = {1: "#1f77b4", -1: "#d62728"}
REGION_COLORS = ["#f6c9c9", "#c9dcf2"]  # label -1, label +1


def _save_svg(fig, path):
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    atomic_write(path, buf.getvalue())


def emit_plot(grid, data, path, title: str | None = None):
    """Decision regions of ``grid`` with the points of ``data`` on top.

    Background is coloured by predicted label, markers by true label.
    """
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(3.2, 3.2))
        ax.contourf(grid.x1, grid.x2, grid.labels, levels=[-2, 0, 2], colors=REGION_COLORS)
        if np.any(grid.decision > 0) and np.any(grid.decision < 0):
            ax.contour(grid.x1, grid.x2, grid.decision, levels=[0.0], colors="k", linewidths=0.8)
        if data is not None and len(data):
            for label, color in CLASS_COLORS.items():
                pts = data.points[data.labels == label]
                if len(pts):
                    ax.scatter(pts[:, 0], pts[:, 1], s=8, c=color, edgecolors="k", linewidths=0.3)
        x1_min, x1_max, x2_min, x2_max = grid.bounds
        ax.set_xlim(x1_min, x1_max)
        ax.set_ylim(x2_min, x2_max)
        ax.set_xticks([])
        ax.set_yticks([])
        if title:
            ax.set_title(title, fontsize=8)
        fig.tight_layout()
        _save_svg(fig, path)


def plot_kernel_profiles(path, cs=(0.5, 1.0, 1.5), ls=(0.5, 1.0, 2.0)):
    """Periodic kernels (left) and amplitude kernels (right) against the
    feature difference."""
    delta = np.linspace(-2 * math.pi, 2 * math.pi, 801)
    zero = np.zeros_like(delta)
    d = np.linspace(-4.0, 4.0, 401)
    with plt.rc_context(STYLE):
        fig, (left, right) = plt.subplots(1, 2, figsize=(7.0, 3.0))
        for c in cs:
            left.plot(delta, squeezing_phase_kernel_re(zero[:, None], delta[:, None], c), label=f"squeezing phase c={c:g}")
        for c in cs:
            left.plot(delta, coherent_phase_kernel_re(zero[:, None], delta[:, None], c), ":", label=f"coherent phase c={c:g}")
        for l in ls:
            left.plot(delta, exp_sine_squared_kernel(zero[:, None], delta[:, None], l, 2 * math.pi), "--",
                      label=f"exp-sine-squared l={l:g}")
        left.set_xlabel("x' - x")
        left.set_ylabel("K")
        left.legend(fontsize=6)
        right.plot(d, squeezing_amplitude_kernel(np.zeros((d.size, 1)), np.abs(d)[:, None]), label="squeezing amplitude")
        right.plot(d, gaussian_kernel(np.zeros((d.size, 1)), d[:, None]), "--", label="Gaussian")
        right.set_xlabel("x' - x")
        right.legend(fontsize=6)
        fig.tight_layout()
        _save_svg(fig, path)
