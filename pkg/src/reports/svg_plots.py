# src/reports/svg_plots.py
"""SVG 圖 - twistor 軌跡與 Stokes rays (matplotlib, SVG 文字輸出)"""

import io
import logging
import math
from typing import Sequence

import matplotlib
import numpy as np
from matplotlib.figure import Figure
from matplotlib.patches import Circle

logger = logging.getLogger(__name__)

# fixed ids and no timestamp, so the same data renders to the same bytes
_SVG_RC = {"svg.hashsalt": "joycekit", "svg.fonttype": "none"}


def _to_svg(fig: Figure) -> str:
    buf = io.StringIO()
    with matplotlib.rc_context(_SVG_RC):
        fig.savefig(buf, format="svg", metadata={"Date": None})
    return buf.getvalue()


def trajectory_svg(thetas: np.ndarray, title: str = "twistor line") -> str:
    """Each θ component traced in the complex plane; a dot marks the start."""
    thetas = np.atleast_2d(np.asarray(thetas, dtype=complex))
    fig = Figure(figsize=(5, 5))
    ax = fig.add_subplot()
    for i in range(thetas.shape[1]):
        line = thetas[:, i]
        (trace,) = ax.plot(line.real, line.imag, lw=1.5, gid=f"theta{i + 1}", label=f"θ{i + 1}")
        ax.plot([line[0].real], [line[0].imag], "o", ms=4, color=trace.get_color(), gid=f"theta{i + 1}_start")
    ax.set_xlabel("Re θ")
    ax.set_ylabel("Im θ")
    ax.set_title(title)
    ax.legend(loc="best")
    logger.debug(f"[REPORT] trajectory plot with {thetas.shape[1]} components, {thetas.shape[0]} samples")
    return _to_svg(fig)


def stokes_rays_svg(angles: Sequence[float], labels: Sequence[str] = (), title: str = "Stokes rays") -> str:
    fig = Figure(figsize=(5, 5))
    ax = fig.add_subplot()
    ax.add_patch(Circle((0.0, 0.0), 1.0, fill=False, ec="#cccccc"))
    for k, angle in enumerate(angles):
        x, y = math.cos(angle), math.sin(angle)
        (ray,) = ax.plot([0.0, x], [0.0, y], lw=2, gid=f"ray{k + 1}")
        text = labels[k] if k < len(labels) else f"ray {k + 1}"
        ax.annotate(text, (x, y), color=ray.get_color(), fontsize=9)
    ax.set_xlim(-1.25, 1.25)
    ax.set_ylim(-1.25, 1.25)
    ax.set_aspect("equal")
    ax.set_title(title)
    return _to_svg(fig)
