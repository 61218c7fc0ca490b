"""Figure rendering for ladder experiments.

Figures are rendered with matplotlib to SVG with a fixed hash salt and no
date metadata, so repeated runs are byte-identical.
"""

from __future__ import annotations

import numpy as np

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "jensenlab"

import matplotlib.pyplot as plt  # noqa: E402

from .gap import DecayFit  # noqa: E402


def save_ladder_figure(fit: DecayFit, path: str, title: str = "gap decay"):
    """Log-log ladder points with the fitted power law."""
    eps = np.array([e for e, _ in fit.ladder])
    ts = np.array([t for _, t in fit.ladder])
    fig, ax = plt.subplots(figsize=(5.0, 3.75))
    positive = ts > 0
    if positive.any():
        ax.loglog(eps[positive], ts[positive], "o", label="measured gap")
    if fit.exponent is not None and fit.prefactor is not None:
        line = fit.prefactor * eps ** fit.exponent
        ax.loglog(eps, line, "-",
                  label=f"fit: slope {fit.exponent:.3f}")
    ax.set_xlabel(r"$\varepsilon$")
    ax.set_ylabel(r"$T^\varepsilon$")
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    if positive.any() or fit.exponent is not None:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
