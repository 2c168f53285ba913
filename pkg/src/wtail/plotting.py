"""Figure rendering for curve experiments (mean left, RMSE right)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .core import EstimatorSpec
from .engine import CurveSet

__all__ = ["render_curves_figure"]


def render_curves_figure(
    path: Path,
    estimators: tuple[EstimatorSpec, ...],
    curves: dict[EstimatorSpec, CurveSet],
    theta: float,
    title: str,
) -> None:
    """Two-panel figure of the simulated mean and RMSE curves against k."""
    specs = list(dict.fromkeys(estimators))
    fig, (ax_mean, ax_rmse) = plt.subplots(1, 2, figsize=(10.5, 4.0), sharex=True)
    for spec in specs:
        cs = curves[spec]
        ax_mean.plot(cs.k, cs.mean, lw=1.2, label=spec.label)
        ax_rmse.plot(cs.k, cs.rmse, lw=1.2, label=spec.label)
    ax_mean.axhline(theta, color="black", ls="--", lw=0.9)
    ax_mean.set_xlabel("k")
    ax_rmse.set_xlabel("k")
    ax_mean.set_ylabel("simulated mean")
    ax_rmse.set_ylabel("simulated RMSE")
    ax_mean.legend(fontsize=8, frameon=False)
    fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
