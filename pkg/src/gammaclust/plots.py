"""Matplotlib renderers for the report paths.

Figures are rendered straight to files next to the delimited outputs; no
interactive backend is ever required.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .core import ClusterModel, DataSet, Partition
from .selection import AicReport
from .simulate import ExperimentReport

__all__ = [
    "save_profile_figure",
    "save_aic_figure",
    "save_scatter_figure",
    "save_index_curve_figure",
    "save_frequency_figure",
]


def save_profile_figure(path: str | Path, grid: np.ndarray, values: np.ndarray, gamma: float) -> Path:
    """One-dimensional objective profile over a grid of candidate centers."""
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(grid, values, lw=1.5)
    ax.set_xlabel("candidate center")
    ax.set_ylabel("loss")
    ax.set_title(f"loss profile (gamma = {gamma:g})")
    ax.grid(alpha=0.3)
    return _save(fig, path)


def save_aic_figure(path: str | Path, report: AicReport) -> Path:
    """AIC and cluster count against the index grid (detection index on x)."""
    gammas = [rec.gamma_mu for rec in report.records]
    aics = [rec.aic for rec in report.records]
    ks = [rec.k for rec in report.records]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.plot(gammas, aics, "o-", ms=4)
    ax1.axvline(report.best.gamma_mu, color="tab:red", ls="--", lw=1)
    ax1.set_xscale("log")
    ax1.set_xlabel("gamma")
    ax1.set_ylabel("AIC")
    ax1.grid(alpha=0.3)
    ax2.plot(gammas, ks, "o-", ms=4, color="tab:green")
    ax2.set_xscale("log")
    ax2.set_xlabel("gamma")
    ax2.set_ylabel("number of clusters")
    ax2.grid(alpha=0.3)
    fig.suptitle(f"selected gamma = {report.best.gamma_mu:.3g} (k = {report.best.k})")
    return _save(fig, path)


def save_scatter_figure(
    path: str | Path, data: DataSet, partition: Partition, model: ClusterModel | None = None
) -> Path:
    """Two-dimensional scatter colored by cluster, centers marked with crosses."""
    if data.p != 2:
        raise ValueError("scatter figure requires two-dimensional data")
    fig, ax = plt.subplots(figsize=(6, 6))
    cmap = plt.get_cmap("tab10")
    for j in range(partition.k):
        members = data.x[partition.labels == j]
        ax.scatter(members[:, 0], members[:, 1], s=14, color=cmap(j % 10), label=f"cluster {j}")
    if model is not None:
        means = model.means()
        ax.scatter(means[:, 0], means[:, 1], marker="x", s=120, color="black", zorder=3)
        for comp in model.components:
            _draw_cov_ellipse(ax, comp.mu, comp.sigma)
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    ax.legend(loc="best", fontsize=8)
    ax.set_aspect("equal", adjustable="datalim")
    return _save(fig, path)


def _draw_cov_ellipse(ax, mu: np.ndarray, sigma: np.ndarray) -> None:
    """2-sigma contour of a bivariate Gaussian."""
    vals, vecs = np.linalg.eigh(sigma)
    theta = np.linspace(0, 2 * np.pi, 100)
    circle = np.stack([np.cos(theta), np.sin(theta)])
    pts = (vecs * (2.0 * np.sqrt(vals))) @ circle
    ax.plot(mu[0] + pts[0], mu[1] + pts[1], color="black", lw=1, alpha=0.6)


def save_index_curve_figure(path: str | Path, scores: dict[int, float], name: str) -> Path:
    """CH or gap values against the candidate cluster count."""
    ks = sorted(scores)
    vals = [scores[k] for k in ks]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(ks, vals, "o-")
    ax.set_xlabel("number of clusters")
    ax.set_ylabel(name)
    ax.grid(alpha=0.3)
    return _save(fig, path)


def save_frequency_figure(path: str | Path, report: ExperimentReport) -> Path:
    """Grouped bars: how often each method chose each cluster count."""
    methods = report.config.methods
    all_ks = sorted({k for m in methods for k in report.freq[m]})
    width = 0.8 / max(len(methods), 1)
    fig, ax = plt.subplots(figsize=(8, 4))
    for i, m in enumerate(methods):
        counts = [report.freq[m].get(k, 0) for k in all_ks]
        ax.bar(np.arange(len(all_ks)) + i * width, counts, width, label=m)
    ax.set_xticks(np.arange(len(all_ks)) + 0.4 - width / 2)
    ax.set_xticklabels([str(k) for k in all_ks])
    ax.set_xlabel("selected number of clusters")
    ax.set_ylabel(f"frequency over {report.config.runs} runs")
    ax.legend(fontsize=8)
    return _save(fig, path)


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
