"""Choosing the power index: range heuristic and AIC grid search.

The range rule assumes ``k_prior`` clusters lying side by side across the
widest feature, giving a half-separation estimate r = R / (2 k_prior) and
the index 9 / (2 r^2); for the default k_prior = 2 this is 72 / R^2.

The AIC search clusters at every grid value, scores the implied Gaussian
mixture (hard-assignment proportions, no refitting), and keeps the argmin.
Cross-validation is deliberately not offered: it is known to misbehave for
this objective.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .core import (
    ClusterModel,
    DataSet,
    GammaClustError,
    GammaIndex,
    GaussianComponent,
    Partition,
    ZeroDensity,
    ZeroRange,
    covariance_cholesky,
    mahalanobis_sq_chol,
    max_range,
)
from .cluster import CenterSet, RestartConfig, assign, detect_centers, fit_covariances
from .optimizer import IterationConfig

__all__ = [
    "GammaGrid",
    "AicRecord",
    "AicReport",
    "gamma_by_range",
    "aic",
    "select_gamma_aic",
    "select_gamma_aic_two_index",
]


@dataclass(frozen=True)
class GammaGrid:
    """Strictly increasing positive grid of candidate indices."""

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise ValueError("grid must be nonempty")
        if any(v <= 0.0 for v in vals) or any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError("grid values must be positive and strictly increasing")
        object.__setattr__(self, "values", vals)

    @classmethod
    def log_spaced(cls, lo: float = 0.05, hi: float = 3.0, num: int = 20) -> "GammaGrid":
        return cls(tuple(np.geomspace(lo, hi, num)))


@dataclass(frozen=True, eq=False)
class AicRecord:
    """One grid evaluation: indices used, cluster count, score, fitted model."""

    gamma_mu: float
    gamma_sigma: float
    k: int
    aic: float
    model: ClusterModel


@dataclass(frozen=True, eq=False)
class AicReport:
    """All grid evaluations plus the argmin (ties broken toward smaller indices)."""

    records: tuple[AicRecord, ...]
    best: AicRecord

    def __post_init__(self) -> None:
        if not self.records:
            raise ValueError("report needs at least one record")
        if any(not np.isfinite(r.aic) for r in self.records):
            raise ValueError("every recorded AIC must be finite")

    @property
    def best_gamma(self) -> float:
        return self.best.gamma_mu

    @property
    def best_model(self) -> ClusterModel:
        return self.best.model


def gamma_by_range(data: DataSet, k_prior: int = 2) -> GammaIndex:
    """Range heuristic 9 / (2 r^2) with r = max_range / (2 k_prior).

    Equals 18 k_prior^2 / R^2; the default prior of two clusters gives
    72 / R^2. Scaling the data by a multiplies the result by a^-2.
    """
    if k_prior < 2:
        raise ValueError("k_prior must be at least 2")
    r_max = max_range(data)
    if r_max == 0.0:
        raise ZeroRange("all observations identical; range heuristic undefined")
    r = r_max / (2.0 * k_prior)
    return GammaIndex(9.0 / (2.0 * r * r))


def aic(data: DataSet, model: ClusterModel, partition: Partition) -> float:
    """AIC of the implied mixture: -2 loglik + 2 (K p (p+3) / 2 + K - 1).

    The mixture density uses the fitted centers/covariances with the
    assigned-fraction proportions; log densities are evaluated with the
    max-shifted log-sum-exp.
    """
    if model.proportions is None:
        raise ValueError("model proportions must be filled (run assign first)")
    if partition.k != model.k or partition.n != data.n:
        raise ValueError("partition does not match the model and data")
    if np.any(model.proportions == 0.0):
        raise ZeroDensity("a zero mixing proportion survived assignment")
    p = data.p
    log_terms = np.empty((data.n, model.k))
    for j, comp in enumerate(model.components):
        chol = covariance_cholesky(comp.sigma)
        q = mahalanobis_sq_chol(data.x, comp.mu, chol)
        log_det = 2.0 * np.log(np.diag(chol)).sum()
        log_phi = -0.5 * (p * np.log(2.0 * np.pi) + log_det + q)
        log_terms[:, j] = np.log(model.proportions[j]) + log_phi
    loglik = float(logsumexp(log_terms, axis=1).sum())
    n_params = model.k * p * (p + 3) / 2.0 + model.k - 1
    return -2.0 * loglik + 2.0 * n_params


def _evaluate_pair(
    data: DataSet,
    g_mu: float,
    g_sigma: float,
    rcfg: RestartConfig,
    icfg: IterationConfig,
    fixed_identity: bool,
    refine_means: bool,
    center_cache: dict[float, CenterSet],
) -> AicRecord:
    """Cluster at one (gamma_mu, gamma_sigma) pair and score it.

    Center detection depends only on gamma_mu, so one detection per distinct
    gamma_mu is shared across the covariance grid.
    """
    if g_mu not in center_cache:
        center_cache[g_mu] = detect_centers(data, g_mu, rcfg, icfg)
    centers = center_cache[g_mu]
    if fixed_identity:
        identity = np.eye(data.p)
        model = ClusterModel(
            tuple(GaussianComponent(mu, identity) for mu in centers.centers),
            None,
            GammaIndex(g_mu),
            GammaIndex(g_sigma),
        )
    else:
        model = fit_covariances(
            data, centers, g_sigma, icfg, gamma_mu=g_mu, refine_means=refine_means
        )
    model, partition = assign(data, model)
    score = aic(data, model, partition)
    return AicRecord(g_mu, g_sigma, model.k, score, model)


def _search(
    data: DataSet,
    pairs: list[tuple[float, float]],
    rcfg: RestartConfig,
    icfg: IterationConfig,
    fixed_identity: bool,
    refine_means: bool = False,
) -> AicReport:
    records: list[AicRecord] = []
    failures: list[str] = []
    cache: dict[float, CenterSet] = {}
    for g_mu, g_sigma in pairs:
        try:
            records.append(
                _evaluate_pair(
                    data, g_mu, g_sigma, rcfg, icfg, fixed_identity, refine_means, cache
                )
            )
        except GammaClustError as exc:
            failures.append(f"gamma=({g_mu:g}, {g_sigma:g}): {exc}")
    if not records:
        raise GammaClustError("every grid value failed: " + "; ".join(failures))
    best = records[0]
    for rec in records[1:]:
        if rec.aic < best.aic:
            best = rec
    return AicReport(tuple(records), best)


def select_gamma_aic(
    data: DataSet,
    grid: GammaGrid = GammaGrid.log_spaced(),
    rcfg: RestartConfig = RestartConfig(),
    icfg: IterationConfig = IterationConfig(),
    fixed_identity: bool = False,
    refine_means: bool = False,
) -> AicReport:
    """Single-index AIC search: the same gamma drives both pipeline stages.

    Individual grid failures are skipped; the search fails only when every
    value fails. Grid order is ascending, so ties keep the smaller gamma.
    """
    pairs = [(g, g) for g in grid.values]
    return _search(data, pairs, rcfg, icfg, fixed_identity, refine_means)


def select_gamma_aic_two_index(
    data: DataSet,
    grid_mu: GammaGrid,
    grid_sigma: GammaGrid,
    rcfg: RestartConfig = RestartConfig(),
    icfg: IterationConfig = IterationConfig(),
    refine_means: bool = False,
) -> AicReport:
    """AIC search over the product grid of detection and covariance indices."""
    pairs = [(g1, g2) for g1 in grid_mu.values for g2 in grid_sigma.values]
    return _search(data, pairs, rcfg, icfg, fixed_identity=False, refine_means=refine_means)

