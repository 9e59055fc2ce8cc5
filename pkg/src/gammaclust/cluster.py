"""Spontaneous clustering: discover every local minimum of the mean loss.

The pipeline has three stages. Center detection runs the mean-only
fixed-point iteration (covariance pinned to I) from multiple starting rows,
restarting each round from the data rows farthest from the centers found so
far, until a round contributes nothing new. Covariances are then fitted per
center with the covariance-only iteration, and finally every observation is
assigned to the nearest center in Mahalanobis distance. The number of
clusters is an output of detection, never an input.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .core import (
    ClusterModel,
    DataSet,
    GammaClustError,
    GammaIndex,
    GaussianComponent,
    Partition,
    SingularCovariance,
    covariance_cholesky,
    gamma_value,
    mahalanobis_sq_chol,
    max_range,
)
from .optimizer import IterationConfig, find_local_min

__all__ = [
    "RestartConfig",
    "CenterSet",
    "farthest_points",
    "detect_centers",
    "fit_covariances",
    "assign",
    "spontaneous_cluster",
]

log = logging.getLogger(__name__)

# Floor for the dedup radius when the data collapse to a single point
# (max range 0); any positive radius merges the identical fixed points.
_MIN_DEDUP_RADIUS = 1e-12


@dataclass(frozen=True)
class RestartConfig:
    """Multi-restart schedule for center detection.

    ``m`` starting points per round; ``dedup_radius`` merges fixed points
    closer than this (None resolves to 1e-3 times the data's max range);
    ``max_rounds`` bounds the outer loop; ``seed`` fixes the first round's
    random row draw.
    """

    m: int = 10
    dedup_radius: float | None = None
    max_rounds: int = 20
    seed: int = 0

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ValueError("m must be at least 1")
        if self.dedup_radius is not None and not self.dedup_radius > 0.0:
            raise ValueError("dedup_radius must be positive")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be at least 1")


@dataclass(frozen=True, eq=False)
class CenterSet:
    """Detected cluster centers, pairwise separated by the dedup radius.

    ``failed_restarts`` counts fixed-point runs discarded for hitting the
    iteration cap; ``rounds`` is how many restart rounds ran.
    """

    centers: np.ndarray
    failed_restarts: int = 0
    rounds: int = 0

    def __post_init__(self) -> None:
        centers = np.array(self.centers, dtype=float)
        if centers.ndim == 1:
            centers = centers.reshape(-1, 1)
        if centers.ndim != 2 or centers.shape[0] < 1:
            raise ValueError("a center set needs at least one p-vector")
        centers.setflags(write=False)
        object.__setattr__(self, "centers", centers)

    @property
    def k(self) -> int:
        return self.centers.shape[0]


def farthest_points(data: DataSet, centers: CenterSet, m: int) -> np.ndarray:
    """The m data rows with the largest distance to their nearest center.

    Distance of a row is min over centers of the Euclidean norm. Ties break
    toward the lowest row index; fewer than m rows are returned when n < m.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    d2 = ((data.x[:, None, :] - centers.centers[None, :, :]) ** 2).sum(axis=2).min(axis=1)
    order = np.argsort(-d2, kind="stable")
    return data.x[order[: min(m, data.n)]]


def detect_centers(
    data: DataSet,
    gamma: GammaIndex | float,
    rcfg: RestartConfig = RestartConfig(),
    icfg: IterationConfig = IterationConfig(),
) -> CenterSet:
    """Find all local minima of the mean loss by farthest-point restarts.

    Round one starts from ``m`` random data rows; later rounds start from the
    rows farthest from the current centers. Converged fixed points are added
    unless within the dedup radius of an existing center (the existing one is
    kept). Rounds stop once nothing new is added. Deterministic given the
    seed; non-converged runs are dropped and counted.
    """
    g = gamma_value(gamma)
    delta = rcfg.dedup_radius
    if delta is None:
        delta = max(1e-3 * max_range(data), _MIN_DEDUP_RADIUS)
    rng = np.random.default_rng(rcfg.seed)
    identity = np.eye(data.p)

    centers: list[np.ndarray] = []
    failed = 0
    rounds = 0
    for _ in range(rcfg.max_rounds):
        rounds += 1
        if not centers:
            idx = rng.choice(data.n, size=min(rcfg.m, data.n), replace=False)
            inits = data.x[np.sort(idx)]
        else:
            inits = farthest_points(data, CenterSet(np.array(centers)), rcfg.m)
        added = False
        for x0 in inits:
            result = find_local_min(
                data, GaussianComponent(x0, identity), g, icfg, mode="mu_only"
            )
            if not result.converged:
                failed += 1
                continue
            mu = result.component.mu
            if all(np.linalg.norm(mu - c) >= delta for c in centers):
                centers.append(mu)
                added = True
        if centers and not added:
            break
    if not centers:
        raise GammaClustError("no restart converged; cannot detect any center")
    if failed:
        log.debug("detect_centers: %d of the restarts did not converge", failed)
    return CenterSet(np.array(centers), failed_restarts=failed, rounds=rounds)


def fit_covariances(
    data: DataSet,
    centers: CenterSet,
    gamma_sigma: GammaIndex | float,
    icfg: IterationConfig = IterationConfig(),
    gamma_mu: GammaIndex | float | None = None,
    scope: str = "cluster",
    refine_means: bool = False,
) -> ClusterModel:
    """Fit one covariance per center with the covariance-only iteration.

    Each run starts from the identity matrix with the mean pinned at its
    center. With the default ``scope="cluster"`` a center's fit sees only the
    observations nearest to it (Euclidean), which keeps the fit local: run on
    the full sample (``scope="global"``, the literal reading) a component's
    covariance inflates until it swallows neighboring clusters whenever the
    index is small relative to the separation, and no local solution exists
    at all for moderately separated ellipsoidal clusters. ``refine_means``
    additionally frees the mean during the per-cluster iteration, removing
    the inward bias that identity-covariance detection leaves on the centers.

    Proportions stay unset until assignment. ``gamma_mu`` is recorded on the
    model (defaults to ``gamma_sigma`` when detection used the same index).
    """
    if scope not in ("cluster", "global"):
        raise ValueError("scope must be 'cluster' or 'global'")
    if refine_means and scope != "cluster":
        raise ValueError("mean refinement requires per-cluster scope")
    g_sigma = gamma_value(gamma_sigma)
    g_mu = g_sigma if gamma_mu is None else gamma_value(gamma_mu)
    identity = np.eye(data.p)
    if scope == "cluster":
        d2 = ((data.x[:, None, :] - centers.centers[None, :, :]) ** 2).sum(axis=2)
        nearest = np.argmin(d2, axis=1)
    components = []
    for j, mu in enumerate(centers.centers):
        if scope == "cluster":
            rows = data.x[nearest == j]
            # a center attracting almost nothing cannot support a fit; keep
            # identity and let assignment prune it
            if rows.shape[0] <= data.p:
                components.append(GaussianComponent(mu, identity))
                continue
            subset = DataSet(rows)
        else:
            subset = data
        mode = "joint" if refine_means else "sigma_only"
        try:
            result = find_local_min(
                subset, GaussianComponent(mu, identity), g_sigma, icfg, mode=mode
            )
        except SingularCovariance as exc:
            raise SingularCovariance(f"center {j}: {exc}") from exc
        components.append(result.component)
    return ClusterModel(
        tuple(components), None, GammaIndex(g_mu), GammaIndex(g_sigma)
    )


def assign(data: DataSet, model: ClusterModel) -> tuple[ClusterModel, Partition]:
    """Label each observation by smallest Mahalanobis distance to a center.

    Ties go to the lowest cluster index. Returns a new model whose
    proportions are the assigned fractions; centers that attract no
    observations are removed and labels recomputed once (a removal can only
    grow the remaining clusters).
    """
    dists = np.column_stack(
        [
            mahalanobis_sq_chol(data.x, c.mu, covariance_cholesky(c.sigma))
            for c in model.components
        ]
    )
    labels = np.argmin(dists, axis=1)
    counts = np.bincount(labels, minlength=model.k)
    if np.any(counts == 0):
        keep = np.flatnonzero(counts > 0)
        dists = dists[:, keep]
        labels = np.argmin(dists, axis=1)
        components = tuple(model.components[j] for j in keep)
    else:
        components = model.components
    counts = np.bincount(labels, minlength=len(components))
    proportions = counts / data.n
    updated = ClusterModel(components, proportions, model.gamma_mu, model.gamma_sigma)
    return updated, Partition(labels, len(components))


def spontaneous_cluster(
    data: DataSet,
    gamma_mu: GammaIndex | float,
    gamma_sigma: GammaIndex | float,
    rcfg: RestartConfig = RestartConfig(),
    icfg: IterationConfig = IterationConfig(),
    fixed_identity: bool = False,
    refine_means: bool = False,
) -> tuple[ClusterModel, Partition]:
    """Full pipeline: detect centers, fit covariances, assign observations.

    ``fixed_identity`` skips covariance fitting and keeps every cluster
    covariance at I (assignment then reduces to nearest center in Euclidean
    distance). Two separate indices allow a different locality for center
    detection and covariance fitting; pass the same value twice for the
    single-index behavior. ``refine_means`` is forwarded to the covariance
    stage (see ``fit_covariances``).
    """
    centers = detect_centers(data, gamma_mu, rcfg, icfg)
    if fixed_identity:
        identity = np.eye(data.p)
        model = ClusterModel(
            tuple(GaussianComponent(mu, identity) for mu in centers.centers),
            None,
            GammaIndex(gamma_value(gamma_mu)),
            GammaIndex(gamma_value(gamma_sigma)),
        )
    else:
        model = fit_covariances(
            data, centers, gamma_sigma, icfg, gamma_mu=gamma_mu, refine_means=refine_means
        )
    return assign(data, model)
