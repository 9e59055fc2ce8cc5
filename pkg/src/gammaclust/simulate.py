"""Seeded mixture sampling and table-style experiment runners.

``run_experiment`` repeats a sampling + clustering protocol ``runs`` times
(run r is seeded with seed + r), tallying how often each method picks each
cluster count, the homogeneity of the partitions, and — on runs where a
method finds the true count — the per-component distances between fitted and
true centers (DM) and covariances (DV). Reports are a pure function of the
configuration.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .core import (
    DataSet,
    GammaClustError,
    GaussianComponent,
    MixtureSpec,
    Partition,
    covariance_cholesky,
)
from .cluster import RestartConfig, assign, spontaneous_cluster
from .evaluation import LabeledPartition, bhi, kmeans_select_ch, kmeans_select_gap
from .optimizer import IterationConfig
from .selection import GammaGrid, gamma_by_range, select_gamma_aic, select_gamma_aic_two_index

__all__ = [
    "METHODS",
    "ExperimentConfig",
    "RunRecord",
    "ExperimentReport",
    "sample_mixture",
    "run_experiment",
    "five_spherical_mixture",
    "two_ellipsoidal_mixture",
    "five_spherical_config",
    "two_ellipsoidal_config",
]

METHODS = ("spont_range", "spont_aic", "kmeans_ch", "kmeans_gap")


def sample_mixture(
    spec: MixtureSpec, n: int, seed: int = 0
) -> tuple[DataSet, np.ndarray]:
    """Draw n observations: a component index per row, then a Gaussian draw.

    Returns the data and the true component labels; deterministic given seed.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    comp_idx = rng.choice(spec.k, size=n, p=spec.proportions)
    z = rng.standard_normal((n, spec.p))
    x = np.empty((n, spec.p))
    for j, comp in enumerate(spec.components):
        rows = comp_idx == j
        if not np.any(rows):
            continue
        chol = covariance_cholesky(comp.sigma)
        x[rows] = comp.mu + z[rows] @ chol.T
    return DataSet(x), comp_idx


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """One experiment design: ground truth, sample size, methods, and knobs."""

    mixture: MixtureSpec
    n: int
    runs: int
    methods: tuple[str, ...] = METHODS
    seed: int = 0
    k_prior: int = 2
    fixed_identity: bool = False
    refine_means: bool = False
    gamma_grid: GammaGrid = field(default_factory=lambda: GammaGrid.log_spaced(num=10))
    gamma_grid_sigma: GammaGrid | None = None
    kmeans_k_max: int = 8
    kmeans_restarts: int = 4
    gap_refs: int = 20
    restart: RestartConfig = field(default_factory=RestartConfig)
    iteration: IterationConfig = field(default_factory=IterationConfig)

    def __post_init__(self) -> None:
        if self.runs < 1:
            raise ValueError("runs must be at least 1")
        if self.n < 2:
            raise ValueError("n must be at least 2")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ValueError(f"unknown methods: {sorted(unknown)}")
        object.__setattr__(self, "methods", tuple(self.methods))


@dataclass(frozen=True)
class RunRecord:
    """One (run, method) outcome."""

    run: int
    method: str
    k: int
    bhi: float
    gamma_mu: float | None
    gamma_sigma: float | None


@dataclass(frozen=True, eq=False)
class ExperimentReport:
    """Aggregated experiment outcome.

    ``freq[method][k]`` counts runs choosing k clusters; counts plus recorded
    failures always sum to ``runs``. ``dm``/``dv`` are per-true-component
    means over the runs with the correct count (None when no run qualified or
    the method fits no covariances).
    """

    config: ExperimentConfig
    freq: dict
    failures: dict
    mean_bhi: dict
    dm: dict
    dv: dict
    records: tuple[RunRecord, ...]

    def __post_init__(self) -> None:
        for method in self.config.methods:
            total = sum(self.freq[method].values()) + self.failures[method]
            if total != self.config.runs:
                raise ValueError(f"{method}: frequency table does not sum to runs")

    def modal_k(self, method: str) -> int:
        table = self.freq[method]
        return max(table, key=lambda k: (table[k], -k))


def _greedy_match(est: np.ndarray, true: np.ndarray) -> list[tuple[int, int]]:
    """Pair estimated and true centers by repeatedly taking the closest pair."""
    pairs = []
    free_est = set(range(est.shape[0]))
    free_true = set(range(true.shape[0]))
    while free_est and free_true:
        best = min(
            ((i, j) for i in free_est for j in free_true),
            key=lambda ij: float(np.linalg.norm(est[ij[0]] - true[ij[1]])),
        )
        pairs.append(best)
        free_est.discard(best[0])
        free_true.discard(best[1])
    return pairs


class _MethodTally:
    """Mutable accumulator for one method across runs."""

    def __init__(self, true_k: int) -> None:
        self.freq: dict[int, int] = {}
        self.failures = 0
        self.bhis: list[float] = []
        self.dm_sums = np.zeros(true_k)
        self.dv_sums = np.zeros(true_k)
        self.matched_runs = 0
        self.dv_runs = 0


def _run_method(
    method: str, cfg: ExperimentConfig, data: DataSet, run_seed: int
) -> tuple[int, Partition, np.ndarray, np.ndarray | None, float | None, float | None]:
    """Execute one method on one sample.

    Returns (k, partition, centers, covariances-or-None, gamma_mu, gamma_sigma).
    """
    rcfg = replace(cfg.restart, seed=run_seed)
    if method == "spont_range":
        g = gamma_by_range(data, cfg.k_prior)
        model, part = spontaneous_cluster(
            data,
            g,
            g,
            rcfg,
            cfg.iteration,
            fixed_identity=cfg.fixed_identity,
            refine_means=cfg.refine_means,
        )
        covs = None if cfg.fixed_identity else model.covariances()
        return model.k, part, model.means(), covs, float(g), float(g)
    if method == "spont_aic":
        if cfg.gamma_grid_sigma is None:
            report = select_gamma_aic(
                data,
                cfg.gamma_grid,
                rcfg,
                cfg.iteration,
                fixed_identity=cfg.fixed_identity,
                refine_means=cfg.refine_means,
            )
        else:
            report = select_gamma_aic_two_index(
                data,
                cfg.gamma_grid,
                cfg.gamma_grid_sigma,
                rcfg,
                cfg.iteration,
                refine_means=cfg.refine_means,
            )
        model = report.best.model
        _, part = assign(data, model)
        covs = None if cfg.fixed_identity else model.covariances()
        return model.k, part, model.means(), covs, report.best.gamma_mu, report.best.gamma_sigma
    k_range = range(1, cfg.kmeans_k_max + 1)
    if method == "kmeans_ch":
        k, part, _ = kmeans_select_ch(data, k_range, cfg.kmeans_restarts, seed=run_seed)
    elif method == "kmeans_gap":
        k, part, _ = kmeans_select_gap(
            data, k_range, b_refs=cfg.gap_refs, restarts=cfg.kmeans_restarts, seed=run_seed
        )
    else:  # pragma: no cover - guarded by config validation
        raise ValueError(f"unknown method {method}")
    centers = np.array([data.x[part.labels == j].mean(axis=0) for j in range(k)])
    return k, part, centers, None, None, None


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Run the configured protocol; per-run failures are recorded, not fatal."""
    true_k = cfg.mixture.k
    true_means = np.array([c.mu for c in cfg.mixture.components])
    true_covs = np.array([c.sigma for c in cfg.mixture.components])
    tallies = {m: _MethodTally(true_k) for m in cfg.methods}
    records: list[RunRecord] = []

    for r in range(cfg.runs):
        run_seed = cfg.seed + r
        data, truth = sample_mixture(cfg.mixture, cfg.n, seed=run_seed)
        for method in cfg.methods:
            tally = tallies[method]
            try:
                k, part, centers, covs, g_mu, g_sigma = _run_method(
                    method, cfg, data, run_seed
                )
            except GammaClustError:
                tally.failures += 1
                continue
            score = bhi(LabeledPartition(part, tuple(truth)))
            tally.freq[k] = tally.freq.get(k, 0) + 1
            tally.bhis.append(score)
            records.append(RunRecord(r, method, k, score, g_mu, g_sigma))
            if k == true_k:
                pairs = _greedy_match(centers, true_means)
                tally.matched_runs += 1
                for i, j in pairs:
                    tally.dm_sums[j] += float(np.linalg.norm(centers[i] - true_means[j]))
                if covs is not None:
                    tally.dv_runs += 1
                    for i, j in pairs:
                        tally.dv_sums[j] += float(
                            np.linalg.norm(covs[i] - true_covs[j], ord="fro")
                        )

    freq = {m: dict(sorted(tallies[m].freq.items())) for m in cfg.methods}
    failures = {m: tallies[m].failures for m in cfg.methods}
    mean_bhi = {
        m: float(np.mean(tallies[m].bhis)) if tallies[m].bhis else float("nan")
        for m in cfg.methods
    }
    dm = {
        m: tuple(tallies[m].dm_sums / tallies[m].matched_runs)
        if tallies[m].matched_runs
        else None
        for m in cfg.methods
    }
    dv = {
        m: tuple(tallies[m].dv_sums / tallies[m].dv_runs) if tallies[m].dv_runs else None
        for m in cfg.methods
    }
    return ExperimentReport(cfg, freq, failures, mean_bhi, dm, dv, tuple(records))


def five_spherical_mixture() -> MixtureSpec:
    """Five equal unit-covariance components: the origin plus four corners."""
    means = [(0.0, 0.0), (3.0, 3.0), (-3.0, 3.0), (-3.0, -3.0), (3.0, -3.0)]
    eye = np.eye(2)
    return MixtureSpec(
        tuple(GaussianComponent(np.array(m), eye) for m in means),
        np.full(5, 0.2),
    )


def two_ellipsoidal_mixture() -> MixtureSpec:
    """Two correlated bivariate components with unequal covariances."""
    return MixtureSpec(
        (
            GaussianComponent(np.zeros(2), np.array([[1.0, 0.5], [0.5, 1.0]])),
            GaussianComponent(np.array([3.0, 3.0]), np.array([[2.0, -0.5], [-0.5, 2.0]])),
        ),
        np.array([0.5, 0.5]),
    )


def five_spherical_config(runs: int = 100, seed: int = 0) -> ExperimentConfig:
    """Spherical five-cluster design, n = 200, covariances treated as known."""
    return ExperimentConfig(
        mixture=five_spherical_mixture(),
        n=200,
        runs=runs,
        seed=seed,
        fixed_identity=True,
    )


def two_ellipsoidal_config(runs: int = 100, seed: int = 0) -> ExperimentConfig:
    """Ellipsoidal two-cluster design, n = 100, two-index AIC selection.

    The detection grid stops below the shattering regime: at this separation
    two genuine minima exist from roughly 0.35 up, while past ~1.2 the index
    starts resolving sub-cluster artifacts of ~50-point samples that the
    hard-assignment AIC rewards. Means are refined per cluster during the
    covariance stage (heterogeneous covariances bias the identity-loss
    centers inward).
    """
    return ExperimentConfig(
        mixture=two_ellipsoidal_mixture(),
        n=100,
        runs=runs,
        seed=seed,
        methods=("spont_aic",),
        refine_means=True,
        gamma_grid=GammaGrid.log_spaced(0.1, 1.2, 10),
        gamma_grid_sigma=GammaGrid.log_spaced(0.1, 1.0, 10),
    )
