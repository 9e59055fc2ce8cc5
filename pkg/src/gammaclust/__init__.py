"""Spontaneous clustering via local minima of the gamma-loss.

The power index gamma controls how local the loss is: every local minimum
of the mean loss becomes a cluster center, so the number of clusters is
discovered rather than prescribed. The package bundles the fixed-point
optimizer, the multi-restart center detector, two index-selection rules, an
exact two-cluster existence check, evaluation indices, and a seeded
experiment harness with a CLI.
"""

from .bimodality import (
    BimodalityVerdict,
    TwoComponentSpec,
    check_bimodal,
    oracle_mode_count,
    oracle_mode_locations,
    profile_d,
    profile_h,
    profile_h_prime,
)
from .cluster import (
    CenterSet,
    RestartConfig,
    assign,
    detect_centers,
    farthest_points,
    fit_covariances,
    spontaneous_cluster,
)
from .core import (
    ClusterModel,
    DataSet,
    DegenerateK,
    GammaClustError,
    GammaIndex,
    GaussianComponent,
    MixtureSpec,
    NonSphericalComponent,
    Partition,
    SingularCovariance,
    Tolerances,
    TOL,
    ZeroDensity,
    ZeroRange,
    mahalanobis_sq,
    max_range,
)
from .evaluation import (
    LabeledPartition,
    bhi,
    ch_index,
    gap_statistic,
    kmeans,
    kmeans_select_ch,
    kmeans_select_gap,
    within_ss,
)
from .objective import (
    gamma_cross_entropy_gaussian,
    gamma_divergence,
    gamma_entropy,
    kappa,
    loss_mu,
    loss_mu_grad,
    loss_mu_sigma,
    loss_mu_sigma_grad,
    weights,
)
from .optimizer import (
    FixedPointResult,
    IterationConfig,
    find_local_min,
    loss_gradient,
    update_step,
)
from .selection import (
    AicRecord,
    AicReport,
    GammaGrid,
    aic,
    gamma_by_range,
    select_gamma_aic,
    select_gamma_aic_two_index,
)
from .simulate import (
    ExperimentConfig,
    ExperimentReport,
    RunRecord,
    five_spherical_config,
    five_spherical_mixture,
    run_experiment,
    sample_mixture,
    two_ellipsoidal_config,
    two_ellipsoidal_mixture,
)

__version__ = "0.1.0"
