"""Monotone fixed-point iteration for local minima of the gamma-loss.

The update is a concave-convex step: given the current parameters, each
observation receives a softmax weight, the mean moves to the weighted
average, and the covariance to (1 + gamma) times the weighted scatter about
the *new* mean (weights stay evaluated at the old parameters). Each full
update decreases the loss, so the recorded trace is non-increasing up to
float noise.

The literal stopping rule "repeat while the change is below epsilon" would
never iterate; it is implemented as "repeat until the change drops below
epsilon", the only reading consistent with convergence.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .core import (
    DataSet,
    GammaIndex,
    GaussianComponent,
    SingularCovariance,
    covariance_cholesky,
    gamma_value,
    mahalanobis_sq_chol,
)
from .objective import loss_mu_sigma_grad, weights

__all__ = ["IterationConfig", "FixedPointResult", "Mode", "update_step", "find_local_min", "loss_gradient"]

log = logging.getLogger(__name__)

Mode = Literal["mu_only", "sigma_only", "joint"]
_MODES = ("mu_only", "sigma_only", "joint")

# Uphill slack tolerated before a descent violation is logged.
_DESCENT_SLACK = 1e-12

# A covariance still moving by more than this fraction of its own size is
# collapsing geometrically, not converging: absolute steps shrink with the
# scale, so the step test alone would declare victory at a non-stationary
# point.
_RELATIVE_SIGMA_TOL = 1e-4


@dataclass(frozen=True)
class IterationConfig:
    """Stopping threshold, iteration cap, and ridge-repair size."""

    epsilon: float = 1e-8
    max_iter: int = 500
    ridge: float = 1e-9

    def __post_init__(self) -> None:
        if not self.epsilon > 0.0:
            raise ValueError("epsilon must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.ridge < 0.0:
            raise ValueError("ridge must be nonnegative")


@dataclass(frozen=True, eq=False)
class FixedPointResult:
    """Outcome of one fixed-point run.

    ``loss_trace`` holds the objective at the initial point and after every
    update; it is non-increasing within float slack. ``converged`` is False
    when the iteration cap was hit before the step change fell below epsilon.
    """

    component: GaussianComponent
    iterations: int
    converged: bool
    loss_trace: tuple[float, ...]


def _ridge_repair(sigma: np.ndarray, ridge: float) -> np.ndarray:
    """Add a diagonal jitter when the weighted scatter is numerically singular.

    Jitter is ridge * trace/p, falling back to the absolute ridge when the
    scatter has collapsed to the zero matrix (single repeated point).
    """
    p = sigma.shape[0]
    trace = float(np.trace(sigma))
    scale = trace / p if trace > 0.0 else 1.0
    threshold = ridge * scale
    smallest = float(np.linalg.eigvalsh(sigma)[0])
    if smallest >= threshold and smallest > 0.0:
        return sigma
    repaired = sigma + threshold * np.eye(p)
    if float(np.linalg.eigvalsh(repaired)[0]) <= 0.0:
        raise SingularCovariance("weighted scatter not repairable by ridge")
    return repaired


def update_step(
    data: DataSet,
    current: GaussianComponent,
    gamma: GammaIndex | float,
    update_mu: bool = True,
    update_sigma: bool = True,
    ridge: float = 1e-9,
) -> GaussianComponent:
    """One weighted-average update of the mean and/or covariance.

    Weights are evaluated at the current parameters; when both updates run,
    the covariance scatter is taken about the already-updated mean.
    """
    if not (update_mu or update_sigma):
        raise ValueError("at least one of update_mu/update_sigma must be set")
    g = gamma_value(gamma)
    w = weights(data, current, g)
    mu_new = w @ data.x if update_mu else current.mu
    if update_sigma:
        diff = data.x - mu_new
        scatter = (1.0 + g) * ((w[:, None] * diff).T @ diff)
        scatter = 0.5 * (scatter + scatter.T)
        sigma_new = _ridge_repair(scatter, ridge)
    else:
        sigma_new = current.sigma
    return GaussianComponent(mu_new, sigma_new)


def _trace_loss(data: DataSet, c: GaussianComponent, g: float, mode: Mode) -> float:
    """Objective recorded along the iteration.

    mu_only uses the 1/n-averaged identity-form loss (the function actually
    minimized when the covariance is held fixed; the frozen determinant
    factor is dropped). The other modes record the full unnormalized loss.
    """
    chol = covariance_cholesky(c.sigma)
    q = mahalanobis_sq_chol(data.x, c.mu, chol)
    if mode == "mu_only":
        return float(-np.exp(-0.5 * g * q).mean())
    log_det = 2.0 * np.log(np.diag(chol)).sum()
    return float(-np.exp(-g / (2.0 * (1.0 + g)) * log_det) * np.exp(-0.5 * g * q).sum())


def find_local_min(
    data: DataSet,
    init: GaussianComponent,
    gamma: GammaIndex | float,
    cfg: IterationConfig = IterationConfig(),
    mode: Mode = "joint",
) -> FixedPointResult:
    """Iterate ``update_step`` from ``init`` until the step change is < epsilon.

    ``mu_only`` keeps the covariance at its initial value (identity in the
    clustering pipeline); ``sigma_only`` keeps the mean fixed. The change is
    measured as Euclidean mean movement plus Frobenius covariance movement.
    SingularCovariance failures are re-raised with the iteration index.
    """
    if mode not in _MODES:
        raise ValueError(f"mode must be one of {_MODES}")
    g = gamma_value(gamma)
    update_mu = mode in ("mu_only", "joint")
    update_sigma = mode in ("sigma_only", "joint")

    current = init
    trace = [_trace_loss(data, current, g, mode)]
    converged = False
    iterations = 0
    for t in range(1, cfg.max_iter + 1):
        try:
            nxt = update_step(data, current, g, update_mu, update_sigma, cfg.ridge)
        except SingularCovariance as exc:
            raise SingularCovariance(f"iteration {t}: {exc}") from exc
        sigma_change = float(np.linalg.norm(nxt.sigma - current.sigma))
        change = float(np.linalg.norm(nxt.mu - current.mu)) + sigma_change
        sigma_settled = (
            not update_sigma
            or sigma_change < _RELATIVE_SIGMA_TOL * float(np.linalg.norm(nxt.sigma))
        )
        current = nxt
        value = _trace_loss(data, current, g, mode)
        if not np.isfinite(value):
            # the objective is unbounded below when the mean sits on an
            # observation and the covariance collapses; stop the slide
            raise SingularCovariance(f"iteration {t}: loss overflowed (covariance collapse)")
        if value > trace[-1] + _DESCENT_SLACK:
            # a ridge repair is not a descent step; record the violation
            log.debug("iteration %d: loss rose by %.3e after repair", t, value - trace[-1])
        trace.append(value)
        iterations = t
        if change < cfg.epsilon and sigma_settled:
            converged = True
            break
    return FixedPointResult(current, iterations, converged, tuple(trace))


def loss_gradient(
    data: DataSet, c: GaussianComponent, gamma: GammaIndex | float, mode: Mode = "joint"
) -> np.ndarray:
    """Flattened analytic gradient of the mode's (1/n-scaled) objective.

    Used for stationarity checks: at a converged fixed point the norm is a
    small multiple of the stopping threshold. The covariance block is the
    gradient in the precision matrix, matching the variable the update
    equations are derived in.
    """
    if mode not in _MODES:
        raise ValueError(f"mode must be one of {_MODES}")
    g = gamma_value(gamma)
    if mode == "mu_only":
        chol = covariance_cholesky(c.sigma)
        q = mahalanobis_sq_chol(data.x, c.mu, chol)
        e = np.exp(-0.5 * g * q)
        weighted = e @ (data.x - c.mu)
        return -(g / data.n) * np.linalg.solve(c.sigma, weighted)
    grad_mu, grad_prec = loss_mu_sigma_grad(data, c, g)
    if mode == "sigma_only":
        return grad_prec.ravel()
    return np.concatenate([grad_mu, grad_prec.ravel()])
