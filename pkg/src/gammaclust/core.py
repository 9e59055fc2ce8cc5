"""Shared domain types, error classes, and linear-algebra primitives.

Everything here is an immutable value object or a pure function, so all
of it is safe to use from concurrent callers without synchronization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular


class GammaClustError(Exception):
    """Base class for numerical failures raised by this package."""


class SingularCovariance(GammaClustError):
    """Covariance matrix is singular or too ill-conditioned to invert."""


class NonSphericalComponent(GammaClustError):
    """A mixture component's covariance is not a scalar multiple of I."""


class ZeroRange(GammaClustError):
    """All observations coincide along every feature (max range is 0)."""


class ZeroDensity(GammaClustError):
    """A mixture weight of zero makes the log density undefined."""


class DegenerateK(GammaClustError):
    """Cluster count outside the valid range for a dispersion index."""


@dataclass(frozen=True)
class Tolerances:
    """Central numeric tolerances used across the package.

    symmetry        absolute elementwise bound for covariance symmetry
    proportion_sum  allowed deviation of mixing proportions from summing to 1
    condition_limit covariance condition number above which inversion refuses
    spherical       allowed deviation from sigma = s * I in spherical checks
    descent_slack   float noise tolerated in monotone-descent assertions
    """

    symmetry: float = 1e-10
    proportion_sum: float = 1e-12
    condition_limit: float = 1e12
    spherical: float = 1e-10
    descent_slack: float = 1e-12


TOL = Tolerances()


@dataclass(frozen=True)
class GammaIndex:
    """Strictly positive power index controlling the locality of the loss.

    The zero-index limit is exposed only through dedicated limit behavior of
    the operations (e.g. the optimizer reproducing maximum-likelihood fits as
    gamma approaches 0); it is never a storable value.
    """

    gamma: float

    def __post_init__(self) -> None:
        g = float(self.gamma)
        if not math.isfinite(g) or g <= 0.0:
            raise ValueError(f"gamma must be a positive finite number, got {self.gamma!r}")
        object.__setattr__(self, "gamma", g)

    def __float__(self) -> float:
        return self.gamma


def gamma_value(gamma: GammaIndex | float) -> float:
    """Normalize a gamma argument (wrapper or plain number) to a float."""
    if isinstance(gamma, GammaIndex):
        return gamma.gamma
    return GammaIndex(float(gamma)).gamma


@dataclass(frozen=True, eq=False)
class DataSet:
    """An n x p observation matrix with optional feature names.

    Row order is meaningful: labels and diagnostics align by row index.
    A 1-D input array is interpreted as n univariate observations.
    """

    x: np.ndarray
    feature_names: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        x = np.array(self.x, dtype=float)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
            raise ValueError(f"observations must form an n x p matrix, got shape {np.shape(self.x)}")
        if not np.all(np.isfinite(x)):
            raise ValueError("observations must all be finite")
        x.setflags(write=False)
        object.__setattr__(self, "x", x)
        if self.feature_names is not None:
            names = tuple(str(s) for s in self.feature_names)
            if len(names) != x.shape[1]:
                raise ValueError(f"expected {x.shape[1]} feature names, got {len(names)}")
            object.__setattr__(self, "feature_names", names)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]


@dataclass(frozen=True, eq=False)
class GaussianComponent:
    """Mean vector plus symmetric positive-definite covariance matrix."""

    mu: np.ndarray
    sigma: np.ndarray

    def __post_init__(self) -> None:
        mu = np.array(self.mu, dtype=float).reshape(-1)
        sigma = np.array(self.sigma, dtype=float)
        if sigma.ndim == 0:
            sigma = sigma.reshape(1, 1)
        if mu.size < 1 or sigma.shape != (mu.size, mu.size):
            raise ValueError(f"covariance shape {sigma.shape} does not match mean of length {mu.size}")
        if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(sigma))):
            raise ValueError("component parameters must be finite")
        if np.max(np.abs(sigma - sigma.T)) > TOL.symmetry:
            raise ValueError("covariance must be symmetric within 1e-10")
        if np.linalg.eigvalsh(sigma)[0] <= 0.0:
            raise ValueError("covariance must be positive definite")
        mu.setflags(write=False)
        sigma.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)

    @property
    def p(self) -> int:
        return self.mu.size


@dataclass(frozen=True, eq=False)
class ClusterModel:
    """Fitted cluster centers/covariances with the indices that produced them.

    ``proportions`` is None until observations have been assigned; once set it
    holds the fraction of observations in each cluster. Center dedup (no two
    means closer than the dedup radius) is enforced by the clustering pipeline
    that constructs these models.
    """

    components: tuple[GaussianComponent, ...]
    proportions: np.ndarray | None
    gamma_mu: GammaIndex
    gamma_sigma: GammaIndex

    def __post_init__(self) -> None:
        comps = tuple(self.components)
        if not comps:
            raise ValueError("a cluster model needs at least one component")
        p = comps[0].p
        if any(c.p != p for c in comps):
            raise ValueError("all components must share one dimension")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "gamma_mu", _as_index(self.gamma_mu))
        object.__setattr__(self, "gamma_sigma", _as_index(self.gamma_sigma))
        if self.proportions is not None:
            tau = np.array(self.proportions, dtype=float).reshape(-1)
            if tau.size != len(comps):
                raise ValueError("one proportion per component is required")
            if np.any(tau < 0.0) or abs(tau.sum() - 1.0) > TOL.proportion_sum:
                raise ValueError("proportions must be nonnegative and sum to 1")
            tau.setflags(write=False)
            object.__setattr__(self, "proportions", tau)

    @property
    def k(self) -> int:
        return len(self.components)

    @property
    def p(self) -> int:
        return self.components[0].p

    def means(self) -> np.ndarray:
        return np.array([c.mu for c in self.components])

    def covariances(self) -> np.ndarray:
        return np.array([c.sigma for c in self.components])


@dataclass(frozen=True, eq=False)
class Partition:
    """Hard assignment of each observation to one of k cluster labels."""

    labels: np.ndarray
    k: int

    def __post_init__(self) -> None:
        labels = np.array(self.labels, dtype=int).reshape(-1)
        if labels.size < 1:
            raise ValueError("a partition needs at least one label")
        if self.k < 1 or labels.min() < 0 or labels.max() >= self.k:
            raise ValueError(f"labels must lie in [0, {self.k})")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.labels.size

    def counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)


@dataclass(frozen=True, eq=False)
class MixtureSpec:
    """Population Gaussian mixture, used as sampling/ground truth."""

    components: tuple[GaussianComponent, ...]
    proportions: np.ndarray

    def __post_init__(self) -> None:
        comps = tuple(self.components)
        if not comps:
            raise ValueError("a mixture needs at least one component")
        p = comps[0].p
        if any(c.p != p for c in comps):
            raise ValueError("all components must share one dimension")
        tau = np.array(self.proportions, dtype=float).reshape(-1)
        if tau.size != len(comps):
            raise ValueError("one proportion per component is required")
        if np.any(tau <= 0.0) or abs(tau.sum() - 1.0) > TOL.proportion_sum:
            raise ValueError("proportions must be positive and sum to 1")
        tau.setflags(write=False)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "proportions", tau)

    @property
    def k(self) -> int:
        return len(self.components)

    @property
    def p(self) -> int:
        return self.components[0].p


def _as_index(gamma: GammaIndex | float) -> GammaIndex:
    return gamma if isinstance(gamma, GammaIndex) else GammaIndex(float(gamma))


def covariance_cholesky(sigma: np.ndarray, *, tol: Tolerances = TOL) -> np.ndarray:
    """Lower Cholesky factor of a covariance matrix.

    Raises SingularCovariance when the matrix is not positive definite or its
    condition number exceeds ``tol.condition_limit``.
    """
    sigma = np.asarray(sigma, dtype=float)
    w = np.linalg.eigvalsh(sigma)
    if w[0] <= 0.0 or w[-1] > w[0] * tol.condition_limit:
        raise SingularCovariance(
            f"covariance not invertible: eigenvalue range [{w[0]:.3e}, {w[-1]:.3e}]"
        )
    try:
        return np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - guarded by eig check
        raise SingularCovariance(str(exc)) from exc


def mahalanobis_sq_chol(x: np.ndarray, mu: np.ndarray, chol: np.ndarray) -> np.ndarray:
    """Squared Mahalanobis distances given a precomputed Cholesky factor.

    ``x`` may be a single p-vector or an (n, p) matrix of rows.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim <= 1
    rows = np.atleast_2d(x) - np.asarray(mu, dtype=float).reshape(-1)
    z = solve_triangular(chol, rows.T, lower=True)
    q = np.einsum("ij,ij->j", z, z)
    return float(q[0]) if single else q


def mahalanobis_sq(x: np.ndarray, c: GaussianComponent) -> float | np.ndarray:
    """Quadratic form (x - mu)' sigma^{-1} (x - mu).

    Accepts a single observation (returning a float) or a matrix of row
    observations (returning one value per row). Nonnegative, and zero exactly
    when x equals the component mean.
    """
    chol = covariance_cholesky(c.sigma)
    return mahalanobis_sq_chol(x, c.mu, chol)


def max_range(data: DataSet) -> float:
    """Largest per-feature range max_i x_ij - min_i x_ij over features j."""
    return float(np.max(data.x.max(axis=0) - data.x.min(axis=0)))
