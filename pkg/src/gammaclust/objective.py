"""Power-weighted (gamma) loss functions, weights, and entropy family.

Two printed normalizations coexist on purpose and are preserved exactly:

* ``loss_mu`` averages over observations (1/n) and assumes identity model
  covariance; its values lie in [-1, 0).
* ``loss_mu_sigma`` carries the determinant factor and *no* 1/n; this is the
  form whose stationary points the fixed-point updates solve.
* ``gamma_divergence`` is the normalized sample loss (1/n and the kappa
  factor); it estimates the cross entropy between the sample and the model.

Minimizers are unaffected by the differing constants. Every exponential
average is computed with the max exponent subtracted first.
"""

from __future__ import annotations

import numpy as np
from scipy import integrate
from scipy.special import softmax

from .core import (
    DataSet,
    GammaIndex,
    GaussianComponent,
    MixtureSpec,
    NonSphericalComponent,
    TOL,
    covariance_cholesky,
    gamma_value,
    mahalanobis_sq_chol,
)

__all__ = [
    "loss_mu",
    "loss_mu_grad",
    "loss_mu_sigma",
    "loss_mu_sigma_grad",
    "weights",
    "gamma_cross_entropy_gaussian",
    "kappa",
    "gamma_divergence",
    "gamma_entropy",
    "gaussian_log_density",
]


def _as_points(mu: np.ndarray, p: int) -> tuple[np.ndarray, bool]:
    """Coerce ``mu`` to an (m, p) array; report whether input was a single point."""
    arr = np.asarray(mu, dtype=float)
    single = arr.ndim <= 1
    pts = arr.reshape(1, -1) if single else arr
    if pts.ndim != 2 or pts.shape[1] != p:
        raise ValueError(f"expected point(s) of dimension {p}, got shape {arr.shape}")
    return pts, single


def loss_mu(data: DataSet, mu: np.ndarray, gamma: GammaIndex | float) -> float | np.ndarray:
    """Identity-covariance loss -(1/n) sum_i exp(-gamma/2 ||x_i - mu||^2).

    ``mu`` may be one point or an (m, p) batch of evaluation points; a batch
    returns one loss per point. Values lie in [-1, 0), reaching -1 exactly
    when every observation equals ``mu``.
    """
    g = gamma_value(gamma)
    pts, single = _as_points(mu, data.p)
    d2 = ((data.x[None, :, :] - pts[:, None, :]) ** 2).sum(axis=2)
    vals = -np.exp(-0.5 * g * d2).mean(axis=1)
    return float(vals[0]) if single else vals


def loss_mu_grad(data: DataSet, mu: np.ndarray, gamma: GammaIndex | float) -> np.ndarray:
    """Analytic gradient of ``loss_mu`` with respect to mu.

    d/dmu [-(1/n) sum_i exp(-g/2 ||x_i-mu||^2)] = -(g/n) sum_i e_i (x_i - mu).
    """
    g = gamma_value(gamma)
    mu = np.asarray(mu, dtype=float).reshape(-1)
    diff = data.x - mu
    e = np.exp(-0.5 * g * (diff ** 2).sum(axis=1))
    return -(g / data.n) * (e @ diff)


def loss_mu_sigma(data: DataSet, c: GaussianComponent, gamma: GammaIndex | float) -> float:
    """Full loss -det(sigma)^{-g/(2(1+g))} sum_i exp(-g/2 (x_i-mu)' sigma^-1 (x_i-mu))."""
    g = gamma_value(gamma)
    chol = covariance_cholesky(c.sigma)
    q = mahalanobis_sq_chol(data.x, c.mu, chol)
    log_det = 2.0 * np.log(np.diag(chol)).sum()
    det_factor = np.exp(-g / (2.0 * (1.0 + g)) * log_det)
    return float(-det_factor * np.exp(-0.5 * g * q).sum())


def loss_mu_sigma_grad(
    data: DataSet, c: GaussianComponent, gamma: GammaIndex | float
) -> tuple[np.ndarray, np.ndarray]:
    """Gradients of the (1/n-scaled) full loss in mu and in the precision matrix.

    Returns ``(grad_mu, grad_precision)`` for L/n viewed as a function of mu
    and of the precision Lambda = sigma^-1 (all p^2 entries independent).
    Scaling by 1/n keeps stationarity thresholds independent of sample size;
    stationary points are identical to those of the unscaled loss.
    """
    g = gamma_value(gamma)
    chol = covariance_cholesky(c.sigma)
    q = mahalanobis_sq_chol(data.x, c.mu, chol)
    log_det = 2.0 * np.log(np.diag(chol)).sum()
    c_exp = g / (2.0 * (1.0 + g))
    det_factor = np.exp(-c_exp * log_det)
    e = np.exp(-0.5 * g * q)
    diff = data.x - c.mu
    weighted_sum = e @ diff
    # grad wrt mu: -det^(-c) * g * sigma^-1 sum_i e_i (x_i - mu)
    z = np.linalg.solve(c.sigma, weighted_sum)
    grad_mu = -(det_factor * g / data.n) * z
    # grad wrt precision: det^(-c) * [ (g/2) sum_i e_i d_i d_i' - c * (sum e) * sigma ]
    scatter = (e[:, None] * diff).T @ diff
    grad_prec = (det_factor / data.n) * (0.5 * g * scatter - c_exp * e.sum() * c.sigma)
    return grad_mu, grad_prec


def weights(data: DataSet, c: GaussianComponent, gamma: GammaIndex | float) -> np.ndarray:
    """Normalized observation weights w_g(x_i, mu, sigma).

    Softmax of -g/2 times the squared Mahalanobis distances, evaluated with
    the maximum exponent subtracted before exponentiation. Entries are
    nonnegative and sum to 1.
    """
    g = gamma_value(gamma)
    chol = covariance_cholesky(c.sigma)
    q = mahalanobis_sq_chol(data.x, c.mu, chol)
    return softmax(-0.5 * g * q)


def gaussian_log_density(x: np.ndarray, mu: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """Log of the multivariate normal density at row(s) x."""
    mu = np.asarray(mu, dtype=float).reshape(-1)
    chol = covariance_cholesky(sigma)
    q = mahalanobis_sq_chol(x, mu, chol)
    log_det = 2.0 * np.log(np.diag(chol)).sum()
    return -0.5 * (mu.size * np.log(2.0 * np.pi) + log_det + q)


def _spherical_variance(c: GaussianComponent) -> float:
    """Extract s^2 from sigma = s^2 * I, or raise NonSphericalComponent."""
    s2 = float(np.trace(c.sigma)) / c.p
    if np.max(np.abs(c.sigma - s2 * np.eye(c.p))) > TOL.spherical:
        raise NonSphericalComponent("component covariance is not a scalar multiple of I")
    return s2


def gamma_cross_entropy_gaussian(
    g: MixtureSpec, mu: np.ndarray, gamma: GammaIndex | float
) -> float | np.ndarray:
    """Population cross entropy of a spherical mixture against N(mu, I).

    For a mixture with component covariances s_k^2 I this is, up to a
    positive constant taken as 1,

        - sum_k tau_k phi(mu, mu_k, (s_k^2 + 1/gamma) I),

    i.e. minus a widened mixture density evaluated at mu. Its local minima in
    mu are the modes of that density. ``mu`` may be one point or an (m, p)
    batch.
    """
    gv = gamma_value(gamma)
    p = g.p
    pts, single = _as_points(mu, p)
    total = np.zeros(pts.shape[0])
    for comp, tau in zip(g.components, g.proportions):
        s = _spherical_variance(comp) + 1.0 / gv
        d2 = ((pts - comp.mu) ** 2).sum(axis=1)
        total += tau * (2.0 * np.pi * s) ** (-p / 2.0) * np.exp(-0.5 * d2 / s)
    vals = -total
    return float(vals[0]) if single else vals


def kappa(c: GaussianComponent, gamma: GammaIndex | float) -> float:
    """Normalizing factor (integral of the (1+g)-th power of the density)^(-g/(1+g)).

    Closed form for the Gaussian:

        ((1+g)^(p/2) (2 pi)^(g p / 2) det(sigma)^(g/2))^(g/(1+g)),

    which tends to 1 as g tends to 0. Verified against direct quadrature in
    the univariate case (see tests).
    """
    g = gamma_value(gamma)
    chol = covariance_cholesky(c.sigma)
    log_det = 2.0 * np.log(np.diag(chol)).sum()
    p = c.p
    log_inner = 0.5 * p * np.log1p(g) + 0.5 * g * p * np.log(2.0 * np.pi) + 0.5 * g * log_det
    return float(np.exp(g / (1.0 + g) * log_inner))


def gamma_divergence(
    g_sample: DataSet, c: GaussianComponent, gamma: GammaIndex | float
) -> float:
    """Normalized sample loss -kappa * (1/n) sum_i phi(x_i; mu, sigma)^gamma.

    This estimates the cross entropy between the sampled distribution and the
    Gaussian model; the divergence itself equals this value minus the
    sample-distribution entropy term, which is parameter-free and therefore
    irrelevant to minimization (and not estimable from a sample).
    """
    g = gamma_value(gamma)
    log_phi = gaussian_log_density(g_sample.x, c.mu, c.sigma)
    return float(-kappa(c, g) * np.exp(g * log_phi).mean())


def gamma_entropy(g: MixtureSpec, gamma: GammaIndex | float) -> float:
    """Power entropy of a mixture: -(integral of g^(1+gamma))^(1/(1+gamma)).

    Computed by adaptive quadrature; available for p <= 2 only (the sample
    version is not estimable, so this exists purely for population inputs).
    """
    gv = gamma_value(gamma)
    p = g.p
    if p > 2:
        raise ValueError("gamma_entropy is available for p <= 2 only")
    means = np.array([c.mu for c in g.components])
    spread = 10.0 * max(float(np.sqrt(np.linalg.eigvalsh(c.sigma)[-1])) for c in g.components)
    lo = means.min(axis=0) - spread
    hi = means.max(axis=0) + spread

    def density(pt: np.ndarray) -> float:
        val = 0.0
        for comp, tau in zip(g.components, g.proportions):
            val += tau * float(np.exp(gaussian_log_density(pt, comp.mu, comp.sigma)))
        return val

    if p == 1:
        integral, _ = integrate.quad(lambda t: density(np.array([t])) ** (1.0 + gv), lo[0], hi[0])
    else:
        integral, _ = integrate.dblquad(
            lambda y, x: density(np.array([x, y])) ** (1.0 + gv),
            lo[0],
            hi[0],
            lo[1],
            hi[1],
        )
    return float(-(integral ** (1.0 / (1.0 + gv))))
