"""Closed-form marginal moments for all three families.

These are the population quantities the method-of-moments estimators
invert, and the oracle layer the simulation tests check against.  With
``mu_t`` the marginal mean and ``sigma2``, ``rho`` the latent marginal
variance and lag-1 correlation:

* non-negative:   Var = phi mu^p (s+1)^(p(p-1)/2) + mu^2 s,
  Cov(k) = mu_{t+k} mu_t (exp(sigma2 rho^k) - 1),  with s = exp(sigma2) - 1
  (derived for the lognormal latent factor without restriction on p > 0)
* real-valued:    Var = phi + sigma2,  Cov(k) = sigma2 rho^k
* bounded:        Var = phi mu + mu^2 ((1-phi) w(sigma2) - 1),
  Cov(k) = mu_{t+k} mu_t (v(sigma2, rho^k) - 1)

where w and v are the second and lagged product moments of the bounded
family's multiplicative latent factor exp(-alpha_t):

    w(x) = ((1+x)^2 / (1+2x))^(1/x)
    v(x, y) = ((1+x)^2 / (1+2x+x^2(1-y)))^(1/x),   w(x) = v(x, 1).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, SpecificationError
from .families import (
    BOUNDED,
    NONNEGATIVE,
    REAL_VALUED,
    DesignMatrix,
    ModelFamily,
    ParameterSet,
)

__all__ = [
    "gar_factor_second_moment",
    "gar_factor_product_moment",
    "marginal_mean",
    "marginal_variance",
    "autocovariance",
    "autocorrelation",
    "MomentReport",
    "moment_report",
]

# Below this, w and v are evaluated at their small-sigma2 limit (both -> 1);
# the log-space formula loses all precision as x -> 0.
_SMALL_X = 1e-8


def gar_factor_second_moment(sigma2):
    """E[exp(-alpha_t)^2] for the shifted gamma latent process, w(sigma2)."""
    return gar_factor_product_moment(sigma2, 1.0)


def gar_factor_product_moment(sigma2, lag_corr):
    """E[exp(-alpha_{t+k}) exp(-alpha_t)] with lag_corr = rho**k, v(sigma2, rho**k).

    Computed in log space, ``exp((2 log1p(x) - log1p(2x + x^2(1-y))) / x)``,
    which stays accurate for small ``sigma2``; below 1e-8 the analytic limit
    1 is substituted.
    """
    x = np.asarray(sigma2, dtype=float)
    y = np.asarray(lag_corr, dtype=float)
    if np.any(x <= 0):
        raise SpecificationError("sigma2 must be positive")
    if np.any((y < 0) | (y > 1)):
        raise SpecificationError("lag correlation must lie in [0, 1]")
    out = np.where(
        x < _SMALL_X,
        1.0,
        np.exp((2.0 * np.log1p(x) - np.log1p(2.0 * x + x * x * (1.0 - y)))
               / np.where(x < _SMALL_X, 1.0, x)),
    )
    return float(out) if out.ndim == 0 else out


def marginal_mean(family: ModelFamily, design: DesignMatrix, params: ParameterSet) -> np.ndarray:
    """Marginal mean mu_t = h(x't beta), t = 1..n."""
    eta = design.x @ params.beta
    if family.kind == NONNEGATIVE:
        return np.exp(eta)
    if family.kind == REAL_VALUED:
        return eta
    bad = np.flatnonzero(eta <= 0)
    if bad.size:
        raise DomainError(
            "bounded family requires x't beta > 0 for every t; violated at "
            f"t = {(bad + 1).tolist()[:10]}" + ("..." if bad.size > 10 else ""))
    return np.exp(-eta)


def marginal_variance(family: ModelFamily, params: ParameterSet, mu_t):
    """Marginal variance of Y_t given its marginal mean."""
    mu = np.asarray(mu_t, dtype=float)
    phi, sigma2 = params.phi, params.sigma2
    if family.kind == NONNEGATIVE:
        if np.any(mu <= 0):
            raise DomainError("non-negative family requires mu > 0")
        s = np.expm1(sigma2)
        out = phi * mu ** family.p * (s + 1.0) ** (family.p * (family.p - 1.0) / 2.0) \
            + mu ** 2 * s
    elif family.kind == REAL_VALUED:
        out = np.full_like(mu, phi + sigma2)
    else:
        if np.any((mu <= 0) | (mu >= 1)):
            raise DomainError("bounded family requires mu in (0,1)")
        w = gar_factor_second_moment(sigma2)
        out = phi * mu + mu ** 2 * ((1.0 - phi) * w - 1.0)
    return float(out) if out.ndim == 0 else out


def autocovariance(family: ModelFamily, params: ParameterSet, mu_t, mu_tk, k: int):
    """Cov(Y_{t+k}, Y_t) for lag k >= 1, given the two marginal means."""
    if k < 1:
        raise SpecificationError("autocovariance requires lag k >= 1")
    mu1 = np.asarray(mu_t, dtype=float)
    mu2 = np.asarray(mu_tk, dtype=float)
    sigma2, rho = params.sigma2, params.rho
    if family.kind == NONNEGATIVE:
        out = mu2 * mu1 * np.expm1(sigma2 * rho ** k)
    elif family.kind == REAL_VALUED:
        shape = np.broadcast_shapes(mu1.shape, mu2.shape)
        out = np.full(shape, sigma2 * rho ** k)
    else:
        out = mu2 * mu1 * (gar_factor_product_moment(sigma2, rho ** k) - 1.0)
    return float(out) if out.ndim == 0 else out


def autocorrelation(family: ModelFamily, params: ParameterSet, mu_t, mu_tk, k: int):
    """Corr(Y_{t+k}, Y_t) for lag k >= 1.

    For the non-negative family the variance-normalized form
    ``corr_factor(k) / sqrt(prod of (phi mu^(p-2) (s+1)^(p(p-1)/2) / s + 1))``
    is used instead of the ratio of raw products, which avoids overflow in
    ``mu**p`` for large means.
    """
    if k < 1:
        raise SpecificationError("autocorrelation requires lag k >= 1")
    mu1 = np.asarray(mu_t, dtype=float)
    mu2 = np.asarray(mu_tk, dtype=float)
    phi, sigma2, rho = params.phi, params.sigma2, params.rho
    if family.kind == NONNEGATIVE:
        s = np.expm1(sigma2)
        rho_factor = np.expm1(sigma2 * rho ** k) / s
        scale = phi / s * (s + 1.0) ** (family.p * (family.p - 1.0) / 2.0)
        out = rho_factor / np.sqrt((scale * mu2 ** (family.p - 2.0) + 1.0)
                                   * (scale * mu1 ** (family.p - 2.0) + 1.0))
    else:
        v1 = marginal_variance(family, params, mu1)
        v2 = marginal_variance(family, params, mu2)
        denom = np.sqrt(np.asarray(v1) * np.asarray(v2))
        if np.any(denom == 0):
            raise DomainError("zero marginal variance; autocorrelation undefined")
        out = np.asarray(autocovariance(family, params, mu1, mu2, k)) / denom
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class MomentReport:
    """Marginal moment summary of a configured model.

    ``autocov(t, k)`` and ``acf(t, k)`` take a 1-based time index t and a
    lag k >= 0 and return Cov/Corr(Y_{t+k}, Y_t); lag 0 delegates to the
    marginal variance.
    """

    mean: np.ndarray
    variance: np.ndarray
    autocov: Callable[[int, int], float]
    acf: Callable[[int, int], float]


def moment_report(family: ModelFamily, design: DesignMatrix, params: ParameterSet) -> MomentReport:
    """Bundle mean/variance vectors and autocovariance/ACF functions."""
    mu = marginal_mean(family, design, params)
    var = np.asarray(marginal_variance(family, params, mu))
    n = design.n

    def _check(t: int, k: int) -> None:
        if k < 0:
            raise SpecificationError("lag k must be >= 0")
        if not 1 <= t <= n - k:
            raise SpecificationError(f"need 1 <= t <= n - k = {n - k}, got t = {t}")

    def autocov(t: int, k: int) -> float:
        _check(t, k)
        if k == 0:
            return float(var[t - 1])
        return float(autocovariance(family, params, mu[t - 1], mu[t + k - 1], k))

    def acf(t: int, k: int) -> float:
        _check(t, k)
        if k == 0:
            return 1.0
        return float(autocorrelation(family, params, mu[t - 1], mu[t + k - 1], k))

    return MomentReport(mean=mu, variance=var, autocov=autocov, acf=acf)
