"""Latent process simulation and conditional response generation.

Two stationary, strongly mixing latent processes drive the models:

* a Gaussian AR(1), ``alpha_t = c + rho alpha_{t-1} + eta_t``, parameterized
  here by its stationary *marginal* variance ``sigma2`` (innovations have
  variance ``sigma2 * (1 - rho**2)``), used for the non-negative and
  real-valued families;
* a first-order gamma autoregression (GAR(1)) with Gamma(mean 1, variance
  ``sigma2``) marginals and lag-k autocorrelation ``rho**k``, built from a
  Poisson-compounded exponential thinning operator, then shifted by
  ``-log(1 + sigma2) / sigma2`` so that ``E[exp(-alpha_t)] = 1``; used for
  the bounded family.

The intercept/shift constants are chosen so the multiplicative latent
factor has unit mean, which is what makes the regression coefficients
identifiable by a quasi-likelihood that ignores the latent process.

Responses are drawn conditionally independently given a path, from a
user-declared conditional distribution matching the family's mean/variance
contract: mean ``h(x't beta + alpha_t)`` and variance ``phi * V`` of it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels, rng
from .errors import DomainError, SpecificationError
from .families import (
    BOUNDED,
    NONNEGATIVE,
    REAL_VALUED,
    DesignMatrix,
    ModelFamily,
    ParameterSet,
    link_inverse,
)

__all__ = [
    "GAUSSIAN_AR1",
    "GAMMA_AR1",
    "CONDITIONALS",
    "LatentSpec",
    "LatentPath",
    "gaussian_intercept",
    "gar1_shift",
    "simulate_gaussian_ar1",
    "simulate_gar1",
    "shift_gar1",
    "simulate_latent",
    "generate_response",
]

GAUSSIAN_AR1 = "gaussian_ar1"
GAMMA_AR1 = "gamma_ar1"

CONDITIONALS = ("gamma", "poisson", "normal", "beta", "bernoulli", "binomial")

_PHI_TOL = 1e-12


@dataclass(frozen=True)
class LatentSpec:
    """Distributional specification of a latent process.

    ``c`` is the Gaussian AR(1) intercept; it is derived (see
    :func:`gaussian_intercept`), never user-chosen, and fixed at 0 for the
    gamma process.
    """

    kind: str
    sigma2: float
    rho: float
    c: float = 0.0

    def __post_init__(self):
        if self.kind not in (GAUSSIAN_AR1, GAMMA_AR1):
            raise SpecificationError(f"unknown latent process kind: {self.kind!r}")
        if not self.sigma2 > 0:
            raise SpecificationError(f"sigma2 must be positive, got {self.sigma2}")
        if self.kind == GAUSSIAN_AR1:
            if not abs(self.rho) < 1:
                raise SpecificationError(f"Gaussian AR(1) requires |rho| < 1, got {self.rho}")
        else:
            if not 0 < self.rho < 1:
                raise SpecificationError(f"GAR(1) requires 0 < rho < 1, got {self.rho}")
            if self.c != 0.0:
                raise SpecificationError("the gamma latent process has no intercept")


@dataclass(frozen=True)
class LatentPath:
    """A realized latent trajectory.

    ``alpha`` holds the ready-to-use latent values except when ``shifted``
    is False, in which case it holds the raw GAR(1) values before the
    mean-one shift (see :func:`shift_gar1`).
    """

    alpha: np.ndarray
    spec: LatentSpec
    seed: tuple[int, ...]
    shifted: bool = True

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=float)
        if alpha.ndim != 1 or alpha.size < 1:
            raise SpecificationError("latent path must be a nonempty 1-d vector")
        if not np.all(np.isfinite(alpha)):
            raise SpecificationError("latent path must be finite")
        object.__setattr__(self, "alpha", alpha)

    @property
    def n(self) -> int:
        return self.alpha.size


def gaussian_intercept(family: ModelFamily, sigma2: float, rho: float) -> float:
    """Gaussian AR(1) intercept making the latent factor mean one.

    For the non-negative family (multiplicative factor ``exp(alpha_t)``)
    this is ``-sigma2 (1 - rho) / 2``; for the real-valued family (additive
    latent term) it is 0.  The bounded family uses the shifted gamma
    process instead.
    """
    if not sigma2 >= 0:
        raise SpecificationError(f"sigma2 must be non-negative, got {sigma2}")
    if not abs(rho) < 1:
        raise SpecificationError(f"Gaussian AR(1) requires |rho| < 1, got {rho}")
    if family.kind == NONNEGATIVE:
        return -sigma2 * (1.0 - rho) / 2.0
    if family.kind == REAL_VALUED:
        return 0.0
    raise SpecificationError(
        "the bounded family uses the shifted gamma latent process, "
        "not the Gaussian AR(1)")


def gar1_shift(sigma2: float) -> float:
    """Shift constant ``log(1 + sigma2) / sigma2`` of the gamma process."""
    if not sigma2 > 0:
        raise SpecificationError(f"sigma2 must be positive, got {sigma2}")
    return float(np.log1p(sigma2) / sigma2)


def simulate_gaussian_ar1(sigma2: float, rho: float, c: float, n: int, seed) -> LatentPath:
    """Stationary Gaussian AR(1) path of length n.

    The start value is drawn from the stationary marginal
    ``N(c / (1 - rho), sigma2)`` and innovations have variance
    ``sigma2 (1 - rho**2)``, so every ``alpha_t`` has marginal variance
    exactly ``sigma2`` and lag-k autocorrelation ``rho**k``.
    """
    spec = LatentSpec(GAUSSIAN_AR1, sigma2=sigma2, rho=rho, c=c)
    if n < 1:
        raise SpecificationError(f"path length must be >= 1, got {n}")
    key = rng.stream_key(seed)
    alpha = _kernels.gaussian_ar1_path(
        rng.bit_generator(key), n, c, rho,
        start_mean=c / (1.0 - rho),
        start_sd=float(np.sqrt(sigma2)),
        innov_sd=float(np.sqrt(sigma2 * (1.0 - rho * rho))),
    )
    return LatentPath(alpha, spec, key)


def simulate_gar1(sigma2: float, rho: float, n: int, seed,
                  init: str = "stationary") -> LatentPath:
    """Raw GAR(1) path (before the mean-one shift).

    Marginals are Gamma with mean 1 and variance ``sigma2``; given the
    previous value z the next is a compound-Poisson thinning (N ~
    Poisson(kappa rho z) exponentials of rate kappa, with
    ``kappa = 1 / (sigma2 (1 - rho))``) plus a Gamma(1/sigma2, rate kappa)
    innovation, the unique innovation law preserving the marginal.

    ``init`` selects the start value: ``"stationary"`` (the default) draws
    z_0 from the stationary Gamma(mean 1, variance sigma2) marginal, so
    the whole path is stationary.  ``"innovation"`` starts at the
    innovation law Gamma(1/sigma2, rate kappa) (mean 1 - rho), whose
    start-up transient decays over roughly 1/(1 - rho) steps; published
    bounded-family simulation tables embed exactly this transient, so
    replication studies use it.
    """
    spec = LatentSpec(GAMMA_AR1, sigma2=sigma2, rho=rho)
    if n < 1:
        raise SpecificationError(f"path length must be >= 1, got {n}")
    if init not in ("stationary", "innovation"):
        raise SpecificationError(
            f'init must be "stationary" or "innovation", got {init!r}')
    key = rng.stream_key(seed)
    kappa = 1.0 / (sigma2 * (1.0 - rho))
    z = _kernels.gar1_path(
        rng.bit_generator(key), n,
        shape=1.0 / sigma2,
        start_scale=sigma2 if init == "stationary" else 1.0 / kappa,
        pois_coef=kappa * rho,
        thin_scale=1.0 / kappa,
        innov_scale=1.0 / kappa,
    )
    return LatentPath(z, spec, key, shifted=False)


def shift_gar1(path: LatentPath, sigma2: float | None = None) -> LatentPath:
    """Apply the mean-one shift ``alpha_t = z_t - log(1 + sigma2)/sigma2``.

    After shifting, ``E[exp(-alpha_t)] = 1`` because
    ``E[exp(-z_t)] = (1 + sigma2)**(-1/sigma2)`` for the stationary gamma
    marginal.
    """
    if path.spec.kind != GAMMA_AR1:
        raise SpecificationError("only GAR(1) paths are shifted")
    if path.shifted:
        raise SpecificationError("path is already shifted")
    if sigma2 is None:
        sigma2 = path.spec.sigma2
    elif sigma2 != path.spec.sigma2:
        raise SpecificationError(
            f"shift sigma2 {sigma2} disagrees with the path's {path.spec.sigma2}")
    return LatentPath(path.alpha - gar1_shift(sigma2), path.spec, path.seed, shifted=True)


def simulate_latent(family: ModelFamily, sigma2: float, rho: float, n: int, seed,
                    gar_init: str = "stationary") -> LatentPath:
    """Family-appropriate latent path: Gaussian AR(1) with the mean-one
    intercept for non-negative/real families, shifted GAR(1) for bounded.

    ``gar_init`` is forwarded to :func:`simulate_gar1` for the bounded
    family and ignored otherwise.
    """
    if family.kind == BOUNDED:
        return shift_gar1(simulate_gar1(sigma2, rho, n, seed, init=gar_init))
    c = gaussian_intercept(family, sigma2, rho)
    return simulate_gaussian_ar1(sigma2, rho, c, n, seed)


def _conditional_means(family: ModelFamily, design: DesignMatrix,
                       params: ParameterSet, path: LatentPath) -> np.ndarray:
    if path.n != design.n:
        raise SpecificationError(
            f"path length {path.n} does not match design rows {design.n}")
    if not path.shifted:
        raise SpecificationError("raw GAR(1) path: apply shift_gar1 first")
    eta = design.x @ params.beta + path.alpha
    return link_inverse(family, eta)  # raises DomainError if the mean leaves its space


def generate_response(family: ModelFamily, design: DesignMatrix, params: ParameterSet,
                      path: LatentPath, dist: str, seed) -> np.ndarray:
    """Draw responses, conditionally independent given the latent path.

    ``dist`` declares the conditional distribution; it must match the
    family and realize the mean/variance contract (conditional mean
    ``mu_t = h(x't beta + alpha_t)``, conditional variance ``phi V(mu_t)``):

    ==============  ===========  ==============================================
    dist            family       parameterization
    ==============  ===========  ==============================================
    ``gamma``       nonnegative  shape ``mu**(2-p)/phi``, scale ``phi mu**(p-1)``
    ``poisson``     nonnegative  requires p = 1 and phi = 1
    ``normal``      real         mean ``mu``, variance ``phi``
    ``beta``        bounded      a = ``mu (1/phi - 1)``, b = ``(1-mu)(1/phi - 1)``;
                                 requires 0 < phi < 1
    ``bernoulli``   bounded      requires phi = 1
    ``binomial``    bounded      Binomial(m, mu)/m; requires phi = m.  The
                                 emitted *proportions* have conditional
                                 variance V(mu)/m; phi = m refers to the
                                 count scale m V(mu).
    ==============  ===========  ==============================================
    """
    if dist not in CONDITIONALS:
        raise SpecificationError(
            f"unknown conditional distribution {dist!r}; choose from {CONDITIONALS}")
    mu = _conditional_means(family, design, params, path)
    phi = params.phi
    gen = rng.generator(seed)

    if dist == "gamma":
        if family.kind != NONNEGATIVE:
            raise SpecificationError("gamma responses require the non-negative family")
        p = family.p
        return gen.gamma(mu ** (2.0 - p) / phi, phi * mu ** (p - 1.0))
    if dist == "poisson":
        if family.kind != NONNEGATIVE:
            raise SpecificationError("poisson responses require the non-negative family")
        if abs(family.p - 1.0) > _PHI_TOL or abs(phi - 1.0) > _PHI_TOL:
            raise SpecificationError("poisson responses require p = 1 and phi = 1")
        return gen.poisson(mu).astype(float)
    if dist == "normal":
        if family.kind != REAL_VALUED:
            raise SpecificationError("normal responses require the real-valued family")
        return gen.normal(mu, np.sqrt(phi))
    if family.kind != BOUNDED:
        raise SpecificationError(f"{dist} responses require the bounded family")
    if dist == "beta":
        if not 0 < phi < 1:
            raise SpecificationError(
                f"beta responses require 0 < phi < 1, got {phi}")
        nu = 1.0 / phi - 1.0
        return gen.beta(mu * nu, (1.0 - mu) * nu)
    if dist == "bernoulli":
        if abs(phi - 1.0) > _PHI_TOL:
            raise SpecificationError("bernoulli responses require phi = 1")
        return gen.binomial(1, mu).astype(float)
    # binomial
    if family.m is None:
        raise SpecificationError("binomial responses require the family's trial count m")
    if abs(phi - family.m) > _PHI_TOL:
        raise SpecificationError(
            f"binomial responses require phi = m = {family.m}, got {phi}")
    return gen.binomial(family.m, mu) / float(family.m)
