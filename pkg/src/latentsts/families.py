"""Model families, parameter containers, and declarative covariate designs.

Three families of semiparametric time series are supported, each defined by
a link function g, its inverse h, and a variance function V:

================  ==================  ===============  ====================
family            link g(mu)          inverse h(eta)   variance V(mu)
================  ==================  ===============  ====================
non-negative      log(mu)             exp(eta)         mu**p       (p > 0)
real-valued       mu                  eta              1
bounded           -log(mu)            exp(-eta)        mu * (1 - mu)
================  ==================  ===============  ====================

Only the conditional mean h(x'beta + alpha_t) and conditional variance
phi * V of the response given a latent process are ever specified; the
quasi-likelihood objective sum_t Q(y_t; mu_t) with
Q(y; mu) = integral_y^mu (y - u) / V(u) du needs nothing more.

Covariate designs are declarative: a list of :class:`CovariateTerm` values
is evaluated against a sample size to produce a :class:`DesignMatrix`, so
simulation and fitting always share one design specification.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import xlogy

from .errors import DomainError, RankError, SpecificationError

__all__ = [
    "NONNEGATIVE",
    "REAL_VALUED",
    "BOUNDED",
    "ModelFamily",
    "ParameterSet",
    "CovariateTerm",
    "DesignMatrix",
    "intercept",
    "linear_trend",
    "quadratic_trend",
    "cosine",
    "sine",
    "abs_break",
    "build_design",
    "link_inverse",
    "link",
    "mean_derivative",
    "variance_function",
    "q_function",
]

NONNEGATIVE = "nonnegative"
REAL_VALUED = "real"
BOUNDED = "bounded"

# Dispatch to the logarithmic closed forms of Q when p is this close to 1
# or 2; the general power formula has removable singularities there.
_POWER_SWITCH_TOL = 1e-9

# Designs whose singular-value ratio falls below this are rank deficient.
RANK_TOL = 1e-10


@dataclass(frozen=True)
class ModelFamily:
    """One of the three response families.

    Parameters
    ----------
    kind : str
        ``"nonnegative"``, ``"real"`` or ``"bounded"``.
    p : float, optional
        Power of the variance function ``V(mu) = mu**p``; required for the
        non-negative family, meaningless otherwise.
    m : int, optional
        Binomial trial count (bounded family, proportion responses y = k/m).
    phi_known : float, optional
        Fixed dispersion for binary/binomial responses: 1 for binary, m for
        binomial counts.  Leave unset when dispersion is to be estimated.
    """

    kind: str
    p: float | None = None
    m: int | None = None
    phi_known: float | None = None

    def __post_init__(self):
        if self.kind not in (NONNEGATIVE, REAL_VALUED, BOUNDED):
            raise SpecificationError(f"unknown family kind: {self.kind!r}")
        if self.kind == NONNEGATIVE:
            if self.p is None or not self.p > 0:
                raise SpecificationError(
                    "non-negative family requires a variance power p > 0")
        elif self.p is not None:
            raise SpecificationError(
                "variance power p applies only to the non-negative family")
        if self.m is not None:
            if self.kind != BOUNDED:
                raise SpecificationError("trial count m applies only to the bounded family")
            if not (isinstance(self.m, (int, np.integer)) and self.m >= 1):
                raise SpecificationError("trial count m must be a positive integer")
        if self.phi_known is not None:
            if self.kind != BOUNDED:
                raise SpecificationError("phi_known applies only to the bounded family")
            expected = float(self.m) if self.m is not None else 1.0
            if self.phi_known != expected:
                raise SpecificationError(
                    f"phi_known must be {expected} (1 for binary, m for binomial), "
                    f"got {self.phi_known}")

    # -- construction helpers -------------------------------------------

    @staticmethod
    def nonnegative(p: float) -> "ModelFamily":
        """Family for positive continuous or count series, V(mu) = mu**p."""
        return ModelFamily(NONNEGATIVE, p=float(p))

    @staticmethod
    def real_valued() -> "ModelFamily":
        """Family for real-valued series, identity link, V = 1."""
        return ModelFamily(REAL_VALUED)

    @staticmethod
    def bounded(m: int | None = None, phi_known: float | None = None) -> "ModelFamily":
        """Family for (0,1)/binary/binomial series, V(mu) = mu(1-mu)."""
        return ModelFamily(BOUNDED, m=m, phi_known=phi_known)


@dataclass(frozen=True)
class ParameterSet:
    """Full parameter vector: regression, dispersion, and latent parameters.

    ``sigma2`` is the stationary marginal variance of the latent process and
    ``rho`` its lag-1 autocorrelation.  Latent-range checks (``|rho| < 1``
    Gaussian, ``0 < rho < 1`` gamma) depend on the family and are applied by
    :func:`validate_for`.
    """

    beta: np.ndarray
    phi: float
    sigma2: float
    rho: float

    def __post_init__(self):
        object.__setattr__(self, "beta", np.atleast_1d(np.asarray(self.beta, dtype=float)))
        if self.beta.ndim != 1 or self.beta.size == 0:
            raise SpecificationError("beta must be a nonempty 1-d vector")
        if not np.all(np.isfinite(self.beta)):
            raise SpecificationError("beta must be finite")
        if not self.phi > 0:
            raise SpecificationError(f"dispersion phi must be positive, got {self.phi}")
        if not self.sigma2 > 0:
            raise SpecificationError(f"latent variance sigma2 must be positive, got {self.sigma2}")
        if not abs(self.rho) < 1:
            raise SpecificationError(f"latent correlation rho must satisfy |rho| < 1, got {self.rho}")

    def validate_for(self, family: ModelFamily, design: "DesignMatrix | None" = None) -> None:
        """Check family-specific constraints: latent range, linear predictor sign."""
        if family.kind == BOUNDED:
            if not 0 < self.rho < 1:
                raise SpecificationError(
                    f"gamma latent process requires 0 < rho < 1, got {self.rho}")
            if design is not None:
                eta = design.x @ self.beta
                bad = np.flatnonzero(eta <= 0)
                if bad.size:
                    raise DomainError(
                        "bounded family requires x't beta > 0 for every t; "
                        f"violated at t = {(bad + 1).tolist()[:10]}"
                        + ("..." if bad.size > 10 else ""))
            if family.phi_known is None and not 0 < self.phi < 1:
                raise SpecificationError(
                    f"bounded continuous responses require 0 < phi < 1, got {self.phi}")


# ---------------------------------------------------------------------------
# Covariate terms and design matrices
# ---------------------------------------------------------------------------

_TERM_KINDS = ("intercept", "linear_trend", "quadratic_trend", "cos", "sin", "abs_break")


@dataclass(frozen=True)
class CovariateTerm:
    """One declarative covariate column, evaluated at times t = 1..n.

    ==================  ======================
    kind                column value at time t
    ==================  ======================
    ``intercept``       1
    ``linear_trend``    t / n
    ``quadratic_trend`` (t / n)**2
    ``cos``             cos(2 pi t / period)
    ``sin``             sin(2 pi t / period)
    ``abs_break``       \\|t - t0\\| / scale
    ==================  ======================
    """

    kind: str
    period: float | None = None
    t0: float | None = None
    scale: float | None = None

    def __post_init__(self):
        if self.kind not in _TERM_KINDS:
            raise SpecificationError(f"unknown covariate term kind: {self.kind!r}")
        if self.kind in ("cos", "sin"):
            if self.period is None or not self.period > 0:
                raise SpecificationError(f"{self.kind} term requires period > 0")
        elif self.period is not None:
            raise SpecificationError("period applies only to cos/sin terms")
        if self.kind == "abs_break":
            if self.t0 is None:
                raise SpecificationError("abs_break term requires a break time t0")
            if self.scale is None or not self.scale > 0:
                raise SpecificationError("abs_break term requires scale > 0")
        elif self.t0 is not None or self.scale is not None:
            raise SpecificationError("t0/scale apply only to abs_break terms")

    def evaluate(self, n: int) -> np.ndarray:
        """Column values at t = 1..n."""
        t = np.arange(1, n + 1, dtype=float)
        if self.kind == "intercept":
            return np.ones(n)
        if self.kind == "linear_trend":
            return t / n
        if self.kind == "quadratic_trend":
            return (t / n) ** 2
        if self.kind == "cos":
            return np.cos(2.0 * np.pi * t / self.period)
        if self.kind == "sin":
            return np.sin(2.0 * np.pi * t / self.period)
        # abs_break
        if not 1 <= self.t0 <= n:
            raise SpecificationError(
                f"abs_break time t0={self.t0} must lie in [1, n={n}]")
        return np.abs(t - self.t0) / self.scale

    def label(self) -> str:
        if self.kind in ("cos", "sin"):
            return f"{self.kind}(2*pi*t/{self.period:g})"
        if self.kind == "abs_break":
            return f"|t-{self.t0:g}|/{self.scale:g}"
        return self.kind


def intercept() -> CovariateTerm:
    return CovariateTerm("intercept")


def linear_trend() -> CovariateTerm:
    return CovariateTerm("linear_trend")


def quadratic_trend() -> CovariateTerm:
    return CovariateTerm("quadratic_trend")


def cosine(period: float) -> CovariateTerm:
    return CovariateTerm("cos", period=float(period))


def sine(period: float) -> CovariateTerm:
    return CovariateTerm("sin", period=float(period))


def abs_break(t0: float, scale: float) -> CovariateTerm:
    return CovariateTerm("abs_break", t0=float(t0), scale=float(scale))


@dataclass(frozen=True)
class DesignMatrix:
    """An n-by-q covariate matrix with optional column labels."""

    x: np.ndarray
    names: tuple[str, ...] = ()
    terms: tuple[CovariateTerm, ...] = field(default=(), compare=False)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
            raise SpecificationError("design matrix must be 2-d and nonempty")
        if not np.all(np.isfinite(x)):
            raise SpecificationError("design matrix must be finite")
        object.__setattr__(self, "x", x)
        if not self.names:
            object.__setattr__(self, "names",
                               tuple(f"x{j}" for j in range(x.shape[1])))
        elif len(self.names) != x.shape[1]:
            raise SpecificationError("one name per design column required")

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def q(self) -> int:
        return self.x.shape[1]

    def singular_value_ratio(self) -> float:
        """Smallest over largest singular value; 0 for exactly singular."""
        s = np.linalg.svd(self.x, compute_uv=False)
        return float(s[-1] / s[0]) if s[0] > 0 else 0.0

    def check_rank(self) -> None:
        """Raise :class:`RankError` if numerically rank deficient (hard check at fit time)."""
        ratio = self.singular_value_ratio()
        if ratio < RANK_TOL:
            raise RankError(
                f"design matrix is rank deficient (singular value ratio {ratio:.2e})")


def build_design(terms: Sequence[CovariateTerm], n: int) -> DesignMatrix:
    """Evaluate covariate terms at t = 1..n, in declaration order.

    A rank-deficient result only warns here; fitting raises.
    """
    if n < 1:
        raise SpecificationError(f"sample size must be >= 1, got {n}")
    terms = tuple(terms)
    if not terms:
        raise SpecificationError("at least one covariate term is required")
    cols = [term.evaluate(n) for term in terms]
    design = DesignMatrix(np.column_stack(cols),
                          names=tuple(term.label() for term in terms),
                          terms=terms)
    if design.singular_value_ratio() < RANK_TOL:
        warnings.warn("design matrix is rank deficient; fitting will fail",
                      stacklevel=2)
    return design


# ---------------------------------------------------------------------------
# Link, variance, and quasi-likelihood kernels
# ---------------------------------------------------------------------------


def link_inverse(family: ModelFamily, eta):
    """Mean h(eta) for a linear predictor value (scalar or array)."""
    eta = np.asarray(eta, dtype=float)
    if family.kind == NONNEGATIVE:
        out = np.exp(eta)
    elif family.kind == REAL_VALUED:
        out = eta.copy()
    else:
        if np.any(eta <= 0):
            raise DomainError(
                "bounded family requires a positive linear predictor "
                "(otherwise the mean leaves (0,1))")
        out = np.exp(-eta)
    return out if out.ndim else float(out)


def link(family: ModelFamily, mu):
    """Link g(mu), the inverse of :func:`link_inverse`."""
    mu = np.asarray(mu, dtype=float)
    _check_mean_space(family, mu)
    if family.kind == NONNEGATIVE:
        out = np.log(mu)
    elif family.kind == REAL_VALUED:
        out = mu.copy()
    else:
        out = -np.log(mu)
    return out if out.ndim else float(out)


def mean_derivative(family: ModelFamily, eta):
    """d mu / d eta = h'(eta), used by the quasi-score."""
    eta = np.asarray(eta, dtype=float)
    if family.kind == NONNEGATIVE:
        out = np.exp(eta)
    elif family.kind == REAL_VALUED:
        out = np.ones_like(eta)
    else:
        out = -np.exp(-eta)
    return out if out.ndim else float(out)


def _check_mean_space(family: ModelFamily, mu: np.ndarray) -> None:
    if family.kind == NONNEGATIVE:
        if np.any(mu <= 0):
            raise DomainError("non-negative family requires mean mu > 0")
    elif family.kind == BOUNDED:
        if np.any((mu <= 0) | (mu >= 1)):
            raise DomainError("bounded family requires mean mu in (0,1)")


def _check_support(family: ModelFamily, y: np.ndarray) -> None:
    if family.kind == NONNEGATIVE:
        if np.any(y < 0):
            raise DomainError("non-negative family requires y >= 0")
    elif family.kind == BOUNDED:
        if np.any((y < 0) | (y > 1)):
            raise DomainError("bounded family requires y in [0,1]")


def variance_function(family: ModelFamily, mu):
    """Variance function V(mu); the conditional variance is phi * V."""
    mu = np.asarray(mu, dtype=float)
    _check_mean_space(family, mu)
    if family.kind == NONNEGATIVE:
        out = mu ** family.p
    elif family.kind == REAL_VALUED:
        out = np.ones_like(mu)
    else:
        out = mu * (1.0 - mu)
    return out if out.ndim else float(out)


def q_function(family: ModelFamily, y, mu):
    """Quasi-likelihood kernel Q(y; mu) = integral_y^mu (y - u)/V(u) du.

    Closed forms per family; for the non-negative power family the p = 1, 2
    logarithmic forms are dispatched within ``1e-9`` of those powers to
    avoid the removable singularities of the general expression.  Bounded
    responses at the support boundary (y = 0 or 1) evaluate to
    ``log(1 - mu)`` and ``log(mu)`` respectively.
    """
    y = np.asarray(y, dtype=float)
    mu = np.asarray(mu, dtype=float)
    _check_support(family, y)
    _check_mean_space(family, mu)
    scalar = y.ndim == 0 and mu.ndim == 0
    if family.kind == REAL_VALUED:
        out = y * mu - mu ** 2 / 2.0 - y ** 2 / 2.0
    elif family.kind == NONNEGATIVE:
        p = family.p
        if abs(p - 1.0) < _POWER_SWITCH_TOL:
            # xlogy(0, .) == 0 handles zero counts: Q(0; mu) = -mu.
            out = xlogy(y, mu) - xlogy(y, y) + y - mu
        elif abs(p - 2.0) < _POWER_SWITCH_TOL:
            out = np.log(y / mu) - y / mu + 1.0
        else:
            out = (y / (1.0 - p) * (mu ** (1.0 - p) - y ** (1.0 - p))
                   - (mu ** (2.0 - p) - y ** (2.0 - p)) / (2.0 - p))
    else:
        # Boundary cases fall out of xlogy: y = 0 gives log(1 - mu),
        # y = 1 gives log(mu).
        out = (xlogy(y, mu) - xlogy(y, y)
               + xlogy(1.0 - y, 1.0 - mu) - xlogy(1.0 - y, 1.0 - y))
    return float(out) if scalar else out
