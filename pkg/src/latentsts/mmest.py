"""Method-of-moments estimation of dispersion and latent parameters.

Given fitted means ``mu_hat``, the residual second moments are matched to
their closed forms (see :mod:`latentsts.moments`).  Writing

    ratio_k = sum_{t<=n-k} (y_t - mu_t)(y_{t+k} - mu_{t+k})
              / sum_{t<=n-k} mu_t mu_{t+k} + 1,  k = 1, 2,

the three families invert as follows.

Non-negative: ``M_k = log(ratio_k)`` satisfies ``M_k = sigma2 rho^k``, so
``rho = M_2 / M_1`` and ``sigma2 = M_1^2 / M_2``; dispersion then comes
from the marginal-variance identity.

Real-valued: lag-covariance sums give ``rho`` and ``sigma2`` directly and
``phi = mean squared residual - sigma2``.

Bounded: ``v(sigma2, rho^k) = ratio_k`` is solved by inverting v
analytically in its second argument and root-finding in ``sigma2``
(bisection after bracketing on a log grid); dispersion from the
marginal-variance identity unless it is known (binary/binomial).

Estimates can land outside the parameter space; that is a property of this
kind of estimator, not an error.  Such outcomes are returned as *invalid*
:class:`NuisanceEstimate` values carrying diagnostics; Monte Carlo studies
redraw them, data fits surface them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SpecificationError
from .families import BOUNDED, NONNEGATIVE, REAL_VALUED, ModelFamily
from .moments import gar_factor_second_moment

__all__ = [
    "NuisanceEstimate",
    "invert_product_moment",
    "solve_latent_moments",
    "mm_nonneg",
    "mm_real",
    "mm_bounded",
    "estimate_nuisance",
]

_BRACKET_LO = 1e-6
_BRACKET_HI = 50.0
_BRACKET_GRID = 200
_BISECT_TOL = 1e-10


@dataclass(frozen=True)
class NuisanceEstimate:
    """Result of a method-of-moments step.

    When ``valid`` is False the point estimates are NaN and ``diagnostics``
    carries the intermediate sample moments plus a ``reason`` string.
    """

    phi_hat: float
    sigma2_hat: float
    rho_hat: float
    valid: bool
    diagnostics: dict = field(default_factory=dict)


def _invalid(reason: str, **diag) -> NuisanceEstimate:
    diag["reason"] = reason
    return NuisanceEstimate(float("nan"), float("nan"), float("nan"), False, diag)


def _residual_sums(y: np.ndarray, mu: np.ndarray):
    """Lag 1/2 residual cross products and mean cross products."""
    r = y - mu
    s = {"rss": float(r @ r)}
    for k in (1, 2):
        s[f"lag{k}_resid"] = float(r[:-k] @ r[k:])
        s[f"lag{k}_mean"] = float(mu[:-k] @ mu[k:])
    return s


def _check_inputs(y, mu_hat, unit_interval=False, positive=False):
    y = np.asarray(y, dtype=float)
    mu = np.asarray(mu_hat, dtype=float)
    if y.shape != mu.shape or y.ndim != 1:
        raise SpecificationError("y and mu_hat must be 1-d vectors of equal length")
    if y.size < 3:
        raise SpecificationError("method of moments needs n >= 3 (lags 1 and 2)")
    if positive and np.any(mu <= 0):
        raise SpecificationError("fitted means must be positive")
    if unit_interval and np.any((mu <= 0) | (mu >= 1)):
        raise SpecificationError("fitted means must lie in (0,1)")
    return y, mu


# ---------------------------------------------------------------------------
# Non-negative family
# ---------------------------------------------------------------------------


def mm_nonneg(y, mu_hat, p: float) -> NuisanceEstimate:
    """Moment estimates of (phi, sigma2, rho) for the non-negative family.

    The inversion of ``M_k = sigma2 rho^k`` is ``rho = M_2/M_1``,
    ``sigma2 = M_1^2/M_2``.
    """
    y, mu = _check_inputs(y, mu_hat, positive=True)
    sums = _residual_sums(y, mu)
    return _mm_nonneg_core(sums, float(np.sum(mu ** 2)), float(np.sum(mu ** p)), p)


def _mm_nonneg_core(sums: dict, sum_mu_sq: float, sum_mu_p: float,
                    p: float) -> NuisanceEstimate:
    ratios = {k: sums[f"lag{k}_resid"] / sums[f"lag{k}_mean"] + 1.0 for k in (1, 2)}
    diag = dict(sums, ratio1=ratios[1], ratio2=ratios[2])
    if ratios[1] <= 0 or ratios[2] <= 0:
        return _invalid("moment ratio <= 0: logarithm undefined", **diag)
    m1, m2 = np.log(ratios[1]), np.log(ratios[2])
    diag.update(m1=m1, m2=m2)
    if m1 == 0.0 or m2 == 0.0:
        return _invalid("zero log-moment: latent parameters unidentified", **diag)
    rho = m2 / m1
    sigma2 = m1 * m1 / m2
    if not -1.0 < rho < 1.0:
        return _invalid("rho estimate outside (-1, 1)", **diag)
    if not sigma2 > 0:
        return _invalid("sigma2 estimate not positive", **diag)
    phi = (sums["rss"] - np.expm1(sigma2) * sum_mu_sq) \
        / (np.exp(sigma2 * p * (p - 1.0) / 2.0) * sum_mu_p)
    if not phi > 0:
        return _invalid("phi estimate not positive", **diag)
    return NuisanceEstimate(float(phi), float(sigma2), float(rho), True, diag)


# ---------------------------------------------------------------------------
# Real-valued family
# ---------------------------------------------------------------------------


def mm_real(y, mu_hat) -> NuisanceEstimate:
    """Moment estimates of (phi, sigma2, rho) for the real-valued family:

    rho    = lag-2 sum / lag-1 sum,
    sigma2 = (lag-1 sum)^2 / (n * lag-2 sum),
    phi    = mean squared residual - sigma2.
    """
    y, mu = _check_inputs(y, mu_hat)
    return _mm_real_core(y.size, _residual_sums(y, mu))


def _mm_real_core(n: int, sums: dict) -> NuisanceEstimate:
    s1, s2 = sums["lag1_resid"], sums["lag2_resid"]
    diag = {"rss": sums["rss"], "lag1_resid": s1, "lag2_resid": s2}
    if s1 == 0.0:
        return _invalid("zero lag-1 residual sum", **diag)
    if s2 == 0.0:
        return _invalid("zero lag-2 residual sum", **diag)
    rho = s2 / s1
    sigma2 = s1 * s1 / (n * s2)
    phi = sums["rss"] / n - sigma2
    if not -1.0 < rho < 1.0:
        return _invalid("rho estimate outside (-1, 1)", **diag)
    if not sigma2 > 0:
        return _invalid("sigma2 estimate not positive", **diag)
    if not phi > 0:
        return _invalid("phi estimate not positive", **diag)
    return NuisanceEstimate(float(phi), float(sigma2), float(rho), True, diag)


# ---------------------------------------------------------------------------
# Bounded family
# ---------------------------------------------------------------------------


def invert_product_moment(sigma2: float, c: float) -> float:
    """Solve ``v(sigma2, y) = c`` for the lag correlation y.

    v is strictly increasing in y, so the inversion
    ``y = 1 - ((1+x)^2 c^(-x) - 1 - 2x) / x^2`` is exact; the result may
    fall outside [0, 1] when c is not attainable at this sigma2.
    """
    x = float(sigma2)
    if x <= 0:
        raise SpecificationError("sigma2 must be positive")
    if c <= 0:
        raise SpecificationError("product moment must be positive")
    return 1.0 - (np.exp(2.0 * np.log1p(x) - x * np.log(c)) - 1.0 - 2.0 * x) / (x * x)


def solve_latent_moments(c1: float, c2: float) -> tuple[float, float, dict]:
    """Recover (sigma2, rho) from v(sigma2, rho) = c1, v(sigma2, rho^2) = c2.

    Brackets ``f(x) = y_inv(x, c1)^2 - y_inv(x, c2)`` by sign change on a
    200-point log grid over [1e-6, 50], bisects the *smallest* bracket to
    1e-10 in x, and reports the number of sign changes as ``multiplicity``.
    Returns NaNs and a ``reason`` in the diagnostics when no root exists.
    """
    diag: dict = {"c1": c1, "c2": c2}
    if c1 <= 1.0 or c2 <= 1.0:
        diag["reason"] = "moment ratio <= 1: no positive dependence signal"
        return float("nan"), float("nan"), diag

    def f(x: float) -> float:
        y1 = invert_product_moment(x, c1)
        y2 = invert_product_moment(x, c2)
        return y1 * y1 - y2

    grid = np.geomspace(_BRACKET_LO, _BRACKET_HI, _BRACKET_GRID)
    values = np.array([f(x) for x in grid])
    sign_changes = np.flatnonzero(np.sign(values[:-1]) * np.sign(values[1:]) < 0)
    exact = np.flatnonzero(values == 0.0)
    diag["multiplicity"] = int(sign_changes.size + exact.size)
    if exact.size and (not sign_changes.size or exact[0] <= sign_changes[0]):
        root = float(grid[exact[0]])
    elif sign_changes.size:
        lo, hi = float(grid[sign_changes[0]]), float(grid[sign_changes[0] + 1])
        flo = f(lo)
        while hi - lo > _BISECT_TOL:
            mid = 0.5 * (lo + hi)
            fmid = f(mid)
            if fmid == 0.0:
                lo = hi = mid
                break
            if (flo < 0) == (fmid < 0):
                lo, flo = mid, fmid
            else:
                hi = mid
        root = 0.5 * (lo + hi)
    else:
        diag["reason"] = "no sign change of the moment equation in [1e-6, 50]"
        return float("nan"), float("nan"), diag
    rho = invert_product_moment(root, c1)
    diag["sigma2_root"] = root
    if not 0.0 < rho < 1.0:
        diag["reason"] = "implied rho outside (0, 1)"
        return float("nan"), float("nan"), diag
    return root, float(rho), diag


def mm_bounded(y, mu_hat, phi_known: float | None = None) -> NuisanceEstimate:
    """Moment estimates of (phi, sigma2, rho) for the bounded family.

    With known dispersion (binary phi = 1, binomial phi = m) only the
    latent moment equations are solved and ``phi_hat`` echoes the known
    value.  For estimated dispersion the bounded parameter space (0, 1)
    applies.
    """
    y, mu = _check_inputs(y, mu_hat, unit_interval=True)
    sums = _residual_sums(y, mu)
    return _mm_bounded_core(sums, float(np.sum(mu)), float(np.sum(mu ** 2)), phi_known)


def _mm_bounded_core(sums: dict, mu_sum: float, mu_sq: float,
                     phi_known: float | None) -> NuisanceEstimate:
    c1 = sums["lag1_resid"] / sums["lag1_mean"] + 1.0
    c2 = sums["lag2_resid"] / sums["lag2_mean"] + 1.0
    sigma2, rho, diag = solve_latent_moments(c1, c2)
    diag = dict(sums, **diag)
    if not np.isfinite(sigma2):
        return _invalid(diag.pop("reason"), **diag)
    if phi_known is not None:
        return NuisanceEstimate(float(phi_known), sigma2, rho, True, diag)
    w = gar_factor_second_moment(sigma2)
    phi = (sums["rss"] - (w - 1.0) * mu_sq) / (mu_sum - w * mu_sq)
    diag["w"] = float(w)
    if not 0.0 < phi < 1.0:
        return _invalid("phi estimate outside (0, 1)", **diag)
    return NuisanceEstimate(float(phi), sigma2, rho, True, diag)


def estimate_nuisance(family: ModelFamily, y, mu_hat) -> NuisanceEstimate:
    """Dispatch to the family's moment estimator."""
    if family.kind == NONNEGATIVE:
        return mm_nonneg(y, mu_hat, family.p)
    if family.kind == REAL_VALUED:
        return mm_real(y, mu_hat)
    if family.kind == BOUNDED:
        return mm_bounded(y, mu_hat, family.phi_known)
    raise SpecificationError(f"unknown family kind: {family.kind!r}")
