"""Quasi-likelihood estimation of the regression coefficients.

``fit_beta`` maximizes the log-quasi-likelihood ``sum_t Q(y_t; mu_t(beta))``
by Fisher scoring on the quasi-score equations

    U(beta) = sum_t x_t h'(eta_t) (y_t - mu_t) / V(mu_t),
    J(beta) = sum_t x_t x_t' h'(eta_t)^2 / V(mu_t),

with step halving whenever a step leaves the bounded family's feasible
region (x't beta > 0) or fails to increase the objective.  The dispersion
``phi`` cancels from the score, so it never enters the fit.

The reported ``naive_se`` are the quasi-likelihood standard errors that
ignore the latent process entirely (Pearson-estimated dispersion times the
inverse Fisher information); they understate the real uncertainty whenever
the latent process is present and exist for comparison against Monte Carlo
standard errors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, FitConvergenceError, SpecificationError
from .families import (
    BOUNDED,
    NONNEGATIVE,
    REAL_VALUED,
    DesignMatrix,
    ModelFamily,
    _check_support,
    link_inverse,
    mean_derivative,
    q_function,
    variance_function,
)

__all__ = ["FitResult", "quasi_score", "fisher_information", "quasi_loglik",
           "default_init", "fit_beta"]

_MAX_HALVINGS = 30


@dataclass(frozen=True)
class FitResult:
    """Outcome of a quasi-likelihood fit.

    ``final_score_norm`` is the max-norm of the last scoring step
    ``J^{-1} U`` relative to ``max(1, |beta|)``; convergence means it fell
    below the tolerance.  ``q_value`` is the log-quasi-likelihood at the
    optimum and ``pearson_dispersion`` the Pearson dispersion estimate used
    for ``naive_se``.
    """

    beta_hat: np.ndarray
    iterations: int
    converged: bool
    final_score_norm: float
    q_value: float
    naive_se: np.ndarray
    pearson_dispersion: float


def _eta_mu(family: ModelFamily, design: DesignMatrix, beta: np.ndarray):
    eta = design.x @ beta
    if family.kind == BOUNDED and np.any(eta <= 0):
        raise DomainError("linear predictor must stay positive for the bounded family")
    mu = link_inverse(family, eta)
    return eta, mu


def quasi_score(family: ModelFamily, design: DesignMatrix, beta, y) -> np.ndarray:
    """Gradient of the log-quasi-likelihood with respect to beta."""
    beta = np.asarray(beta, dtype=float)
    y = np.asarray(y, dtype=float)
    eta, mu = _eta_mu(family, design, beta)
    d = mean_derivative(family, eta)
    v = variance_function(family, mu)
    return design.x.T @ ((y - mu) * d / v)


def fisher_information(family: ModelFamily, design: DesignMatrix, beta) -> np.ndarray:
    """Expected information J(beta) = sum_t x_t x_t' h'(eta_t)^2 / V(mu_t)."""
    beta = np.asarray(beta, dtype=float)
    eta, mu = _eta_mu(family, design, beta)
    d = mean_derivative(family, eta)
    v = variance_function(family, mu)
    return (design.x * (d * d / v)[:, None]).T @ design.x


def quasi_loglik(family: ModelFamily, design: DesignMatrix, beta, y) -> float:
    """Log-quasi-likelihood sum_t Q(y_t; mu_t(beta))."""
    _, mu = _eta_mu(family, design, np.asarray(beta, dtype=float))
    return float(np.sum(q_function(family, np.asarray(y, dtype=float), mu)))


def _feasible(family: ModelFamily, design: DesignMatrix, beta: np.ndarray) -> bool:
    if family.kind != BOUNDED:
        return True
    return bool(np.all(design.x @ beta > 0))


def _ols(x: np.ndarray, z: np.ndarray) -> np.ndarray:
    return np.linalg.lstsq(x, z, rcond=None)[0]


def default_init(family: ModelFamily, design: DesignMatrix, y: np.ndarray) -> np.ndarray:
    """Deterministic feasible starting value.

    Real-valued: ordinary least squares.  Non-negative: least squares on
    ``log(y + eps)`` with ``eps = 0.1 * mean(y)`` only when zero responses
    are present.  Bounded: least squares on ``-log(clip(y, .01, .99))``,
    shrunk toward a feasible constant-column point until ``x't beta > 0``
    everywhere.
    """
    y = np.asarray(y, dtype=float)
    if family.kind == REAL_VALUED:
        return _ols(design.x, y)
    if family.kind == NONNEGATIVE:
        eps = 0.0 if np.all(y > 0) else 0.1 * float(np.mean(y))
        if not np.all(y + eps > 0):
            raise DomainError("cannot initialize: responses are all zero")
        return _ols(design.x, np.log(y + eps))
    beta = _ols(design.x, -np.log(np.clip(y, 0.01, 0.99)))
    if _feasible(family, design, beta):
        return beta
    # Blend toward an intercept-like anchor until feasible.
    col_range = design.x.max(axis=0) - design.x.min(axis=0)
    constant = np.flatnonzero((col_range == 0) & (design.x[0] != 0))
    if not constant.size:
        raise SpecificationError(
            "default bounded initialization is infeasible and the design has "
            "no constant column; supply an explicit init")
    j = int(constant[0])
    anchor = np.zeros(design.q)
    anchor[j] = -np.log(np.clip(float(np.mean(y)), 0.01, 0.99)) / design.x[0, j]
    for _ in range(60):
        beta = anchor + (beta - anchor) / 2.0
        if _feasible(family, design, beta):
            return beta
    return anchor


def fit_beta(family: ModelFamily, design: DesignMatrix, y, *,
             max_iter: int = 100, tol: float = 1e-8, init=None) -> FitResult:
    """Maximize the log-quasi-likelihood by Fisher scoring.

    Parameters
    ----------
    family, design, y
        Model family, full-rank design, and responses in the family's
        support.
    max_iter, tol
        Iteration cap and convergence tolerance on the relative scoring
        step (max-norm of ``J^{-1}U`` over ``max(1, |beta|)``).
    init
        Optional starting vector; defaults to :func:`default_init`.

    Raises
    ------
    RankError
        If the design is numerically rank deficient.
    FitConvergenceError
        If no feasible improving step exists or ``max_iter`` is exhausted;
        the exception carries the last iterate in ``result``.
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.size != design.n:
        raise SpecificationError(
            f"y must be a vector of length {design.n}, got shape {y.shape}")
    design.check_rank()
    _check_support(family, y)

    beta = np.asarray(init, dtype=float).copy() if init is not None \
        else default_init(family, design, y)
    if beta.shape != (design.q,):
        raise SpecificationError(f"init must have length {design.q}")
    if not _feasible(family, design, beta):
        raise DomainError("initial beta violates x't beta > 0")

    q_old = quasi_loglik(family, design, beta, y)
    crit = np.inf
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        u = quasi_score(family, design, beta, y)
        j = fisher_information(family, design, beta)
        try:
            step = np.linalg.solve(j, u)
        except np.linalg.LinAlgError as exc:
            raise FitConvergenceError(
                f"singular information matrix at iteration {iterations}",
                result=_result(family, design, beta, y, iterations, False, crit, q_old),
            ) from exc
        crit = float(np.max(np.abs(step)) / max(1.0, float(np.max(np.abs(beta)))))
        if crit < tol:
            converged = True
            break
        # Step halving: need a feasible candidate that does not decrease Q.
        accepted = False
        for halving in range(_MAX_HALVINGS + 1):
            candidate = beta + step / 2.0 ** halving
            if not _feasible(family, design, candidate):
                continue
            q_new = quasi_loglik(family, design, candidate, y)
            if q_new >= q_old or halving == _MAX_HALVINGS:
                beta, q_old, accepted = candidate, q_new, True
                break
        if not accepted:
            raise FitConvergenceError(
                f"no feasible step after {_MAX_HALVINGS} halvings "
                f"at iteration {iterations}",
                result=_result(family, design, beta, y, iterations, False, crit, q_old),
            )
    result = _result(family, design, beta, y, iterations, converged, crit, q_old)
    if not converged:
        raise FitConvergenceError(
            f"Fisher scoring did not converge in {max_iter} iterations "
            f"(last relative step {crit:.3e})", result=result)
    return result


def _result(family, design, beta, y, iterations, converged, crit, q_value) -> FitResult:
    _, mu = _eta_mu(family, design, beta)
    v = variance_function(family, mu)
    dof = design.n - design.q
    pearson = float(np.sum((y - mu) ** 2 / v) / dof) if dof > 0 else float("nan")
    j = fisher_information(family, design, beta)
    try:
        cov = pearson * np.linalg.inv(j)
        naive_se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    except np.linalg.LinAlgError:
        naive_se = np.full(design.q, np.nan)
    return FitResult(
        beta_hat=beta.copy(),
        iterations=iterations,
        converged=converged,
        final_score_norm=float(crit),
        q_value=float(q_value),
        naive_se=naive_se,
        pearson_dispersion=pearson,
    )
