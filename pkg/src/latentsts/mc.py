"""Parametric Monte Carlo machinery.

``run_study`` replicates the full pipeline (simulate latent path, generate
responses, quasi-likelihood fit, moment estimation) many times and
aggregates empirical means and standard errors of the estimates.  Replicas
whose moment estimates land outside the parameter space are discarded and
redrawn from a fresh substream, up to ``max_redraws`` attempts each.

``mc_standard_errors`` runs the same machinery at a *fitted* parameter
vector under a declared conditional distribution: the empirical standard
deviations across replicas are the Monte Carlo standard errors of the
estimates, the honest replacement for the naive quasi-likelihood standard
errors when a latent process is present.

Replica r (redraw attempt d) draws from streams keyed
``(master_seed, r, d, role)``, so results are bit-identical for any worker
count or scheduling; aggregation sorts by replica index.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from . import rng
from .errors import DataError, FitConvergenceError, SpecificationError, StudyError
from .families import (
    CovariateTerm,
    DesignMatrix,
    ModelFamily,
    ParameterSet,
    build_design,
    link_inverse,
)
from .latent import CONDITIONALS, generate_response, simulate_latent
from .mmest import estimate_nuisance
from .qlfit import fit_beta

__all__ = [
    "StudyConfig",
    "StudyResult",
    "DiagnosticsReport",
    "run_study",
    "mc_standard_errors",
    "standardized_diagnostics",
]

_MIN_DIAGNOSTIC_REPLICAS = 30


@dataclass(frozen=True)
class StudyConfig:
    """Inputs of one simulation study cell (one family, design, and n).

    The design is normally declarative (``terms`` evaluated at 1..n); a
    prebuilt ``design`` matrix may be supplied instead (raw covariates).
    """

    family: ModelFamily
    terms: tuple[CovariateTerm, ...]
    true_params: ParameterSet
    conditional: str
    n: int
    replicas: int
    master_seed: int
    max_redraws: int = 100
    fit_options: dict = field(default_factory=dict)
    design: DesignMatrix | None = None
    latent_init: str = "stationary"

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if self.conditional not in CONDITIONALS:
            raise SpecificationError(
                f"unknown conditional distribution {self.conditional!r}")
        if self.latent_init not in ("stationary", "innovation"):
            raise SpecificationError(
                f'latent_init must be "stationary" or "innovation", '
                f"got {self.latent_init!r}")
        if self.replicas < 1:
            raise SpecificationError("at least one replica is required")
        if self.max_redraws < 0:
            raise SpecificationError("max_redraws must be >= 0")
        if self.design is not None and self.design.n != self.n:
            raise SpecificationError(
                f"design has {self.design.n} rows but n = {self.n}")


@dataclass(frozen=True)
class StudyResult:
    """Aggregated study output.

    ``estimates`` has one row per replica, columns ordered as
    ``param_names`` (regression coefficients, then phi, sigma2, rho).
    ``ses`` and ``standardized`` are None for a single replica.
    ``total_simulations`` counts every attempted replica including
    redraws: ``replicas + sum(redraws)``.
    """

    param_names: tuple[str, ...]
    true_values: np.ndarray
    estimates: np.ndarray
    means: np.ndarray
    ses: np.ndarray | None
    redraws: np.ndarray
    total_simulations: int

    @property
    def replicas(self) -> int:
        return self.estimates.shape[0]

    @property
    def standardized(self) -> np.ndarray | None:
        if self.ses is None:
            return None
        return (self.estimates - self.means) / self.ses


def _param_names(design: DesignMatrix) -> tuple[str, ...]:
    return tuple(f"beta{j}" for j in range(design.q)) + ("phi", "sigma2", "rho")


def _one_replica(config: StudyConfig, design: DesignMatrix, replica: int):
    """Simulate-fit-estimate with the discard-and-redraw rule.

    Returns (estimate row, redraw count).  Fit non-convergence is treated
    like an out-of-space moment estimate: discard and redraw.
    """
    family, params = config.family, config.true_params
    last_reason = None
    for attempt in range(config.max_redraws + 1):
        path = simulate_latent(
            family, params.sigma2, params.rho, config.n,
            (config.master_seed, replica, attempt, rng.PATH_ROLE),
            gar_init=config.latent_init)
        y = generate_response(
            family, design, params, path, config.conditional,
            (config.master_seed, replica, attempt, rng.RESPONSE_ROLE))
        try:
            fit = fit_beta(family, design, y, **config.fit_options)
        except FitConvergenceError as exc:
            last_reason = {"reason": f"fit did not converge: {exc}"}
            continue
        mu_hat = link_inverse(family, design.x @ fit.beta_hat)
        mm = estimate_nuisance(family, y, mu_hat)
        if mm.valid:
            row = np.concatenate([fit.beta_hat, [mm.phi_hat, mm.sigma2_hat, mm.rho_hat]])
            return row, attempt
        last_reason = mm.diagnostics
    raise StudyError(
        f"replica {replica} exceeded max_redraws={config.max_redraws}",
        replica=replica, diagnostics=last_reason)


def run_study(config: StudyConfig, workers: int = 1) -> StudyResult:
    """Run all replicas of a study cell and aggregate.

    ``workers`` > 1 executes replicas concurrently; every replica derives
    its own random substream, so the result is identical for any worker
    count.
    """
    design = config.design if config.design is not None \
        else build_design(config.terms, config.n)
    config.true_params.validate_for(config.family, design)
    names = _param_names(design)
    replicas = config.replicas

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(
                lambda r: _one_replica(config, design, r), range(replicas)))
    else:
        outcomes = [_one_replica(config, design, r) for r in range(replicas)]

    estimates = np.vstack([row for row, _ in outcomes])
    redraws = np.array([d for _, d in outcomes], dtype=int)
    means = estimates.mean(axis=0)
    ses = estimates.std(axis=0, ddof=1) if replicas > 1 else None
    truth = np.concatenate([config.true_params.beta,
                            [config.true_params.phi,
                             config.true_params.sigma2,
                             config.true_params.rho]])
    return StudyResult(
        param_names=names,
        true_values=truth,
        estimates=estimates,
        means=means,
        ses=ses,
        redraws=redraws,
        total_simulations=int(replicas + redraws.sum()),
    )


def mc_standard_errors(family: ModelFamily, terms, theta_hat: ParameterSet,
                       conditional: str, replicas: int, seed: int, n: int, *,
                       max_redraws: int = 100, workers: int = 1) -> StudyResult:
    """Monte Carlo standard errors at a fitted parameter vector.

    Simulates ``replicas`` data sets of length ``n`` at ``theta_hat`` under
    the declared conditional distribution, refits each, and returns the
    study result whose ``ses`` are the Monte Carlo standard errors.  There
    is no default conditional distribution: the semiparametric model does
    not imply one.
    """
    config = StudyConfig(
        family=family, terms=tuple(terms), true_params=theta_hat,
        conditional=conditional, n=n, replicas=replicas,
        master_seed=seed, max_redraws=max_redraws)
    return run_study(config, workers=workers)


@dataclass(frozen=True)
class DiagnosticsReport:
    """Plot-ready normality diagnostics of standardized estimates.

    For each parameter: the standardized values, 20-bin histogram counts
    and edges, and QQ pairs (theoretical standard-normal quantile at
    (i - 1/2)/N, ordered sample value).
    """

    param_names: tuple[str, ...]
    standardized: np.ndarray
    hist_counts: np.ndarray
    hist_edges: np.ndarray
    qq_theoretical: np.ndarray
    qq_sample: np.ndarray


def standardized_diagnostics(estimates, param_names=None, bins: int = 20) -> DiagnosticsReport:
    """Standardize an estimate table and compute histogram/QQ data.

    Requires at least 30 rows; a zero-variance column is an error.
    """
    est = np.atleast_2d(np.asarray(estimates, dtype=float))
    if est.shape[0] == 1:
        est = est.T
    n, k = est.shape
    if n < _MIN_DIAGNOSTIC_REPLICAS:
        raise SpecificationError(
            f"diagnostics need >= {_MIN_DIAGNOSTIC_REPLICAS} replicas, got {n}")
    if param_names is None:
        param_names = tuple(f"param{j}" for j in range(k))
    elif len(param_names) != k:
        raise SpecificationError("one name per estimate column required")
    sd = est.std(axis=0, ddof=1)
    if np.any(sd == 0):
        flat = [param_names[j] for j in np.flatnonzero(sd == 0)]
        raise DataError(f"zero standard deviation for {flat}; diagnostics undefined")
    std = (est - est.mean(axis=0)) / sd
    counts = np.empty((k, bins), dtype=int)
    edges = np.empty((k, bins + 1))
    for j in range(k):
        counts[j], edges[j] = np.histogram(std[:, j], bins=bins)
    theo = ndtri((np.arange(1, n + 1) - 0.5) / n)
    sample = np.sort(std, axis=0)
    return DiagnosticsReport(
        param_names=tuple(param_names),
        standardized=std,
        hist_counts=counts,
        hist_edges=edges,
        qq_theoretical=theo,
        qq_sample=sample,
    )
