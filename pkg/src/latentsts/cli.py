"""Command-line surface.

Five subcommands tie the pipeline together, each driven by a single JSON
configuration document (``--config path`` or ``-`` for standard input):

* ``simulate``  write a simulated trace CSV (t, alpha, y)
* ``fit``       quasi-likelihood + method-of-moments fit of a CSV series
* ``mc-se``     fit, then Monte Carlo standard errors and diagnostics data
* ``study``     full simulation study table (parameter, true, mean, SE per n)
* ``moments``   print closed-form mean/variance/ACF (oracle inspection)

Flags ``--out``, ``--seed``, ``--replicas``, ``--threads`` override the
corresponding config keys.  Unknown config keys are rejected.  Every output
JSON embeds the resolved config, the seed, and the artifact version.  On
failure a machine-readable ``error.json`` ({code, message, context}) is
written to the output directory and the exit status is nonzero; exit status
0 means no error artifact was written.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from ._version import __version__
from . import rng
from .dataio import DataSet, json_ready, load_csv, write_csv, write_json
from .errors import (
    ConfigError,
    DataError,
    DomainError,
    FitConvergenceError,
    LatentSTSError,
    RankError,
    SpecificationError,
    StudyError,
)
from .families import (
    CovariateTerm,
    DesignMatrix,
    ModelFamily,
    ParameterSet,
    _check_support,
    build_design,
    link_inverse,
)
from .latent import generate_response, simulate_latent
from .mc import StudyConfig, run_study, standardized_diagnostics
from .mmest import estimate_nuisance
from .moments import moment_report
from .qlfit import fit_beta

_COMMANDS = ("simulate", "fit", "mc-se", "study", "moments")

_COMMON_KEYS = {"out", "threads"}
_FIT_KEYS = {"family", "data", "terms", "fit"}
_ALLOWED = {
    "simulate": {"family", "terms", "params", "conditional", "n", "seed",
                 "latent_init"} | _COMMON_KEYS,
    "fit": _FIT_KEYS | _COMMON_KEYS,
    "mc-se": _FIT_KEYS | {"conditional", "replicas", "seed", "max_redraws",
                          "latent_init"} | _COMMON_KEYS,
    "study": {"family", "terms", "params", "conditional", "n", "replicas",
              "seed", "max_redraws", "latent_init"} | _COMMON_KEYS,
    "moments": {"family", "params", "terms", "n", "lags"} | _COMMON_KEYS,
}
_REQUIRED = {
    "simulate": {"family", "terms", "params", "conditional", "n", "seed"},
    "fit": {"family", "data"},
    "mc-se": {"family", "data", "conditional", "replicas", "seed"},
    "study": {"family", "terms", "params", "conditional", "n", "replicas", "seed"},
    "moments": {"family", "params", "terms", "n"},
}

_ERROR_CODES = {
    ConfigError: "config",
    DataError: "data",
    DomainError: "domain",
    SpecificationError: "specification",
    RankError: "rank",
    FitConvergenceError: "convergence",
    StudyError: "study",
}


# ---------------------------------------------------------------------------
# Config parsing
# ---------------------------------------------------------------------------


def _load_config(path: str) -> dict:
    try:
        if path == "-":
            text = sys.stdin.read()
        else:
            text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def _validate_keys(cfg: dict, command: str) -> None:
    unknown = set(cfg) - _ALLOWED[command]
    if unknown:
        raise ConfigError(
            f"unknown config keys for {command!r}: {sorted(unknown)} "
            f"(allowed: {sorted(_ALLOWED[command])})")
    missing = _REQUIRED[command] - set(cfg)
    if missing:
        raise ConfigError(f"missing config keys for {command!r}: {sorted(missing)}")


def _require(mapping: dict, key: str, kind, what: str):
    if key not in mapping:
        raise ConfigError(f"{what}: missing key {key!r}")
    value = mapping[key]
    if kind is float and isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if kind is int and isinstance(value, int) and not isinstance(value, bool):
        return value
    if not isinstance(value, kind):
        raise ConfigError(f"{what}: key {key!r} must be {kind.__name__}")
    return value


def parse_family(spec) -> ModelFamily:
    if not isinstance(spec, dict):
        raise ConfigError("family must be an object like "
                          '{"kind": "nonnegative", "p": 2}')
    unknown = set(spec) - {"kind", "p", "m", "phi_known"}
    if unknown:
        raise ConfigError(f"unknown family keys: {sorted(unknown)}")
    kind = _require(spec, "kind", str, "family")
    try:
        return ModelFamily(kind,
                           p=spec.get("p"),
                           m=spec.get("m"),
                           phi_known=spec.get("phi_known"))
    except SpecificationError as exc:
        raise ConfigError(str(exc)) from exc


def parse_term(spec) -> CovariateTerm:
    """Accept "intercept", ["cos", 12], ["abs_break", 118, 168] or
    {"kind": "cos", "period": 12}."""
    if isinstance(spec, str):
        spec = [spec]
    if isinstance(spec, list):
        if not spec or not isinstance(spec[0], str):
            raise ConfigError(f"bad covariate term: {spec!r}")
        kind, *args = spec
        if kind in ("cos", "sin"):
            if len(args) != 1:
                raise ConfigError(f"{kind} term takes one period argument")
            return CovariateTerm(kind, period=float(args[0]))
        if kind == "abs_break":
            if len(args) != 2:
                raise ConfigError("abs_break term takes t0 and scale arguments")
            return CovariateTerm(kind, t0=float(args[0]), scale=float(args[1]))
        if args:
            raise ConfigError(f"{kind} term takes no arguments")
        return CovariateTerm(kind)
    if isinstance(spec, dict):
        unknown = set(spec) - {"kind", "period", "t0", "scale"}
        if unknown:
            raise ConfigError(f"unknown term keys: {sorted(unknown)}")
        kind = _require(spec, "kind", str, "term")
        kwargs = {k: float(spec[k]) for k in ("period", "t0", "scale") if k in spec}
        return CovariateTerm(kind, **kwargs)
    raise ConfigError(f"bad covariate term: {spec!r}")


def parse_terms(cfg) -> tuple[CovariateTerm, ...]:
    terms = cfg.get("terms")
    if not isinstance(terms, list) or not terms:
        raise ConfigError('config key "terms" must be a nonempty list')
    try:
        return tuple(parse_term(t) for t in terms)
    except SpecificationError as exc:
        raise ConfigError(str(exc)) from exc


def parse_params(spec) -> ParameterSet:
    if not isinstance(spec, dict):
        raise ConfigError("params must be an object with beta, phi, sigma2, rho")
    unknown = set(spec) - {"beta", "phi", "sigma2", "rho"}
    if unknown:
        raise ConfigError(f"unknown params keys: {sorted(unknown)}")
    beta = _require(spec, "beta", list, "params")
    try:
        return ParameterSet(beta=np.asarray(beta, dtype=float),
                            phi=_require(spec, "phi", float, "params"),
                            sigma2=_require(spec, "sigma2", float, "params"),
                            rho=_require(spec, "rho", float, "params"))
    except SpecificationError as exc:
        raise ConfigError(str(exc)) from exc


def _fit_options(cfg) -> dict:
    opts = cfg.get("fit", {})
    if not isinstance(opts, dict):
        raise ConfigError('config key "fit" must be an object')
    unknown = set(opts) - {"max_iter", "tol", "init"}
    if unknown:
        raise ConfigError(f"unknown fit option keys: {sorted(unknown)}")
    out = {}
    if "max_iter" in opts:
        out["max_iter"] = _require(opts, "max_iter", int, "fit options")
    if "tol" in opts:
        out["tol"] = _require(opts, "tol", float, "fit options")
    if "init" in opts:
        out["init"] = np.asarray(_require(opts, "init", list, "fit options"), dtype=float)
    return out


def _load_dataset(cfg) -> tuple[DataSet, list[str]]:
    data = cfg.get("data")
    if not isinstance(data, dict):
        raise ConfigError('config key "data" must be an object')
    unknown = set(data) - {"path", "y_column", "covariate_columns"}
    if unknown:
        raise ConfigError(f"unknown data keys: {sorted(unknown)}")
    path = _require(data, "path", str, "data")
    y_column = _require(data, "y_column", str, "data")
    cov = data.get("covariate_columns", [])
    if not isinstance(cov, list) or not all(isinstance(c, str) for c in cov):
        raise ConfigError("covariate_columns must be a list of column names")
    return load_csv(path, y_column, cov), cov


def _fit_design(cfg, dataset: DataSet, cov_names: list[str]):
    """Design from declarative terms or raw CSV columns (exactly one)."""
    has_terms = "terms" in cfg
    if has_terms and cov_names:
        raise ConfigError("give either terms or data.covariate_columns, not both")
    if has_terms:
        return build_design(parse_terms(cfg), dataset.n)
    if cov_names:
        x = np.column_stack([dataset.columns[name] for name in cov_names])
        return DesignMatrix(x, names=tuple(cov_names))
    raise ConfigError("a design is required: terms or data.covariate_columns")


# ---------------------------------------------------------------------------
# Command handlers
# ---------------------------------------------------------------------------


def _cmd_simulate(cfg: dict, out_dir: Path) -> list[Path]:
    family = parse_family(cfg["family"])
    terms = parse_terms(cfg)
    params = parse_params(cfg["params"])
    n = _require(cfg, "n", int, "config")
    seed = _require(cfg, "seed", int, "config")
    design = build_design(terms, n)
    params.validate_for(family, design)
    path = simulate_latent(family, params.sigma2, params.rho, n,
                           (seed, 0, 0, rng.PATH_ROLE),
                           gar_init=cfg.get("latent_init", "stationary"))
    y = generate_response(family, design, params, path, cfg["conditional"],
                          (seed, 0, 0, rng.RESPONSE_ROLE))
    target = out_dir / "simulated.csv"
    write_csv(target, ["t", "alpha", "y"],
              zip(range(1, n + 1), path.alpha, y))
    return [target]


def _fit_payload(cfg, command):
    family = parse_family(cfg["family"])
    dataset, cov_names = _load_dataset(cfg)
    _check_support(family, dataset.y)
    design = _fit_design(cfg, dataset, cov_names)
    fit = fit_beta(family, design, dataset.y, **_fit_options(cfg))
    mu_hat = link_inverse(family, design.x @ fit.beta_hat)
    mm = estimate_nuisance(family, dataset.y, mu_hat)
    payload = {
        "artifact_version": __version__,
        "seed": cfg.get("seed"),
        "config": dict(cfg, command=command),
        "beta_hat": fit.beta_hat,
        "naive_se": fit.naive_se,
        "phi_hat": mm.phi_hat if mm.valid else None,
        "sigma2_hat": mm.sigma2_hat if mm.valid else None,
        "rho_hat": mm.rho_hat if mm.valid else None,
        "mm_valid": mm.valid,
        "diagnostics": json_ready(mm.diagnostics),
        "convergence": {
            "converged": fit.converged,
            "iterations": fit.iterations,
            "final_score_norm": fit.final_score_norm,
            "q_value": fit.q_value,
            "pearson_dispersion": fit.pearson_dispersion,
        },
    }
    return family, design, dataset, fit, mm, payload


def _cmd_fit(cfg: dict, out_dir: Path) -> list[Path]:
    *_, payload = _fit_payload(cfg, "fit")
    target = out_dir / "fit.json"
    write_json(target, payload)
    return [target]


def _cmd_mc_se(cfg: dict, out_dir: Path) -> list[Path]:
    family, design, dataset, fit, mm, payload = _fit_payload(cfg, "mc-se")
    if not mm.valid:
        raise StudyError(
            "cannot simulate standard errors: moment estimates are invalid "
            f"({mm.diagnostics.get('reason')})", diagnostics=mm.diagnostics)
    theta_hat = ParameterSet(beta=fit.beta_hat, phi=mm.phi_hat,
                             sigma2=mm.sigma2_hat, rho=mm.rho_hat)
    seed = _require(cfg, "seed", int, "config")
    replicas = _require(cfg, "replicas", int, "config")
    config = StudyConfig(
        family=family, terms=getattr(design, "terms", ()), true_params=theta_hat,
        conditional=cfg["conditional"], n=design.n, replicas=replicas,
        master_seed=seed, max_redraws=cfg.get("max_redraws", 100),
        design=design, latent_init=cfg.get("latent_init", "stationary"))
    result = run_study(config, workers=cfg.get("threads", 1))
    diag = standardized_diagnostics(result.estimates, result.param_names)
    payload["mc_se"] = {
        "replicas": replicas,
        "conditional": cfg["conditional"],
        "param_names": list(result.param_names),
        "means": result.means,
        "ses": result.ses,
        "redraws_total": int(result.redraws.sum()),
    }
    targets = [out_dir / "fit.json", out_dir / "histogram.csv", out_dir / "qq.csv"]
    write_json(targets[0], payload)
    hist_rows = []
    qq_rows = []
    for j, name in enumerate(diag.param_names):
        for b in range(diag.hist_counts.shape[1]):
            hist_rows.append((name, diag.hist_edges[j, b], diag.hist_edges[j, b + 1],
                              diag.hist_counts[j, b]))
        for theo, sample in zip(diag.qq_theoretical, diag.qq_sample[:, j]):
            qq_rows.append((name, theo, sample))
    write_csv(targets[1], ["parameter", "bin_left", "bin_right", "count"], hist_rows)
    write_csv(targets[2], ["parameter", "theoretical", "sample"], qq_rows)
    return targets


def _cmd_study(cfg: dict, out_dir: Path) -> list[Path]:
    family = parse_family(cfg["family"])
    terms = parse_terms(cfg)
    params = parse_params(cfg["params"])
    seed = _require(cfg, "seed", int, "config")
    replicas = _require(cfg, "replicas", int, "config")
    ns = cfg["n"] if isinstance(cfg["n"], list) else [cfg["n"]]
    if not ns or not all(isinstance(n, int) and n >= 1 for n in ns):
        raise ConfigError('"n" must be a positive integer or a list of them')
    cells = []
    for n in ns:
        config = StudyConfig(family=family, terms=terms, true_params=params,
                             conditional=cfg["conditional"], n=n,
                             replicas=replicas, master_seed=seed,
                             max_redraws=cfg.get("max_redraws", 100),
                             latent_init=cfg.get("latent_init", "stationary"))
        result = run_study(config, workers=cfg.get("threads", 1))
        cells.append((n, result))
    names = cells[0][1].param_names
    truth = cells[0][1].true_values
    header = ["parameter", "true"]
    for n, _ in cells:
        header += [f"mean_n{n}", f"se_n{n}"]
    rows = []
    for j, name in enumerate(names):
        row = [name, truth[j]]
        for _, result in cells:
            row.append(result.means[j])
            row.append(result.ses[j] if result.ses is not None else "")
        rows.append(row)
    targets = [out_dir / "study.csv", out_dir / "study.json"]
    write_csv(targets[0], header, rows)
    write_json(targets[1], {
        "artifact_version": __version__,
        "seed": seed,
        "config": dict(cfg, command="study"),
        "cells": [{
            "n": n,
            "replicas": result.replicas,
            "param_names": list(result.param_names),
            "true": result.true_values,
            "means": result.means,
            "ses": result.ses,
            "redraws_total": int(result.redraws.sum()),
            "total_simulations": result.total_simulations,
        } for n, result in cells],
    })
    return targets


def _cmd_moments(cfg: dict, out_dir: Path | None) -> list[Path]:
    family = parse_family(cfg["family"])
    params = parse_params(cfg["params"])
    terms = parse_terms(cfg)
    n = _require(cfg, "n", int, "config")
    lags = cfg.get("lags", [1, 2, 3, 4, 5])
    if not isinstance(lags, list) or not all(isinstance(k, int) and k >= 1 for k in lags):
        raise ConfigError('"lags" must be a list of positive integers')
    design = build_design(terms, n)
    report = moment_report(family, design, params)
    payload = {
        "artifact_version": __version__,
        "seed": None,
        "config": dict(cfg, command="moments"),
        "mean": report.mean,
        "variance": report.variance,
        # Lagged quantities are reported at t = 1 (stationary value for
        # intercept-only designs).
        "autocovariance": {str(k): report.autocov(1, k) for k in lags if k < n},
        "autocorrelation": {str(k): report.acf(1, k) for k in lags if k < n},
    }
    print(json.dumps(json_ready(payload), indent=2))
    if out_dir is not None:
        target = out_dir / "moments.json"
        write_json(target, payload)
        return [target]
    return []


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latentsts",
        description="Semiparametric time series driven by latent factors.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("simulate", "write a simulated trace CSV (t, alpha, y)"),
        ("fit", "quasi-likelihood + method-of-moments fit of a CSV series"),
        ("mc-se", "fit plus Monte Carlo standard errors and diagnostics data"),
        ("study", "simulation study table (parameter, true, mean, SE per n)"),
        ("moments", "print closed-form mean/variance/ACF"),
    ]:
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True,
                         help="path to a JSON config ('-' for stdin)")
        cmd.add_argument("--out", default=None, help="output directory")
        cmd.add_argument("--seed", type=int, default=None, help="override config seed")
        cmd.add_argument("--replicas", type=int, default=None,
                         help="override config replicas")
        cmd.add_argument("--threads", type=int, default=None,
                         help="override config threads")
    return parser


_HANDLERS = {
    "simulate": _cmd_simulate,
    "fit": _cmd_fit,
    "mc-se": _cmd_mc_se,
    "study": _cmd_study,
    "moments": _cmd_moments,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    command = args.command
    # Resolved early so a failing run can still write its error artifact.
    out_dir = Path(args.out) if args.out is not None else Path(".")
    try:
        cfg = _load_config(args.config)
        for key, value in [("out", args.out), ("seed", args.seed),
                           ("replicas", args.replicas), ("threads", args.threads)]:
            if value is not None:
                cfg[key] = value
        _validate_keys(cfg, command)
        if "threads" in cfg and (not isinstance(cfg["threads"], int) or cfg["threads"] < 1):
            raise ConfigError('"threads" must be a positive integer')
        out_given = "out" in cfg
        out_dir = Path(cfg.get("out", "."))
        if command == "moments":
            written = _cmd_moments(cfg, out_dir if out_given else None)
        else:
            written = _HANDLERS[command](cfg, out_dir)
        for target in written:
            print(f"wrote {target}", file=sys.stderr)
        return 0
    except LatentSTSError as exc:
        return _emit_error(exc, command, out_dir)
    except OSError as exc:
        return _emit_error(exc, command, out_dir, code="io")


def _emit_error(exc: Exception, command: str, out_dir: Path,
                code: str | None = None) -> int:
    if code is None:
        code = next((c for t, c in _ERROR_CODES.items() if isinstance(exc, t)), "error")
    context = {"command": command, "type": type(exc).__name__}
    if isinstance(exc, StudyError):
        if exc.replica is not None:
            context["replica"] = exc.replica
        if exc.diagnostics:
            context["diagnostics"] = json_ready(exc.diagnostics)
    if isinstance(exc, FitConvergenceError) and exc.result is not None:
        context["last_iterate"] = json_ready(exc.result.beta_hat)
    payload = {"code": code, "message": str(exc), "context": context}
    print(json.dumps(json_ready(payload)), file=sys.stderr)
    try:
        write_json(out_dir / "error.json", payload)
    except OSError:
        pass
    return 1


if __name__ == "__main__":
    sys.exit(main())
