import numpy as np
import pytest

import latentsts as l

# The three simulation-study configurations exercised throughout the suite
# (family, covariate terms, true parameters, conditional law, latent start).
STUDIES = {
    1: dict(
        family=l.ModelFamily.nonnegative(2),
        terms=(l.intercept(), l.cosine(12), l.sine(12)),
        params=l.ParameterSet([5.0, -0.2, 0.4], phi=0.1, sigma2=0.5, rho=0.6),
        conditional="gamma",
        latent_init="stationary",
    ),
    2: dict(
        family=l.ModelFamily.real_valued(),
        terms=(l.intercept(), l.linear_trend(), l.cosine(6)),
        params=l.ParameterSet([0.1, 0.5, 0.7], phi=3.0, sigma2=1.0, rho=0.5),
        conditional="normal",
        latent_init="stationary",
    ),
    3: dict(
        family=l.ModelFamily.bounded(),
        terms=(l.intercept(), l.linear_trend(), l.quadratic_trend()),
        params=l.ParameterSet([1.0, 0.3, 0.5], phi=0.1, sigma2=0.3, rho=0.8),
        conditional="beta",
        latent_init="innovation",  # published tables embed this start-up
    ),
}


def study_config(study: int, n: int, replicas: int, master_seed: int) -> l.StudyConfig:
    cfg = STUDIES[study]
    return l.StudyConfig(
        family=cfg["family"], terms=cfg["terms"], true_params=cfg["params"],
        conditional=cfg["conditional"], n=n, replicas=replicas,
        master_seed=master_seed, latent_init=cfg["latent_init"])


def batch_se(values: np.ndarray, batches: int = 100) -> float:
    """Standard error of the mean of a dependent sequence via batch means."""
    usable = (len(values) // batches) * batches
    means = values[:usable].reshape(batches, -1).mean(axis=1)
    return float(means.std(ddof=1) / np.sqrt(batches))


def segment_acf(values: np.ndarray, lag: int, segments: int = 100):
    """Mean and SE of the lag-k autocorrelation over disjoint segments."""
    usable = (len(values) // segments) * segments
    parts = values[:usable].reshape(segments, -1)
    acfs = []
    for seg in parts:
        d = seg - seg.mean()
        acfs.append(float(d[:-lag] @ d[lag:] / (d @ d)))
    acfs = np.asarray(acfs)
    return float(acfs.mean()), float(acfs.std(ddof=1) / np.sqrt(segments))


@pytest.fixture(scope="session")
def zero_path_factory():
    """Latent path that is identically zero (degenerate latent process)."""
    def make(n: int) -> l.LatentPath:
        spec = l.LatentSpec("gaussian_ar1", sigma2=1e-12, rho=0.0, c=0.0)
        return l.LatentPath(np.zeros(n), spec, (0,))
    return make
