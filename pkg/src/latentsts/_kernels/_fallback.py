"""Pure-Python latent-path kernels.

These mirror ``_native`` exactly: both consume the same distribution draws
from the same bit generator in the same order, so a given stream key yields
bit-identical paths whichever kernel is selected.  The recursions cannot be
vectorized (each step's distribution depends on the previous state), which
is why a compiled version exists at all.
"""

from __future__ import annotations

import numpy as np

IMPLEMENTATION = "python"


def gaussian_ar1_path(bitgen: np.random.Philox, n: int, c: float, rho: float,
                      start_mean: float, start_sd: float, innov_sd: float) -> np.ndarray:
    """alpha_0 ~ N(start_mean, start_sd^2), alpha_t = c + rho alpha_{t-1} + innov_sd xi_t."""
    rng = np.random.Generator(bitgen)
    xi = rng.standard_normal(size=n)
    out = np.empty(n)
    prev = start_mean + start_sd * xi[0]
    out[0] = prev
    xs = xi.tolist()
    for t in range(1, n):
        prev = (c + rho * prev) + (innov_sd * xs[t])
        out[t] = prev
    return out


def gar1_path(bitgen: np.random.Philox, n: int, shape: float, start_scale: float,
              pois_coef: float, thin_scale: float, innov_scale: float) -> np.ndarray:
    """First-order gamma autoregression via Poisson-compounded exponential thinning.

    z_0 ~ Gamma(shape, start_scale); then for each step draw
    N ~ Poisson(pois_coef * z), add Gamma(N, thin_scale) (a sum of N
    exponentials; zero when N = 0) plus a Gamma(shape, innov_scale)
    innovation.
    """
    rng = np.random.Generator(bitgen)
    out = np.empty(n)
    z = rng.gamma(shape, start_scale)
    out[0] = z
    for t in range(1, n):
        count = rng.poisson(pois_coef * z)
        thinned = rng.gamma(float(count), thin_scale)
        z = thinned + rng.gamma(shape, innov_scale)
        out[t] = z
    return out
