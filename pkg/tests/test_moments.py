import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

import latentsts as l
from latentsts.errors import DomainError, SpecificationError

NONNEG2 = l.ModelFamily.nonnegative(2)
REAL = l.ModelFamily.real_valued()
BOUNDED = l.ModelFamily.bounded()


# ---------------------------------------------------------------------------
# Second-moment factors of the bounded family's latent factor
# ---------------------------------------------------------------------------

def test_second_moment_factor_value():
    # ((1+x)^2 / (1+2x))^(1/x) at x = 0.3
    expected = (1.69 / 1.6) ** (1 / 0.3)
    assert_allclose(l.gar_factor_second_moment(0.3), expected, rtol=1e-12)


def test_product_moment_equals_second_moment_at_full_correlation():
    for x in np.geomspace(1e-6, 10, 40):
        assert l.gar_factor_product_moment(x, 1.0) == l.gar_factor_second_moment(x)


def test_product_moment_limits():
    # v(x, 0) = 1 exactly; v(x, y) -> 1 as y -> 0
    for x in (0.01, 0.3, 2.0):
        assert l.gar_factor_product_moment(x, 0.0) == 1.0
        assert abs(l.gar_factor_product_moment(x, 1e-12) - 1.0) <= 1e-9
    # tiny sigma2 substitutes the analytic limit
    assert l.gar_factor_product_moment(1e-9, 0.7) == 1.0
    assert l.gar_factor_second_moment(1e-9) == 1.0


def test_product_moment_monte_carlo_oracle():
    # E[exp(-Z_{t+1}) exp(-Z_t)] over the shifted process against v
    s2, rho, n = 0.3, 0.8, 10**6
    path = l.shift_gar1(l.simulate_gar1(s2, rho, n, 404))
    eps = np.exp(-path.alpha)
    prod = eps[:-1] * eps[1:]
    se = prod.std() / math.sqrt(n / 8)  # dependence-inflated, conservative
    assert abs(prod.mean() - l.gar_factor_product_moment(s2, rho)) < 4 * se


def test_product_moment_validation():
    with pytest.raises(SpecificationError):
        l.gar_factor_product_moment(-0.1, 0.5)
    with pytest.raises(SpecificationError):
        l.gar_factor_product_moment(0.3, 1.5)


# ---------------------------------------------------------------------------
# Marginal means
# ---------------------------------------------------------------------------

def test_marginal_mean_values():
    d = l.build_design([l.intercept()], 5)
    real_params = l.ParameterSet([0.1], phi=3.0, sigma2=1.0, rho=0.5)
    assert_allclose(l.marginal_mean(REAL, d, real_params), 0.1)

    d2 = l.DesignMatrix(np.array([[1.0, 1.0, 0.0]]))
    nn = l.ParameterSet([5.0, -0.2, 0.4], phi=0.1, sigma2=0.5, rho=0.6)
    assert_allclose(l.marginal_mean(NONNEG2, d2, nn), math.exp(4.8), rtol=1e-14)
    assert_allclose(l.marginal_mean(NONNEG2, d2, nn), 121.51, atol=5e-3)

    d3 = l.build_design([l.intercept()], 3)
    bd = l.ParameterSet([1.0], phi=0.1, sigma2=0.3, rho=0.8)
    assert_allclose(l.marginal_mean(BOUNDED, d3, bd), math.exp(-1), rtol=1e-14)


def test_marginal_mean_bounded_lists_offending_times():
    d = l.build_design([l.intercept(), l.linear_trend()], 10)
    bad = l.ParameterSet([0.35, -1.0], phi=0.1, sigma2=0.3, rho=0.8)
    with pytest.raises(DomainError) as err:
        l.marginal_mean(BOUNDED, d, bad)
    # x't beta = 0.35 - t/10 <= 0 from t = 4 on
    assert "4" in str(err.value)


# ---------------------------------------------------------------------------
# Marginal variances
# ---------------------------------------------------------------------------

def test_marginal_variance_values():
    real_params = l.ParameterSet([0.1], phi=3.0, sigma2=1.0, rho=0.5)
    assert l.marginal_variance(REAL, real_params, -7.7) == 4.0

    nn = l.ParameterSet([0.0], phi=0.1, sigma2=0.5, rho=0.6)
    expected = 0.1 * math.exp(0.5) + math.expm1(0.5)
    assert_allclose(l.marginal_variance(NONNEG2, nn, 1.0), expected, rtol=1e-14)
    assert_allclose(l.marginal_variance(NONNEG2, nn, 1.0), 0.81359, atol=5e-6)

    # phi -> 0: variance collapses to mu^2 (w - 1)
    bd = l.ParameterSet([1.0], phi=1e-14, sigma2=0.3, rho=0.8)
    w = l.gar_factor_second_moment(0.3)
    assert_allclose(l.marginal_variance(BOUNDED, bd, 0.5), 0.25 * (w - 1.0),
                    atol=1e-13)
    assert_allclose(0.25 * (w - 1.0), 0.050035, atol=5e-5)


def test_marginal_variance_monte_carlo_oracle():
    # gamma-conditional responses at a constant mean; empirical variance
    # against the closed form (independent replica batches for the SE)
    params = l.ParameterSet([0.0], phi=0.1, sigma2=0.5, rho=0.6)
    d = l.build_design([l.intercept()], 10_000)
    chunks = []
    for r in range(100):
        path = l.simulate_latent(NONNEG2, 0.5, 0.6, 10_000, (505, r))
        y = l.generate_response(NONNEG2, d, params, path, "gamma", (505, r, 1))
        chunks.append(((y - 1.0) ** 2).mean())
    chunks = np.asarray(chunks)
    closed = l.marginal_variance(NONNEG2, params, 1.0)
    se = chunks.std(ddof=1) / 10
    assert abs(chunks.mean() - closed) < 4 * se


def test_marginal_variance_domain():
    nn = l.ParameterSet([0.0], phi=0.1, sigma2=0.5, rho=0.6)
    with pytest.raises(DomainError):
        l.marginal_variance(NONNEG2, nn, -1.0)
    with pytest.raises(DomainError):
        l.marginal_variance(BOUNDED, l.ParameterSet([1.0], phi=0.1, sigma2=0.3, rho=0.8), 1.5)


# ---------------------------------------------------------------------------
# Autocovariance / autocorrelation
# ---------------------------------------------------------------------------

def test_autocovariance_values():
    real_params = l.ParameterSet([0.1], phi=3.0, sigma2=1.0, rho=0.5)
    assert_allclose(l.autocovariance(REAL, real_params, 0.0, 0.0, 2), 0.25, rtol=1e-15)

    nn = l.ParameterSet([0.0], phi=0.1, sigma2=0.5, rho=0.0)
    assert l.autocovariance(NONNEG2, nn, 2.0, 3.0, 1) == 0.0

    bd = l.ParameterSet([1.0], phi=0.1, sigma2=0.3, rho=1e-9)
    assert abs(l.autocovariance(BOUNDED, bd, 0.4, 0.4, 1)) < 1e-9

    with pytest.raises(SpecificationError):
        l.autocovariance(REAL, real_params, 0.0, 0.0, 0)


def test_autocorrelation_values():
    real_params = l.ParameterSet([0.1], phi=3.0, sigma2=1.0, rho=0.5)
    assert_allclose(l.autocorrelation(REAL, real_params, 0.0, 0.0, 1), 0.125,
                    rtol=1e-14)
    # no dispersion: the latent ACF passes through
    pure = l.ParameterSet([0.1], phi=1e-300, sigma2=1.0, rho=0.5)
    assert_allclose(l.autocorrelation(REAL, pure, 0.0, 0.0, 1), 0.5, rtol=1e-12)
    # independence at rho = 0, every family
    for family, mu in ((REAL, 0.0), (NONNEG2, 2.0), (BOUNDED, 0.3)):
        params = l.ParameterSet([0.5], phi=0.1, sigma2=0.5, rho=0.0)
        assert l.autocorrelation(family, params, mu, mu, 3) == 0.0


@pytest.mark.parametrize("family,mu_lo,mu_hi", [
    (l.ModelFamily.nonnegative(0.5), 0.5, 40.0),
    (NONNEG2, 0.5, 40.0),
    (REAL, -5.0, 5.0),
    (BOUNDED, 0.05, 0.95),
])
def test_autocorrelation_consistent_with_autocovariance(family, mu_lo, mu_hi):
    gen = np.random.Generator(np.random.Philox(606))
    for _ in range(50):
        params = l.ParameterSet([0.0], phi=float(gen.uniform(0.01, 0.9)),
                                sigma2=float(gen.uniform(0.05, 2.0)),
                                rho=float(gen.uniform(0.05, 0.95)))
        mu1, mu2 = gen.uniform(mu_lo, mu_hi, size=2)
        k = int(gen.integers(1, 6))
        acov = l.autocovariance(family, params, mu1, mu2, k)
        var1 = l.marginal_variance(family, params, mu1)
        var2 = l.marginal_variance(family, params, mu2)
        acf = l.autocorrelation(family, params, mu1, mu2, k)
        assert_allclose(acf * math.sqrt(var1 * var2), acov, rtol=1e-12, atol=1e-12)
        assert abs(acf) <= 1.0


def test_autocorrelation_avoids_overflow_for_large_means():
    # mu**p overflows in double for p = 3, mu = 1e120; the normalized form must not
    params = l.ParameterSet([0.0], phi=0.1, sigma2=0.5, rho=0.6)
    fam = l.ModelFamily.nonnegative(3.0)
    acf = l.autocorrelation(fam, params, 1e120, 1e120, 1)
    assert np.isfinite(acf) and 0 < acf < 1


@pytest.mark.parametrize("family,mu", [(NONNEG2, 3.0), (REAL, 0.0), (BOUNDED, 0.3)])
def test_autocovariance_monotone_in_lag(family, mu):
    params = l.ParameterSet([0.5], phi=0.2, sigma2=0.4, rho=0.7)
    acovs = [abs(l.autocovariance(family, params, mu, mu, k)) for k in range(1, 21)]
    assert all(a >= b for a, b in zip(acovs, acovs[1:]))


# ---------------------------------------------------------------------------
# Moment report
# ---------------------------------------------------------------------------

def test_moment_report():
    d = l.build_design([l.intercept(), l.cosine(12), l.sine(12)], 60)
    params = l.ParameterSet([5.0, -0.2, 0.4], phi=0.1, sigma2=0.5, rho=0.6)
    report = l.moment_report(NONNEG2, d, params)
    assert report.mean.shape == (60,)
    assert np.all(report.variance > 0)
    # lag 0 delegates to the marginal variance
    assert report.autocov(5, 0) == report.variance[4]
    assert report.acf(5, 0) == 1.0
    assert_allclose(
        report.autocov(3, 2),
        l.autocovariance(NONNEG2, params, report.mean[2], report.mean[4], 2))
    assert abs(report.acf(3, 2)) <= 1.0
    with pytest.raises(SpecificationError):
        report.autocov(60, 1)  # t + k beyond the sample
    with pytest.raises(SpecificationError):
        report.acf(0, 1)
