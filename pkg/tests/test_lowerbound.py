import math

import numpy as np
import pytest

from longmem import lowerbound, models
from longmem.errors import DomainError, FactorizationError
from longmem.svclass import Envelope


def test_identical_measures_give_zero():
    g = models.autocovariance(models.arfima(0.3), 63)
    x = np.random.default_rng(0).standard_normal(64)
    assert lowerbound.log_likelihood_ratio(x, g, g) == 0.0


def test_scalar_example():
    val = lowerbound.log_likelihood_ratio(np.array([0.0]), np.array([1.0]), np.array([2.0]))
    assert val == pytest.approx(-0.346574, abs=1e-6)
    assert val == pytest.approx(-0.5 * math.log(2), rel=1e-15)


def test_matches_dense_gaussian_densities():
    from scipy import linalg, stats

    n = 40
    gm = models.autocovariance(models.arfima(0.35), n - 1).gamma
    gp = models.autocovariance(models.arfima(-0.2, 1.3), n - 1).gamma
    x = np.random.default_rng(1).standard_normal(n)
    ref = (stats.multivariate_normal(cov=linalg.toeplitz(gp)).logpdf(x)
           - stats.multivariate_normal(cov=linalg.toeplitz(gm)).logpdf(x))
    assert lowerbound.log_likelihood_ratio(x, gm, gp) == pytest.approx(ref, rel=1e-9)


def test_antisymmetry_exact():
    n = 128
    pair = models.make_lower_bound_pair(n, 1.0, Envelope.log_inverse(1.0))
    gm, gp = lowerbound.pair_covariances(pair, n)
    gpair = lowerbound.GaussianPair(gm, gp, n)
    X = gpair.sample("minus", 2, 20)
    np.testing.assert_array_equal(gpair.swapped().llr(X), -gpair.llr(X))


def test_factorization_failure_reports_minor():
    bad = np.array([1.0, 0.0, 1.5, 0.0])
    good = np.array([1.0, 0.0, 0.0, 0.0])
    with pytest.raises(FactorizationError) as exc:
        lowerbound.log_likelihood_ratio(np.zeros(4), good, bad)
    assert exc.value.minor == 3
    assert "order 3" in str(exc.value)


def test_exact_moments_vs_monte_carlo():
    n = 128
    pair = models.make_lower_bound_pair(n, 1.0, Envelope.log_inverse(1.0))
    gm, gp = lowerbound.pair_covariances(pair, n)
    gpair = lowerbound.GaussianPair(gm, gp, n)
    ex = lowerbound.exact_moments(gpair)
    assert ex.mean < 0
    lam = gpair.llr(gpair.sample("minus", 4, 4000))
    assert abs(lam.mean() - ex.mean) <= 4 * lam.std() / math.sqrt(lam.size)
    assert lam.var() == pytest.approx(ex.var, rel=0.2)


def test_experiment_guards():
    pair = lowerbound.degenerate_pair(16)
    with pytest.raises(DomainError):
        lowerbound.TwoPointExperiment(pair, 5000, 10)
    with pytest.raises(DomainError):
        lowerbound.TwoPointExperiment(pair, 16, 0)
    with pytest.raises(DomainError):
        lowerbound.TwoPointExperiment(pair, 16, 5, tau=1.0)
    with pytest.raises(DomainError):
        lowerbound.run_experiment(lowerbound.TwoPointExperiment(pair, 16, 5), 9)


def test_degenerate_pair():
    rep = lowerbound.run_experiment(lowerbound.TwoPointExperiment(lowerbound.degenerate_pair(64), 64, 30), 10)
    assert rep.alpha_n == 0 and rep.mean_lambda == 0 and rep.var_lambda == 0
    assert rep.p_accept == 1.0 and rep.risk_floor == 0.0


def test_small_ell_forces_acceptance():
    n = 512
    pair = models.make_lower_bound_pair(n, 1e-3, Envelope.log_inverse(1.0))
    rep = lowerbound.run_experiment(lowerbound.TwoPointExperiment(pair, n, 300, seed=3), 40)
    assert rep.p_accept >= 0.99


def test_report_invariants_and_floor_chain():
    n = 256
    env = Envelope.log_inverse(1.0)
    for ell in (0.5, 2.0):
        pair = models.make_lower_bound_pair(n, ell, env)
        rep = lowerbound.run_experiment(lowerbound.TwoPointExperiment(pair, n, 200, seed=5), 40)
        assert 0 <= rep.p_accept <= 1 and rep.risk_floor >= 0
        assert rep.risk_floor == pytest.approx(0.5 * rep.alpha_n * rep.p_accept)
        assert rep.risk_floor <= rep.gph_risk_max + 3 * rep.se_gph_risk
        row = rep.to_row()
        assert set(row) >= {"mean_lambda", "var_lambda", "p_accept", "risk_floor", "gph_risk"}


def test_mean_lambda_negative_and_kl_constant_power_envelope():
    # E[Lambda] = -KL <= 0. For the power envelope KL grows like ell^(1 + 2 beta),
    # so the fitted C1 = |mean| / ell is not constant in ell at this n.
    n = 256
    env = Envelope.power(1.0, 1.0)
    c1 = []
    for ell in (0.25, 0.5, 1.0, 2.0):
        pair = models.make_lower_bound_pair(n, ell, env)
        gm, gp = lowerbound.pair_covariances(pair, n)
        ex = lowerbound.exact_moments(lowerbound.GaussianPair(gm, gp, n))
        assert ex.mean < 0
        c1.append(-ex.mean / ell)
    assert np.all(np.diff(c1) > 0)


def test_sampling_reproducible():
    n = 64
    pair = models.make_lower_bound_pair(n, 1.0, Envelope.log_inverse(1.0))
    exp = lowerbound.TwoPointExperiment(pair, n, 20, seed=9)
    a = lowerbound.run_experiment(exp, 10, keep_lambdas=True)
    b = lowerbound.run_experiment(exp, 10, keep_lambdas=True)
    np.testing.assert_array_equal(a.lambdas, b.lambdas)
