import math

import numpy as np
import pytest
from scipy import integrate, special, stats

from gibbs_certify.errors import TruncationError
from gibbs_certify.kernel import (
    drift_expectation,
    gibbs_step,
    truncation_for,
    x_chain_matrix,
    x_chain_transition,
)
from gibbs_certify.models import BetaBinomial, FiniteModel, Gaussian, PoissonGamma


def test_beta_binomial_n1_matrix():
    # P(0 -> 1) = int theta * 2 (1 - theta) dtheta = 1/3
    assert x_chain_transition(BetaBinomial(1), 0, 1) == pytest.approx(1 / 3, abs=1e-15)
    P = x_chain_matrix(BetaBinomial(1)).P
    assert np.allclose(P, [[2 / 3, 1 / 3], [1 / 3, 2 / 3]], atol=1e-15)


@pytest.mark.parametrize("n", [2, 6])
def test_beta_binomial_matrix_matches_quadrature(n):
    model = BetaBinomial(n)
    P = x_chain_matrix(model).P
    for x in (0, n // 2):
        for k in range(n + 1):
            val = integrate.quad(lambda t: stats.beta.pdf(t, x + 1, n - x + 1) * stats.binom.pmf(k, n, t), 0, 1,
                                 epsabs=1e-14)[0]
            assert P[x, k] == pytest.approx(val, abs=1e-12)


def test_poisson_gamma_transition_formula():
    model = PoissonGamma()
    for x in (0, 3, 8):
        for k in (0, 1, 5):
            expected = special.comb(x + k, k, exact=True) * (2 / 3) ** (x + 1) * (1 / 3) ** k
            assert x_chain_transition(model, x, k) == pytest.approx(expected, rel=1e-12)


def test_poisson_gamma_truncation():
    mat = x_chain_matrix(PoissonGamma(n_max=200), n_max=200)
    assert mat.stationary_tail < 1e-60
    assert mat.row_defect() <= 1e-12
    with pytest.raises(TruncationError, match="n_max"):
        x_chain_matrix(PoissonGamma(n_max=200), n_max=10)


def test_gaussian_transition_law():
    g = Gaussian(0.25, 0.25)
    x = 1.2
    dens = lambda y: x_chain_transition(g, x, y)
    assert integrate.quad(dens, -np.inf, np.inf)[0] == pytest.approx(1.0, abs=1e-10)
    mean = integrate.quad(lambda y: y * dens(y), -np.inf, np.inf)[0]
    var = integrate.quad(lambda y: (y - mean) ** 2 * dens(y), -np.inf, np.inf)[0]
    assert mean == pytest.approx(2 * 0.25 * x, abs=1e-10)
    assert var == pytest.approx(0.25 * (1 + 2 * 0.25), abs=1e-10)


@pytest.mark.parametrize("model", [BetaBinomial(1), BetaBinomial(7), PoissonGamma()])
def test_rows_and_reversibility(model):
    mat = x_chain_matrix(model)
    assert mat.row_defect() <= 1e-12
    assert mat.reversibility_defect() <= 1e-10
    assert mat.stationarity_defect() <= 1e-10


def test_finite_model_rows(positive_3x3):
    mat = x_chain_matrix(positive_3x3)
    assert mat.row_defect() <= 1e-12
    assert mat.reversibility_defect() <= 1e-10


def test_gibbs_step_reproducible():
    model = BetaBinomial(10)
    a = gibbs_step(model, 10, np.random.default_rng(7))
    b = gibbs_step(model, 10, np.random.default_rng(7))
    assert a == b


def test_gibbs_step_poisson_gamma_mean():
    rng = np.random.default_rng(123)
    x, _ = gibbs_step(PoissonGamma(), np.full(100_000, 3.0), rng)
    se = x.std(ddof=1) / math.sqrt(x.size)
    assert abs(x.mean() - 2.0) < 3 * se


def test_gibbs_step_beta_binomial_stationary():
    rng = np.random.default_rng(5)
    x = np.zeros(40_000)
    for _ in range(20):
        x, _ = gibbs_step(BetaBinomial(1), x, rng)
    p = x.mean()
    assert abs(p - 0.5) < 3 * math.sqrt(0.25 / x.size)


@pytest.mark.parametrize("x,expected", [(3, 2.0), (0, 0.5)])
def test_poisson_gamma_drift_examples(x, expected):
    assert drift_expectation(PoissonGamma(), "x", x) == pytest.approx(expected, abs=1e-10)


def test_gaussian_drift_below_linear_bound():
    s2 = t2 = 0.25
    s, t = math.sqrt(s2), math.sqrt(t2)
    alpha = s * math.sqrt(2 / math.pi) + math.sqrt(2) * s * t * math.sqrt(2 / math.pi)
    g = Gaussian(s2, t2)
    for x in np.linspace(-5, 5, 11):
        assert drift_expectation(g, "abs", x) <= alpha + 2 * t2 * abs(x) + 1e-8


def test_gaussian_drift_exact_folded_normal():
    # E|Y| for Y ~ N(mu, v) in closed form
    g = Gaussian(0.25, 0.25)
    for x in (-3.0, 0.0, 1.7):
        mu, sd = g.ar_coefficient * x, math.sqrt(g.step_var)
        exact = sd * math.sqrt(2 / math.pi) * math.exp(-mu ** 2 / (2 * sd ** 2)) + mu * special.erf(mu / (sd * math.sqrt(2)))
        assert drift_expectation(g, "abs", x) == pytest.approx(exact, abs=1e-10)


def test_truncation_drift_check():
    with pytest.raises(TruncationError):
        drift_expectation(PoissonGamma(n_max=20), "x", 19)


def test_truncation_for_keeps_start_inside():
    assert truncation_for(PoissonGamma(), 30) >= 4 * 31
    assert truncation_for(BetaBinomial(3), 1) is None
