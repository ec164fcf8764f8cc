import math

import numpy as np
import pytest
from scipy import stats

from gibbs_certify.errors import DomainError, NumericError, TruncationError, UnsupportedError
from gibbs_certify.kernel import x_chain_matrix
from gibbs_certify.models import BetaBinomial, FiniteModel, Gaussian, PoissonGamma
from gibbs_certify.oracle import (
    bivariate_tv_sandwich,
    exact_tv_finite,
    exact_tv_gaussian,
    exact_tv_joint,
    exact_tv_truncated,
    gaussian_tv,
    joint_chain_matrix,
    simulate_chain,
    three_component_exact_tv,
    three_component_sandwich,
)


def brute_tv(P, pi, i, ell):
    row = np.linalg.matrix_power(P, ell)[i]
    return 0.5 * np.abs(row - pi).sum()


def test_beta_binomial_n1_closed_form():
    tv = exact_tv_finite(x_chain_matrix(BetaBinomial(1)), 1, 40)
    assert np.allclose(tv, 0.5 * 3.0 ** -np.arange(41), atol=1e-12, rtol=0)


@pytest.mark.parametrize("n,x0", [(4, 0), (7, 3), (12, 12)])
def test_matches_matrix_power(n, x0):
    mat = x_chain_matrix(BetaBinomial(n))
    tv = exact_tv_finite(mat, x0, 25)
    for ell in (0, 1, 5, 25):
        assert tv[ell] == pytest.approx(brute_tv(mat.P, mat.stationary, x0, ell), abs=1e-13)


def test_tv_at_zero_is_one_minus_mass():
    model = BetaBinomial(5)
    assert exact_tv_finite(x_chain_matrix(model), 2, 0)[0] == pytest.approx(1 - 1 / 6)


def test_stationary_start_gives_zero():
    # a chain whose rows already equal the stationary law
    model = FiniteModel.from_joint(np.outer([0.3, 0.7], [0.4, 0.6]))
    tv = exact_tv_finite(x_chain_matrix(model), 0, 3)
    assert tv[1:] == pytest.approx([0, 0, 0], abs=1e-15)


def test_truncated_width_and_start():
    mat = x_chain_matrix(PoissonGamma(n_max=200), n_max=200)
    enc = exact_tv_truncated(mat, 0, 100)
    assert enc.estimate[0] == pytest.approx(0.5, abs=1e-15)
    assert np.all(enc.lower >= 0)
    assert np.all(enc.width[:31] < 1e-59)
    assert np.all(enc.width <= 1e-58)


def test_truncated_enclosure_contains_reference():
    reference = exact_tv_truncated(x_chain_matrix(PoissonGamma(n_max=200), n_max=200), 5, 60).estimate
    coarse = exact_tv_truncated(x_chain_matrix(PoissonGamma(n_max=16), n_max=16, tail_tol=1e-4), 5, 60)
    assert np.all(coarse.estimate - coarse.tail <= reference + 1e-15)
    assert np.all(reference <= coarse.estimate + coarse.tail + 1e-15)
    assert coarse.tail.max() > 1e-8  # the window is genuinely too small


def test_truncated_max_tail():
    mat = x_chain_matrix(PoissonGamma(n_max=16), n_max=16, tail_tol=1e-4)
    with pytest.raises(TruncationError):
        exact_tv_truncated(mat, 5, 60, max_tail=1e-12)
    with pytest.raises(UnsupportedError):
        exact_tv_truncated(x_chain_matrix(BetaBinomial(2)), 0, 3)


def midpoint_tv(mu1, v1, mu2, v2, panels=10 ** 6):
    lo = min(mu1 - 12 * math.sqrt(v1), mu2 - 12 * math.sqrt(v2))
    hi = max(mu1 + 12 * math.sqrt(v1), mu2 + 12 * math.sqrt(v2))
    edges = np.linspace(lo, hi, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    diff = stats.norm.pdf(mid, mu1, math.sqrt(v1)) - stats.norm.pdf(mid, mu2, math.sqrt(v2))
    return 0.5 * np.abs(diff).sum() * (edges[1] - edges[0])


@pytest.mark.parametrize("mu", [-2.0, -0.5, 0.0, 0.3, 3.0])
@pytest.mark.parametrize("var", [0.05, 0.3, 0.5, 1.0, 4.0])
def test_gaussian_tv_against_midpoint_rule(mu, var):
    assert gaussian_tv(mu, var, 0.0, 0.5) == pytest.approx(midpoint_tv(mu, var, 0.0, 0.5), abs=1e-9)


def test_gaussian_tv_edge_cases():
    assert gaussian_tv(1.0, 2.0, 1.0, 2.0) == 0.0
    # equal variances: erf formula
    assert gaussian_tv(0.0, 1.0, 1.0, 1.0) == pytest.approx(math.erf(0.5 / math.sqrt(2)), abs=1e-15)
    with pytest.raises(NumericError):
        gaussian_tv(0.0, 0.0, 0.0, 1.0)


def test_gaussian_chain_tv_example():
    g = Gaussian(0.25, 0.25)
    val = exact_tv_gaussian(g.ar_coefficient, g.step_var, g.marginal_var, 2.0, 1)
    # x' | x = 2 ~ N(1, 3/8) against N(0, 1/2)
    assert val == pytest.approx(midpoint_tv(1.0, 0.375, 0.0, 0.5), abs=1e-9)
    assert val == pytest.approx(0.5534957577995769, abs=1e-12)


def test_gaussian_tv_decays_from_centre():
    g = Gaussian(0.25, 0.25)
    tv = [exact_tv_gaussian(g.ar_coefficient, g.step_var, g.marginal_var, 0.0, ell) for ell in (0, 1, 5, 30)]
    assert tv[0] == 1.0
    assert tv[1] < 0.1 and tv[3] < 1e-12
    assert tv[1] > tv[2] > tv[3]


@pytest.mark.parametrize("model,x0", [(BetaBinomial(1), 1), (BetaBinomial(6), 2), (PoissonGamma(), 3),
                                      (Gaussian(), 1.5)])
def test_sandwich_is_shifted_curve(model, x0):
    sw = bivariate_tv_sandwich(model, x0, 20)
    assert sw.upper[0] == 1.0
    assert np.array_equal(sw.upper[1:], sw.lower[:-1])
    assert np.all(sw.lower <= sw.upper)


def test_sandwich_beta_binomial_n1():
    sw = bivariate_tv_sandwich(BetaBinomial(1), 1, 10)
    ell = np.arange(11)
    assert np.allclose(sw.lower, 0.5 * 3.0 ** -ell, atol=1e-14)
    assert np.allclose(sw.upper[1:], 0.5 * 3.0 ** -(ell[1:] - 1), atol=1e-14)


def test_sandwich_brackets_joint_tv(positive_3x3):
    K, pi = joint_chain_matrix(positive_3x3)
    sw = bivariate_tv_sandwich(positive_3x3, 1, 15)
    nt = positive_3x3.theta_space.size
    for j in range(nt):
        full = exact_tv_joint(K, pi, 1 * nt + j, 15)
        assert np.all(sw.lower[1:] <= full[1:] + 1e-12)
        assert np.all(full[1:] <= sw.upper[1:] + 1e-12)


def test_three_component_sandwich_brackets_full_tv():
    from conftest import random_three

    model = random_three(2)
    sw = three_component_sandwich(model, (0, 1), 20)
    for theta0 in (0, 1):
        full = three_component_exact_tv(model, (0, 1), 20, theta0=theta0)
        assert np.all(sw.lower[1:] <= full[1:] + 1e-12)
        assert np.all(full[1:] <= sw.upper[1:] + 1e-12)


def test_simulation_poisson_gamma_mean():
    res = simulate_chain(PoissonGamma(), 9, 1, 100_000, seed=2024)
    s = res.summary
    assert abs(s["mean_x"] - 5.0) < 3 * s["se_mean_x"]


def test_simulation_gaussian_variance():
    g = Gaussian(0.25, 0.25)
    res = simulate_chain(g, 3.0, 30, 50_000, seed=1)
    var = res.summary["var_x"]
    # sampling sd of a variance estimate is about var * sqrt(2/n)
    assert abs(var - g.marginal_var) < 4 * g.marginal_var * math.sqrt(2 / 50_000)


def test_simulation_reproducible():
    a = simulate_chain(BetaBinomial(10), 10, 5, 5000, seed=99)
    b = simulate_chain(BetaBinomial(10), 10, 5, 5000, seed=99)
    c = simulate_chain(BetaBinomial(10), 10, 5, 5000, seed=100)
    assert np.array_equal(a.x, b.x) and np.array_equal(a.theta, b.theta)
    assert not np.array_equal(a.x, c.x)


def test_simulation_rejects_bad_sizes():
    with pytest.raises(DomainError):
        simulate_chain(BetaBinomial(2), 0, 1, 0, seed=1)
