import itertools
import math

import numpy as np
import pytest

from gibbs_certify.bounds import (
    BoundCurve,
    dks_beta_binomial_bounds,
    numeric_eigendecomposition,
    prop3_epsilon,
    prop4_bound_curve,
    prop4_v,
    rosenthal_bound_curve,
    rosenthal_t,
    spectral_bound,
    spectral_bound_curve,
    uniform_bound_curve,
    uniform_u,
    verify_drift,
)
from gibbs_certify.errors import CertificateError, DomainError
from gibbs_certify.kernel import TransitionMatrix, x_chain_matrix
from gibbs_certify.models import BetaBinomial, FiniteModel, Gaussian, PoissonGamma, ThreeComponentModel
from gibbs_certify.oracle import exact_tv_finite
from gibbs_certify.spaces import Subset


# -- uniform minorization ----------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 5, 10, 20])
def test_uniform_u_reaches_closed_form(n):
    u, B = uniform_u(BetaBinomial(n))
    closed = (1 / (n + 1)) * (n / (2 * (n + 1))) ** n
    assert u >= closed * (1 - 1e-12)
    assert B.kind == "interval"


def test_uniform_u_vanishes_on_unbounded_models():
    assert uniform_u(PoissonGamma()) == (0.0, None)
    assert uniform_u(Gaussian()) == (0.0, None)


def test_uniform_u_zero_density_candidates(block_diagonal):
    assert uniform_u(block_diagonal)[0] == 0.0


def test_uniform_curve_values():
    c = uniform_bound_curve(0.125, 0.5, 5)
    assert c.params["rho"] == 0.75
    assert np.allclose(c.values, 0.75 ** np.arange(6))
    assert np.all(uniform_bound_curve(0.0, 0.5, 5).values == 1.0)
    with pytest.raises(CertificateError):
        uniform_bound_curve(0.6, 0.5, 5)


def test_rho_n10_extended_precision():
    u, _ = uniform_u(BetaBinomial(10))
    rho = uniform_bound_curve(u, BetaBinomial(10).sup_m(), 1).params["rho"]
    # 1 - (5/11)^10 evaluated with 40 digits
    assert rho == pytest.approx(0.999623492881416472902964, abs=1e-13)


# -- drift ------------------------------------------------------------------

def test_verify_drift_defaults():
    for model in (BetaBinomial(6), PoissonGamma(), Gaussian()):
        cert = verify_drift(model)
        assert np.all(cert.slack >= -1e-8)


def test_verify_drift_rejects_wrong_constants():
    with pytest.raises(CertificateError):
        verify_drift(PoissonGamma(), "x", 0.4, 0.5)
    with pytest.raises(CertificateError):
        verify_drift(PoissonGamma(), "x", 0.5, 1.0)


# -- rosenthal rate -----------------------------------------------------------

def test_rosenthal_t_examples():
    r1 = rosenthal_t(0.5, 0.5, 20, 0.05)
    assert r1.feasible and r1.t == pytest.approx(0.68585923035965568, abs=1e-14)
    r2 = rosenthal_t(0.5, 0.5, 3, 0.5)
    assert not r2.feasible and r2.t == pytest.approx(2.0916500663351889, abs=1e-14)
    assert r2.t == pytest.approx(math.sqrt(5 * 3.5) / math.sqrt(4), abs=1e-14)


@pytest.mark.parametrize("args", [(0.5, 0.5, 2.0, 0.5), (0.5, 0.5, 3.0, 0.0), (0.5, 0.5, 3.0, 1.0),
                                  (0.5, 1.0, 3.0, 0.5), (-0.1, 0.5, 3.0, 0.5)])
def test_rosenthal_t_domain(args):
    with pytest.raises(DomainError):
        rosenthal_t(*args)


def test_rosenthal_curve_shape():
    drift = verify_drift(PoissonGamma())
    curve = rosenthal_bound_curve(drift, 0.5, 20.0, 0.05, 0.0, 400)
    assert curve.raw[0] == pytest.approx(1 + 1 + 1 + 0)
    assert curve.values[0] == 1.0
    t = curve.params["t"]
    ell = np.arange(401)
    assert np.allclose(curve.raw[1:], ((0.5) ** (0.05 * ell) + t ** ell * 2.0)[1:], rtol=1e-12)
    assert curve.values[-1] < 1e-5
    with pytest.raises(CertificateError):
        rosenthal_bound_curve(drift, 0.01, 3.0, 0.5, 0.0, 10)


# -- small-set minorization ---------------------------------------------------

def test_prop3_epsilon_poisson_gamma_example():
    cert = prop3_epsilon(PoissonGamma(), 4, "x", Subset.interval(0.5, 2.0))
    pi_b = math.exp(-0.5) - math.exp(-2.0)
    # e^{-theta} theta^x / x! is log-concave in theta, so the minimum over
    # [0.5, 2] sits at an endpoint; enumerate x = 0..4 at both
    fmin = min(math.exp(-t) * t ** x / math.factorial(x) for x in range(5) for t in (0.5, 2.0))
    assert cert.epsilon == pytest.approx(pi_b * fmin / 0.5, rel=1e-12)
    assert cert.epsilon == pytest.approx(0.0014885127216017892, rel=1e-12)


def test_prop3_epsilon_gaussian_positive():
    cert = prop3_epsilon(Gaussian(), 1.0, "abs", Subset.interval(-1.0, 1.0))
    assert 0 < cert.epsilon < 1


def test_prop3_epsilon_null_set():
    with pytest.raises(CertificateError):
        prop3_epsilon(PoissonGamma(), 4, "x", Subset.interval(-2.0, -1.0))


# -- three-component bound ----------------------------------------------------

def test_three_component_uniform_cube(cube):
    v, B = prop4_v(cube)
    # enumeration: mu2(X2) = 2, f = 1/4, h = 1/2; best B is the whole space
    assert v == pytest.approx(2 * 1.0 * (1 / 4) ** 2 / (1 / 2))
    curve = prop4_bound_curve(cube, 5)
    assert curve.params["rho"] < 1


def test_three_component_enumeration_oracle():
    from conftest import random_three

    model = random_three(8)
    pi = model.theta_space.weights
    best = 0.0
    for k in range(1, 3):
        for c in itertools.combinations(range(2), k):
            c = list(c)
            val = 2 * pi[c].sum() * model.f[:, :, c].min() ** 2 / model.h[:, c].max()
            best = max(best, val)
    assert prop4_v(model)[0] == pytest.approx(best, rel=1e-14)


def test_three_component_zero_cell_is_vacuous():
    # each theta has one empty (x1, x2) cell, so every candidate B sees a zero
    f = np.full((2, 2, 2), 1 / 3)
    f[0, 0, 0] = 0.0
    f[1, 1, 1] = 0.0
    model = ThreeComponentModel([0, 1], [0, 1], [0, 1], [1, 1], [1, 1], [0.5, 0.5], f)
    v, B = prop4_v(model)
    assert v == 0.0 and B is None
    assert np.all(prop4_bound_curve(model, 5).values == 1.0)


@pytest.mark.parametrize("c", [0.1, 3.0])
def test_three_component_invariant_under_base_measure(c):
    from conftest import random_three

    model = random_three(4)
    scaled = model.with_mu2_scaled(c)
    a, b = prop4_bound_curve(model, 10), prop4_bound_curve(scaled, 10)
    assert np.allclose(a.raw, b.raw, rtol=1e-12)


# -- DKS bracket --------------------------------------------------------------

def test_dks_values():
    lower, upper, b1 = dks_beta_binomial_bounds(1, 3)
    assert b1 == pytest.approx(1 / 3)
    assert lower.at(1) == pytest.approx(1 / 6)
    assert upper.at(1, capped=False) == pytest.approx(math.sqrt(3) * (1 / 3) / (2 / 3))
    assert dks_beta_binomial_bounds(10, 1)[2] == pytest.approx(5 / 6)
    with pytest.raises(DomainError):
        upper.at(0)


# -- spectral -----------------------------------------------------------------

def test_eigen_n1():
    eig = numeric_eigendecomposition(x_chain_matrix(BetaBinomial(1)))
    assert np.allclose(eig.eigenvalues, [1, 1 / 3], atol=1e-14)
    assert abs(eig.eigenfunctions[1, 1]) == pytest.approx(1.0)
    assert spectral_bound(eig, 1, 1) == pytest.approx(1 / 6, abs=1e-14)


def test_eigen_identity():
    mat = TransitionMatrix(np.eye(3), np.full(3, 1 / 3), np.arange(3.0), np.zeros(3))
    assert np.allclose(numeric_eigendecomposition(mat).eigenvalues, 1.0)


def test_eigen_reconstructs(positive_3x3):
    mat = x_chain_matrix(positive_3x3)
    eig = numeric_eigendecomposition(mat)
    assert np.allclose(eig.reconstruct(), mat.P, atol=1e-12)


def test_eigen_rejects_irreversible():
    P = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]) * 0.9 + 0.1 / 3
    mat = TransitionMatrix(P, np.full(3, 1 / 3), np.arange(3.0), np.zeros(3))
    with pytest.raises(CertificateError):
        numeric_eigendecomposition(mat)


@pytest.mark.parametrize("model", [BetaBinomial(3), BetaBinomial(8)])
def test_spectral_dominates_exact(model):
    mat = x_chain_matrix(model)
    eig = numeric_eigendecomposition(mat)
    for s in mat.states:
        curve = spectral_bound_curve(eig, s, 60)
        tv = exact_tv_finite(mat, s, 60)
        assert np.all(curve.values[1:] >= tv[1:] - 1e-12)
        assert curve.values[-1] < 1e-3


def test_spectral_on_finite_model(positive_3x3):
    mat = x_chain_matrix(positive_3x3)
    eig = numeric_eigendecomposition(mat)
    for s in mat.states:
        assert np.all(spectral_bound_curve(eig, s, 20).values >= exact_tv_finite(mat, s, 20) - 1e-12)


# -- curve serialization -------------------------------------------------------

def test_curve_csv_and_json():
    c = uniform_bound_curve(0.125, 0.5, 2)
    lines = c.to_csv().splitlines()
    assert lines[0] == "ell,value,kind,params_hash"
    assert lines[2].startswith("1,0.75,uniform,")
    import json

    doc = json.loads(c.to_json(seed=3))
    assert doc["seed"] == 3 and doc["params_hash"] == c.params_hash
    assert doc["columns"]["value"] == [1.0, 0.75, 0.5625]
