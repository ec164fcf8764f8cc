import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from gibbs_certify.bounds import (
    log_rosenthal_t,
    numeric_eigendecomposition,
    prop4_bound_curve,
    rosenthal_values,
    spectral_bound_curve,
    uniform_bound_curve,
    uniform_u,
)
from gibbs_certify.ergodicity import check_ergodic_finite
from gibbs_certify.kernel import x_chain_matrix
from gibbs_certify.models import FiniteModel, ThreeComponentModel
from gibbs_certify.oracle import (
    bivariate_tv_sandwich,
    exact_tv_finite,
    exact_tv_joint,
    gaussian_tv,
    joint_chain_matrix,
    three_component_exact_tv,
)
from gibbs_certify.report import fmt, params_hash
from gibbs_certify.tuner import rosenthal_crossing

SETTINGS = settings(max_examples=40, deadline=None)


@st.composite
def joint_tables(draw, min_size=2, max_size=4, zeros=False):
    nx = draw(st.integers(min_size, max_size))
    nt = draw(st.integers(min_size, max_size))
    cell = st.one_of(st.just(0.0), st.floats(0.05, 1.0)) if zeros else st.floats(0.05, 1.0)
    cells = draw(st.lists(cell, min_size=nx * nt, max_size=nx * nt))
    table = np.array(cells).reshape(nx, nt)
    if zeros:
        # keep every row and column alive
        for k in range(max(nx, nt)):
            table[k % nx, k % nt] += 0.5
    return table


@SETTINGS
@given(joint_tables())
def test_positive_models_are_reversible_stochastic(table):
    mat = x_chain_matrix(FiniteModel.from_joint(table))
    assert mat.row_defect() <= 1e-12
    assert mat.reversibility_defect() <= 1e-10
    assert mat.stationarity_defect() <= 1e-10


@SETTINGS
@given(joint_tables(), st.data())
def test_tv_nonincreasing_and_spectral_dominates(table, data):
    model = FiniteModel.from_joint(table)
    mat = x_chain_matrix(model)
    s = data.draw(st.sampled_from(mat.states.tolist()))
    tv = exact_tv_finite(mat, s, 30)
    assert np.all(np.diff(tv) <= 1e-12)
    spec = spectral_bound_curve(numeric_eigendecomposition(mat), s, 30).values
    assert np.all(spec[1:] >= tv[1:] - 1e-12)


@SETTINGS
@given(joint_tables(), st.data())
def test_sandwich_and_uniform_bound_contain_joint_tv(table, data):
    model = FiniteModel.from_joint(table)
    K, pi = joint_chain_matrix(model)
    nt = model.theta_space.size
    i = data.draw(st.integers(0, model.x_space.size - 1))
    j = data.draw(st.integers(0, nt - 1))
    full = exact_tv_joint(K, pi, i * nt + j, 25)
    sw = bivariate_tv_sandwich(model, model.x_space.points[i], 25)
    assert np.all(sw.lower[1:] <= full[1:] + 1e-12)
    assert np.all(full[1:] <= sw.upper[1:] + 1e-12)
    u, _ = uniform_u(model)
    curve = uniform_bound_curve(u, model.sup_m(), 25)
    assert u > 0
    assert np.all(curve.values[1:] >= full[1:] - 1e-12)


@SETTINGS
@given(joint_tables(zeros=True))
def test_connectivity_matches_limit(table):
    model = FiniteModel.from_joint(table)
    rep = check_ergodic_finite(model)
    mat = x_chain_matrix(model)
    tv = exact_tv_finite(mat, mat.states[0], 400)
    eig = numeric_eigendecomposition(mat).eigenvalues
    units = int(np.sum(eig > 1 - 1e-9))
    assert units == len(rep.components)
    if not rep.ergodic:
        # mass outside the starting block never arrives
        first = next(c for c in rep.components if mat.states[0] in c[0])
        assert tv[-1] >= (1 - first[2]) - 1e-12


@SETTINGS
@given(st.lists(st.floats(0.05, 1.0), min_size=8, max_size=8), st.data())
def test_prop4_dominates_exact_tv(cells, data):
    model = ThreeComponentModel.from_joint(np.array(cells).reshape(2, 2, 2))
    x0 = (data.draw(st.integers(0, 1)), data.draw(st.integers(0, 1)))
    theta0 = data.draw(st.integers(0, 1))
    bound = prop4_bound_curve(model, 20).values
    tv = three_component_exact_tv(model, x0, 20, theta0=theta0)
    assert np.all(bound[1:] >= tv[1:] - 1e-12)


finite_pos = st.floats(1e-2, 1e2)
means = st.floats(-5, 5)


@SETTINGS
@given(means, finite_pos, means, finite_pos, means, finite_pos)
def test_gaussian_tv_is_a_metric(m1, v1, m2, v2, m3, v3):
    a = gaussian_tv(m1, v1, m2, v2)
    assert 0.0 <= a <= 1.0
    assert math.isclose(a, gaussian_tv(m2, v2, m1, v1), abs_tol=1e-12)
    assert a <= gaussian_tv(m1, v1, m3, v3) + gaussian_tv(m3, v3, m2, v2) + 1e-12


@SETTINGS
@given(st.floats(0, 3), st.floats(0.05, 0.95), st.floats(0.01, 0.99), st.floats(1.001, 50))
def test_log_rosenthal_t_matches_formula(alpha, beta, r, scale):
    d = scale * 2 * alpha / (1 - beta) + 1e-3
    direct = (1 + 2 * alpha + 2 * beta * d) ** r * (1 + 2 * alpha + beta * d) ** (1 - r) / (1 + d) ** (1 - r)
    assert math.isclose(math.exp(float(log_rosenthal_t(alpha, beta, d, r))), direct, rel_tol=1e-12)


@SETTINGS
@given(st.floats(1e-3, 0.9), st.floats(0.01, 1.0), st.floats(0.1, 0.99), st.floats(1, 20), st.floats(1e-4, 0.5))
def test_crossing_is_first_hit(eps, r, t, psi, target):
    ell = rosenthal_crossing(eps, r, t, psi, target)
    assert math.isfinite(ell)
    ell = int(ell)
    assert rosenthal_values(eps, r, t, psi, ell) <= target
    if ell > 0:
        assert rosenthal_values(eps, r, t, psi, ell - 1) > target


@given(st.dictionaries(st.text(max_size=5), st.floats(allow_nan=False), max_size=5))
def test_params_hash_ignores_key_order(params):
    reordered = dict(reversed(list(params.items())))
    assert params_hash(params) == params_hash(reordered)


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_fmt_twelve_significant_digits(x):
    assert math.isclose(float(fmt(x)), x, rel_tol=1e-11, abs_tol=0)
