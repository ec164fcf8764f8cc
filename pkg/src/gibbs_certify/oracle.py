"""Ground-truth total variation for the Gibbs chains.

Total variation is the sup-over-events distance, i.e. half the L1 distance
between the two laws.  Exact curves come from iterating the x-chain; the
bivariate law is then bracketed by

    TV_x(l)  <=  ||J^l(x, .) - P||  <=  TV_x(l - 1),

because the x-marginal of ``J^l`` is the l-step x-chain law (marginals
contract TV), and the bivariate law at step ``l`` is the step ``l-1`` x-law
pushed through the common map ``x -> (theta ~ pi(.|x), x' ~ f(.|theta))``,
which maps the stationary x-law to ``P`` (pushforwards contract TV).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats
from scipy.special import erf

from .errors import DomainError, NumericError, TruncationError, UnsupportedError
from .kernel import TransitionMatrix, gibbs_step, x_chain_matrix
from .models import FiniteModel, Gaussian, ThreeComponentModel, TwoComponentModel

EQUAL_VAR_TOL = 1e-14
SIM_BLOCK = 4096


def _tv_path(P: np.ndarray, pi: np.ndarray, start: int, l_max: int) -> np.ndarray:
    """TV(l) between e_start P^l and pi for l = 0..l_max.

    Iterates the deviation d = p - pi (pi P = pi), re-centering each step so
    rounding cannot accumulate along the stationary direction.
    """
    d = -pi.astype(float)
    d[start] += 1.0
    out = np.empty(l_max + 1)
    out[0] = 0.5 * np.abs(d).sum()
    for ell in range(1, l_max + 1):
        d = d @ P
        d -= d.sum() * pi
        out[ell] = 0.5 * np.abs(d).sum()
    return out


def exact_tv_finite(matrix: TransitionMatrix, x0, l_max: int) -> np.ndarray:
    """Exact x-chain TV to stationarity from ``x0`` for l = 0..l_max."""
    if matrix.kind != "finite":
        raise UnsupportedError("use exact_tv_truncated for truncated chains")
    return _tv_path(matrix.P, matrix.stationary, matrix.index_of(x0), int(l_max))


@dataclass
class TVInterval:
    """Certified TV enclosure for a truncated countable chain."""

    estimate: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    tail: np.ndarray

    @property
    def width(self) -> np.ndarray:
        # lower/upper are rounded to double precision; the certified width is 2 * tail
        return 2.0 * self.tail


def exact_tv_truncated(matrix: TransitionMatrix, x0, l_max: int,
                       max_tail: float | None = None) -> TVInterval:
    """TV enclosure ``estimate +- tail`` for a truncated countable chain.

    The substochastic iteration ``p_{l+1} = p_l P`` keeps the paths that never
    left the window, so ``sum(p_l) = 1 - leak_l`` where ``leak_l`` (the
    mass that has left, accumulated from exact row tails) is the only part
    of the true law ``q_l`` not represented.  With the stationary tail known
    in closed form, ``|TV(q_l) - estimate| <= leak_l / 2``.
    """
    if matrix.kind != "truncated":
        raise UnsupportedError("matrix is not truncated; use exact_tv_finite")
    i = matrix.index_of(x0)
    pi = matrix.stationary
    p = np.zeros_like(pi)
    p[i] = 1.0
    leak = 0.0
    est, tail = np.empty(l_max + 1), np.empty(l_max + 1)
    for ell in range(l_max + 1):
        est[ell] = 0.5 * (np.abs(p - pi).sum() + matrix.stationary_tail)
        tail[ell] = 0.5 * leak
        leak += float(p @ matrix.row_tail)
        p = p @ matrix.P
    if max_tail is not None and tail.max() > max_tail:
        raise TruncationError(f"truncation error {tail.max():.3g} exceeds {max_tail:.3g}; raise n_max",
                              residual=float(tail.max()))
    lower = np.clip(est - tail, 0.0, 1.0)
    upper = np.clip(est + tail, 0.0, 1.0)
    return TVInterval(est, lower, upper, tail)


def gaussian_tv(mu1: float, var1: float, mu2: float, var2: float) -> float:
    """TV between N(mu1, var1) and N(mu2, var2) from the density crossing points."""
    if not (var1 > 0 and var2 > 0 and math.isfinite(var1) and math.isfinite(var2)):
        raise NumericError("degenerate variance in gaussian_tv")
    s1, s2 = math.sqrt(var1), math.sqrt(var2)
    if abs(var1 - var2) <= EQUAL_VAR_TOL * max(var1, var2):
        s = math.sqrt(0.5 * (var1 + var2))
        return float(erf(abs(mu1 - mu2) / (2.0 * s * math.sqrt(2.0))))
    # (x-mu1)^2/var1 - (x-mu2)^2/var2 + log(var1/var2) = 0
    a = 1.0 / var1 - 1.0 / var2
    b = -2.0 * (mu1 / var1 - mu2 / var2)
    c = mu1 * mu1 / var1 - mu2 * mu2 / var2 + math.log(var1 / var2)
    disc = b * b - 4.0 * a * c
    if disc < 0:
        raise NumericError("no density crossing; inconsistent inputs", residual=disc)
    if b == 0:
        r = math.sqrt(-c / a)
        r1, r2 = -r, r
    else:
        q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
        r1, r2 = sorted((q / a, c / q))
    d1 = stats.norm(mu1, s1)
    d2 = stats.norm(mu2, s2)

    def excess(x):
        # P1(X <= x) - P2(X <= x), through whichever tail is smaller
        if x > 0.5 * (mu1 + mu2):
            return float(d2.sf(x) - d1.sf(x))
        return float(d1.cdf(x) - d2.cdf(x))

    # narrower law dominates between the crossings
    tv = excess(r2) - excess(r1)
    return float(min(1.0, abs(tv)))


def exact_tv_gaussian(a: float, step_var: float, stat_var: float, x0: float, ell: int) -> float:
    """TV of the Gaussian AR(1) x-chain after ``ell`` steps from ``x0``."""
    if not abs(a) < 1:
        raise DomainError("AR coefficient must satisfy |a| < 1")
    if step_var <= 0 or stat_var <= 0:
        raise NumericError("degenerate variance")
    if ell == 0:
        return 1.0
    mean = a ** ell * x0
    var = step_var * (1.0 - a ** (2 * ell)) / (1.0 - a * a)
    return gaussian_tv(mean, var, 0.0, stat_var)


def gaussian_tv_curve(model: Gaussian, x0: float, l_max: int) -> np.ndarray:
    a, v = model.ar_coefficient, model.step_var
    return np.array([exact_tv_gaussian(a, v, model.marginal_var, x0, ell) for ell in range(l_max + 1)])


@dataclass
class TVSandwich:
    """Bracket ``lower[l] <= ||J^l(x0, .) - P|| <= upper[l]`` for l = 0..l_max."""

    x0: float
    lower: np.ndarray
    upper: np.ndarray
    method: str
    error_budget: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def ells(self) -> np.ndarray:
        return np.arange(self.lower.size)


def _sandwich_from_curve(x0, tv, method, budget, **extra) -> TVSandwich:
    tv = np.clip(tv, 0.0, 1.0)
    upper = np.empty_like(tv)
    upper[0] = 1.0
    upper[1:] = tv[:-1]
    return TVSandwich(x0, tv, upper, method, budget, extra)


def bivariate_tv_sandwich(model: TwoComponentModel, x0, l_max: int, n_max: int | None = None) -> TVSandwich:
    """Bracket the bivariate TV of the Gibbs sampler by consecutive x-chain TVs."""
    kind = model.x_space.kind
    if kind == "finite":
        tv = exact_tv_finite(x_chain_matrix(model), x0, l_max)
        return _sandwich_from_curve(x0, tv, "matrix-power", 1e-12)
    if kind == "truncated":
        mat = x_chain_matrix(model, n_max=n_max)
        enc = exact_tv_truncated(mat, x0, l_max)
        return _sandwich_from_curve(x0, enc.estimate, "truncated-matrix-power", float(enc.tail.max()),
                                    n_max=mat.size - 1)
    if isinstance(model, Gaussian):
        return _sandwich_from_curve(x0, gaussian_tv_curve(model, x0, l_max), "gaussian-closed-form", 1e-12)
    raise UnsupportedError(f"no exact TV oracle for {model.name}")


# --------------------------------------------------------------------------
# full-state oracles for finite models
# --------------------------------------------------------------------------


def joint_chain_matrix(model: FiniteModel) -> tuple[np.ndarray, np.ndarray]:
    """Kernel of the two-component sampler on (x, theta) pairs, and P as a vector.

    States are flattened as ``i * n_theta + j``.
    """
    if model.x_space.kind != "finite" or model.theta_space.kind != "finite":
        raise UnsupportedError("joint chain needs finite x- and theta-spaces")
    f = np.exp(model.log_f(model.x_space.points[:, None], model.theta_space.points[None, :]))
    mu, pi = model.x_space.weights, model.theta_space.weights
    m = f @ pi
    post = f * pi / m[:, None]                     # [x, theta']
    lik = f * mu[:, None]                          # [x', theta']
    nx, nt = f.shape
    K = np.einsum("it,kt->itk", post, lik)         # x -> (theta', x')
    K = np.moveaxis(K, 1, 2).reshape(nx, nx * nt)  # destination (x', theta')
    K = np.repeat(K, nt, axis=0)
    return K, (f * mu[:, None] * pi[None, :]).ravel()


def exact_tv_joint(K: np.ndarray, stationary: np.ndarray, start: int, l_max: int) -> np.ndarray:
    """Exact TV of a finite kernel on its full state space."""
    return np.clip(_tv_path(K, stationary, start, l_max), 0.0, 1.0)


def three_component_sandwich(model: ThreeComponentModel, x0: tuple, l_max: int,
                             scan: str = "theta-x2-x1") -> TVSandwich:
    """Sandwich for the three-component sampler from the (x1, x2) marginal chain."""
    P = model.x_chain_matrix(scan)
    pi = model.stationary_x()
    i1 = int(model.x1_space.index_of(x0[0]))
    i2 = int(model.x2_space.index_of(x0[1]))
    tv = _tv_path(P, pi, i1 * model.x2_space.size + i2, l_max)
    return _sandwich_from_curve(tuple(x0), tv, "matrix-power", 1e-12, scan=scan)


def three_component_exact_tv(model: ThreeComponentModel, x0: tuple, l_max: int,
                             scan: str = "theta-x2-x1", theta0=None) -> np.ndarray:
    """Exact full-state TV of the three-component sampler started at (x1, x2, theta0)."""
    K = model.full_chain_matrix(scan)
    pi = model.joint.ravel()
    i1 = int(model.x1_space.index_of(x0[0]))
    i2 = int(model.x2_space.index_of(x0[1]))
    j = 0 if theta0 is None else int(model.theta_space.index_of(theta0))
    n2, nt = model.x2_space.size, model.theta_space.size
    return exact_tv_joint(K, pi, (i1 * n2 + i2) * nt + j, l_max)


# --------------------------------------------------------------------------
# simulation
# --------------------------------------------------------------------------


@dataclass
class SimulationResult:
    x: np.ndarray
    theta: np.ndarray
    seed: int
    steps: int
    summary: dict


def simulate_chain(model: TwoComponentModel, x0, steps: int, n_chains: int, seed: int) -> SimulationResult:
    """Run ``n_chains`` independent Gibbs chains for ``steps`` sweeps from ``x0``.

    Chains are simulated in blocks of 4096; block ``k`` draws from a PCG64
    generator seeded with ``seed ^ k``.  Output is bit-reproducible for a
    given ``(seed, n_chains)``.
    """
    if n_chains < 1 or steps < 0:
        raise DomainError("need n_chains >= 1 and steps >= 0")
    xs, thetas = [], []
    for k, start in enumerate(range(0, n_chains, SIM_BLOCK)):
        size = min(SIM_BLOCK, n_chains - start)
        rng = np.random.default_rng(int(seed) ^ k)
        x = np.full(size, float(x0))
        theta = np.full(size, np.nan)
        for _ in range(steps):
            x, theta = gibbs_step(model, x, rng)
        xs.append(np.asarray(x, dtype=float))
        thetas.append(np.asarray(theta, dtype=float))
    x = np.concatenate(xs)
    theta = np.concatenate(thetas)
    n = x.size

    def moments(v):
        if np.all(np.isnan(v)):
            return math.nan, math.nan, math.nan
        var = float(v.var(ddof=1)) if n > 1 else 0.0
        return float(v.mean()), var, math.sqrt(var / n)

    mx, vx, sx = moments(x)
    mt, vt, st = moments(theta)
    summary = {
        "n_chains": n, "steps": steps, "seed": int(seed),
        "mean_x": mx, "var_x": vx, "se_mean_x": sx,
        "mean_theta": mt, "var_theta": vt, "se_mean_theta": st,
    }
    return SimulationResult(x, theta, int(seed), steps, summary)
