"""Two- and three-component Gibbs models.

A two-component model is a joint density ``f(x, theta)`` with respect to
``mu x pi`` where ``pi`` is the law of ``theta`` (the prior) and ``mu`` a base
measure on the x-space.  The Gibbs kernel updates ``theta`` from its
conditional given ``x`` and then ``x`` from its conditional given ``theta``,
so the kernel only depends on the current ``x``.

Built-ins are the Beta/Binomial, Poisson/Gamma and Gaussian conjugate pairs
plus :class:`FiniteModel`, a user-supplied density table.  All densities are
evaluated in log space.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import stats
from scipy.special import gammaln, logsumexp, xlog1py, xlogy

from .errors import DomainError, ModelError, UnsupportedError
from .spaces import (
    FiniteSpace,
    Real1D,
    Subset,
    TruncatedCountable,
    hermite_rule,
    laguerre_rule,
    legendre_rule,
)

QUAD_NODES = 256
DEFAULT_TAIL_TOL = 1e-12


# --------------------------------------------------------------------------
# drift functions
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DriftFunction:
    """A named nonnegative function on the x-space."""

    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    # inverse of phi on [0, inf): {phi <= d} ∩ [0, inf) = [0, inv(d)]; None if unknown
    inverse: Callable[[float], float] | None = None
    even: bool = False

    def __call__(self, x):
        return self.fn(np.asarray(x, dtype=float))


PHI = {
    "x": DriftFunction("x", lambda x: x, inverse=lambda d: d),
    "abs": DriftFunction("abs", np.abs, inverse=lambda d: d, even=True),
    "square": DriftFunction("square", np.square, inverse=math.sqrt, even=True),
}


def get_phi(phi) -> DriftFunction:
    if isinstance(phi, DriftFunction):
        return phi
    if callable(phi):
        return DriftFunction(getattr(phi, "__name__", "custom"), phi)
    try:
        return PHI[phi]
    except KeyError:
        raise DomainError(f"unknown drift function {phi!r}; known: {sorted(PHI)}") from None


@dataclass(frozen=True)
class DriftSpec:
    phi: DriftFunction
    alpha: float
    beta: float


# --------------------------------------------------------------------------
# two-component models
# --------------------------------------------------------------------------


class TwoComponentModel:
    """Base class.  Subclasses set ``x_space``/``theta_space`` and ``log_f``.

    Everything else has a generic implementation based on the theta grid
    (exact for finite theta-spaces, quadrature otherwise); the built-ins
    override it with closed forms.
    """

    name = "model"
    # log f concave in theta (and jointly concave where x is continuous), so
    # extrema of f over a box are attained at its vertices
    log_concave = False
    # built-ins know where f > 0, so grid checks of support are meaningful
    support_declared = False

    x_space: FiniteSpace | TruncatedCountable | Real1D
    theta_space: FiniteSpace | Real1D

    # -- densities ---------------------------------------------------------

    def _check_x(self, x):
        x = np.asarray(x, dtype=float)
        if not np.all(self.x_space.contains(x)):
            raise DomainError(f"x outside the {self.name} x-space")
        return x

    def _check_theta(self, theta):
        theta = np.asarray(theta, dtype=float)
        if not np.all(self.theta_space.contains(theta)):
            raise DomainError(f"theta outside the {self.name} parameter space")
        return theta

    def log_f(self, x, theta):
        raise NotImplementedError

    @property
    def prior_weights(self) -> np.ndarray:
        return self.theta_space.weights

    def log_m(self, x):
        x = self._check_x(x)
        lf = self.log_f(x[..., None], self.theta_space.grid)
        return logsumexp(lf, b=self.prior_weights, axis=-1)

    def log_posterior(self, theta, x):
        """log of f(x, theta)/m(x): density of theta | x with respect to pi."""
        return self.log_f(x, theta) - self.log_m(x)

    def stationary_x(self) -> np.ndarray:
        """Stationary probabilities of the represented x-points."""
        if self.x_space.kind == "real":
            raise UnsupportedError("continuous x-space has no point masses")
        return np.exp(self.log_m(self.x_space.points)) * self.x_space.weights

    # -- x-chain -----------------------------------------------------------

    def _posterior_table(self) -> np.ndarray:
        xs = self.x_space.points
        lp = self.log_f(xs[:, None], self.theta_space.grid) - self.log_m(xs)[:, None]
        return np.exp(lp) * self.prior_weights

    def transition_matrix(self) -> np.ndarray:
        """P[i, k] = P(x_i -> x_k) over the represented points (generic route)."""
        if self.x_space.kind == "real":
            raise UnsupportedError("transition matrix needs a discrete x-space")
        xs = self.x_space.points
        post = self._posterior_table()
        lik = np.exp(self.log_f(xs[:, None], self.theta_space.grid)) * self.x_space.weights[:, None]
        return post @ lik.T

    def transition_prob(self, x, xp):
        """Probability (discrete x) or density (continuous x) of one x-chain step."""
        if self.x_space.kind == "real":
            raise UnsupportedError("no transition density for this model")
        P = self.transition_matrix()
        i = self.x_space.index_of(x)
        k = self.x_space.index_of(xp)
        return P[i, k]

    def transition_tail(self, x, n_max: int):
        """Row mass beyond ``n_max`` (countable x-spaces only)."""
        raise UnsupportedError(f"{self.name} has no countable x-space")

    # -- sampling ----------------------------------------------------------

    def sample_theta(self, x, rng: np.random.Generator):
        raise UnsupportedError(f"{self.name} has no posterior sampler")

    def sample_x(self, theta, rng: np.random.Generator):
        raise UnsupportedError(f"{self.name} has no likelihood sampler")

    # -- set functionals used by the bounds --------------------------------

    def prior_mass(self, B: Subset) -> float:
        if B.kind == "full":
            return 1.0
        return float(self.prior_weights[B.contains(self.theta_space.grid)].sum())

    def prior_quantile(self, q):
        raise UnsupportedError(f"{self.name} has no prior quantile function")

    def _x_candidates(self, A: Subset):
        """Points of A at which f is evaluated for an infimum.

        Returns ``None`` when A is unbounded in a way that drives the infimum
        to its trivial lower bound 0.
        """
        space = self.x_space
        if space.kind == "finite":
            pts = space.points[A.contains(space.points)]
            return pts if pts.size else np.array([])
        if space.kind == "truncated":
            if A.kind == "full" or (A.kind == "interval" and A.hi == np.inf):
                return None
            if A.kind == "points":
                return np.asarray(A.points)
            return np.arange(max(0.0, math.ceil(A.lo)), math.floor(A.hi) + 1.0)
        lo, hi = space.lower, space.upper
        if A.kind == "interval":
            lo, hi = max(lo, A.lo), min(hi, A.hi)
        elif A.kind == "points":
            return np.asarray(A.points)
        if not (np.isfinite(lo) and np.isfinite(hi)):
            return None
        inner = space.nodes[(space.nodes > lo) & (space.nodes < hi)]
        return np.unique(np.concatenate([[lo, hi], inner]))

    def _theta_candidates(self, B: Subset):
        space = self.theta_space
        if space.kind == "finite":
            return space.points[B.contains(space.points)]
        lo, hi = space.lower, space.upper
        if B.kind == "interval":
            lo, hi = max(lo, B.lo), min(hi, B.hi)
        elif B.kind == "points":
            return np.asarray(B.points)
        if not (np.isfinite(lo) and np.isfinite(hi)):
            return None
        inner = space.nodes[(space.nodes > lo) & (space.nodes < hi)]
        return np.unique(np.concatenate([[lo, hi], inner]))

    def inf_f(self, A: Subset, B: Subset) -> tuple[float, bool]:
        """``inf f`` over ``A x B`` and whether the value is exact.

        Discrete coordinates are enumerated.  Continuous coordinates are
        evaluated at the interval endpoints plus the interior grid nodes;
        this is exact when ``log_concave`` holds and grid-certified otherwise.
        Unbounded continuous or infinite countable sets give 0, which is the
        conservative value.
        """
        xs = self._x_candidates(A)
        ths = self._theta_candidates(B)
        if xs is None or ths is None:
            return 0.0, True
        if xs.size == 0 or ths.size == 0:
            return 0.0, True
        val = float(np.exp(np.min(self.log_f(xs[:, None], ths[None, :]))))
        exact = self.log_concave or (
            self.theta_space.kind == "finite" and self.x_space.kind != "real"
        )
        return val, exact

    def sup_m(self, A: Subset = Subset.full()) -> float:
        space = self.x_space
        if space.kind == "truncated" and A.kind in ("full",) or (
            space.kind == "truncated" and A.kind == "interval" and A.hi == np.inf
        ):
            # m(x) <= P(X = x) <= tail mass beyond the representation
            rep = np.exp(self.log_m(space.points[A.contains(space.points)]))
            return float(max(rep.max(initial=0.0), space.tail_mass))
        xs = self._x_candidates(A)
        if xs is None:
            xs = space.grid[A.contains(space.grid)]
        if xs.size == 0:
            raise DomainError("empty set for sup m")
        return float(np.exp(np.max(self.log_m(xs))))

    def sublevel_set(self, phi, d: float) -> Subset:
        """``{x : phi(x) <= d}`` as a :class:`Subset`."""
        phi = get_phi(phi)
        space = self.x_space
        if space.kind == "finite":
            pts = space.points[phi(space.points) <= d]
            if pts.size == 0:
                raise DomainError(f"sublevel set {{{phi.name} <= {d}}} is empty")
            return Subset.of_points(pts)
        if space.kind == "truncated":
            if phi.inverse is not None:
                top = math.floor(phi.inverse(d))
                if top < 0:
                    raise DomainError(f"sublevel set {{{phi.name} <= {d}}} is empty")
                return Subset.interval(0.0, float(top))
            vals = phi(space.points)
            if vals[-1] <= d:
                raise DomainError("sublevel set may extend past the truncation; raise n_max")
            pts = space.points[vals <= d]
            if pts.size == 0:
                raise DomainError(f"sublevel set {{{phi.name} <= {d}}} is empty")
            return Subset.of_points(pts)
        if phi.inverse is None:
            raise UnsupportedError("sublevel sets of custom drift functions need a discrete x-space")
        r = phi.inverse(d)
        lo = -r if phi.even else space.lower
        return Subset.interval(max(lo, space.lower), min(r, space.upper))

    def default_drift(self) -> DriftSpec | None:
        return None

    def params(self) -> dict:
        return {"model": self.name}


class BetaBinomial(TwoComponentModel):
    """x | theta ~ Binomial(n, theta), theta ~ Uniform(0, 1)."""

    name = "beta-binomial"
    log_concave = True
    support_declared = True

    def __init__(self, n: int, quad_nodes: int = QUAD_NODES):
        if int(n) != n or n < 1:
            raise ModelError("n must be a positive integer")
        self.n = int(n)
        self.x_space = FiniteSpace(np.arange(self.n + 1), np.ones(self.n + 1))
        nodes, weights = legendre_rule(0.0, 1.0, quad_nodes)
        self.theta_space = Real1D(nodes, weights, 0.0, 1.0)

    def _check_x(self, x):
        x = np.asarray(x, dtype=float)
        if np.any((x < 0) | (x > self.n) | (x != np.floor(x))):
            raise DomainError(f"x must be an integer in 0..{self.n}")
        return x

    def log_f(self, x, theta):
        x, theta = self._check_x(x), self._check_theta(theta)
        n = self.n
        logc = gammaln(n + 1) - gammaln(x + 1) - gammaln(n - x + 1)
        return logc + xlogy(x, theta) + xlog1py(n - x, -theta)

    def log_m(self, x):
        x = self._check_x(x)
        return np.full(x.shape, -math.log(self.n + 1))

    def transition_matrix(self):
        x = np.arange(self.n + 1)
        return np.exp(stats.betabinom.logpmf(x[None, :], self.n, x[:, None] + 1, self.n - x[:, None] + 1))

    def transition_prob(self, x, xp):
        x, xp = self._check_x(x), self._check_x(xp)
        return np.exp(stats.betabinom.logpmf(xp, self.n, x + 1, self.n - x + 1))

    def sample_theta(self, x, rng):
        x = np.asarray(x, dtype=float)
        return rng.beta(x + 1.0, self.n - x + 1.0)

    def sample_x(self, theta, rng):
        return np.asarray(rng.binomial(self.n, theta), dtype=float)

    def prior_mass(self, B):
        if B.kind != "interval":
            return super().prior_mass(B)
        return max(0.0, min(B.hi, 1.0) - max(B.lo, 0.0))

    def prior_quantile(self, q):
        return np.asarray(q, dtype=float)

    def sup_m(self, A=Subset.full()):
        return 1.0 / (self.n + 1)

    def default_drift(self):
        c = self.n / (self.n + 2.0)
        return DriftSpec(PHI["x"], c, c)

    def params(self):
        return {"model": self.name, "n": self.n}


class PoissonGamma(TwoComponentModel):
    """x | theta ~ Poisson(theta), theta ~ Exponential(1); m(x) = 2^-(x+1)."""

    name = "poisson-gamma"
    log_concave = True
    support_declared = True

    def __init__(self, n_max: int | None = None, tail_tol: float = DEFAULT_TAIL_TOL,
                 quad_nodes: int = QUAD_NODES):
        if n_max is None:
            n_max = self.auto_n_max(tail_tol)
        self.x_space = TruncatedCountable(n_max, self.stationary_tail(n_max))
        nodes, weights = laguerre_rule(1.0, quad_nodes)
        self.theta_space = Real1D(nodes, weights, 0.0, np.inf)

    @staticmethod
    def stationary_tail(n_max: int) -> float:
        """P(X > n_max) = sum_{x > n_max} 2^-(x+1) = 2^-(n_max+1)."""
        return 2.0 ** -(n_max + 1)

    @staticmethod
    def auto_n_max(tail_tol: float = DEFAULT_TAIL_TOL) -> int:
        """Smallest n_max whose stationary tail is below ``tail_tol``."""
        if not 0 < tail_tol < 1:
            raise DomainError("tail tolerance must lie in (0, 1)")
        n = max(0, math.floor(-math.log2(tail_tol)) - 1)
        while PoissonGamma.stationary_tail(n) >= tail_tol:
            n += 1
        return n

    def _check_x(self, x):
        x = np.asarray(x, dtype=float)
        if np.any((x < 0) | (x != np.floor(x))):
            raise DomainError("x must be a nonnegative integer")
        return x

    def log_f(self, x, theta):
        x, theta = self._check_x(x), self._check_theta(theta)
        return -theta + xlogy(x, theta) - gammaln(x + 1)

    def log_m(self, x):
        x = self._check_x(x)
        return -(x + 1.0) * math.log(2.0)

    def transition_prob(self, x, xp):
        x, xp = self._check_x(x), self._check_x(xp)
        return np.exp(stats.nbinom.logpmf(xp, x + 1, 2.0 / 3.0))

    def transition_matrix(self, n_max: int | None = None):
        n_max = self.x_space.n_max if n_max is None else n_max
        k = np.arange(n_max + 1)
        return np.exp(stats.nbinom.logpmf(k[None, :], k[:, None] + 1, 2.0 / 3.0))

    def transition_tail(self, x, n_max):
        x = self._check_x(x)
        return stats.nbinom.sf(n_max, x + 1, 2.0 / 3.0)

    def sample_theta(self, x, rng):
        x = np.asarray(x, dtype=float)
        return rng.gamma(x + 1.0, 0.5)

    def sample_x(self, theta, rng):
        return np.asarray(rng.poisson(theta), dtype=float)

    def prior_mass(self, B):
        if B.kind != "interval":
            return super().prior_mass(B)
        lo, hi = max(B.lo, 0.0), max(B.hi, 0.0)
        return float(math.exp(-lo) - math.exp(-hi))

    def prior_quantile(self, q):
        return -np.log1p(-np.asarray(q, dtype=float))

    def sup_m(self, A=Subset.full()):
        # m is decreasing in x
        if A.kind == "full":
            return 0.5
        if A.kind == "points":
            return 2.0 ** -(min(A.points) + 1.0)
        return 2.0 ** -(max(0.0, math.ceil(A.lo)) + 1.0)

    def default_drift(self):
        return DriftSpec(PHI["x"], 0.5, 0.5)

    def params(self):
        return {"model": self.name, "n_max": self.x_space.n_max}


class Gaussian(TwoComponentModel):
    """x | theta ~ N(theta, sigma2), theta ~ N(0, tau2).

    With ``sigma2 + tau2 = 1/2`` the posterior is N(2 tau2 x, 2 tau2 sigma2).
    """

    name = "gaussian"
    log_concave = True
    support_declared = True

    def __init__(self, sigma2: float = 0.25, tau2: float = 0.25, quad_nodes: int = QUAD_NODES):
        if not (sigma2 > 0 and tau2 > 0):
            raise ModelError("variances must be positive")
        self.sigma2, self.tau2 = float(sigma2), float(tau2)
        self.sigma, self.tau = math.sqrt(sigma2), math.sqrt(tau2)
        tn, tw = hermite_rule(self.tau, quad_nodes)
        self.theta_space = Real1D(tn, tw)
        s = math.sqrt(self.marginal_var)
        xn, xw = hermite_rule(s, quad_nodes)
        keep = xw > 0
        xn, xw = xn[keep], xw[keep]
        self.x_space = Real1D(xn, xw / stats.norm.pdf(xn, scale=s))

    @property
    def marginal_var(self) -> float:
        return self.sigma2 + self.tau2

    @property
    def ar_coefficient(self) -> float:
        """Posterior mean slope tau2/(sigma2 + tau2), which is the x-chain AR coefficient."""
        return self.tau2 / self.marginal_var

    @property
    def posterior_var(self) -> float:
        return self.sigma2 * self.tau2 / self.marginal_var

    @property
    def step_var(self) -> float:
        return self.posterior_var + self.sigma2

    def log_f(self, x, theta):
        x, theta = self._check_x(x), self._check_theta(theta)
        return stats.norm.logpdf(x, loc=theta, scale=self.sigma)

    def log_m(self, x):
        x = self._check_x(x)
        return stats.norm.logpdf(x, scale=math.sqrt(self.marginal_var))

    def transition_prob(self, x, xp):
        x, xp = self._check_x(x), self._check_x(xp)
        return stats.norm.pdf(xp, loc=self.ar_coefficient * x, scale=math.sqrt(self.step_var))

    def sample_theta(self, x, rng):
        x = np.asarray(x, dtype=float)
        return rng.normal(self.ar_coefficient * x, math.sqrt(self.posterior_var))

    def sample_x(self, theta, rng):
        return rng.normal(theta, self.sigma)

    def prior_mass(self, B):
        if B.kind != "interval":
            return super().prior_mass(B)
        return float(stats.norm.cdf(B.hi, scale=self.tau) - stats.norm.cdf(B.lo, scale=self.tau))

    def prior_quantile(self, q):
        return stats.norm.ppf(q, scale=self.tau)

    def sup_m(self, A=Subset.full()):
        if A.kind == "points":
            return float(np.exp(self.log_m(np.asarray(A.points)).max()))
        x = 0.0 if A.kind == "full" else min(max(0.0, A.lo), A.hi)
        return float(np.exp(self.log_m(x)))

    def default_drift(self):
        c = math.sqrt(2.0 / math.pi)
        alpha = self.sigma * c + math.sqrt(self.posterior_var) * c
        return DriftSpec(PHI["abs"], alpha, self.ar_coefficient)

    def params(self):
        return {"model": self.name, "sigma2": self.sigma2, "tau2": self.tau2}


class FiniteModel(TwoComponentModel):
    """Density table ``f[i, j] = f(x_i, theta_j)`` w.r.t. ``mu x pi`` on finite spaces."""

    name = "finite"
    NORM_TOL = 1e-8

    def __init__(self, x_points, theta_points, mu_weights, pi_weights, f, name: str = "finite"):
        self.name = name
        self.x_space = FiniteSpace(x_points, mu_weights)
        self.theta_space = FiniteSpace(theta_points, pi_weights)
        f = np.asarray(f, dtype=float)
        if f.shape != (self.x_space.size, self.theta_space.size):
            raise ModelError(f"f must have shape {(self.x_space.size, self.theta_space.size)}, got {f.shape}")
        if not np.all(np.isfinite(f)) or np.any(f < 0):
            raise ModelError("density table entries must be finite and nonnegative")
        m = f @ self.theta_space.weights
        if np.any(m <= 0):
            raise ModelError(f"zero marginal density at x = {self.x_space.points[m <= 0].tolist()}")
        # theta ~ pi requires f(., theta) to be a mu-probability density for every theta
        colmass = self.x_space.weights @ f
        if np.max(np.abs(colmass - 1.0)) > self.NORM_TOL:
            raise ModelError("sum_x f(x, theta) mu(x) must equal 1 for every theta (pi is the law of theta)")
        self.f = f
        self._m = m
        with np.errstate(divide="ignore"):
            self._log_f = np.log(f)

    @classmethod
    def from_joint(cls, joint, x_points=None, theta_points=None, name: str = "finite") -> "FiniteModel":
        """Build from a joint probability table with counting measure on x."""
        joint = np.asarray(joint, dtype=float)
        if joint.ndim != 2 or np.any(joint < 0):
            raise ModelError("joint table must be a nonnegative matrix")
        joint = joint / joint.sum()
        pi = joint.sum(axis=0)
        if np.any(pi <= 0):
            raise ModelError("every theta needs positive probability")
        nx, nt = joint.shape
        x_points = np.arange(nx) if x_points is None else x_points
        theta_points = np.arange(nt) if theta_points is None else theta_points
        return cls(x_points, theta_points, np.ones(nx), pi, joint / pi, name=name)

    @classmethod
    def from_json(cls, source) -> "FiniteModel":
        """Load ``{"x_points", "theta_points", "mu_weights", "pi_weights", "f"}``."""
        if isinstance(source, (str, Path)) and not str(source).lstrip().startswith("{"):
            doc = json.loads(Path(source).read_text())
        elif isinstance(source, dict):
            doc = source
        else:
            doc = json.loads(source)
        missing = {"x_points", "theta_points", "mu_weights", "pi_weights", "f"} - set(doc)
        if missing:
            raise ModelError(f"model config missing keys: {sorted(missing)}")
        for key in ("mu_weights", "pi_weights", "f"):
            if np.any(np.asarray(doc[key], dtype=float) < 0):
                raise ModelError(f"negative entries in {key}")
        return cls(doc["x_points"], doc["theta_points"], doc["mu_weights"], doc["pi_weights"],
                   doc["f"], name=doc.get("name", "finite"))

    def log_f(self, x, theta):
        i = self.x_space.index_of(x)
        j = self.theta_space.index_of(theta)
        return self._log_f[i, j]

    def log_m(self, x):
        return np.log(self._m[self.x_space.index_of(x)])

    def transition_matrix(self):
        post = self.f * self.theta_space.weights / self._m[:, None]
        return post @ (self.f * self.x_space.weights[:, None]).T

    def _sample_rows(self, table, rows, rng):
        cdf = np.cumsum(table[rows], axis=1)
        u = rng.random(rows.shape) * cdf[..., -1]
        return (u[..., None] >= cdf).sum(axis=-1).clip(max=table.shape[1] - 1)

    def sample_theta(self, x, rng):
        rows = self.x_space.index_of(x)
        post = self.f * self.theta_space.weights / self._m[:, None]
        return self.theta_space.points[self._sample_rows(post, np.atleast_1d(rows), rng)].reshape(np.shape(x))

    def sample_x(self, theta, rng):
        cols = self.theta_space.index_of(theta)
        lik = (self.f * self.x_space.weights[:, None]).T
        return self.x_space.points[self._sample_rows(lik, np.atleast_1d(cols), rng)].reshape(np.shape(theta))

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "x_points": self.x_space.points.tolist(),
            "theta_points": self.theta_space.points.tolist(),
            "mu_weights": self.x_space.weights.tolist(),
            "pi_weights": self.theta_space.weights.tolist(),
            "f": self.f.tolist(),
        }

    def params(self):
        doc = self.to_json()
        doc["model"] = doc.pop("name")
        return doc


# --------------------------------------------------------------------------
# three-component model
# --------------------------------------------------------------------------

SCANS = ("theta-x2-x1", "theta-x1-x2")


class ThreeComponentModel:
    """Finite density ``f(x1, x2, theta)`` w.r.t. ``mu1 x mu2 x pi``.

    Derived pairwise densities: ``m(x1, x2)`` (w.r.t. mu1 x mu2), ``h(x1, theta)``
    (w.r.t. mu1 x pi) and ``g(x2, theta)`` (w.r.t. mu2 x pi); all must be
    strictly positive.

    The systematic scan draws theta first, then the two x-coordinates in the
    order given by ``scan``.  In ``"theta-x2-x1"`` the x2 draw is normalised by
    ``h``; this is the order for which the three-component uniform bound is
    stated with ``h``.
    """

    def __init__(self, x1_points, x2_points, theta_points, mu1, mu2, pi, f, name="finite3"):
        self.name = name
        self.x1_space = FiniteSpace(x1_points, mu1)
        self.x2_space = FiniteSpace(x2_points, mu2)
        self.theta_space = FiniteSpace(theta_points, pi)
        f = np.asarray(f, dtype=float)
        shape = (self.x1_space.size, self.x2_space.size, self.theta_space.size)
        if f.shape != shape:
            raise ModelError(f"f must have shape {shape}, got {f.shape}")
        if not np.all(np.isfinite(f)) or np.any(f < 0):
            raise ModelError("density entries must be finite and nonnegative")
        mu1, mu2, pi = self.x1_space.weights, self.x2_space.weights, self.theta_space.weights
        self.f = f
        self.m = np.einsum("abt,t->ab", f, pi)
        self.h = np.einsum("abt,b->at", f, mu2)
        self.g = np.einsum("abt,a->bt", f, mu1)
        for label, arr in (("m", self.m), ("h", self.h), ("g", self.g)):
            if np.any(arr <= 0):
                raise ModelError(f"pairwise marginal density {label} must be strictly positive")
        colmass = np.einsum("abt,a,b->t", f, mu1, mu2)
        if np.max(np.abs(colmass - 1.0)) > FiniteModel.NORM_TOL:
            raise ModelError("f(., ., theta) must be a mu1 x mu2 probability density for every theta")

    @classmethod
    def from_joint(cls, joint, name="finite3") -> "ThreeComponentModel":
        joint = np.asarray(joint, dtype=float)
        if joint.ndim != 3 or np.any(joint < 0):
            raise ModelError("joint table must be a nonnegative 3-D array")
        joint = joint / joint.sum()
        pi = joint.sum(axis=(0, 1))
        n1, n2, nt = joint.shape
        return cls(np.arange(n1), np.arange(n2), np.arange(nt), np.ones(n1), np.ones(n2), pi,
                   joint / pi, name=name)

    def with_mu2_scaled(self, c: float) -> "ThreeComponentModel":
        """Same law, base measure mu2 multiplied by ``c`` (density divided by ``c``)."""
        return ThreeComponentModel(self.x1_space.points, self.x2_space.points, self.theta_space.points,
                                   self.x1_space.weights, c * self.x2_space.weights,
                                   self.theta_space.weights, self.f / c, name=self.name)

    @property
    def joint(self) -> np.ndarray:
        """P(x1, x2, theta) as a probability table."""
        return (self.f * self.x1_space.weights[:, None, None] * self.x2_space.weights[None, :, None]
                * self.theta_space.weights[None, None, :])

    def _step_tensor(self, scan: str) -> np.ndarray:
        """T[a, b, t', a', b'] = P((x1=a, x2=b) -> theta'=t', x1'=a', x2'=b')."""
        if scan not in SCANS:
            raise DomainError(f"scan must be one of {SCANS}")
        mu1, mu2, pi = self.x1_space.weights, self.x2_space.weights, self.theta_space.weights
        f = self.f
        post = f * pi / self.m[:, :, None]                              # [a, b, t]
        if scan == "theta-x2-x1":
            # x2' | (x1=a, t):  f[a, b', t] mu2[b'] / h[a, t]
            c2 = f * mu2[None, :, None] / self.h[:, None, :]            # [a, b', t]
            # x1' | (x2'=b', t): f[a', b', t] mu1[a'] / g[b', t]
            c1 = f * mu1[:, None, None] / self.g[None, :, :]            # [a', b', t]
            return np.einsum("abt,aBt,ABt->abtAB", post, c2, c1)
        c1 = f * mu1[:, None, None] / self.g[None, :, :]                # [a', b, t]
        c2 = f * mu2[None, :, None] / self.h[:, None, :]                # [a', b', t]
        return np.einsum("abt,Abt,ABt->abtAB", post, c1, c2)

    def x_chain_matrix(self, scan: str = SCANS[0]) -> np.ndarray:
        """Transition matrix of (x1, x2) pairs, flattened row-major."""
        T = self._step_tensor(scan).sum(axis=2)
        n = self.x1_space.size * self.x2_space.size
        return T.reshape(n, n)

    def full_chain_matrix(self, scan: str = SCANS[0]) -> np.ndarray:
        """Transition matrix of (x1, x2, theta) triples, flattened row-major."""
        T = self._step_tensor(scan)
        n1, n2, nt = self.f.shape
        T = np.broadcast_to(T[:, :, None, :, :, :], (n1, n2, nt, nt, n1, n2))
        # destination ordering (x1', x2', theta')
        T = np.moveaxis(T, 3, 5)
        return T.reshape(n1 * n2 * nt, n1 * n2 * nt)

    def stationary_x(self) -> np.ndarray:
        return (self.m * self.x1_space.weights[:, None] * self.x2_space.weights[None, :]).ravel()

    def params(self) -> dict:
        return {"model": self.name, "shape": list(self.f.shape)}


# --------------------------------------------------------------------------
# registry
# --------------------------------------------------------------------------

MODEL_NAMES = ("beta-binomial", "poisson-gamma", "gaussian", "finite")


def build_model(name: str, *, n: int = 10, sigma2: float = 0.25, tau2: float = 0.25,
                n_max: int | None = None, config=None) -> TwoComponentModel:
    """Construct a built-in model by name (``finite`` needs ``config``)."""
    if name == "beta-binomial":
        return BetaBinomial(n)
    if name == "poisson-gamma":
        return PoissonGamma(n_max=n_max)
    if name == "gaussian":
        return Gaussian(sigma2, tau2)
    if name == "finite":
        if config is None:
            raise ModelError("the finite model needs a JSON config")
        return FiniteModel.from_json(config)
    raise DomainError(f"unknown model {name!r}; known: {', '.join(MODEL_NAMES)}")
