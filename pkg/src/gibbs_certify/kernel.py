"""Operations on the Gibbs kernel and its x-marginal chain."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError, NumericError, TruncationError, UnsupportedError
from .models import DEFAULT_TAIL_TOL, PoissonGamma, TwoComponentModel, get_phi

ROW_TOL = 1e-12
STATIONARY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """Row-(sub)stochastic x-chain matrix over represented points.

    For a truncated countable space ``P`` holds the transitions among
    ``0..n_max``; ``row_tail[i]`` is the mass row ``i`` sends beyond
    ``n_max`` and ``stationary_tail`` the stationary mass beyond ``n_max``.
    ``stationary`` holds the true stationary probabilities of the represented
    points (it sums to ``1 - stationary_tail``).
    """

    P: np.ndarray
    stationary: np.ndarray
    states: np.ndarray
    row_tail: np.ndarray
    stationary_tail: float = 0.0
    kind: str = "finite"

    @property
    def size(self) -> int:
        return self.P.shape[0]

    @property
    def truncation_error(self) -> float:
        return float(max(self.stationary_tail, self.row_tail.max(initial=0.0)))

    def index_of(self, x) -> int:
        hits = np.flatnonzero(self.states == float(x))
        if hits.size != 1:
            raise DomainError(f"state {x!r} not represented")
        return int(hits[0])

    def row_defect(self) -> float:
        return float(np.max(np.abs(self.P.sum(axis=1) + self.row_tail - 1.0)))

    def stationarity_defect(self) -> float:
        return float(np.max(np.abs(self.stationary @ self.P - self.stationary)))

    def reversibility_defect(self) -> float:
        flux = self.stationary[:, None] * self.P
        return float(np.max(np.abs(flux - flux.T)))


def log_joint_density(model: TwoComponentModel, x, theta):
    """log f(x, theta); -inf where the density vanishes."""
    return model.log_f(x, theta)


def marginal_density(model: TwoComponentModel, x):
    """m(x) = integral of f(x, theta) pi(d theta)."""
    return np.exp(model.log_m(x))


def posterior_density(model: TwoComponentModel, theta, x):
    """Density of theta | x with respect to the prior, f(x, theta)/m(x)."""
    return np.exp(model.log_posterior(theta, x))


def x_chain_transition(model: TwoComponentModel, x, xp):
    """One-step transition probability (or density) of the x-chain."""
    return model.transition_prob(x, xp)


def x_chain_matrix(model: TwoComponentModel, n_max: int | None = None,
                   tail_tol: float = DEFAULT_TAIL_TOL) -> TransitionMatrix:
    """Materialize the x-chain over a finite or truncated countable space.

    For truncated spaces ``n_max`` defaults to the model's own truncation;
    a :class:`TruncationError` is raised when the stationary tail beyond
    ``n_max`` exceeds ``tail_tol``.
    """
    space = model.x_space
    if space.kind == "finite":
        P = model.transition_matrix()
        mat = TransitionMatrix(P, model.stationary_x(), space.points, np.zeros(space.size))
    elif space.kind == "truncated":
        n_max = space.n_max if n_max is None else int(n_max)
        if isinstance(model, PoissonGamma):
            tail = model.stationary_tail(n_max)
            P = model.transition_matrix(n_max)
        else:
            raise UnsupportedError("truncated x-chains are only available for poisson-gamma")
        if tail > tail_tol:
            needed = PoissonGamma.auto_n_max(tail_tol) if isinstance(model, PoissonGamma) else None
            raise TruncationError(
                f"stationary tail {tail:.3g} beyond n_max={n_max} exceeds {tail_tol:.3g}"
                + (f"; use n_max >= {needed}" if needed is not None else ""),
                residual=tail,
            )
        states = np.arange(n_max + 1, dtype=float)
        row_tail = model.transition_tail(states, n_max)
        stationary = np.exp(model.log_m(states))
        mat = TransitionMatrix(P, stationary, states, row_tail, tail, kind="truncated")
    else:
        raise UnsupportedError("continuous x-space has no transition matrix")
    if mat.row_defect() > ROW_TOL:
        raise NumericError("x-chain rows do not sum to one", residual=mat.row_defect())
    return mat


def gibbs_step(model: TwoComponentModel, x, rng: np.random.Generator):
    """One sweep of the kernel from ``x``: returns ``(x', theta')``.

    Works elementwise on arrays of current states.
    """
    theta = model.sample_theta(x, rng)
    return model.sample_x(theta, rng), theta


def drift_expectation(model: TwoComponentModel, phi, x, tol: float = 1e-10) -> float:
    """E[phi(x') | x] over one x-chain step.

    Discrete spaces sum the exact transition row; truncated spaces require the
    row mass beyond the truncation to be below ``tol``.  Continuous spaces
    integrate the transition density with adaptive quadrature, split at 0 and
    at the transition mean so kinks of ``|x|``-type functions are handled.
    """
    phi = get_phi(phi)
    space = model.x_space
    if space.kind == "finite":
        P = model.transition_matrix()
        row = P[int(space.index_of(x))]
        return float(row @ phi(space.points))
    if space.kind == "truncated":
        n_max = space.n_max
        lost = float(model.transition_tail(x, n_max))
        if lost > tol:
            raise TruncationError(f"row {x} loses {lost:.3g} beyond n_max={n_max}", residual=lost)
        ks = space.points
        return float(np.sum(model.transition_prob(np.full_like(ks, float(x)), ks) * phi(ks)))
    model._check_x(x)
    mean = float(integrate.quad(lambda y: y * model.transition_prob(x, y), -np.inf, np.inf,
                                epsabs=1e-13, epsrel=1e-13, limit=200)[0])
    cuts = sorted({0.0, mean})
    pieces = [(-np.inf, cuts[0])] + [(a, b) for a, b in zip(cuts, cuts[1:])] + [(cuts[-1], np.inf)]
    total, err = 0.0, 0.0
    for a, b in pieces:
        val, e = integrate.quad(lambda y: phi(y) * model.transition_prob(x, y), a, b,
                                epsabs=1e-13, epsrel=1e-13, limit=200)
        total += val
        err += e
    if err > tol:
        raise NumericError(f"drift quadrature residual {err:.3g} above {tol:.3g}", residual=err)
    return float(total)


def truncation_for(model: TwoComponentModel, x0: float | None = None,
                   tail_tol: float = DEFAULT_TAIL_TOL) -> int | None:
    """n_max for a truncated model that honours ``tail_tol`` and keeps ``x0`` deep inside."""
    if model.x_space.kind != "truncated":
        return None
    n = model.x_space.n_max
    if x0 is not None:
        n = max(n, math.ceil(4 * (x0 + 1)) + 40)
    return n
