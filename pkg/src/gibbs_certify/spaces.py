"""Concrete representations of state and parameter spaces.

Three kinds of space are supported:

* :class:`FiniteSpace` -- finitely many labelled points with positive
  base-measure weights (counting measure, or a prior's point masses).
* :class:`TruncatedCountable` -- the nonnegative integers, represented by
  ``0..n_max`` together with a certified bound on the stationary mass that
  lives beyond ``n_max``.
* :class:`Real1D` -- an interval of the real line carried by a fixed
  quadrature rule (nodes and positive weights).

:class:`Subset` describes measurable sets (point sets or closed intervals)
used as small sets, conditioning sets and rectangle sides.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ModelError


@dataclass(frozen=True, eq=False)
class FiniteSpace:
    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if points.ndim != 1 or weights.shape != points.shape:
            raise ModelError("points and weights must be 1-D arrays of equal length")
        if points.size == 0:
            raise ModelError("a finite space needs at least one point")
        if not np.all(np.isfinite(weights)) or np.any(weights <= 0):
            raise ModelError("finite-space weights must be strictly positive")
        if np.unique(points).size != points.size:
            raise ModelError("finite-space points must be distinct")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)

    kind = "finite"

    @property
    def size(self) -> int:
        return self.points.size

    @property
    def grid(self) -> np.ndarray:
        return self.points

    def index_of(self, x) -> np.ndarray:
        """Map point values to indices; raises :class:`DomainError` on a miss."""
        x = np.asarray(x, dtype=float)
        order = np.argsort(self.points)
        pos = np.searchsorted(self.points[order], x)
        pos = np.clip(pos, 0, self.size - 1)
        idx = order[pos]
        if np.any(self.points[idx] != x):
            raise DomainError(f"point(s) {x[self.points[idx] != x] if x.ndim else x} not in space")
        return idx

    def contains(self, x) -> np.ndarray:
        return np.isin(np.asarray(x, dtype=float), self.points)


@dataclass(frozen=True, eq=False)
class TruncatedCountable:
    """``{0, 1, 2, ...}`` represented up to ``n_max``.

    ``tail_mass`` is a certified upper bound on the stationary probability of
    ``{x > n_max}``.
    """

    n_max: int
    tail_mass: float

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 0:
            raise ModelError("n_max must be a nonnegative integer")
        if not 0.0 <= self.tail_mass < 1.0:
            raise ModelError("tail mass bound must lie in [0, 1)")
        object.__setattr__(self, "n_max", int(self.n_max))

    kind = "truncated"

    @property
    def size(self) -> int:
        return self.n_max + 1

    @property
    def points(self) -> np.ndarray:
        return np.arange(self.n_max + 1, dtype=float)

    @property
    def weights(self) -> np.ndarray:
        return np.ones(self.n_max + 1)

    @property
    def grid(self) -> np.ndarray:
        return self.points

    def index_of(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if np.any(x < 0) or np.any(x != np.floor(x)):
            raise DomainError("countable space holds nonnegative integers only")
        if np.any(x > self.n_max):
            raise DomainError(f"point beyond truncation n_max={self.n_max}")
        return x.astype(int)

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (x >= 0) & (x == np.floor(x))


@dataclass(frozen=True, eq=False)
class Real1D:
    """Interval ``[lower, upper]`` (endpoints may be infinite) with a quadrature rule.

    ``weights`` integrate against the measure the space carries; for a prior
    they sum to one up to quadrature error.
    """

    nodes: np.ndarray
    weights: np.ndarray
    lower: float = -np.inf
    upper: float = np.inf

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        keep = weights > 0
        nodes, weights = nodes[keep], weights[keep]
        if nodes.size == 0:
            raise ModelError("quadrature rule has no positive weights")
        if np.any(np.diff(nodes) <= 0):
            raise ModelError("quadrature nodes must be strictly increasing")
        if nodes[0] < self.lower or nodes[-1] > self.upper:
            raise ModelError("quadrature nodes fall outside the domain")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    kind = "real"

    @property
    def size(self) -> int:
        return self.nodes.size

    @property
    def grid(self) -> np.ndarray:
        return self.nodes

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (x >= self.lower) & (x <= self.upper) & np.isfinite(x)


def legendre_rule(lower: float, upper: float, n: int = 256) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes/weights for Lebesgue measure on a bounded interval."""
    t, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (upper - lower)
    return lower + half * (t + 1.0), half * w


def laguerre_rule(rate: float = 1.0, n: int = 256) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights integrating against the Exponential(rate) probability law."""
    from scipy.special import roots_laguerre

    t, w = roots_laguerre(n)
    return t / rate, w


def hermite_rule(scale: float, n: int = 256) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights integrating against N(0, scale**2)."""
    from scipy.special import roots_hermitenorm

    z, w = roots_hermitenorm(n)
    return scale * z, w / w.sum()


@dataclass(frozen=True)
class Subset:
    """A measurable set: the whole space, a finite point set, or a closed interval."""

    kind: str = "full"
    points: tuple = ()
    lo: float = -np.inf
    hi: float = np.inf

    @classmethod
    def full(cls) -> "Subset":
        return cls("full")

    @classmethod
    def of_points(cls, points) -> "Subset":
        pts = tuple(sorted(float(p) for p in np.atleast_1d(points)))
        if not pts:
            raise DomainError("point subset must be nonempty")
        return cls("points", points=pts)

    @classmethod
    def interval(cls, lo: float, hi: float) -> "Subset":
        if not lo <= hi:
            raise DomainError(f"empty interval [{lo}, {hi}]")
        return cls("interval", lo=float(lo), hi=float(hi))

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "full":
            return np.ones(x.shape, dtype=bool)
        if self.kind == "points":
            return np.isin(x, np.asarray(self.points))
        return (x >= self.lo) & (x <= self.hi)

    def describe(self) -> str:
        if self.kind == "full":
            return "full"
        if self.kind == "points":
            return "{" + ",".join(f"{p:g}" for p in self.points) + "}"
        return f"[{self.lo:.12g},{self.hi:.12g}]"

    def to_dict(self) -> dict:
        if self.kind == "points":
            return {"kind": "points", "points": list(self.points)}
        if self.kind == "interval":
            return {"kind": "interval", "lo": self.lo, "hi": self.hi}
        return {"kind": "full"}
