"""Ergodicity of the two-component Gibbs kernel.

On finite spaces the kernel is ergodic exactly when the bipartite graph
with an edge ``x -- theta`` wherever ``f(x, theta) > 0`` is connected (after
dropping null points): a disconnected graph splits the space into events
``A x B`` and ``A^c x B^c`` of positive mass that the sampler never leaves.
For continuous models only the rectangle criterion is available, checked on
the model's grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import UnsupportedError
from .models import TwoComponentModel
from .spaces import Subset


@dataclass(frozen=True)
class RectanglePair:
    """Sides ``A`` (x-space) and ``B`` (theta-space) of a rectangle."""

    A: Subset = Subset.full()
    B: Subset = Subset.full()


@dataclass
class Condition3Result:
    holds: bool
    reason: str
    witness: tuple | None = None
    mass: float = 0.0
    grid_certified: bool = False

    def __bool__(self):
        return self.holds


@dataclass
class ErgodicityReport:
    ergodic: bool
    components: list = field(default_factory=list)  # [(x_points, theta_points, mass)]
    dropped_x: list = field(default_factory=list)
    dropped_theta: list = field(default_factory=list)

    def __bool__(self):
        return self.ergodic


def _grid_tables(model: TwoComponentModel):
    xs = model.x_space.grid
    ths = model.theta_space.grid
    with np.errstate(divide="ignore"):
        pos = np.exp(model.log_f(xs[:, None], ths[None, :])) > 0
    return xs, ths, pos


def check_condition_3(model: TwoComponentModel, pair: RectanglePair) -> Condition3Result:
    """Sufficient condition for ergodicity:

    ``{X in A} ∩ {T in B}  ⊆  {f > 0}  ⊆  {X in A} ∪ {T in B}`` with ``P(A x B) > 0``.

    Inclusions are checked on every represented point (finite and truncated
    spaces exactly, quadrature nodes for continuous coordinates).  On failure
    the first violating ``(x, theta)`` is returned as ``witness``.
    """
    continuous = "real" in (model.x_space.kind, model.theta_space.kind)
    if continuous and not model.support_declared:
        raise UnsupportedError("continuous custom models need a declared support for the rectangle condition")
    xs, ths, pos = _grid_tables(model)
    in_a = pair.A.contains(xs)
    in_b = pair.B.contains(ths)
    rect = in_a[:, None] & in_b[None, :]
    union = in_a[:, None] | in_b[None, :]

    mass = _rectangle_mass(model, pair)
    exact = model.theta_space.kind == "finite" and model.x_space.kind == "finite"
    if mass <= 0:
        return Condition3Result(False, "P(A x B) = 0", None, mass, exact)
    bad = rect & ~pos
    if bad.any():
        i, j = np.argwhere(bad)[0]
        return Condition3Result(False, "f vanishes inside A x B", (xs[i], ths[j]), mass, exact)
    bad = pos & ~union
    if bad.any():
        i, j = np.argwhere(bad)[0]
        return Condition3Result(False, "f positive outside {X in A} ∪ {T in B}", (xs[i], ths[j]), mass, exact)
    return Condition3Result(True, "holds", None, mass, exact)


def _rectangle_mass(model: TwoComponentModel, pair: RectanglePair) -> float:
    """P(A x B) from the represented grids."""
    xs, ths = model.x_space.grid, model.theta_space.grid
    in_a = pair.A.contains(xs)
    in_b = pair.B.contains(ths)
    if not in_a.any() or not in_b.any():
        return 0.0
    with np.errstate(divide="ignore"):
        lf = model.log_f(xs[in_a][:, None], ths[in_b][None, :])
    w = model.x_space.weights[in_a][:, None] * model.prior_weights[in_b][None, :]
    return float(np.sum(np.exp(lf) * w))


def check_ergodic_finite(model: TwoComponentModel) -> ErgodicityReport:
    """Decide ergodicity of a finite x finite model by support-graph connectivity."""
    if model.x_space.kind != "finite" or model.theta_space.kind != "finite":
        raise UnsupportedError("exact ergodicity check needs finite x- and theta-spaces")
    xs, ths, pos = _grid_tables(model)
    px = model.stationary_x()
    ptheta = model.prior_weights
    keep_x = px > 0
    keep_t = ptheta > 0
    pos = pos & keep_x[:, None] & keep_t[None, :]
    nx, nt = pos.shape
    i, j = np.nonzero(pos)
    adj = coo_matrix((np.ones(i.size), (i, nx + j)), shape=(nx + nt, nx + nt))
    _, labels = connected_components(adj, directed=False)
    live = np.concatenate([keep_x, keep_t])
    comps = []
    for lab in np.unique(labels[live]):
        members = np.flatnonzero((labels == lab) & live)
        xi = members[members < nx]
        ti = members[members >= nx] - nx
        comps.append((xs[xi].tolist(), ths[ti].tolist(), float(px[xi].sum())))
    comps.sort(key=lambda c: (c[0], c[1]))
    return ErgodicityReport(
        ergodic=len(comps) == 1,
        components=comps,
        dropped_x=xs[~keep_x].tolist(),
        dropped_theta=ths[~keep_t].tolist(),
    )
