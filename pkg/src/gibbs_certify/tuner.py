"""Parameter search for the sharpest certified bounds.

The drift + minorization bound has three free knobs: the small-set level
``d``, the split exponent ``r`` and the conditioning set ``B``.  Larger ``d``
pulls ``t`` towards the drift rate but shrinks ``eps``; the search below is
a deterministic grid scan followed by one coordinate-descent pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bounds import (
    BoundCurve,
    DriftCertificate,
    MinorizationCertificate,
    _as_family,
    log_rosenthal_t,
    prop3_epsilon,
    rosenthal_bound_curve,
    rosenthal_values,
    uniform_bound_curve,
    uniform_search,
    verify_drift,
)
from .errors import CertificateError, DomainError, InfeasibleError
from .models import TwoComponentModel
from .report import csv_text
from .spaces import Subset

D_GRID_SIZE = 64
R_GRID_SIZE = 63
REFINE_POINTS = 33
ELL_CAP = 10 ** 15


# --------------------------------------------------------------------------
# mixing times
# --------------------------------------------------------------------------


@dataclass
class MixingTime:
    ell: int | None
    reached: bool
    closed_form: int | None = None
    extrapolated: float | None = None


def rosenthal_crossing(eps, r, t, psi, threshold, cap: int = ELL_CAP):
    """Smallest integer l with (1-eps)^{r l} + t^l psi <= threshold (vectorized).

    Infeasible entries (eps <= 0, t >= 1, or not reached by ``cap``) give inf.
    """
    eps, r, t, psi = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (eps, r, t, psi)))
    ok = (eps > 0) & (t < 1)
    lo = np.zeros(eps.shape)
    hi = np.full(eps.shape, float(cap))

    def value(ell):
        return rosenthal_values(np.where(ok, eps, 0.5), r, np.where(ok, t, 0.5), psi, ell)

    ok &= value(hi) <= threshold
    done = value(lo) <= threshold
    # invariant: value(hi) <= threshold < value(lo)
    for _ in range(64):
        mid = np.floor(0.5 * (lo + hi))
        good = value(mid) <= threshold
        hi = np.where(good, mid, hi)
        lo = np.where(good, lo, mid)
        if np.all(hi - lo <= 1):
            break
    out = np.where(done, 0.0, hi)
    return np.where(ok | done, out, np.inf)


def mixing_time_from_curve(curve: BoundCurve, threshold: float) -> MixingTime:
    """First step at which the (capped) curve is at or below ``threshold``.

    Rosenthal curves also report the closed-form step count
    ``ceil((c + log psi)/|log t|)`` with ``e^-c = threshold/2`` (the share left
    for the drift term), combined with the step count that brings the
    minorization term below ``threshold/2``.
    """
    vals = curve.values
    hits = np.flatnonzero(vals <= threshold)
    closed, extrap = None, None
    if curve.kind == "rosenthal":
        p = curve.params
        half = threshold / 2.0
        l_b = math.ceil((-math.log(half) + math.log(p["psi"])) / abs(math.log(p["t"])))
        l_a = math.ceil(math.log(half) / (p["r"] * math.log1p(-p["epsilon"]))) if p["epsilon"] < 1 else 1
        closed = max(l_a, l_b, 0)
    if hits.size:
        return MixingTime(int(curve.ells[hits[0]]), True, closed, None)
    if curve.kind == "rosenthal":
        p = curve.params
        extrap = float(rosenthal_crossing(p["epsilon"], p["r"], p["t"], p["psi"], threshold))
    elif vals.size >= 2 and 0 < vals[-1] < vals[-2]:
        q = vals[-1] / vals[-2]
        extrap = float(curve.ells[-1] + math.ceil(math.log(threshold / vals[-1]) / math.log(q)))
    else:
        extrap = math.inf
    return MixingTime(None, False, closed, extrap)


# --------------------------------------------------------------------------
# uniform bound
# --------------------------------------------------------------------------


@dataclass
class UniformResult:
    B: Subset | None
    u: float
    sup_m: float
    parameter: float | None
    curve: BoundCurve


def optimize_uniform_B(model: TwoComponentModel, B_family=None, l_max: int = 100) -> UniformResult:
    """Maximize ``pi(B) inf_{X x B} f`` over the family, refining quantile intervals."""
    best_u, best_B, best_p = uniform_search(model, B_family)

    sup_m = model.sup_m()
    curve = uniform_bound_curve(best_u, sup_m, l_max)
    params = dict(curve.params, model=model.params(), B=best_B.to_dict() if best_B else None)
    curve = BoundCurve("uniform", params, curve.ells, curve.raw)
    return UniformResult(best_B, best_u, sup_m, best_p, curve)


# --------------------------------------------------------------------------
# drift + minorization bound
# --------------------------------------------------------------------------


@dataclass
class RosenthalResult:
    r: float
    d: float
    B: Subset
    B_param: float
    epsilon: float
    t: float
    ell_star: float
    objective: float
    curve: BoundCurve
    certificate: MinorizationCertificate
    drift: DriftCertificate
    trace: dict = field(repr=False, default_factory=dict)

    def trace_csv(self) -> str:
        cols = ["r", "d", "B_param", "epsilon", "t", "objective"]
        rows = np.column_stack([self.trace[c] for c in cols]).tolist()
        return csv_text(cols, rows)


def _objective(eps, r, t, psi, objective, target, ell):
    if objective == "mixing":
        return rosenthal_crossing(eps, r, t, psi, target)
    vals = rosenthal_values(eps, r, t, psi, ell)
    return np.where((eps > 0) & (t < 1), vals, np.inf)


def _epsilon(model, d, phi, B) -> float:
    try:
        return prop3_epsilon(model, d, phi, B).epsilon
    except (CertificateError, DomainError):
        return 0.0


def optimize_rosenthal(model: TwoComponentModel, drift: DriftCertificate | None = None, B_family=None,
                       x0: float = 0.0, objective: str = "mixing", target: float = 0.01,
                       ell: int | None = None, d_grid=None, r_grid=None, l_max: int = 100,
                       refine: bool = True) -> RosenthalResult:
    """Search (r, d, B) for the sharpest drift + minorization bound from ``x0``.

    ``objective="mixing"`` minimizes the first step at which the bound is at
    most ``target``; ``objective="value"`` minimizes the bound at step ``ell``.
    Ties are broken towards smaller d, then smaller r.  Raises
    :class:`InfeasibleError` when no candidate both contracts (t < 1) and
    minorizes (eps > 0).
    """
    if objective not in ("mixing", "value"):
        raise DomainError("objective must be 'mixing' or 'value'")
    if objective == "value" and ell is None:
        raise DomainError("objective 'value' needs ell")
    drift = verify_drift(model) if drift is None else drift
    alpha, beta, phi = drift.alpha, drift.beta, drift.phi
    psi = 1.0 + alpha / (1.0 - beta) + float(phi(x0))
    floor = 2.0 * alpha / (1.0 - beta)
    if d_grid is None:
        d_grid = np.geomspace(max(drift.d_min, 1e-12), 100.0 * (floor + 1.0), D_GRID_SIZE)
    if r_grid is None:
        r_grid = np.arange(1, R_GRID_SIZE + 1) / (R_GRID_SIZE + 1.0)
    d_grid = np.asarray(d_grid, dtype=float)
    r_grid = np.asarray(r_grid, dtype=float)
    d_grid = d_grid[d_grid >= drift.d_min]
    if d_grid.size == 0 or r_grid.size == 0:
        raise InfeasibleError("empty parameter grid", {"binding": "d must exceed 2 alpha/(1 - beta)"})

    rows = []  # (d, B_param, B, eps)
    for d in d_grid:
        try:
            A = model.sublevel_set(phi, d)
        except DomainError:
            continue
        for p, B in _as_family(B_family, model, A):
            rows.append((float(d), p, B, _epsilon(model, d, phi, B)))
    if not rows:
        raise InfeasibleError("no admissible small set on the d grid", {"binding": "small set"})
    dd = np.array([r[0] for r in rows])
    bp = np.array([r[1] for r in rows])
    ee = np.array([r[3] for r in rows])
    D, R = np.meshgrid(dd, r_grid, indexing="ij")
    E = np.broadcast_to(ee[:, None], D.shape)
    BP = np.broadcast_to(bp[:, None], D.shape)
    T = np.exp(log_rosenthal_t(alpha, beta, D, R))
    obj = _objective(E, R, T, psi, objective, target, ell)

    trace = {"r": R.ravel(), "d": D.ravel(), "B_param": BP.ravel(), "epsilon": E.ravel(),
             "t": T.ravel(), "objective": obj.ravel()}
    if not np.isfinite(obj).any():
        if not (ee > 0).any():
            binding = "minorization: eps = 0 for every (d, B)"
        elif not (T < 1).any():
            binding = "contraction: t >= 1 for every (d, r)"
        else:
            binding = "target not reached within the step cap"
        raise InfeasibleError(f"no feasible (r, d, B): {binding}",
                              {"binding": binding, "candidates": int(obj.size),
                               "max_epsilon": float(ee.max()), "min_t": float(T.min())})

    order = np.lexsort((R.ravel(), D.ravel(), obj.ravel()))
    k = order[0]
    i, j = np.unravel_index(k, obj.shape)
    best = {"obj": float(obj[i, j]), "d": float(dd[i]), "r": float(r_grid[j]), "B": rows[i][2],
            "p": float(bp[i]), "eps": float(ee[i])}

    def better(o, d, r):
        return (o, d, r) < (best["obj"], best["d"], best["r"])

    if refine:
        # d, with B and r fixed
        di = int(np.searchsorted(d_grid, best["d"]))
        lo = d_grid[di - 1] if di > 0 else best["d"]
        hi = d_grid[di + 1] if di + 1 < d_grid.size else best["d"]
        for d in np.geomspace(lo, hi, REFINE_POINTS):
            eps = _epsilon(model, d, phi, best["B"])
            t = float(np.exp(log_rosenthal_t(alpha, beta, d, best["r"])))
            o = float(_objective(eps, best["r"], t, psi, objective, target, ell))
            if better(o, d, best["r"]):
                best.update(obj=o, d=float(d), eps=eps)
        # r
        rj = int(np.argmin(np.abs(r_grid - best["r"])))
        lo = r_grid[rj - 1] if rj > 0 else best["r"] / 2
        hi = r_grid[rj + 1] if rj + 1 < r_grid.size else (1 + best["r"]) / 2
        rs = np.linspace(lo, hi, REFINE_POINTS)
        ts = np.exp(log_rosenthal_t(alpha, beta, best["d"], rs))
        os_ = _objective(best["eps"], rs, ts, psi, objective, target, ell)
        for r, o in zip(rs, os_):
            if better(float(o), best["d"], float(r)):
                best.update(obj=float(o), r=float(r))
        # B, for quantile-interval families
        if B_family is None and model.theta_space.kind == "real":
            ps = np.unique(bp)
            bi = int(np.searchsorted(ps, best["p"]))
            lo = ps[bi - 1] if bi > 0 else best["p"] / 2
            hi = ps[bi + 1] if bi + 1 < ps.size else 0.5 * (1 - 1e-9)
            t = float(np.exp(log_rosenthal_t(alpha, beta, best["d"], best["r"])))
            for p in np.geomspace(lo, hi, REFINE_POINTS):
                ql, qh = model.prior_quantile([p, 1.0 - p])
                B = Subset.interval(float(ql), float(qh))
                eps = _epsilon(model, best["d"], phi, B)
                o = float(_objective(eps, best["r"], t, psi, objective, target, ell))
                if o < best["obj"]:
                    best.update(obj=o, B=B, p=float(p), eps=eps)

    cert = prop3_epsilon(model, best["d"], phi, best["B"])
    curve = rosenthal_bound_curve(drift, cert.epsilon, best["d"], best["r"], float(phi(x0)), l_max)
    params = dict(curve.params, model=model.params(), x0=float(x0), phi=phi.name, B=best["B"].to_dict(),
                  objective=objective, target=target)
    curve = BoundCurve("rosenthal", params, curve.ells, curve.raw)
    t = curve.params["t"]
    ell_star = float(rosenthal_crossing(cert.epsilon, best["r"], t, curve.params["psi"], target))
    return RosenthalResult(best["r"], best["d"], best["B"], best["p"], cert.epsilon, t, ell_star,
                           best["obj"], curve, cert, drift, trace)
