"""Analytical total-variation bounds for Gibbs samplers.

* uniform minorization over the whole x-space: ``(1 - u / sup m)^l``;
* drift + small-set minorization: ``(1-eps)^{r l} + t^l psi(x)``;
* the three-component uniform bound ``(1 - v / sup m)^l``;
* the eigenvalue bracket for the Beta/Binomial chain started at ``x = n``;
* the spectral (chi-square) bound of a reversible finite chain.

Every bound function returns a :class:`BoundCurve` holding the raw formula
values; ``values`` caps them at 1 for reporting.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import CertificateError, DomainError, NumericError
from .kernel import TransitionMatrix, drift_expectation
from .models import DriftFunction, ThreeComponentModel, TwoComponentModel, get_phi
from .report import csv_text, json_envelope, params_hash
from .spaces import Subset

D_MARGIN = 1e-6
B_GRID_SIZE = 64
EIG_TOL = 1e-10
EIG_CHECK_TOL = 1e-8


# --------------------------------------------------------------------------
# data types
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BoundCurve:
    """Bound values indexed by step count ``ells``."""

    kind: str
    params: dict
    ells: np.ndarray
    raw: np.ndarray

    @property
    def values(self) -> np.ndarray:
        return np.minimum(self.raw, 1.0)

    @property
    def params_hash(self) -> str:
        return params_hash({"kind": self.kind, **self.params})

    def at(self, ell: int, capped: bool = True) -> float:
        hits = np.flatnonzero(self.ells == ell)
        if hits.size == 0:
            raise DomainError(f"step {ell} not covered by the {self.kind} curve")
        v = float(self.raw[hits[0]])
        return min(v, 1.0) if capped else v

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.ells.tolist(), self.values.tolist()))

    def to_csv(self) -> str:
        h = self.params_hash
        rows = [[int(e), float(v), self.kind, h] for e, v in zip(self.ells, self.values)]
        return csv_text(["ell", "value", "kind", "params_hash"], rows)

    def to_json(self, seed: int | None = None) -> str:
        return json_envelope(self.kind, {"kind": self.kind, **self.params},
                             {"ell": self.ells.tolist(), "value": self.values.tolist(),
                              "raw": self.raw.tolist()}, seed=seed)


@dataclass(frozen=True, eq=False)
class DriftCertificate:
    """``J phi(x) <= alpha + beta phi(x)`` checked at every point of ``verified_on``."""

    phi: DriftFunction
    alpha: float
    beta: float
    verified_on: np.ndarray
    slack: np.ndarray = field(default=None)

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise CertificateError("drift rate beta must lie strictly inside (0, 1)")
        if self.alpha < 0:
            raise CertificateError("drift constant alpha must be nonnegative")
        if np.size(self.verified_on) == 0:
            raise CertificateError("drift verification grid is empty")

    @property
    def d_min(self) -> float:
        """Smallest admissible small-set level, with the floating-point margin."""
        return (1.0 + D_MARGIN) * 2.0 * self.alpha / (1.0 - self.beta)

    def params(self) -> dict:
        return {"phi": self.phi.name, "alpha": self.alpha, "beta": self.beta}


@dataclass(frozen=True)
class MinorizationCertificate:
    """``J(x, .) >= eps P(. | T in B)`` for every ``x`` in the small set ``A``."""

    A: Subset
    B: Subset
    epsilon: float
    d: float | None
    prior_mass_B: float
    inf_f: float
    sup_m: float
    grid_certified: bool = False

    def params(self) -> dict:
        return {"A": self.A.to_dict(), "B": self.B.to_dict(), "epsilon": self.epsilon, "d": self.d,
                "grid_certified": self.grid_certified}


@dataclass(frozen=True)
class RosenthalRate:
    t: float
    feasible: bool


# --------------------------------------------------------------------------
# drift verification
# --------------------------------------------------------------------------


def default_drift_grid(model: TwoComponentModel) -> np.ndarray:
    space = model.x_space
    if space.kind == "finite":
        return space.points
    if space.kind == "truncated":
        # only rows whose one-step mass stays inside the window can be checked
        xs = np.arange(min(space.n_max, 100) + 1, dtype=float)
        keep = np.array([model.transition_tail(x, space.n_max) <= 1e-10 for x in xs])
        return xs[keep]
    return np.linspace(-5.0, 5.0, 21)


def verify_drift(model: TwoComponentModel, phi=None, alpha=None, beta=None, grid=None,
                 tol: float = 1e-8) -> DriftCertificate:
    """Check the drift inequality on ``grid`` and issue a certificate.

    Without arguments the model's own drift function and constants are used.
    """
    default = model.default_drift()
    if phi is None or alpha is None or beta is None:
        if default is None:
            raise CertificateError(f"{model.name} has no default drift function")
        phi = default.phi if phi is None else phi
        alpha = default.alpha if alpha is None else alpha
        beta = default.beta if beta is None else beta
    phi = get_phi(phi)
    grid = default_drift_grid(model) if grid is None else np.asarray(grid, dtype=float)
    jphi = np.array([drift_expectation(model, phi, x) for x in grid])
    slack = alpha + beta * phi(grid) - jphi
    if np.any(slack < -tol):
        bad = grid[np.argmin(slack)]
        raise CertificateError(f"drift inequality fails at x={bad:g} (slack {slack.min():.3g})")
    return DriftCertificate(phi, float(alpha), float(beta), grid, slack)


# --------------------------------------------------------------------------
# conditioning-set families
# --------------------------------------------------------------------------


def quantile_deltas(n: int = B_GRID_SIZE) -> np.ndarray:
    """Log-spaced tail probabilities in (0, 1/2)."""
    return np.geomspace(1e-6, 0.5, n + 1)[:-1]


def b_family(model: TwoComponentModel, A: Subset = Subset.full(), n: int = B_GRID_SIZE) -> list[tuple[float, Subset]]:
    """Default candidate sets ``B`` as ``(parameter, set)`` pairs.

    Continuous theta: central prior-quantile intervals ``[q_delta, q_{1-delta}]``.
    Finite theta: superlevel sets of ``theta -> inf_{x in A} f(x, theta)``,
    which contain the maximizer of ``pi(B) inf_{A x B} f`` over all subsets.
    """
    space = model.theta_space
    if space.kind == "finite":
        c = np.array([model.inf_f(A, Subset.of_points([t]))[0] for t in space.points])
        order = np.argsort(-c, kind="stable")
        return [(float(k + 1), Subset.of_points(space.points[order[:k + 1]])) for k in range(space.size)]
    out = []
    for delta in quantile_deltas(n):
        lo, hi = model.prior_quantile([delta, 1.0 - delta])
        out.append((float(delta), Subset.interval(float(lo), float(hi))))
    return out


def _as_family(B_family, model, A):
    if B_family is None:
        return b_family(model, A)
    if isinstance(B_family, Subset):
        return [(0.0, B_family)]
    return [(b if isinstance(b, tuple) else (float(k), b)) for k, b in enumerate(B_family)]


# --------------------------------------------------------------------------
# uniform minorization
# --------------------------------------------------------------------------


def uniform_u_value(model: TwoComponentModel, B: Subset) -> float:
    """``pi(B) inf_{X x B} f`` for one set."""
    inf_f, _ = model.inf_f(Subset.full(), B)
    return model.prior_mass(B) * inf_f


def _quantile_interval(model: TwoComponentModel, delta: float) -> Subset:
    lo, hi = model.prior_quantile([delta, 1.0 - delta])
    return Subset.interval(float(lo), float(hi))


def refine_delta(objective, deltas: np.ndarray, k: int) -> tuple[float, float]:
    """Maximize ``objective(delta)`` on the bracket around grid index ``k``.

    Returns ``(delta, value)``; bounded Brent search to ``xatol = 1e-13``.
    """
    lo = deltas[k - 1] if k > 0 else deltas[k] / 2
    hi = deltas[k + 1] if k + 1 < deltas.size else 0.5 * (1 - 1e-12)
    res = minimize_scalar(lambda d: -objective(d), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-13})
    return float(res.x), float(-res.fun)


def uniform_search(model: TwoComponentModel, B_family=None) -> tuple[float, Subset | None, float | None]:
    """``(u, B, parameter)`` maximizing ``pi(B) inf_{X x B} f`` over the family.

    With the default family on a continuous theta-space the best grid
    quantile ``delta`` is refined continuously, so ``B = [q_delta, q_{1-delta}]``
    is optimal over the whole central-interval family up to the search tolerance.
    """
    family = _as_family(B_family, model, Subset.full())
    if not family:
        return 0.0, None, None
    vals = np.array([uniform_u_value(model, B) for _, B in family])
    k = int(np.argmax(vals))
    if vals[k] <= 0:
        return 0.0, None, None
    best, arg, param = float(vals[k]), family[k][1], family[k][0]
    if B_family is None and model.theta_space.kind == "real":
        deltas = np.array([p for p, _ in family])
        delta, val = refine_delta(lambda d: uniform_u_value(model, _quantile_interval(model, d)), deltas, k)
        if val > best:
            best, arg, param = val, _quantile_interval(model, delta), delta
    return best, arg, param


def uniform_u(model: TwoComponentModel, B_family=None) -> tuple[float, Subset | None]:
    """Best ``pi(B) inf_{x, theta in B} f(x, theta)`` over a family of sets.

    The result is a lower bound on the supremum over all measurable B; it is
    0 (with ``None``) when no candidate gives a positive value.
    """
    u, B, _ = uniform_search(model, B_family)
    return u, B


def uniform_bound_curve(u: float, sup_m: float, l_max: int, kind: str = "uniform") -> BoundCurve:
    """``(1 - u/sup m)^l`` for l = 0..l_max."""
    if not (math.isfinite(sup_m) and sup_m > 0):
        raise CertificateError("sup m must be finite and positive")
    if u < 0 or u > sup_m * (1.0 + 1e-12):
        raise CertificateError(f"invalid minorization: u={u:.6g} exceeds sup m={sup_m:.6g}")
    rho = max(0.0, 1.0 - u / sup_m)
    ells = np.arange(l_max + 1)
    return BoundCurve(kind, {"u": u, "sup_m": sup_m, "rho": rho}, ells, rho ** ells.astype(float))


# --------------------------------------------------------------------------
# drift + minorization
# --------------------------------------------------------------------------


def _check_rosenthal_domain(alpha, beta, d, r):
    if not alpha >= 0:
        raise DomainError("alpha must be nonnegative")
    if not 0 < beta < 1:
        raise DomainError("beta must lie in (0, 1)")
    if not 0 < r < 1:
        raise DomainError("r must lie in (0, 1)")
    floor = 2.0 * alpha / (1.0 - beta)
    if not (d > 0 and d >= (1.0 + D_MARGIN) * floor):
        raise DomainError(f"d={d:g} must exceed 2 alpha/(1 - beta) = {floor:g}")


def log_rosenthal_t(alpha, beta, d, r):
    """Vectorized log t without domain checks."""
    return (r * np.log1p(2 * alpha + 2 * beta * d)
            + (1 - r) * (np.log1p(2 * alpha + beta * d) - np.log1p(d)))


def rosenthal_t(alpha: float, beta: float, d: float, r: float) -> RosenthalRate:
    """``t = (1+2a+2bd)^r (1+2a+bd)^(1-r) / (1+d)^(1-r)``; feasible when t < 1."""
    _check_rosenthal_domain(alpha, beta, d, r)
    t = float(np.exp(log_rosenthal_t(alpha, beta, d, r)))
    return RosenthalRate(t, t < 1.0)


def rosenthal_values(eps, r, t, psi, ells) -> np.ndarray:
    ells = np.asarray(ells, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        minor = np.where(ells == 0, 1.0, np.exp(r * ells * np.log1p(-eps)))
        contract = np.where(ells == 0, 1.0, np.exp(ells * np.log(t)))
    return minor + contract * psi


def rosenthal_bound_curve(drift, eps: float, d: float, r: float, phi_x0: float, l_max: int) -> BoundCurve:
    """``(1-eps)^{r l} + t^l (1 + alpha/(1-beta) + phi(x0))`` for l = 0..l_max."""
    if not 0 < eps <= 1:
        raise CertificateError("minorization constant must lie in (0, 1]")
    rate = rosenthal_t(drift.alpha, drift.beta, d, r)
    if not rate.feasible:
        raise CertificateError(f"t = {rate.t:.6g} >= 1: the bound does not contract; tune (r, d)")
    psi = 1.0 + drift.alpha / (1.0 - drift.beta) + phi_x0
    ells = np.arange(l_max + 1)
    params = {"alpha": drift.alpha, "beta": drift.beta, "epsilon": eps, "d": d, "r": r,
              "t": rate.t, "psi": psi, "phi_x0": phi_x0}
    return BoundCurve("rosenthal", params, ells, rosenthal_values(eps, r, rate.t, psi, ells))


def prop3_epsilon(model: TwoComponentModel, d: float, phi, B: Subset) -> MinorizationCertificate:
    """Minorization constant ``pi(B) inf_{A x B} f / sup_A m`` on ``A = {phi <= d}``."""
    phi = get_phi(phi)
    A = model.sublevel_set(phi, d)
    sup_m = model.sup_m(A)
    if not math.isfinite(sup_m):
        raise CertificateError("sup of m over the small set is infinite")
    pi_b = model.prior_mass(B)
    if pi_b <= 0:
        raise CertificateError(f"pi(B) = 0 for B = {B.describe()}, so P(A x B) = 0")
    inf_f, exact = model.inf_f(A, B)
    if inf_f <= 0:
        raise CertificateError(f"inf f over A x B is 0 (A = {A.describe()}, B = {B.describe()})")
    eps = pi_b * inf_f / sup_m
    if eps > 1.0 + 1e-12:
        raise NumericError(f"minorization constant {eps:.6g} exceeds 1", residual=eps - 1.0)
    return MinorizationCertificate(A, B, min(eps, 1.0), float(d), pi_b, inf_f, sup_m, not exact)


# --------------------------------------------------------------------------
# three components
# --------------------------------------------------------------------------


def _prop4_pieces(model3: ThreeComponentModel, scan: str):
    if scan == "theta-x2-x1":
        return float(model3.x2_space.weights.sum()), model3.h.max(axis=0)
    if scan == "theta-x1-x2":
        return float(model3.x1_space.weights.sum()), model3.g.max(axis=0)
    raise DomainError(f"unknown scan {scan!r}")


def prop4_v(model3: ThreeComponentModel, B=None, scan: str = "theta-x2-x1") -> tuple[float, Subset | None]:
    """``mu2(X2) sup_B pi(B) (inf_{X x B} f)^2 / sup_{x1, theta in B} h(x1, theta)``.

    ``B`` may be one set, a list of sets, or ``None`` for every nonempty subset
    of a theta-space with at most 16 points (superlevel sets of the
    per-theta infimum otherwise).  With the ``theta-x1-x2`` scan the roles of
    the coordinates swap: ``mu1(X1)`` and the density ``g`` of ``(x2, theta)``.
    """
    mass, hsup = _prop4_pieces(model3, scan)
    if not (np.all(np.isfinite(hsup)) and np.all(np.isfinite(model3.m))):
        raise CertificateError("pairwise densities must be bounded")
    pts = model3.theta_space.points
    pi = model3.theta_space.weights
    finf = model3.f.min(axis=(0, 1))
    if B is None:
        idx = range(pts.size)
        if pts.size <= 16:
            cands = [list(c) for k in range(1, pts.size + 1) for c in itertools.combinations(idx, k)]
        else:
            order = np.argsort(-finf, kind="stable")
            cands = [order[:k + 1].tolist() for k in range(pts.size)]
    else:
        sets = [B] if isinstance(B, Subset) else list(B)
        cands = [np.flatnonzero(s.contains(pts)).tolist() for s in sets]
    best, arg = 0.0, None
    for c in cands:
        if not c:
            continue
        v = mass * pi[c].sum() * finf[c].min() ** 2 / hsup[c].max()
        if v > best:
            best, arg = v, Subset.of_points(pts[c])
    return float(best), arg


def prop4_bound_curve(model3: ThreeComponentModel, l_max: int, B=None, scan: str = "theta-x2-x1") -> BoundCurve:
    v, Bstar = prop4_v(model3, B, scan)
    sup_m = float(model3.m.max())
    curve = uniform_bound_curve(v, sup_m, l_max, kind="prop4")
    params = dict(curve.params, v=v, scan=scan, B=Bstar.to_dict() if Bstar else None)
    return BoundCurve("prop4", params, curve.ells, curve.raw)


# --------------------------------------------------------------------------
# Beta/Binomial bracket
# --------------------------------------------------------------------------


def dks_beta_binomial_bounds(n: int, l_max: int) -> tuple[BoundCurve, BoundCurve, float]:
    """Lower ``beta1^l / 2`` (l >= 0) and upper ``beta1^(l-1/2) / (1 - beta1^(2l-1))`` (l >= 1)
    for the Beta/Binomial sampler started at ``x = n``; ``beta1 = 1 - 2/(n+2)``.
    """
    if int(n) != n or n < 1:
        raise DomainError("n must be a positive integer")
    if l_max < 1:
        raise DomainError("the upper curve starts at l = 1")
    b1 = 1.0 - 2.0 / (n + 2.0)
    params = {"n": int(n), "beta1": b1, "x0": int(n)}
    lo_ells = np.arange(l_max + 1)
    up_ells = np.arange(1, l_max + 1)
    lower = BoundCurve("dks_lower", params, lo_ells, 0.5 * b1 ** lo_ells.astype(float))
    e = up_ells.astype(float)
    upper = BoundCurve("dks_upper", params, up_ells, b1 ** (e - 0.5) / (1.0 - b1 ** (2.0 * e - 1.0)))
    return lower, upper, b1


# --------------------------------------------------------------------------
# spectral bound
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """``K phi_j = beta_j phi_j`` with ``sum_x pi(x) phi_j(x) phi_k(x) = delta_jk``.

    Column ``j`` of ``eigenfunctions`` is ``phi_j``; eigenvalues descend.
    """

    eigenvalues: np.ndarray
    eigenfunctions: np.ndarray
    stationary: np.ndarray
    states: np.ndarray
    certified: bool = True

    def index_of(self, s) -> int:
        hits = np.flatnonzero(self.states == float(s))
        if hits.size != 1:
            raise DomainError(f"state {s!r} not represented")
        return int(hits[0])

    def reconstruct(self) -> np.ndarray:
        """K = Phi diag(beta) Phi^T diag(pi)."""
        phi = self.eigenfunctions
        return (phi * self.eigenvalues) @ phi.T * self.stationary[None, :]


def numeric_eigendecomposition(matrix: TransitionMatrix, tol: float = EIG_TOL) -> SpectralDecomposition:
    """Diagonalize a reversible chain through the symmetric matrix D^1/2 P D^-1/2."""
    if matrix.reversibility_defect() > tol:
        raise CertificateError(f"chain not reversible (defect {matrix.reversibility_defect():.3g})")
    pi = matrix.stationary
    if np.any(pi <= 0):
        raise CertificateError("stationary vector must be strictly positive")
    sq = np.sqrt(pi)
    S = sq[:, None] * matrix.P / sq[None, :]
    S = 0.5 * (S + S.T)
    w, U = np.linalg.eigh(S)
    order = np.argsort(-w, kind="stable")
    w, U = w[order], U[:, order]
    phi = U / sq[:, None]
    # sign convention: largest-magnitude entry positive (so phi_0 = +1)
    pivot = phi[np.argmax(np.abs(phi), axis=0), np.arange(phi.shape[1])]
    phi = phi * np.where(pivot < 0, -1.0, 1.0)
    # checks run in the symmetric frame: phi is O(pi^-1/2) where pi is tiny
    Us = phi * sq[:, None]
    gram = Us.T @ Us
    if np.max(np.abs(gram - np.eye(gram.shape[0]))) > EIG_CHECK_TOL:
        raise NumericError("eigenfunctions not orthonormal in L2(pi)")
    Sraw = sq[:, None] * matrix.P / sq[None, :]
    resid = np.max(np.abs(Sraw @ Us - Us * w))
    if resid > EIG_CHECK_TOL:
        raise NumericError("eigen-equation residual too large", residual=float(resid))
    return SpectralDecomposition(w, phi, pi, matrix.states, certified=matrix.kind == "finite")


def spectral_bound(eigen: SpectralDecomposition, s, ell: int, capped: bool = True) -> float:
    """``(1/2) sqrt(sum_{j>0} beta_j^{2l} phi_j(s)^2)``, capped at 1."""
    i = eigen.index_of(s)
    terms = eigen.eigenvalues[1:] ** (2 * ell) * eigen.eigenfunctions[i, 1:] ** 2
    val = 0.5 * math.sqrt(float(terms.sum()))
    return min(val, 1.0) if capped else val


def spectral_bound_curve(eigen: SpectralDecomposition, s, l_max: int) -> BoundCurve:
    i = eigen.index_of(s)
    ells = np.arange(l_max + 1)
    b2 = eigen.eigenvalues[1:] ** 2
    phi2 = eigen.eigenfunctions[i, 1:] ** 2
    raw = 0.5 * np.sqrt((b2[None, :] ** ells[:, None] * phi2[None, :]).sum(axis=1))
    params = {"state": float(s), "beta1": float(eigen.eigenvalues[1]) if eigen.eigenvalues.size > 1 else None,
              "certified": eigen.certified}
    return BoundCurve("spectral", params, ells, raw)
