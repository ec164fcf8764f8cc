"""``gibbs-certify`` command-line front end.

Every report starts with the seed and a hash of the parameters that
produced it.  CSV reports carry these on a leading ``#`` line; when
``--out`` is given the file holds the bare table and the line goes to
stdout instead.  Exit codes: 0 success, 1 numerical failure, 2 misuse,
3 infeasible bound.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import bounds, oracle
from .ergodicity import RectanglePair, check_condition_3, check_ergodic_finite
from .errors import (
    CertificateError,
    DomainError,
    GibbsCertifyError,
    InfeasibleError,
    ModelError,
    UnsupportedError,
)
from .kernel import truncation_for, x_chain_matrix
from .models import MODEL_NAMES, PHI, BetaBinomial, build_model
from .report import _plain, csv_text, fmt, json_envelope, params_hash
from .spaces import Subset
from .tuner import mixing_time_from_curve, optimize_rosenthal, optimize_uniform_B

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE, EXIT_INFEASIBLE = 0, 1, 2, 3
SEED_ENV = "GIBBS_CERTIFY_SEED"

COMPARE_COLUMNS = ["ell", "tv_lower", "tv_upper", "bound_uniform", "bound_rosenthal",
                   "bound_dks_lower", "bound_dks_upper", "bound_spectral"]

MODEL_DESCRIPTIONS = {
    "beta-binomial": "Binomial(n, theta) with a uniform prior on theta; x in {0..n}",
    "poisson-gamma": "Poisson(theta) with an Exponential(1) prior; x in N (truncated)",
    "gaussian": "N(theta, sigma2) with an N(0, tau2) prior; x in R",
    "finite": "user-supplied finite joint density (JSON, --config)",
}


class UsageError(GibbsCertifyError):
    pass


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------


class Output:
    def __init__(self, args, stdout):
        self.args = args
        self.stdout = stdout

    def report(self, kind: str, params: dict, header: list[str], rows: list[list], meta: dict | None = None):
        """Emit a table as CSV or JSON together with seed and params hash."""
        args = self.args
        meta = meta or {}
        h = params_hash({"kind": kind, **params})
        fmt_ = getattr(args, "format", "csv")
        if fmt_ == "json":
            cols = {c: [r[i] for r in rows] for i, c in enumerate(header)}
            num = {c: v for c, v in cols.items() if all(not isinstance(x, str) for x in v)}
            text = json_envelope(kind, {"kind": kind, **params}, num, seed=args.seed,
                                 meta=meta, **{c: v for c, v in cols.items() if c not in num})
        else:
            text = csv_text(header, rows)
        line = _meta_line(kind, args.seed, h, meta)
        out = getattr(args, "out", None)
        if out:
            with open(out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            self.stdout.write(line + f" out={out}\n")
        elif fmt_ == "json":
            self.stdout.write(text)
        else:
            self.stdout.write(line + "\n" + text)


def _meta_line(kind, seed, h, meta) -> str:
    parts = [f"kind={kind}", f"seed={seed}", f"params_hash={h}"]
    for k, v in meta.items():
        if isinstance(v, (float, np.floating)):
            v = fmt(v)
        parts.append(f"{k}={v}")
    return "# " + " ".join(parts)


# --------------------------------------------------------------------------
# helpers
# --------------------------------------------------------------------------


def _model(args):
    cfg = getattr(args, "config", None)
    if args.model == "finite" and cfg is None:
        raise UsageError("--model finite needs --config FILE")
    return build_model(args.model, n=args.n, sigma2=args.sigma2, tau2=args.tau2,
                       n_max=args.nmax, config=cfg)


def _model_params(model, x0=None) -> dict:
    p = dict(model.params())
    if x0 is not None:
        p["x0"] = float(x0)
    return p


def _matrix_for(model, x0):
    if model.x_space.kind == "finite":
        return x_chain_matrix(model)
    if model.x_space.kind == "truncated":
        return x_chain_matrix(model, n_max=truncation_for(model, x0))
    raise UnsupportedError(f"{model.name} has a continuous state space; no matrix")


def _spectral_curve(model, x0, l_max):
    eig = bounds.numeric_eigendecomposition(_matrix_for(model, x0))
    return bounds.spectral_bound_curve(eig, x0, l_max)


def _sandwich(model, x0, l_max):
    n_max = truncation_for(model, x0)
    return oracle.bivariate_tv_sandwich(model, x0, l_max, n_max=n_max)


def _drift(model, phi_name, alpha, beta):
    default = model.default_drift()
    if phi_name is None:
        if default is None:
            raise UsageError(f"{model.name} has no default drift function; pass --phi, --alpha, --beta")
        phi_name = default.phi.name
    if alpha is None or beta is None:
        if default is None or default.phi.name != phi_name:
            raise UsageError(f"--phi {phi_name} is not the default for {model.name}; pass --alpha and --beta")
        alpha = default.alpha if alpha is None else alpha
        beta = default.beta if beta is None else beta
    return bounds.verify_drift(model, phi_name, alpha, beta)


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def cmd_model_list(args, out: Output):
    rows = [[name, MODEL_DESCRIPTIONS[name]] for name in MODEL_NAMES]
    out.report("model-list", {"models": list(MODEL_NAMES)}, ["model", "description"], rows)
    return EXIT_OK


def cmd_check_ergodicity(args, out: Output):
    model = _model(args)
    params = _model_params(model)
    if model.x_space.kind == "finite" and model.theta_space.kind == "finite":
        rep = check_ergodic_finite(model)
        rows = [[k, json.dumps(_plain(xs)), json.dumps(_plain(ts)), mass]
                for k, (xs, ts, mass) in enumerate(rep.components)]
        out.report("ergodicity", params, ["component", "x_points", "theta_points", "mass"], rows,
                   {"ergodic": rep.ergodic, "method": "support-graph", "components": len(rep.components)})
        return EXIT_OK
    lo, hi = model.prior_quantile([0.25, 0.75])
    pair = RectanglePair(Subset.full(), Subset.interval(float(lo), float(hi)))
    res = check_condition_3(model, pair)
    rows = [["A", pair.A.describe()], ["B", pair.B.describe()], ["mass", fmt(res.mass)],
            ["reason", res.reason]]
    out.report("ergodicity", {**params, "A": pair.A.to_dict(), "B": pair.B.to_dict()},
               ["field", "value"], rows,
               {"ergodic": res.holds if res.holds else "unknown", "method": "rectangle-condition",
                "grid_certified": res.grid_certified})
    return EXIT_OK


def _curve_report(out, curve, params, meta):
    rows = [[int(e), float(v)] for e, v in zip(curve.ells, curve.values)]
    out.report(curve.kind, {**params, **curve.params}, ["ell", "value"], rows, meta)


def cmd_bound_uniform(args, out: Output):
    model = _model(args)
    res = optimize_uniform_B(model, l_max=args.lmax)
    if res.u <= 0:
        raise InfeasibleError("no set B gives a positive uniform minorization",
                              {"binding": "inf over the whole x-space of f is 0 on every candidate B",
                               "model": model.params()})
    _curve_report(out, res.curve, _model_params(model),
                  {"u": res.u, "sup_m": res.sup_m, "rho": res.curve.params["rho"]})
    return EXIT_OK


def cmd_bound_rosenthal(args, out: Output):
    model = _model(args)
    drift = _drift(model, args.phi, args.alpha, args.beta)
    params = {**_model_params(model, args.x0), **drift.params()}
    if args.auto:
        res = optimize_rosenthal(model, drift, x0=args.x0, target=args.target, l_max=args.lmax)
        curve = res.curve
        meta = {"r": res.r, "d": res.d, "epsilon": res.epsilon, "t": res.t, "ell_star": res.ell_star}
    else:
        if args.r is None or args.d is None:
            raise UsageError("bound rosenthal needs --r and --d, or --auto")
        rate = bounds.rosenthal_t(drift.alpha, drift.beta, args.d, args.r)
        A = model.sublevel_set(drift.phi, args.d)
        best = None
        for _, B in bounds.b_family(model, A):
            try:
                c = bounds.prop3_epsilon(model, args.d, drift.phi, B)
            except CertificateError:
                continue
            if best is None or c.epsilon > best.epsilon:
                best = c
        if not rate.feasible or best is None or best.epsilon <= 0:
            binding = "contraction: t >= 1" if not rate.feasible else "minorization: eps = 0"
            raise InfeasibleError(f"(r, d) = ({args.r}, {args.d}) is infeasible: {binding}",
                                  {"binding": binding, "t": rate.t, "r": args.r, "d": args.d,
                                   "epsilon": best.epsilon if best else 0.0})
        curve = bounds.rosenthal_bound_curve(drift, best.epsilon, args.d, args.r,
                                             float(drift.phi(args.x0)), args.lmax)
        mt = mixing_time_from_curve(curve, args.target)
        ell_star = mt.ell if mt.reached else mt.extrapolated
        meta = {"r": args.r, "d": args.d, "epsilon": best.epsilon, "t": rate.t, "ell_star": float(ell_star)}
    _curve_report(out, curve, params, meta)
    return EXIT_OK


def cmd_bound_dks(args, out: Output):
    lower, upper, b1 = bounds.dks_beta_binomial_bounds(args.n, args.lmax)
    up = dict(zip(upper.ells.tolist(), upper.raw.tolist()))
    rows = [[int(e), float(v), up.get(int(e))] for e, v in zip(lower.ells, lower.raw)]
    out.report("dks", {"n": args.n, "lmax": args.lmax}, ["ell", "dks_lower", "dks_upper"], rows,
               {"beta1": b1})
    return EXIT_OK


def cmd_bound_spectral(args, out: Output):
    model = _model(args)
    curve = _spectral_curve(model, args.x0, args.lmax)
    _curve_report(out, curve, _model_params(model, args.x0),
                  {"beta1": curve.params["beta1"], "certified": curve.params["certified"]})
    return EXIT_OK


def cmd_tv(args, out: Output):
    model = _model(args)
    sw = _sandwich(model, args.x0, args.lmax)
    rows = [[int(e), float(lo), float(up)] for e, lo, up in zip(sw.ells, sw.lower, sw.upper)]
    out.report("tv", {**_model_params(model, args.x0), "lmax": args.lmax},
               ["ell", "tv_lower", "tv_upper"], rows,
               {"method": sw.method, "error_budget": sw.error_budget})
    return EXIT_OK


def compare_table(model, x0, l_max: int, target: float = 0.01) -> tuple[list[list], dict]:
    """Rows of the comparison table (``COMPARE_COLUMNS``); missing bounds are None."""
    sw = _sandwich(model, x0, l_max)
    ells = sw.ells
    cols = {c: [None] * ells.size for c in COMPARE_COLUMNS[3:]}
    notes = {"tv_method": sw.method}

    uni = optimize_uniform_B(model, l_max=l_max)
    if uni.u > 0:
        cols["bound_uniform"] = uni.curve.values.tolist()
    if model.default_drift() is not None:
        try:
            ros = optimize_rosenthal(model, x0=x0, target=target, l_max=l_max)
            cols["bound_rosenthal"] = ros.curve.values.tolist()
            notes["rosenthal_ell_star"] = ros.ell_star
        except (InfeasibleError, CertificateError) as exc:
            notes["rosenthal"] = str(exc)
    if isinstance(model, BetaBinomial) and float(x0) == model.n and l_max >= 1:
        lower, upper, _ = bounds.dks_beta_binomial_bounds(model.n, l_max)
        cols["bound_dks_lower"] = lower.raw.tolist()
        cols["bound_dks_upper"] = [None] + upper.raw.tolist()
    if model.x_space.kind in ("finite", "truncated"):
        try:
            cols["bound_spectral"] = _spectral_curve(model, x0, l_max).values.tolist()
        except (CertificateError, GibbsCertifyError) as exc:
            notes["spectral"] = str(exc)
    rows = [[int(e), float(sw.lower[k]), float(sw.upper[k])] + [cols[c][k] for c in COMPARE_COLUMNS[3:]]
            for k, e in enumerate(ells)]
    return rows, notes


def cmd_compare(args, out: Output):
    model = _model(args)
    rows, notes = compare_table(model, args.x0, args.lmax, args.target)
    out.report("compare", {**_model_params(model, args.x0), "lmax": args.lmax, "target": args.target},
               COMPARE_COLUMNS, rows, notes)
    return EXIT_OK


def cmd_simulate(args, out: Output):
    model = _model(args)
    res = oracle.simulate_chain(model, args.x0, args.steps, args.chains, args.seed)
    rows = [[k, v] for k, v in res.summary.items()]
    out.report("simulate", {**_model_params(model, args.x0), "steps": args.steps, "chains": args.chains,
                            "seed": args.seed}, ["statistic", "value"], rows)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def build_parser(default_seed: int = 0) -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=default_seed,
                        help=f"random seed (default: ${SEED_ENV} or 0)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", metavar="PATH", help="write the table to PATH")

    mdl = argparse.ArgumentParser(add_help=False)
    mdl.add_argument("--model", required=True, choices=MODEL_NAMES)
    mdl.add_argument("--n", type=int, default=10, help="beta-binomial trials")
    mdl.add_argument("--sigma2", type=float, default=0.25, help="gaussian likelihood variance")
    mdl.add_argument("--tau2", type=float, default=0.25, help="gaussian prior variance")
    mdl.add_argument("--nmax", type=int, default=None, help="poisson-gamma truncation")
    mdl.add_argument("--config", metavar="FILE", help="JSON finite-model definition")

    lmax = argparse.ArgumentParser(add_help=False)
    lmax.add_argument("--lmax", type=int, default=50)

    x0 = argparse.ArgumentParser(add_help=False)
    x0.add_argument("--x0", type=float, default=0.0)

    p = argparse.ArgumentParser(prog="gibbs-certify", description="Certified convergence bounds for Gibbs samplers.")
    sub = p.add_subparsers(dest="command", required=True)

    pm = sub.add_parser("model", help="model registry")
    msub = pm.add_subparsers(dest="action", required=True)
    msub.add_parser("list", parents=[common]).set_defaults(func=cmd_model_list)

    sub.add_parser("check-ergodicity", parents=[common, mdl]).set_defaults(func=cmd_check_ergodicity)

    pb = sub.add_parser("bound", help="certified TV upper bounds")
    bsub = pb.add_subparsers(dest="kind", required=True)
    bsub.add_parser("uniform", parents=[common, mdl, lmax]).set_defaults(func=cmd_bound_uniform)

    pr = bsub.add_parser("rosenthal", parents=[common, mdl, lmax, x0])
    pr.add_argument("--phi", choices=sorted(PHI))
    pr.add_argument("--alpha", type=float)
    pr.add_argument("--beta", type=float)
    pr.add_argument("--r", type=float)
    pr.add_argument("--d", type=float)
    pr.add_argument("--auto", action="store_true", help="search (r, d, B)")
    pr.add_argument("--target", type=float, default=0.01)
    pr.set_defaults(func=cmd_bound_rosenthal)

    pd = bsub.add_parser("dks", parents=[common, lmax])
    pd.add_argument("--n", type=int, required=True)
    pd.set_defaults(func=cmd_bound_dks)

    bsub.add_parser("spectral", parents=[common, mdl, lmax, x0]).set_defaults(func=cmd_bound_spectral)
    sub.add_parser("tv", parents=[common, mdl, lmax, x0]).set_defaults(func=cmd_tv)

    pc = sub.add_parser("compare", parents=[common, mdl, lmax, x0])
    pc.add_argument("--target", type=float, default=0.01)
    pc.set_defaults(func=cmd_compare)

    ps = sub.add_parser("simulate", parents=[common, mdl, x0])
    ps.add_argument("--steps", type=int, required=True)
    ps.add_argument("--chains", type=int, default=1000)
    ps.set_defaults(func=cmd_simulate)
    return p


def run_cli(argv=None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        parser = build_parser(_default_seed())
    except UsageError as exc:
        stderr.write(f"gibbs-certify: error: {exc}\n")
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "lmax", 0) < 0:
        stderr.write("gibbs-certify: error: --lmax must be nonnegative\n")
        return EXIT_USAGE
    try:
        return args.func(args, Output(args, stdout))
    except InfeasibleError as exc:
        doc = {"status": "infeasible", "message": str(exc), "seed": args.seed,
               "params_hash": params_hash({"argv": list(argv or [])}), "report": _plain(exc.report)}
        stdout.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        return EXIT_INFEASIBLE
    except (UsageError, DomainError, ModelError, UnsupportedError, CertificateError, OSError) as exc:
        stderr.write(f"gibbs-certify: error: {exc}\n")
        return EXIT_USAGE
    except GibbsCertifyError as exc:
        stderr.write(f"gibbs-certify: numerical failure: {exc}\n")
        return EXIT_NUMERIC


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))
