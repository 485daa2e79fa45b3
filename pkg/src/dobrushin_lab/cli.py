"""Command line front end.

Exit status: 0 on success, 1 on error, 2 when ``--strict`` is given and a
model hypothesis (for example ``rho < 1`` or ``beta < 1``) is violated.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import bounds
from .convexdist import ConvexDistanceInstance, convex_distance
from .dobrushin import (InterdependenceMatrix, SubsetLaw, curie_weiss_matrix, exact_matrix,
                        inhomogeneity_exact, subset_coordinate_model)
from .errors import DomainError, HypothesisViolation
from .harness import ExperimentConfig, ExperimentReport, KINDS, run_experiment
from .models.coupling import curie_weiss_coupled_runs, disagreement_bound
from .models.curie_weiss import curie_weiss_model
from .models.ergm import GraphMotif, ergm_conditional_model
from .selfbounding import (ProductSpace, n_minus_witness,
                           subgraph_witnessed, verify_sb, verify_star)

EXIT_OK, EXIT_ERROR, EXIT_HYPOTHESIS = 0, 1, 2


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _params(pairs) -> dict:
    out = {}
    for item in pairs or []:
        key, _, val = item.partition("=")
        if not _:
            raise DomainError(f"parameter {item!r} is not key=value")
        try:
            out[key] = json.loads(val)
        except json.JSONDecodeError:
            out[key] = val
    return out


def _thresholds(args) -> np.ndarray:
    if args.t:
        return np.array(sorted(float(x) for x in args.t.split(",")))
    lo, hi, k = args.t_grid
    return np.linspace(float(lo), float(hi), int(k))


# --- bounds ----------------------------------------------------------------------

GENERIC = ("STAR_UPPER", "WEAK_UPPER", "LOWER", "MGF_STAR", "MGF_WEAK", "BERNSTEIN", "NONUNIFORM")


def cmd_bounds_eval(args) -> int:
    which = args.which.upper()
    p = _params(args.param)
    t = _thresholds(args)
    if which in [a.value for a in bounds.Application]:
        crv = bounds.application_tails(which, t, **p)
        _emit(crv.to_csv(), args.out)
        return EXIT_OK
    if which == "BERNSTEIN":
        vals = bounds.bernstein_tail(float(p["D"]), float(p["C"]), t)
    elif which == "NONUNIFORM":
        vals = bounds.nonuniform_tail(t, float(p["C"]), float(p.get("norm1", 0.0)))
    elif which in GENERIC:
        spec = bounds.BoundSpec(float(p.get("a", 0)), float(p.get("b", 0)), float(p.get("mean_g", 0)),
                                float(p.get("norm1", 0)))
        fn = {"STAR_UPPER": bounds.tail_upper_star, "WEAK_UPPER": bounds.tail_upper_weak,
              "LOWER": bounds.tail_lower, "MGF_STAR": bounds.mgf_star_upper,
              "MGF_WEAK": bounds.mgf_weak_upper}[which]
        vals = fn(t, spec)
        if which.startswith("MGF"):
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["theta", "log_mgf_bound"])
            for a, b in zip(t, np.atleast_1d(vals)):
                w.writerow([repr(float(a)), repr(float(b))])
            _emit(buf.getvalue(), args.out)
            return EXIT_OK
    else:
        raise DomainError(f"unknown bound {args.which!r}")
    _emit(bounds.TailCurve(t, np.atleast_1d(vals), which).to_csv(), args.out)
    return EXIT_OK


def cmd_bounds_constants(args) -> int:
    ac = bounds.solve_ac()
    lines = ["name,value", f"a_c,{ac!r}", f"K_c,{bounds.k_c()!r}",
             f"convex_rate_at_norm1,{bounds.convex_distance_rate(args.norm1)!r}",
             f"independent_convex_rate,{bounds.INDEPENDENT_CONVEX_RATE!r}"]
    for c in bounds.constant_composition_checks():
        lines.append(f"check_{c.name},{float(c.lhs)!r} {c.relation} {float(c.rhs)!r}: "
                     f"{'pass' if c.passed else 'fail'}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


# --- dobrushin ---------------------------------------------------------------------------

def cmd_dobrushin_compute(args) -> int:
    model = args.model
    if model == "cw":
        A = exact_matrix(curie_weiss_model(args.n, args.beta, args.h), workers=args.workers) \
            if args.exact else curie_weiss_matrix(args.n, args.beta)
    elif model == "ergm":
        A = exact_matrix(ergm_conditional_model(args.n, args.beta1, args.beta2), workers=args.workers)
    elif model == "swr":
        law = SubsetLaw.uniform(args.N, args.n) if args.weights is None else \
            SubsetLaw.weighted_swr([float(x) for x in args.weights.split(",")], args.n)
        inh = inhomogeneity_exact(law)
        sys.stderr.write(f"r1={float(inh.r1)!r} r2={float(inh.r2)!r} rho={float(inh.rho)!r}\n")
        A = exact_matrix(subset_coordinate_model(law), workers=args.workers)
    elif model == "csv":
        A = InterdependenceMatrix.from_csv(Path(args.matrix).read_text())
    else:
        raise DomainError(f"unknown model {model!r}")
    _emit(A.to_csv(), args.out)
    if args.strict and not A.satisfies_dobrushin():
        sys.stderr.write("Dobrushin condition fails\n")
        return EXIT_HYPOTHESIS
    return EXIT_OK


# --- self-bounding -------------------------------------------------------------------------

def cmd_selfbound_verify(args) -> int:
    fn = args.function
    if fn == "n_minus":
        rep = verify_star(n_minus_witness(), ProductSpace.cube(args.n, (-1, 1)))
    elif fn == "triangle":
        m = args.n * (args.n - 1) // 2
        rep = verify_star(subgraph_witnessed(GraphMotif.triangle(), args.n), ProductSpace.cube(m))
    elif fn == "ones":
        rep = verify_sb(lambda x: float(np.sum(x)), ProductSpace.cube(args.n), args.a, args.b,
                        weak=args.weak)
    else:
        raise DomainError(f"unknown function {fn!r}")
    _emit(rep.to_json() + "\n", args.out)
    return EXIT_OK if rep.holds or not args.strict else EXIT_HYPOTHESIS


# --- simulation -------------------------------------------------------------------------------

def _write_report(rep: ExperimentReport, prefix: str | None) -> None:
    if prefix is None:
        sys.stdout.write(rep.to_csv())
        return
    Path(prefix + ".csv").write_text(rep.to_csv())
    Path(prefix + ".plot.csv").write_text(rep.plot_data())
    Path(prefix + ".meta.json").write_text(rep.meta_json())
    Path(prefix + ".runtime.json").write_text(rep.runtime_json())


def cmd_simulate(args) -> int:
    cfg_dict = json.loads(Path(args.config).read_text()) if args.config else {}
    cfg_dict["kind"] = args.kind
    cfg_dict.setdefault("params", {}).update(_params(args.param))
    if args.seed is not None:
        cfg_dict["seed"] = args.seed
    if args.replicas is not None:
        cfg_dict["replicas"] = args.replicas
    if args.t:
        cfg_dict["thresholds"] = [float(x) for x in args.t.split(",")]
    cfg = ExperimentConfig(**cfg_dict)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", HypothesisViolation)
        rep = run_experiment(cfg, workers=args.workers)
    _write_report(rep, args.out)
    if rep.hypothesis_violated:
        sys.stderr.write("hypothesis violated: " + "; ".join(rep.meta["hypothesis_violations"]) + "\n")
        if args.strict:
            return EXIT_HYPOTHESIS
    return EXIT_OK


# --- convex distance -------------------------------------------------------------------------------

def cmd_convexdist_solve(args) -> int:
    inst = ConvexDistanceInstance.from_json(Path(args.instance).read_text())
    res = convex_distance(inst)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["value", "gap", "method"])
    w.writerow([repr(res.value), repr(res.gap), res.method])
    w.writerow(["weights"] + [repr(float(x)) for x in res.optimal_weights])
    w.writerow(["direction"] + [repr(float(x)) for x in res.optimal_direction])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


# --- coupling -------------------------------------------------------------------------------------

def cmd_coupling_run(args) -> int:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(args.seed)))
    dist = curie_weiss_coupled_runs(args.n, args.beta, args.h, args.runs, args.steps, rng)
    norm1 = args.beta * (1 - 1 / args.n)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "mean_distance", "standard_error", "bound"])
    for k in range(args.steps + 1):
        col = dist[:, k]
        se = col.std(ddof=1) / np.sqrt(len(col)) if len(col) > 1 else float("nan")
        w.writerow([k, repr(float(col.mean())), repr(float(se)),
                    repr(float(disagreement_bound(args.n, norm1, args.n, k)))])
    _emit(buf.getvalue(), args.out)
    if args.strict and norm1 >= 1:
        return EXIT_HYPOTHESIS
    return EXIT_OK


# --- report -----------------------------------------------------------------------------------------

def cmd_report_render(args) -> int:
    meta = json.loads(Path(args.meta).read_text()) if args.meta else {}
    rep = ExperimentReport.from_csv(Path(args.csv).read_text(), meta)
    _emit(rep.render() + "\n", args.out)
    if args.strict and (rep.hypothesis_violated or not rep.all_satisfied):
        return EXIT_HYPOTHESIS
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dobrushin-lab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="group", required=True)

    def common(p):
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--strict", action="store_true", help="exit 2 on hypothesis violation")

    b = sub.add_parser("bounds", help="evaluate closed-form bounds").add_subparsers(dest="cmd", required=True)
    be = b.add_parser("eval", help="evaluate a bound on a threshold grid")
    be.add_argument("which", help="STAR_UPPER, WEAK_UPPER, LOWER, MGF_STAR, MGF_WEAK, BERNSTEIN, "
                                  "NONUNIFORM or an application name (TSP, STEINER, CW_UP, ...)")
    be.add_argument("--param", "-p", action="append", help="key=value")
    g = be.add_mutually_exclusive_group(required=True)
    g.add_argument("--t", help="comma-separated thresholds")
    g.add_argument("--t-grid", nargs=3, metavar=("LO", "HI", "K"))
    common(be)
    be.set_defaults(func=cmd_bounds_eval)
    bc = b.add_parser("constants", help="a_c, rates and the constant checks")
    bc.add_argument("--norm1", type=float, default=0.0)
    common(bc)
    bc.set_defaults(func=cmd_bounds_constants)

    d = sub.add_parser("dobrushin", help="interdependence matrices").add_subparsers(dest="cmd", required=True)
    dc = d.add_parser("compute")
    dc.add_argument("--model", choices=["cw", "ergm", "swr", "csv"], required=True)
    dc.add_argument("--n", type=int)
    dc.add_argument("--N", type=int)
    dc.add_argument("--beta", type=float, default=0.5)
    dc.add_argument("--h", type=float, default=0.0)
    dc.add_argument("--beta1", type=float, default=0.0)
    dc.add_argument("--beta2", type=float, default=0.0)
    dc.add_argument("--weights", help="comma-separated sampling weights (swr)")
    dc.add_argument("--matrix", help="matrix CSV to re-read (csv)")
    dc.add_argument("--exact", action="store_true", help="enumerate instead of the analytic matrix")
    dc.add_argument("--workers", type=int, default=1)
    common(dc)
    dc.set_defaults(func=cmd_dobrushin_compute)

    s = sub.add_parser("selfbound", help="self-bounding checks").add_subparsers(dest="cmd", required=True)
    sv = s.add_parser("verify")
    sv.add_argument("--function", choices=["n_minus", "triangle", "ones"], required=True)
    sv.add_argument("--n", type=int, required=True)
    sv.add_argument("--a", type=float, default=1.0)
    sv.add_argument("--b", type=float, default=0.0)
    sv.add_argument("--weak", action="store_true")
    common(sv)
    sv.set_defaults(func=cmd_selfbound_verify)

    sim = sub.add_parser("simulate", help="run an experiment")
    sim.add_argument("kind", type=str.upper, choices=KINDS)
    sim.add_argument("--config", help="JSON experiment config")
    sim.add_argument("--param", "-p", action="append", help="key=value, overrides config params")
    sim.add_argument("--seed", type=int)
    sim.add_argument("--replicas", type=int)
    sim.add_argument("--t", help="comma-separated thresholds")
    sim.add_argument("--workers", type=int, default=1)
    sim.add_argument("--out", help="output prefix; writes .csv, .plot.csv, .meta.json, .runtime.json")
    sim.add_argument("--strict", action="store_true")
    sim.set_defaults(func=cmd_simulate)

    c = sub.add_parser("convexdist", help="convex distance").add_subparsers(dest="cmd", required=True)
    cs = c.add_parser("solve")
    cs.add_argument("--instance", required=True, help="JSON with keys x and S")
    common(cs)
    cs.set_defaults(func=cmd_convexdist_solve)

    cp = sub.add_parser("coupling", help="coupled Curie-Weiss chains").add_subparsers(dest="cmd", required=True)
    cr = cp.add_parser("run")
    cr.add_argument("--n", type=int, default=10)
    cr.add_argument("--beta", type=float, default=0.5)
    cr.add_argument("--h", type=float, default=0.0)
    cr.add_argument("--runs", type=int, default=1000)
    cr.add_argument("--steps", type=int, default=100)
    cr.add_argument("--seed", type=int, default=0)
    common(cr)
    cr.set_defaults(func=cmd_coupling_run)

    r = sub.add_parser("report", help="reports").add_subparsers(dest="cmd", required=True)
    rr = r.add_parser("render")
    rr.add_argument("--csv", required=True)
    rr.add_argument("--meta")
    common(rr)
    rr.set_defaults(func=cmd_report_render)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DomainError, KeyError, OSError, json.JSONDecodeError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
