"""Command-line front end.

Every output embeds the full run configuration so any artifact can be
re-derived from its sidecar alone.  Exit codes: 0 success, 2 hypothesis or
configuration violation, 3 domain error (point outside basin or horn
domain), 4 precision budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .errors import (
    HypothesisViolated,
    NoCriticalPointFound,
    NotInBasin,
    NotIncreasing,
    OutOfHalfPlane,
    OutsideDomain,
    PrecisionBudgetExceeded,
    SkewlavError,
)
from .fatou import (
    FatouEngine,
    horn_derivative,
    lavaurs,
    lifted_horn,
)
from .germs import (
    NormalFormParams,
    build_skew,
    derived_constants,
    historic_degree7_map,
    quadratic_example_b,
    skew_from_json,
    skew_to_json,
    validate_normal_form,
)
from .renorm import (
    eggbeater_trace,
    gamma_constant,
    historic_fixed_point_data,
    historic_measures,
    verify_main_theorem,
)
from .sequences import (
    AdmissibleSeq,
    detect_cycle,
    generate_greedy,
    pisot_sequence,
    pisot_test,
    rational_beta_construct,
    reconstruct,
    reduce as seq_reduce,
)
from .explore import (
    classify_convergence_direction,
    find_horn_critical_point,
    multiplier,
    raster_sidecar,
    raster_to_ppm,
    render_param,
    render_slice,
    super_attracting_locus,
)

EXIT_OK = 0
EXIT_HYPOTHESIS = 2
EXIT_DOMAIN = 3
EXIT_PRECISION = 4


def parse_complex(text):
    """Accept 're', 're+imi', 're-imi', 'imi' and 'i' forms."""
    t = text.strip().replace(" ", "")
    t = t.replace("i", "j")
    try:
        return complex(t)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad complex literal {text!r}") from exc


def cenc(z):
    z = complex(z)
    return [z.real, z.imag]


def emit(doc, path=None):
    text = json.dumps(doc, sort_keys=True, indent=1)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _map_from_args(args):
    if getattr(args, "map", None):
        with open(args.map) as fh:
            return skew_from_json(fh.read())
    if getattr(args, "historic_example", False):
        return historic_degree7_map()
    b = args.b
    if getattr(args, "alpha0", None) is not None and b is None:
        b = quadratic_example_b(args.alpha0)
    if b is None:
        raise HypothesisViolated("supply --b, --alpha0 or --map")
    params = NormalFormParams(a=args.a, b=b, b03=args.b03, b30=args.b30)
    return build_skew(params)


def _add_map_args(sp):
    sp.add_argument("--map", help="JSON file with the skew-product")
    sp.add_argument("--historic-example", action="store_true",
                    help="use the built-in degree-7 two-fixed-point map")
    sp.add_argument("--alpha0", type=float,
                    help="sugar: set b = 1/4 + pi^2/ln(alpha0)^2")
    sp.add_argument("--a", type=parse_complex, default=0j)
    sp.add_argument("--b", type=parse_complex, default=None)
    sp.add_argument("--b03", type=parse_complex, default=0j)
    sp.add_argument("--b30", type=parse_complex, default=0j)


def _engines_for(P, tol, series_order=10):
    return (FatouEngine(P.p, tol=tol, series_order=series_order),
            FatouEngine(P.q0(), tol=tol, series_order=series_order))


def _run_config(args, extra=None):
    cfg = {k: (cenc(v) if isinstance(v, complex) else v)
           for k, v in sorted(vars(args).items())
           if k not in ("func",) and v is not None}
    cfg["version"] = __version__
    if extra:
        cfg.update(extra)
    return cfg


# -- subcommands ---------------------------------------------------------------


def cmd_constants(args):
    P = _map_from_args(args)
    if getattr(args, "historic_example", False) or args.fixed_points:
        fps = [0.0, 1.0] if args.fixed_points is None else \
            [parse_complex(t) for t in args.fixed_points.split(",")]
        out = {"fixed_points": []}
        for wf in fps:
            d = historic_fixed_point_data(P, wf)
            out["fixed_points"].append({
                "w": cenc(d.w), "alpha": d.alpha, "beta": d.beta,
                "gamma": cenc(d.gamma),
                "params": {k: cenc(getattr(d.params, k))
                           for k in ("a", "b", "b03", "b30")}})
        out["run_config"] = _run_config(args)
        emit(out, args.output)
        return EXIT_OK
    params = validate_normal_form(P)
    dc = derived_constants(params)
    doc = dc.as_dict()
    doc["params"] = {k: cenc(getattr(params, k)) for k in ("a", "b", "b03", "b30")}
    doc["run_config"] = _run_config(args)
    emit(doc, args.output)
    return EXIT_OK


def cmd_fatou(args):
    P = _map_from_args(args)
    Ep, Eq = _engines_for(P, args.tol)
    E = Ep if args.germ == "p" else Eq
    doc = {"germ": args.germ, "run_config": _run_config(args)}
    if args.incoming is not None:
        val, dval = E.incoming_coord(args.incoming, with_derivative=True)
        doc["incoming"] = cenc(val)
        doc["derivative"] = cenc(dval)
    if args.incoming_inverse is not None:
        doc["incoming_inverse"] = cenc(E.incoming_coord_inverse(args.incoming_inverse))
    if args.outgoing_param is not None:
        doc["outgoing_param"] = cenc(E.outgoing_param(args.outgoing_param))
    if args.outgoing_coord is not None:
        doc["outgoing_coord"] = cenc(E.outgoing_coord(args.outgoing_coord))
    if args.basin is not None:
        member, undecided = E.basin_membership_detail(args.basin)
        doc["basin"] = {"member": member, "undecided": undecided}
    emit(doc, args.output)
    return EXIT_OK


def cmd_horn(args):
    P = _map_from_args(args)
    _, Eq = _engines_for(P, args.tol)
    hv = lifted_horn(Eq, Eq, args.W, normalize=args.normalize)
    doc = {"W": cenc(args.W), "E": cenc(hv.value),
           "branch_index": hv.branch_index,
           "dE_dW": cenc(horn_derivative(Eq, Eq, args.W)),
           "run_config": _run_config(args)}
    emit(doc, args.output)
    return EXIT_OK


def cmd_lavaurs(args):
    P = _map_from_args(args)
    Ep, Eq = _engines_for(P, args.tol)
    w = complex(args.w)
    z = complex(args.z)
    if args.apply_q0:
        q0 = P.q0()
        w = q0(w)
        z = P.p(z)
    val = lavaurs(Ep, Eq, Eq, args.alpha, args.sigma, z, w)
    doc = {"alpha": cenc(args.alpha), "sigma": cenc(args.sigma),
           "z": cenc(z), "w": cenc(w), "value": cenc(val),
           "run_config": _run_config(args)}
    emit(doc, args.output)
    return EXIT_OK


def cmd_seq(args):
    doc = {"run_config": _run_config(args)}
    if args.action == "generate":
        seq = generate_greedy(args.alpha, args.beta, args.n0, args.K)
    elif args.action == "pisot-seq":
        seq = pisot_sequence(args.zeta, args.alpha, args.k_start, args.K)
    elif args.action == "construct-rational-beta":
        base = pisot_sequence(args.zeta, args.alpha, args.k_start, args.K)
        seq = rational_beta_construct(args.alpha, args.k1, args.k2, base)
        cyc = detect_cycle(seq.phases)
        doc["detected_cycle"] = None if cyc is None else \
            {"period": cyc[0], "limits": cyc[1]}
    elif args.action == "pisot-test":
        kw = {}
        if args.poly:
            kw["minimal_poly"] = [int(v) for v in args.poly.split(",")]
            kw["root_index"] = args.root_index
            traj = pisot_test(None, zeta=args.zeta, K=args.K, **kw)
        else:
            traj = pisot_test(args.alpha, zeta=args.zeta, K=args.K)
        doc.update({"verdict": traj.verdict, "exact": traj.exact,
                    "distances": traj.distances,
                    "conjugate_modulus": traj.conjugate_modulus,
                    "measured_ratio": traj.measured_ratio()})
        emit(doc, args.output)
        return EXIT_OK
    else:
        raise HypothesisViolated(f"unknown seq action {args.action}")
    doc.update({"alpha": seq.alpha, "beta": seq.beta, "terms": seq.terms,
                "phases": seq.phases, "max_phase": seq.max_phase})
    if args.action == "generate" and args.reconstruct:
        rec = reconstruct(seq)
        doc["reconstruction"] = json.loads(rec.to_json())
    if args.reduce_ell:
        red, lim = seq_reduce(seq, args.reduce_ell)
        doc["reduced"] = {"terms": red.terms, "phases": red.phases,
                          "predicted_limit": lim}
    if args.csv:
        rec = None
        try:
            rec = reconstruct(seq)
        except SkewlavError:
            pass
        with open(args.csv, "w") as fh:
            fh.write(seq.to_csv(rec))
    emit(doc, args.output)
    return EXIT_OK


def cmd_verify_renorm(args):
    P = _map_from_args(args)
    params = validate_normal_form(P)
    dc = derived_constants(params)
    terms = [args.n0 * int(round(dc.alpha0)) ** k for k in range(args.K + 1)] \
        if args.geometric else \
        generate_greedy(dc.alpha0, dc.beta0, args.n0, args.K + 1).terms
    seq = AdmissibleSeq(dc.alpha0, dc.beta0, terms)
    pts = []
    g = int(np.sqrt(args.grid_points))
    for i in range(g):
        for j in range(g):
            z = args.z_center + 0.02 * (i - (g - 1) / 2)
            w = args.w_center + 0.02 * (j - (g - 1) / 2)
            pts.append((z, w))
    kr = range(args.k_min, args.k_max + 1) if args.k_max >= args.k_min else []
    report = verify_main_theorem(P, seq, pts, k_range=kr, precision=args.precision)
    doc = json.loads(report.to_json())
    doc["run_config"] = _run_config(args)
    emit(doc, args.output)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(report.to_csv())
    return EXIT_OK


def cmd_eggbeater(args):
    P = _map_from_args(args)
    tr = eggbeater_trace(P, args.z, args.w, args.n, j_max=args.j_max)
    doc = {"n": tr.n, "k_n": tr.k_n, "ell_n": tr.ell_n, "M_n": tr.M_n,
           "init_residual": tr.init_residual, "exit_residual": tr.exit_residual,
           "sum_identity_error": tr.sum_identity_error,
           "sumeps_residual": tr.sumeps_residual,
           "run_config": _run_config(args)}
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(tr.to_csv())
    emit(doc, args.output)
    return EXIT_OK


def _parse_window(text):
    vals = [float(v) for v in text.split(",")]
    if len(vals) != 4:
        raise argparse.ArgumentTypeError("window needs re0,re1,im0,im1")
    return tuple(vals)


def cmd_render_slice(args):
    P = _map_from_args(args)
    raster = render_slice(P, args.z0, args.window, args.width, args.height,
                          budget=args.budget, threads=args.threads,
                          metadata={"run_config": _run_config(args)})
    with open(args.out, "wb") as fh:
        fh.write(raster_to_ppm(raster))
    with open(args.out + ".json", "w") as fh:
        fh.write(raster_sidecar(raster))
    print(f"wrote {args.out} ({raster.class_counts()})")
    return EXIT_OK


def cmd_render_param(args):
    raster = render_param(args.alpha0, args.window, args.width, args.height,
                          budget=args.budget, threads=args.threads,
                          metadata={"run_config": _run_config(args)})
    with open(args.out, "wb") as fh:
        fh.write(raster_to_ppm(raster))
    with open(args.out + ".json", "w") as fh:
        fh.write(raster_sidecar(raster))
    print(f"wrote {args.out} ({raster.class_counts()})")
    return EXIT_OK


def cmd_find_super(args):
    P = _map_from_args(args)
    params = validate_normal_form(P)
    dc = derived_constants(params)
    Ep, Eq = _engines_for(P, args.tol)
    sigma = dc.gamma if args.sigma == "gamma" else parse_complex(args.sigma)
    W0 = find_horn_critical_point(Eq, Eq)
    N0 = args.N0
    while True:
        try:
            loc = super_attracting_locus(W0, N0, sigma, dc.alpha0, Ep, Eq, Eq)
            break
        except OutOfHalfPlane:
            N0 += 10
            if N0 > args.N0 + 500:
                raise
    doc = {"W0": cenc(W0), "N0": N0, "sigma": cenc(sigma),
           "Z0": cenc(loc.Z0), "z0": cenc(loc.z0), "w0": cenc(loc.w0),
           "fixed_point_residual": loc.fixed_point_residual,
           "derivative_modulus": loc.derivative_modulus,
           "run_config": _run_config(args)}
    emit(doc, args.output)
    return EXIT_OK


def cmd_historic(args):
    P = historic_degree7_map() if args.map is None else _map_from_args(args)
    from .histseed import historic_start_point

    z0, w0, info = historic_start_point(P, fixed_points=(0.0, 1.0))
    rep = historic_measures(P, (0.0, 1.0), (z0, w0), n0=args.n0, K=args.K,
                            delta=args.delta)
    doc = json.loads(rep.to_json())
    doc["seed"] = info
    doc["run_config"] = _run_config(args)
    emit(doc, args.output)
    return EXIT_OK


def cmd_classify_direction(args):
    P = _map_from_args(args)
    cls, direction = classify_convergence_direction(P, args.z, args.w,
                                                    n_budget=args.budget)
    doc = {"tag": cls.tag, "steps": cls.steps,
           "direction": cenc(direction) if direction is not None else None,
           "run_config": _run_config(args)}
    emit(doc, args.output)
    return EXIT_OK


def cmd_multiplier(args):
    P = _map_from_args(args)
    _, Eq = _engines_for(P, args.tol)
    period, rho = multiplier(args.lam, round(args.alpha0 or 2), Eq, Eq,
                             cycle_budget=args.budget)
    doc = {"lambda": cenc(args.lam), "period": period, "rho": cenc(rho),
           "abs_rho": abs(rho), "run_config": _run_config(args)}
    emit(doc, args.output)
    return EXIT_OK


def cmd_export_map(args):
    P = _map_from_args(args)
    text = skew_to_json(P)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="skewlav", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, with_map=True):
        if with_map:
            _add_map_args(sp)
        sp.add_argument("--tol", type=float, default=1e-10)
        sp.add_argument("--output", help="write JSON here instead of stdout")

    sp = sub.add_parser("constants", help="derived constants of the normal form")
    common(sp)
    sp.add_argument("--fixed-points", help="comma list of fiber fixed points")
    sp.set_defaults(func=cmd_constants)

    sp = sub.add_parser("fatou", help="Fatou coordinate evaluations")
    common(sp)
    sp.add_argument("--germ", choices=["p", "q0"], default="q0")
    sp.add_argument("--incoming", type=parse_complex)
    sp.add_argument("--incoming-inverse", type=parse_complex)
    sp.add_argument("--outgoing-param", type=parse_complex)
    sp.add_argument("--outgoing-coord", type=parse_complex)
    sp.add_argument("--basin", type=parse_complex)
    sp.set_defaults(func=cmd_fatou)

    sp = sub.add_parser("horn", help="lifted horn map E and dE/dW")
    common(sp)
    sp.add_argument("--W", type=parse_complex, required=True)
    sp.add_argument("--normalize", action="store_true")
    sp.set_defaults(func=cmd_horn)

    sp = sub.add_parser("lavaurs", help="generalized Lavaurs map")
    common(sp)
    sp.add_argument("--alpha", type=parse_complex, required=True)
    sp.add_argument("--sigma", type=parse_complex, required=True)
    sp.add_argument("--z", type=parse_complex, required=True)
    sp.add_argument("--w", type=parse_complex, required=True)
    sp.add_argument("--apply-q0", action="store_true",
                    help="evaluate at (p(z), q0(w)) instead")
    sp.set_defaults(func=cmd_lavaurs)

    sp = sub.add_parser("seq", help="admissible sequences")
    sp.add_argument("action", choices=["generate", "pisot-seq", "pisot-test",
                                       "construct-rational-beta"])
    sp.add_argument("--alpha", type=float, default=2.0)
    sp.add_argument("--beta", type=float, default=0.0)
    sp.add_argument("--zeta", type=float, default=1.0)
    sp.add_argument("--n0", type=int, default=1)
    sp.add_argument("--k-start", type=int, default=2)
    sp.add_argument("-K", type=int, default=20)
    sp.add_argument("--k1", type=int, default=0)
    sp.add_argument("--k2", type=int, default=1)
    sp.add_argument("--poly", help="minimal polynomial, lowest-first ints, comma separated")
    sp.add_argument("--root-index", type=int, default=0)
    sp.add_argument("--exact", action="store_true")
    sp.add_argument("--reconstruct", action="store_true")
    sp.add_argument("--reduce-ell", type=int)
    sp.add_argument("--csv")
    sp.add_argument("--output")
    sp.set_defaults(func=cmd_seq)

    sp = sub.add_parser("verify-renorm", help="Main-Theorem verifier")
    common(sp)
    sp.add_argument("--n0", type=int, default=32)
    sp.add_argument("-K", type=int, default=9)
    sp.add_argument("--k-min", type=int, default=0)
    sp.add_argument("--k-max", type=int, default=8)
    sp.add_argument("--geometric", action="store_true", default=True)
    sp.add_argument("--grid-points", type=int, default=9)
    sp.add_argument("--z-center", type=parse_complex, default=0.1 + 0j)
    sp.add_argument("--w-center", type=parse_complex, default=-0.3 + 0j)
    sp.add_argument("--precision", choices=["double", "dd", "auto"],
                    default="double")
    sp.add_argument("--csv")
    sp.set_defaults(func=cmd_verify_renorm)

    sp = sub.add_parser("eggbeater", help="passage trace diagnostics")
    common(sp)
    sp.add_argument("--z", type=parse_complex, default=0.1 + 0j)
    sp.add_argument("--w", type=parse_complex, default=-0.3 + 0j)
    sp.add_argument("--n", type=int, default=1000)
    sp.add_argument("--j-max", type=int, default=None)
    sp.add_argument("--csv")
    sp.set_defaults(func=cmd_eggbeater)

    sp = sub.add_parser("render-slice", help="vertical-slice raster (PPM)")
    common(sp)
    sp.add_argument("--z0", type=parse_complex, default=0.05 + 0j)
    sp.add_argument("--window", type=_parse_window,
                    default=(-1.3, 0.65, -0.9, 0.9))
    sp.add_argument("--width", type=int, default=800)
    sp.add_argument("--height", type=int, default=800)
    sp.add_argument("--budget", type=int, default=4000)
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--out", default="slice.ppm")
    sp.set_defaults(func=cmd_render_slice)

    sp = sub.add_parser("render-param", help="horn-family parameter plane (PPM)")
    sp.add_argument("--alpha0", type=int, default=2)
    sp.add_argument("--window", type=_parse_window,
                    default=(-12.0, 12.0, -12.0, 12.0))
    sp.add_argument("--width", type=int, default=800)
    sp.add_argument("--height", type=int, default=800)
    sp.add_argument("--budget", type=int, default=400)
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--out", default="param.ppm")
    sp.add_argument("--output")
    sp.set_defaults(func=cmd_render_param)

    sp = sub.add_parser("find-super", help="super-attracting Lavaurs locus")
    common(sp)
    sp.add_argument("--sigma", default="gamma")
    sp.add_argument("--N0", type=int, default=30)
    sp.set_defaults(func=cmd_find_super)

    sp = sub.add_parser("historic", help="historic-behaviour weights")
    common(sp)
    sp.add_argument("--n0", type=int, default=32)
    sp.add_argument("-K", type=int, default=12)
    sp.add_argument("--delta", type=float, default=0.05)
    sp.set_defaults(func=cmd_historic)

    sp = sub.add_parser("classify-direction", help="orbit direction diagnostic")
    common(sp)
    sp.add_argument("--z", type=parse_complex, required=True)
    sp.add_argument("--w", type=parse_complex, required=True)
    sp.add_argument("--budget", type=int, default=20000)
    sp.set_defaults(func=cmd_classify_direction)

    sp = sub.add_parser("multiplier", help="attracting-cycle multiplier")
    common(sp, with_map=False)
    sp.add_argument("--alpha0", type=int, default=2)
    sp.add_argument("--lam", type=parse_complex, required=True)
    sp.add_argument("--budget", type=int, default=400)
    sp.set_defaults(func=cmd_multiplier)

    sp = sub.add_parser("export-map", help="serialize a map to JSON")
    common(sp)
    sp.set_defaults(func=cmd_export_map)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except HypothesisViolated as exc:
        emit({"error": "HypothesisViolated", "message": str(exc)})
        return EXIT_HYPOTHESIS
    except (NotInBasin, OutsideDomain, OutOfHalfPlane, NotIncreasing,
            NoCriticalPointFound) as exc:
        emit({"error": type(exc).__name__, "message": str(exc)})
        return EXIT_DOMAIN
    except PrecisionBudgetExceeded as exc:
        emit({"error": "PrecisionBudgetExceeded", "message": str(exc)})
        return EXIT_PRECISION
    except SkewlavError as exc:
        emit({"error": type(exc).__name__, "message": str(exc)})
        return EXIT_HYPOTHESIS


if __name__ == "__main__":
    sys.exit(main())
