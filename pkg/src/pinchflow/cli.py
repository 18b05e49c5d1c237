"""Command line interface.

Exit codes: 0 pass, 1 fail (a verification or monitor did not pass),
2 usage error, 3 numeric precondition violated.  Numeric output is printed
with 17 significant digits.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, replace
from pathlib import Path

from . import diagnostics, flow, pinching, runio, sff, verify

PASS, FAIL, USAGE, PRECONDITION = 0, 1, 2, 3

_PRECONDITION_ERRORS = (
    pinching.DomainError,
    pinching.InadmissibleEpsError,
    flow.FlowDomainError,
    flow.CflError,
    sff.DimensionError,
    sff.InfeasibleTargetError,
)


def g17(x) -> str:
    return format(float(x), ".17g")


def _add_nc(p, c_default=1.0):
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--c", type=float, default=c_default)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pinchflow",
        description="Curvature pinching and mean curvature flow laboratory",
    )
    parser.add_argument("--config", type=str, default=None, help="run config file")
    parser.add_argument("--seed", type=int, default=None, help="override RNG seed")
    parser.add_argument("--json", dest="json_flag", action="store_true",
                        help="emit machine-readable JSON where supported")
    sub = parser.add_subparsers(dest="command", required=True)

    p_pinch = sub.add_parser("pinch", help="evaluate the pinching functions")
    pinch_sub = p_pinch.add_subparsers(dest="pinch_command", required=True)
    p_eval = pinch_sub.add_parser("eval", help="evaluate one function at one point")
    _add_nc(p_eval)
    p_eval.add_argument("--x", type=float, required=True)
    p_eval.add_argument("--fn", choices=("alpha", "beta", "gamma", "gammaring", "omega"),
                        default="gamma")
    p_eval.add_argument("--order", type=int, default=0, choices=(0, 1, 2, 3))
    p_pc = pinch_sub.add_parser("constants", help="derived constants table")
    _add_nc(p_pc)

    p_const = sub.add_parser("constants", help="derived constants table")
    _add_nc(p_const)

    p_verify = sub.add_parser("verify", help="run a lemma verification")
    p_verify.add_argument("--lemma", required=True,
                          choices=("gminab", "app", "gaep", "simons", "grad"))
    _add_nc(p_verify)
    p_verify.add_argument("--eps", type=float, default=None)
    p_verify.add_argument("--grid", type=str, default=None, metavar="MIN:MAX:PTS")
    p_verify.add_argument("--json", dest="json_path", type=str, default=None,
                          metavar="OUT.json", help="write the report as JSON")
    p_verify.add_argument("--samples", type=int, default=100_000)

    p_flow = sub.add_parser("flow", help="run the rotational flow solver")
    flow_sub = p_flow.add_subparsers(dest="flow_command", required=True)
    p_run = flow_sub.add_parser("run")
    p_run.add_argument("--preset", choices=("clifford", "cap", "perturbed-cap"), default=None)
    p_run.add_argument("--n", type=int, default=None)
    p_run.add_argument("--param", type=float, default=None,
                       help="lambda for clifford, cap radius otherwise")
    p_run.add_argument("--eps", type=float, default=None)
    p_run.add_argument("--sigma", type=float, default=None)
    p_run.add_argument("--dt-safety", type=float, default=None)
    p_run.add_argument("--nodes", type=int, default=None)
    p_run.add_argument("--max-steps", type=int, default=None)
    p_run.add_argument("--record-every", type=int, default=None)
    p_run.add_argument("--out", type=str, default=None, help="CSV output path")
    p_run.add_argument("--manifest", type=str, default=None)
    p_run.add_argument("--svg", type=str, default=None)

    p_cliff = sub.add_parser("clifford", help="exact product-torus flow")
    cliff_sub = p_cliff.add_subparsers(dest="clifford_command", required=True)
    p_exact = cliff_sub.add_parser("exact")
    p_exact.add_argument("--n", type=int, required=True)
    p_exact.add_argument("--r1sq", type=float, required=True)
    p_exact.add_argument("--t", type=float, required=True)

    p_diag = sub.add_parser("diagnose", help="recompute diagnostics from a run CSV")
    p_diag.add_argument("--csv", type=str, required=True)
    _add_nc(p_diag)
    p_diag.add_argument("--eps", type=float, default=0.0)
    p_diag.add_argument("--sigma", type=float, default=0.0)

    p_plot = sub.add_parser("plot", help="SVG plot of maxU / maxFsigma from a run CSV")
    p_plot.add_argument("--csv", type=str, required=True)
    p_plot.add_argument("--out", type=str, required=True)

    return parser


def _parse_grid(text: str | None):
    if text is None:
        return None
    try:
        lo, hi, pts = text.split(":")
        return verify.GridSpec(float(lo), float(hi), int(pts))
    except ValueError as exc:
        raise pinching.DomainError(f"bad grid spec {text!r}: {exc}") from exc


def _cmd_pinch_eval(args) -> int:
    fn = args.fn
    if fn == "alpha":
        value = pinching.alpha(args.n, args.c, args.x, args.order)
    elif fn == "beta":
        value = pinching.beta(args.n, args.c, args.x, args.order)
    elif fn == "gamma":
        value = pinching.gamma(args.n, args.c, args.x, args.order)
    elif fn == "gammaring":
        value = pinching.gamma_ring(args.n, args.c, args.x, args.order)
    else:
        if args.c != 1.0:
            raise pinching.DomainError("omega is defined at c = 1 only")
        if args.order > 2:
            raise pinching.DomainError("omega derivatives available up to order 2")
        value = pinching.omega(args.n, args.x, args.order)
    print(g17(value))
    return PASS


def _cmd_constants(args) -> int:
    consts = pinching.derive_constants(args.n, args.c)
    pairs = [
        ("n", str(consts.n)),
        ("c", g17(consts.c)),
        ("kappa_n", g17(consts.kappa_n)),
        ("y_n", g17(consts.y_n)),
        ("x0", g17(consts.x0)),
        ("iota_n", g17(consts.iota_n)),
        ("theta_n", g17(consts.theta_n)),
        ("gamma0", g17(consts.gamma0)),
        ("k_n", g17(consts.k_n)),
        ("delta_n", g17(consts.delta_n)),
    ]
    if args.json_flag:
        print(json.dumps(dict(pairs)))
    else:
        for key, value in pairs:
            print(f"{key} = {value}")
    return PASS


def _cmd_verify(args) -> int:
    grid = _parse_grid(args.grid)
    seed = args.seed if args.seed is not None else 0
    if args.lemma == "gminab":
        report = verify.verify_gminab(args.n, args.c, grid)
    elif args.lemma == "app":
        report = verify.verify_app(args.n, grid)
    elif args.lemma == "gaep":
        eps = args.eps if args.eps is not None else verify.admissible_eps(args.n)
        report = verify.verify_gaep(args.n, eps, grid)
    elif args.lemma == "simons":
        report = verify.verify_simons(args.n, args.samples, seed)
    else:
        report = verify.verify_grad(args.n, args.samples, seed)
    if args.json_path:
        Path(args.json_path).write_text(report.to_json() + "\n", encoding="utf-8")
    if args.json_flag:
        print(report.to_json())
    else:
        print(f"lemma={report.lemma_id} n={report.n} pass={report.passed} "
              f"min_margin={g17(report.min_margin)}")
        for item in report.items:
            print(f"  {item.name}: min_margin={g17(item.min_margin)}")
    return PASS if report.passed else FAIL


def _build_run_config(args) -> runio.RunConfig:
    cfg = runio.load_config(args.config) if args.config else runio.RunConfig()
    overrides = {}
    for attr, key in (
        ("preset", "preset"),
        ("n", "n"),
        ("param", "param"),
        ("eps", "eps"),
        ("sigma", "sigma"),
        ("dt_safety", "dt_safety"),
        ("nodes", "nodes"),
        ("max_steps", "max_steps"),
        ("record_every", "record_every"),
        ("out", "out_csv"),
        ("manifest", "out_manifest"),
        ("svg", "out_svg"),
    ):
        value = getattr(args, attr, None)
        if value is not None:
            overrides[key] = value
    if args.seed is not None:
        overrides["seed"] = args.seed
    return replace(cfg, **overrides)


def _cmd_flow_run(args) -> int:
    cfg = _build_run_config(args)
    profile = cfg.pinching_profile()
    if cfg.preset == "clifford":
        geom = flow.clifford_profile(cfg.n, cfg.param, cfg.nodes)
    elif cfg.preset == "cap":
        geom = flow.cap_profile(cfg.param, cfg.nodes)
    else:
        geom = flow.perturbed_cap_profile(cfg.param, cfg.nodes, cfg.amplitude, cfg.mode)
    state = flow.make_flow_state(geom, profile)
    limits = flow.FlowLimits(
        max_steps=cfg.max_steps,
        record_every=cfg.record_every,
        dt_safety=cfg.dt_safety,
    )
    record = flow.run_flow(state, profile, limits, config=asdict(cfg))
    written = runio.emit_outputs(
        record,
        cfg.out_csv,
        cfg.out_manifest or None,
        cfg.out_svg or None,
    )
    print(f"termination={record.termination} rows={len(record.rows)} "
          f"t_final={g17(record.rows[-1].t)}")
    for path in written:
        print(f"wrote {path}")
    return PASS


def _cmd_clifford_exact(args) -> int:
    state, T = flow.clifford_flow_exact(args.n, args.r1sq, args.t)
    print(f"r1sq={g17(state.r1**2)} lambda={g17(state.lam)} "
          f"normH={g17(state.normH)} normh2={g17(state.normh2)} T={g17(T)}")
    return PASS


def _cmd_diagnose(args) -> int:
    run = runio.read_run_csv(args.csv)
    profile = pinching.PinchingProfile(args.n, args.c, args.eps, args.sigma)
    dev = runio.recompute_diagnostics(run, profile)
    decay = diagnostics.check_decay(run, profile)
    print(f"rows={len(run.rows)}")
    for key in sorted(dev):
        print(f"max_deviation.{key} = {g17(dev[key])}")
    print(f"decay.sup_envelope = {g17(decay.sup_envelope)}")
    print(f"decay.sup_weighted_f = {g17(decay.sup_weighted_f)}")
    print(f"decay.pass = {decay.passed}")
    return PASS if decay.passed else FAIL


def _cmd_plot(args) -> int:
    run = runio.read_run_csv(args.csv)
    runio.plot_run_svg(run, args.out)
    print(f"wrote {args.out}")
    return PASS


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "pinch":
            if args.pinch_command == "eval":
                return _cmd_pinch_eval(args)
            return _cmd_constants(args)
        if args.command == "constants":
            return _cmd_constants(args)
        if args.command == "verify":
            return _cmd_verify(args)
        if args.command == "flow":
            return _cmd_flow_run(args)
        if args.command == "clifford":
            return _cmd_clifford_exact(args)
        if args.command == "diagnose":
            return _cmd_diagnose(args)
        if args.command == "plot":
            return _cmd_plot(args)
        parser.error(f"unknown command {args.command}")
    except _PRECONDITION_ERRORS as exc:
        print(f"precondition: {exc}", file=sys.stderr)
        return PRECONDITION
    return USAGE


if __name__ == "__main__":
    sys.exit(main())
