"""Command line front end.

    fcurve eval CURVE --c C
    fcurve flow CURVE --c C [--beta B] [--max-time T] [--max-steps N] [--stop-grad G]
                [--out-traj CSV] [--out-final JSON]
    fcurve round CURVE --corner I --eps E --c C [--direction inward|outward] [--out JSON]
    fcurve width {lens,latitude} --c C [--L L --H H | --radius R] [--n-slices N] [--out CSV]
    fcurve lens-table --c C [C ...] [--L L --H H] [--out CSV]
    fcurve rerun MANIFEST

Exit codes: 0 success, 2 unreadable input or bad arguments, 3 geometry error,
4 flow blow-up, 5 corner rounding could not be certified. Error names go to
stderr. Every command that writes files also writes a manifest next to its
first output (or to --manifest); ``rerun`` replays it.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import __version__
from .corners import round_corner
from .curve import detect_corners
from .errors import (
    AngleTooLargeError,
    BlowUpError,
    CertificationError,
    EpsilonTooLargeError,
    GeometryError,
)
from .flow import BLOW_UP, FlowConfig, run
from .functional import eval_fc
from .io import ParseError, read_curve, read_region, write_csv, write_curve, write_json
from .minmax import eval_family, latitude_family, lens_family
from .oracle import lens_exact, lens_feasible
from .surface import flat_torus, round_sphere

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_GEOMETRY = 3
EXIT_BLOW_UP = 4
EXIT_ROUNDING = 5

ROUNDING_ERRORS = (CertificationError, EpsilonTooLargeError, AngleTooLargeError)

TRAJECTORY_COLUMNS = ["step", "t", "F_c", "length", "area", "k_min", "k_max", "grad_norm",
                      "self_intersecting"]
WIDTH_COLUMNS = ["t", "F_c", "length", "area"]
LENS_COLUMNS = ["c", "exact_length", "exact_area", "exact_fc", "expansion_ratio"]


class Outputs:
    """Collects written paths for the manifest."""

    def __init__(self):
        self.paths: list[str] = []

    def add(self, path):
        if path is not None and str(path) != "-":
            self.paths.append(str(path))


def cmd_eval(args, out: Outputs) -> int:
    region = read_region(args.curve)
    v = eval_fc(region, args.c)
    write_json(None, {"length": v.length_term, "area": v.area_term, "fc": v.value})
    return EXIT_OK


def cmd_flow(args, out: Outputs) -> int:
    curve = read_curve(args.curve)
    config = FlowConfig(
        c=args.c,
        beta=args.beta,
        max_time=args.max_time,
        max_steps=args.max_steps,
        stop_gradient_norm=args.stop_grad,
        resample_spacing=args.spacing,
    )
    result = run(curve, config)
    rows = [
        [r.step, r.t, r.F_c, r.length, r.area, r.k_min, r.k_max, r.grad_norm, r.self_intersecting]
        for r in result.records
    ]
    if args.out_traj:
        write_csv(args.out_traj, TRAJECTORY_COLUMNS, rows)
        out.add(args.out_traj)
    if args.out_final:
        write_curve(args.out_final, result.final.curve)
        out.add(args.out_final)
    last = result.records[-1]
    write_json(None, {
        "termination": result.reason,
        "steps": result.final.step_count,
        "t": result.final.t,
        "F_c": None if math.isnan(last.F_c) else last.F_c,
        "length": last.length,
        "grad_norm": last.grad_norm,
    })
    if result.reason == BLOW_UP:
        print(f"blow-up: {result.error}", file=sys.stderr)
        return EXIT_BLOW_UP
    return EXIT_OK


def cmd_round(args, out: Outputs) -> int:
    curve = read_curve(args.curve)
    cc = detect_corners(curve)
    if not 0 <= args.corner < len(cc.corners):
        raise ParseError(f"corner index {args.corner} out of range ({len(cc.corners)} corners)")
    rounded, rep = round_corner(cc, args.corner, args.eps, args.c, direction=args.direction,
                                visit=args.visit)
    if args.out:
        write_curve(args.out, rounded)
        out.add(args.out)
    write_json(None, {
        "eps": rep.eps,
        "direction": rep.direction,
        "theta": rep.theta,
        "delta_fc": rep.delta_F,
        "delta_fc_chart": rep.delta_F_chart,
        "delta_length": rep.delta_length,
        "delta_area": rep.delta_area,
        "alpha": rep.alpha,
        "k_arc_min": rep.k_arc_min,
        "k_arc_max": rep.k_arc_max,
        "center": [float(v) for v in rep.center],
        "x_eps": [float(v) for v in rep.x_eps],
        "y_eps": [float(v) for v in rep.y_eps],
    })
    return EXIT_OK


def cmd_width(args, out: Outputs) -> int:
    if args.family == "lens":
        fam = lens_family(flat_torus(args.L, args.H), args.c, n_points=args.n_points)
    else:
        fam = latitude_family(round_sphere(args.radius), n_points=args.n_points)
    est = eval_family(fam, args.c, args.n_slices, workers=args.workers)
    if args.out:
        write_csv(args.out, WIDTH_COLUMNS, [[p.t, p.F_c, p.length, p.area] for p in est.profile])
        out.add(args.out)
    write_json(None, {
        "family": args.family,
        "c": est.c,
        "n_slices": est.n_slices,
        "t_star": est.t_star,
        "value": est.value,
    })
    return EXIT_OK


def lens_table_rows(L: float, H: float, cs) -> list[list]:
    torus = flat_torus(L, H)
    rows = []
    for c in cs:
        if not lens_feasible(torus, c):
            rows.append([c, "infeasible", "infeasible", "infeasible", "infeasible"])
            continue
        length, area, fc = lens_exact(c, H)
        rows.append([c, length, area, fc, (2.0 * H - fc) / (c * c)])
    return rows


def cmd_lens_table(args, out: Outputs) -> int:
    write_csv(args.out, LENS_COLUMNS, lens_table_rows(args.L, args.H, args.c))
    out.add(args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fcurve", description="Length-minus-area curves on model surfaces.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--seed", type=int, default=0, help="recorded in the manifest (default 0)")
    parser.add_argument("--manifest", help="manifest path (default: next to the first output)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate F_c on a curve file")
    p.add_argument("curve")
    p.add_argument("--c", type=float, required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("flow", help="run the c-flow")
    p.add_argument("curve")
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--beta", type=float, default=0.25)
    p.add_argument("--max-time", type=float, default=1.0)
    p.add_argument("--max-steps", type=int, default=1_000_000)
    p.add_argument("--stop-grad", type=float, default=1e-6)
    p.add_argument("--spacing", type=float, default=None, help="resampling spacing")
    p.add_argument("--out-traj")
    p.add_argument("--out-final")
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("round", help="round one corner of a curve")
    p.add_argument("curve")
    p.add_argument("--corner", type=int, default=0)
    p.add_argument("--visit", type=int, default=0)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--direction", choices=["inward", "outward"], default="inward")
    p.add_argument("--out")
    p.set_defaults(func=cmd_round)

    p = sub.add_parser("width", help="F_c profile of a sweepout family")
    p.add_argument("family", choices=["lens", "latitude"])
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--L", type=float, default=3.0)
    p.add_argument("--H", type=float, default=1.0)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--n-slices", type=int, default=64)
    p.add_argument("--n-points", type=int, default=1024)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_width)

    p = sub.add_parser("lens-table", help="closed-form lens data")
    p.add_argument("--c", type=float, nargs="+", required=True)
    p.add_argument("--L", type=float, default=3.0)
    p.add_argument("--H", type=float, default=1.0)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_lens_table)

    p = sub.add_parser("rerun", help="replay a manifest")
    p.add_argument("manifest_file")
    p.set_defaults(func=None)
    return parser


def _write_manifest(args, argv: list[str], out: Outputs) -> None:
    target = args.manifest or (out.paths[0] + ".manifest.json" if out.paths else None)
    if target is None:
        return
    params = {k: v for k, v in vars(args).items() if k not in ("func", "manifest")}
    write_json(target, {
        "command": args.command,
        "parameters": params,
        "inputs": [params["curve"]] if "curve" in params else [],
        "outputs": out.paths,
        "seed": args.seed,
        "version": __version__,
        "argv": argv,
    })


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    if args.command == "rerun":
        try:
            manifest = json.loads(Path(args.manifest_file).read_text())
            return main(manifest["argv"])
        except (OSError, KeyError, json.JSONDecodeError) as exc:
            print(f"parse-error: {exc}", file=sys.stderr)
            return EXIT_PARSE
    out = Outputs()
    try:
        code = args.func(args, out)
    except ParseError as exc:
        print(f"{exc.name}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ROUNDING_ERRORS as exc:
        print(f"{exc.name}: {exc}", file=sys.stderr)
        return EXIT_ROUNDING
    except BlowUpError as exc:
        print(f"{exc.name}: {exc}", file=sys.stderr)
        return EXIT_BLOW_UP
    except GeometryError as exc:
        print(f"{exc.name}: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY
    except ValueError as exc:
        print(f"invalid-argument: {exc}", file=sys.stderr)
        return EXIT_PARSE
    _write_manifest(args, argv, out)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
