"""Command-line front end.

Subcommands route generator/domain files to the analyses and emit
deterministic JSON/CSV reports or SVG sketches.  Exit codes: 0 success,
2 configuration/parse problems, 3 numerical failures.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import config
from .disc import BoundaryPoint, RadialSchedule
from .expr import ParseError
from .generators import GeneratorSpec, gallery, gallery_names, load_generator

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class ConfigError(ValueError):
    pass


def _fmt_float(x) -> str:
    if x is None:
        return "null"
    if isinstance(x, bool):
        return "true" if x else "false"
    if x != x:
        return '"nan"'
    if x in (math.inf, -math.inf):
        return f'"{x}"'
    return config.FLOAT_FORMAT % x


def dump_json(obj, indent: int = 0) -> str:
    """Deterministic JSON: insertion-ordered fields, 17-significant-digit floats."""
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}  "{k}": {dump_json(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        return "[" + ", ".join(dump_json(v, indent) for v in seq) + "]"
    if isinstance(obj, str):
        return json.dumps(obj)
    if obj is None or isinstance(obj, (bool, float, int, np.floating, np.integer)):
        if isinstance(obj, (bool,)) or obj is None:
            return _fmt_float(obj) if obj is not None else "null"
        if isinstance(obj, (int, np.integer)):
            return str(int(obj))
        return _fmt_float(float(obj))
    if isinstance(obj, complex):
        return dump_json([obj.real, obj.imag], indent)
    raise TypeError(f"cannot serialize {type(obj)}")


def _write(text: str, path: str | None):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text + ("\n" if not text.endswith("\n") else ""))


# ---------------------------------------------------------------------------
# SVG sketches

def _svg_header(size: int = 420) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="-1.1 -1.1 2.2 2.2">',
        '<circle cx="0" cy="0" r="1" fill="none" stroke="#888" stroke-width="0.01"/>',
    ]


def _svg_pt(w: complex) -> str:
    return f"{w.real:.6f},{-w.imag:.6f}"


def svg_phase_portrait(trajectories, dw: complex | None) -> str:
    parts = _svg_header()
    for traj in trajectories:
        pts = " ".join(_svg_pt(complex(p)) for p in traj)
        parts.append(f'<polyline points="{pts}" fill="none" stroke="#1f77b4" stroke-width="0.008"/>')
    if dw is not None:
        parts.append(f'<circle cx="{dw.real:.6f}" cy="{-dw.imag:.6f}" r="0.025" fill="#d62728"/>')
    parts.append("</svg>")
    return "\n".join(parts)


def svg_arcs(arcs) -> str:
    parts = _svg_header()
    for arc in arcs:
        a0, a1 = arc.start, arc.end
        large = 1 if (a1 - a0) > math.pi else 0
        x0, y0 = math.cos(a0), -math.sin(a0)
        x1, y1 = math.cos(a1), -math.sin(a1)
        parts.append(
            f'<path d="M {x0:.6f} {y0:.6f} A 1 1 0 {large} 0 {x1:.6f} {y1:.6f}" '
            'fill="none" stroke="#2ca02c" stroke-width="0.03"/>'
        )
        parts.append(f'<circle cx="{arc.x0.value.real:.6f}" cy="{-arc.x0.value.imag:.6f}" '
                     'r="0.02" fill="#2ca02c"/>')
        parts.append(f'<circle cx="{arc.x1.value.real:.6f}" cy="{-arc.x1.value.imag:.6f}" '
                     'r="0.02" fill="#d62728"/>')
    parts.append("</svg>")
    return "\n".join(parts)


# ---------------------------------------------------------------------------
# argument plumbing

def _add_generator_args(p: argparse.ArgumentParser):
    p.add_argument("--generator", help="JSON generator file")
    p.add_argument("--expr", help="expression for G(z)")
    p.add_argument("--gallery", help="gallery name, optionally name:key=value,key=value")
    p.add_argument("--tol", type=float, default=config.FLOW_DEFAULT_TOL,
                   help="flow integration tolerance (default %(default)g)")
    p.add_argument("--schedule", default="6:40:1.0",
                   help="radial schedule kmin:kmax:scale (default %(default)s)")
    p.add_argument("--seed", type=int, default=config.GEOMETRY_SEED,
                   help="seed for randomized sweeps (default %(default)d)")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--format", choices=("json", "csv", "svg"), default="json")


def _parse_gallery_ref(text: str):
    if ":" not in text:
        return text, {}
    name, _, rest = text.partition(":")
    params = {}
    for item in rest.split(","):
        if not item:
            continue
        key, _, val = item.partition("=")
        params[key.strip()] = float(val)
    return name, params


def build_generator(args) -> GeneratorSpec:
    sources = [s for s in (args.generator, args.expr, args.gallery) if s]
    if len(sources) != 1:
        raise ConfigError("exactly one of --generator/--expr/--gallery is required")
    try:
        if args.generator:
            return load_generator(args.generator)
        if args.expr:
            return load_generator({"g_expr": args.expr})
        name, params = _parse_gallery_ref(args.gallery)
        return gallery(name, params)
    except ParseError as exc:
        raise ConfigError(f"expression error: {exc}") from exc
    except (KeyError, ValueError, OSError, json.JSONDecodeError) as exc:
        raise ConfigError(str(exc)) from exc


def parse_schedule(text: str) -> RadialSchedule:
    try:
        kmin, kmax, scale = text.split(":")
        return RadialSchedule(int(kmin), int(kmax), float(scale))
    except ValueError as exc:
        raise ConfigError(f"bad schedule {text!r}: {exc}") from exc


def _parse_point(text: str) -> complex:
    try:
        re, im = text.split(",")
        return complex(float(re), float(im))
    except ValueError as exc:
        raise ConfigError(f"bad point {text!r}; expected re,im") from exc


# ---------------------------------------------------------------------------
# subcommands

def cmd_flow(args) -> int:
    from .flow import dw_estimate, integrate_flow
    gen = build_generator(args)
    z0 = _parse_point(args.point)
    try:
        traj = integrate_flow(gen, z0, args.t, tol=args.tol)
    except (ArithmeticError, ValueError) as exc:
        print(f"flow failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.format == "csv":
        lines = ["t,re,im,step_error"]
        for t, z in zip(traj.times, traj.points):
            lines.append(f"{float(t)!r},{float(z.real)!r},{float(z.imag)!r},"
                         f"{float(traj.max_step_error)!r}")
        _write("\n".join(lines) + "\n", args.out)
    elif args.format == "svg":
        dw = dw_estimate(gen)
        _write(svg_phase_portrait([traj.points], dw.value if dw.converged else None), args.out)
    else:
        _write(dump_json({
            "times": [float(t) for t in traj.times],
            "points": [[z.real, z.imag] for z in traj.points],
            "accepted": traj.accepted,
            "rejected": traj.rejected,
            "max_step_error": traj.max_step_error,
            "truncated": traj.truncated,
        }), args.out)
    return EXIT_OK


def cmd_classify(args) -> int:
    from .singularity import classify, singularity_crosscheck
    gen = build_generator(args)
    sched = parse_schedule(args.schedule)
    x = BoundaryPoint(args.theta)
    try:
        report = classify(gen, x, sched)
        payload = report.to_json_dict()
        if report.classification == "regular-fractional" and args.crosscheck:
            alpha = report.diagnostics.get("alpha", report.alpha_plus)
            cc = singularity_crosscheck(gen, x, alpha, tuple(args.t_values))
            payload["checks"] = list(payload["checks"]) + [{
                "name": "linked-limits",
                "flow_identity_rel": {str(k): v for k, v in cc.flow_identity_rel.items()},
                "hprime_identity_rel": cc.hprime_identity_rel,
                "ratio_identity_rel": cc.ratio_identity_rel,
                "partial": cc.partial,
            }]
    except (ArithmeticError, ValueError) as exc:
        print(f"classification failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if report.classification == "dw-point":
        print("note: probe point is the Denjoy-Wolff point; orders there follow "
              "a different regime", file=sys.stderr)
    _write(dump_json(payload), args.out)
    return EXIT_OK


def cmd_contact(args) -> int:
    from .contact import detect_arcs, life_time
    gen = build_generator(args)
    try:
        arcs = detect_arcs(gen, resolution=args.resolution)
        payload = []
        for arc in arcs:
            mid = arc.start + arc.length / 2.0
            try:
                t1, _orbit = life_time(gen, arc, mid, t_max=args.t_max)
                arc.life_times[round(mid, 9)] = t1
            except (ArithmeticError, RuntimeError):
                pass
            payload.append(arc.to_json_dict())
    except (ArithmeticError, ValueError) as exc:
        print(f"contact scan failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.format == "svg":
        _write(svg_arcs(arcs), args.out)
    else:
        _write(dump_json({"arcs": payload}), args.out)
    return EXIT_OK


def cmd_geometry(args) -> int:
    from . import geometry as geo
    try:
        dom = geo.load_domain(args.domain)
    except (ValueError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"bad domain file: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    w0 = _parse_point(args.vertex)
    out = {}
    try:
        checks = args.checks.split(",")
        if "bertilsson" in checks:
            out["bertilsson"] = geo.bertilsson_alphas(dom, w0, seed=args.seed).to_json_dict()
        if "dini" in checks:
            rep = geo.dini_corner(dom, w0)
            out["dini"] = {"opening": rep.opening, "verdict": rep.dini}
        if "sector" in checks:
            res = geo.sector_test(dom, w0, _parse_point(args.direction), args.opening, args.rho,
                                  seed=args.seed)
            out["sector"] = {"contained": res["contained"],
                             "witness": None if res["witness"] is None
                             else [res["witness"].real, res["witness"].imag]}
        if "rw" in checks:
            out["rw"] = geo.rw_subdivision(dom).to_json_dict()
    except (ArithmeticError, ValueError) as exc:
        print(f"geometry check failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    _write(dump_json(out), args.out)
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="holoflow",
        description="Numerics for one-parameter semigroups of holomorphic self-maps "
                    "of the unit disc",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_flow = sub.add_parser("flow", help="integrate the semigroup flow from a seed")
    _add_generator_args(p_flow)
    p_flow.add_argument("--point", required=True, help="seed z0 as re,im")
    p_flow.add_argument("--t", type=float, default=5.0, help="final time (default %(default)s)")
    p_flow.set_defaults(fn=cmd_flow)

    p_cls = sub.add_parser("classify", help="boundary singularity report at a point")
    _add_generator_args(p_cls)
    p_cls.add_argument("--theta", type=float, required=True, help="boundary angle (radians)")
    p_cls.add_argument("--crosscheck", action="store_true",
                       help="run the linked-limit consistency checks")
    p_cls.add_argument("--t-values", type=float, nargs="*", default=[0.5, 1.0])
    p_cls.set_defaults(fn=cmd_classify)

    p_con = sub.add_parser("contact", help="detect contact arcs and life-times")
    _add_generator_args(p_con)
    p_con.add_argument("--resolution", type=int, default=config.ARC_SCAN_RESOLUTION)
    p_con.add_argument("--t-max", type=float, default=50.0)
    p_con.set_defaults(fn=cmd_contact)

    p_geo = sub.add_parser("geometry", help="planar-domain boundary criteria")
    p_geo.add_argument("--domain", required=True, help="JSON domain file")
    p_geo.add_argument("--vertex", default="0,0", help="probe point w0 as re,im")
    p_geo.add_argument("--checks", default="bertilsson",
                       help="comma list from dini,sector,bertilsson,rw")
    p_geo.add_argument("--direction", default="1,0", help="cone direction for the sector check")
    p_geo.add_argument("--opening", type=float, default=math.pi / 3)
    p_geo.add_argument("--rho", type=float, default=0.1)
    p_geo.add_argument("--seed", type=int, default=config.GEOMETRY_SEED)
    p_geo.add_argument("--out")
    p_geo.add_argument("--format", choices=("json",), default="json")
    p_geo.set_defaults(fn=cmd_geometry)

    gallery_help = sub.add_parser("gallery", help="list registry generators")
    gallery_help.set_defaults(fn=lambda args: (_write("\n".join(gallery_names()), None), EXIT_OK)[1])
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
