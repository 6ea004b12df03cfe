"""Command-line front end: ``planarsym <command> [options]``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from importlib import resources

import numpy as np

from . import dynamics as dyn
from .certify import CertifyConfig, certify_global, explain
from .groups import GroupSpec, contains_flip
from .jsonio import dumps, write_atomic
from .local import table_row
from .maps import (
    ExprSyntaxError,
    MapDomainError,
    MapSpecError,
    UnboundParameterError,
    load_map_spec,
    map_from_json_dict,
    parse_expr,
    pretty,
)
from .symmetry import detect_symmetry_group

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3

BUNDLED = ("figure1", "linear_d2", "repellor_d2", "so2_radial", "z3_rotscale")
CSV_COLUMNS = ["seed_x", "seed_y", "class", "period", "iterations", "final_x", "final_y"]

CLASS_COLORS = {
    "ToFixed": "#1f77b4",
    "ToInfinity": "#d62728",
    "Periodic": "#2ca02c",
    "Unresolved": "#7f7f7f",
}


class InputError(Exception):
    pass


# ---------------------------------------------------------------- helpers


def load_spec(path: str):
    """Load a map spec from a file, or a bundled one as ``example:NAME``."""
    if path.startswith("example:"):
        name = path.split(":", 1)[1]
        if name.endswith(".json"):
            name = name[:-5]
        if name not in BUNDLED:
            raise InputError(f"no bundled example {name!r}; choose from {', '.join(BUNDLED)}")
        text = resources.files("planarsym").joinpath("data", f"{name}.json").read_text("utf-8")
        return map_from_json_dict(json.loads(text))
    try:
        return load_map_spec(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None


def emit(text: str, out) -> None:
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def _cfg(args) -> CertifyConfig:
    orbit = dyn.OrbitConfig(max_iter=args.iters)
    return CertifyConfig(box=args.box, tol=args.tol, seed=args.seed, orbit=orbit)


def _parse_xy(text: str):
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError:
        raise InputError(f"expected 'x,y', got {text!r}") from None
    return x, y


def _read_seeds(path: str) -> list:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None
    pts = []
    for i, r in enumerate(rows):
        try:
            pts.append((float(r[0]), float(r[1])))
        except (ValueError, IndexError):
            if i == 0:
                continue  # header row
            raise InputError(f"{path}: bad seed row {i + 1}: {r}") from None
    return pts


def grid_points(n: int, box: float) -> np.ndarray:
    if n <= 0:
        return np.zeros((0, 2))
    g = np.linspace(-box, box, n) if n > 1 else np.zeros(1)
    gx, gy = np.meshgrid(g, g)
    return np.column_stack([gx.ravel(), gy.ravel()])


def _g17(v: float) -> str:
    return "%.17g" % v


# ---------------------------------------------------------------- commands


def cmd_analyze(args) -> int:
    m = load_spec(args.spec)
    try:
        cert = certify_global(m, _cfg(args))
    except MapDomainError as exc:
        partial = {"map": m.name, "conclusion": "NotCertified", "route": "evaluation failed",
                   "errors": [str(exc)]}
        emit(dumps(partial) + "\n", args.out)
        return EXIT_OK
    text = explain(cert) if args.text else dumps(cert.to_dict()) + "\n"
    emit(text, args.out)
    return EXIT_OK


def orbit_seeds(args) -> np.ndarray:
    pts = []
    if args.grid is not None:
        pts.append(grid_points(args.grid, args.box))
    if args.at:
        pts.append(np.array([_parse_xy(t) for t in args.at], float).reshape(-1, 2))
    if args.seeds_file:
        pts.append(np.array(_read_seeds(args.seeds_file), float).reshape(-1, 2))
    if args.points is not None or not pts:
        n = 100 if args.points is None else args.points
        if n < 0:
            raise InputError("--points must be >= 0")
        pts.append(dyn.disk_samples(n, args.box, args.seed))
    return np.vstack(pts) if pts else np.zeros((0, 2))


def orbits_csv(orbits) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for o in orbits:
        w.writerow([_g17(o.seed[0]), _g17(o.seed[1]), o.kind.value, o.period, o.iterations,
                    _g17(o.final[0]), _g17(o.final[1])])
    return buf.getvalue()


def cmd_orbits(args) -> int:
    m = load_spec(args.spec)
    seeds = orbit_seeds(args)
    orbits = dyn.classify_orbits(m, seeds, dyn.OrbitConfig(max_iter=args.iters)) if len(seeds) else []
    emit(orbits_csv(orbits), args.out)
    return EXIT_OK


def _f6(v: float) -> str:
    s = "%.6f" % v
    return "0.000000" if s == "-0.000000" else s


def portrait_svg(m, group: GroupSpec, box: float, grid: int, steps: int, max_iter: int,
                 size: int = 600) -> str:
    """Static phase portrait: orbit polylines by class, fixed and period-2 markers, flip axis."""
    half = 1.25 * box
    scale = size / (2 * half)

    def sx(x):
        return (x + half) * scale

    def sy(y):
        return (half - y) * scale

    seeds = grid_points(grid, box)
    orbits = dyn.classify_orbits(m, seeds, dyn.OrbitConfig(max_iter=max_iter)) if len(seeds) else []
    paths = dyn.trajectories(m, seeds, steps) if len(seeds) else np.zeros((0, steps + 1, 2))
    fixed = dyn.find_fixed_points(m, box)
    pairs = dyn.find_two_periodic(m, box, extra_seeds=fixed)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<title>{m.name} [{group}]</title>',
        f'<rect class="background" x="0" y="0" width="{size}" height="{size}" fill="white"/>',
    ]
    if contains_flip(group):
        out.append(
            f'<line class="flip-axis" x1="{_f6(sx(-half))}" y1="{_f6(sy(0.0))}" '
            f'x2="{_f6(sx(half))}" y2="{_f6(sy(0.0))}" stroke="#999999" stroke-dasharray="4 3"/>'
        )
    for o, path in zip(orbits, paths):
        keep = []
        for x, y in path:
            if not (math.isfinite(x) and math.isfinite(y)) or max(abs(x), abs(y)) > half:
                break
            keep.append(f"{_f6(sx(x))},{_f6(sy(y))}")
        if len(keep) < 2:
            keep = keep * 2 if keep else []
        if not keep:
            continue
        color = CLASS_COLORS[o.kind.value]
        out.append(
            f'<polyline class="orbit {o.kind.value}" fill="none" stroke="{color}" '
            f'stroke-width="1" points="{" ".join(keep)}"/>'
        )
    for p in fixed:
        out.append(
            f'<circle class="fixed-point" cx="{_f6(sx(p[0]))}" cy="{_f6(sy(p[1]))}" r="4" fill="black"/>'
        )
    for pair in pairs:
        for p in pair:
            out.append(
                f'<circle class="period2" cx="{_f6(sx(p[0]))}" cy="{_f6(sy(p[1]))}" r="4" '
                f'fill="none" stroke="#2ca02c" stroke-width="2"/>'
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def cmd_portrait(args) -> int:
    m = load_spec(args.spec)
    g = detect_symmetry_group(m, tol=args.tol)
    emit(portrait_svg(m, g, args.box, args.grid, args.steps, args.iters), args.out)
    return EXIT_OK


def cmd_table(args) -> int:
    try:
        g = GroupSpec.parse(args.group)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    row = table_row(g).to_dict()
    if args.json:
        emit(dumps(row) + "\n", args.out)
        return EXIT_OK
    lines = [
        f"group: {row['group']}",
        f"contains flip: {'yes' if row['contains_flip'] else 'no'}",
        f"Df(0) pattern: {row['jacobian_pattern']}",
        f"local dynamics: {', '.join(row['admissible_local'])}",
    ]
    lines += [f"route ({k}): {v}" for k, v in row["global_route"].items()]
    emit("\n".join(lines) + "\n" + dumps(row) + "\n", args.out)
    return EXIT_OK


def cmd_detect(args) -> int:
    m = load_spec(args.spec)
    emit(f"{detect_symmetry_group(m, args.n_max, args.tol)}\n", args.out)
    return EXIT_OK


def cmd_parse_check(args) -> int:
    try:
        node = parse_expr(args.expr)
    except ExprSyntaxError as exc:
        pos = getattr(exc, "position", None)
        msg = f"error: {exc}\n"
        if pos is not None:
            msg += f"  {args.expr}\n  {' ' * pos}^\n"
        sys.stderr.write(msg)
        return EXIT_INPUT
    emit(pretty(node) + "\n", args.out)
    return EXIT_OK


# ---------------------------------------------------------------- parser


GLOBAL_DEFAULTS = {"seed": 42, "tol": 1e-9, "box": 3.0, "iters": 10_000, "out": None}


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError("must be a positive number")
    return v


def _global_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="RNG seed (default 42)")
    g.add_argument("--tol", type=_positive_float, default=argparse.SUPPRESS,
                   help="numerical tolerance (default 1e-9)")
    g.add_argument("--box", type=_positive_float, default=argparse.SUPPRESS,
                   help="half-width of the search box (default 3)")
    g.add_argument("--iters", type=_positive_int, default=argparse.SUPPRESS,
                   help="orbit iteration cap (default 10000)")
    g.add_argument("--out", default=argparse.SUPPRESS, help="output path (default stdout)")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags()
    ap = argparse.ArgumentParser(
        prog="planarsym", parents=[common],
        description="Symmetry, local stability and global-dynamics certificates for planar maps.",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    spec_help = "map spec JSON file, or example:NAME for a bundled spec"

    p = sub.add_parser("analyze", parents=[common], help="full certificate report (JSON)")
    p.add_argument("spec", help=spec_help)
    p.add_argument("--text", action="store_true", help="human-readable report instead of JSON")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("orbits", parents=[common], help="classify orbits and write CSV")
    p.add_argument("spec", help=spec_help)
    p.add_argument("--points", type=int, help="random seeds in the disk of radius --box")
    p.add_argument("--grid", type=int, help="N x N seed grid over the box")
    p.add_argument("--at", action="append", metavar="X,Y", help="explicit seed (repeatable)")
    p.add_argument("--seeds-file", help="CSV file of x,y seeds")
    p.set_defaults(func=cmd_orbits)

    p = sub.add_parser("portrait", parents=[common], help="SVG phase portrait")
    p.add_argument("spec", help=spec_help)
    p.add_argument("--grid", type=_positive_int, default=9, help="N x N seed grid (default 9)")
    p.add_argument("--steps", type=_positive_int, default=60, help="polyline length (default 60)")
    p.set_defaults(func=cmd_portrait)

    p = sub.add_parser("table", parents=[common], help="equivariant-table row for a group")
    p.add_argument("--group", required=True, help="O2, SO2, D:<n>, Z:<n>, Z2k or trivial")
    p.add_argument("--json", action="store_true", help="JSON only")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("detect", parents=[common], help="detect the symmetry group")
    p.add_argument("spec", help=spec_help)
    p.add_argument("--n-max", type=int, default=12, help="largest n tried for D_n/Z_n (default 12)")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("parse-check", parents=[common], help="parse an expression and echo it")
    p.add_argument("expr")
    p.set_defaults(func=cmd_parse_check)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    # let parse-check take expressions that start with a minus sign
    if "parse-check" in argv:
        value_flags = {f"--{k}" for k in GLOBAL_DEFAULTS}
        j = argv.index("parse-check") + 1
        while j < len(argv):
            tok = argv[j]
            if tok in value_flags:
                j += 2
            elif tok in ("-h", "--help", "--") or (tok.startswith("--") and "=" in tok):
                if tok == "--":
                    break
                j += 1
            else:
                if tok.startswith("-"):
                    argv.insert(j, "--")
                break
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    for key, val in GLOBAL_DEFAULTS.items():
        if not hasattr(args, key):
            setattr(args, key, val)
    try:
        return args.func(args)
    except (InputError, MapSpecError, ExprSyntaxError, UnboundParameterError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except (MapDomainError, FloatingPointError, np.linalg.LinAlgError, OverflowError) as exc:
        sys.stderr.write(f"numeric failure: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
