"""Command-line interface.

Thin shell over the library: every printed number comes from a library call.
Exit codes: 0 success, 1 verify-check failure, 2 validation error, 3 point
cap exceeded.
"""
import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import experiments, lattices, optimize, render, sums
from .errors import CapExceeded, LatdefError, ValidationError
from .lattices import Param2D
from .optimize import GridSpec
from .potentials import (DefectModified, DefectSpec, Gaussian, parse_potential)
from .sums import SumConfig

_NAMED = ("Z1", "Z2", "Z3", "A2", "D3", "D3star")


def _add_common(p):
    p.add_argument("--tol", type=float, default=1e-10,
                   help="certified truncation tolerance per sum")
    p.add_argument("--max-points", type=int, default=10**7)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=None, metavar="DIR")
    p.add_argument("--config", type=Path, default=None,
                   help="JSON file with defaults for this command's flags")


def _add_lattice_args(p):
    p.add_argument("--lattice", choices=_NAMED, default=None)
    p.add_argument("--basis", default=None,
                   help="column basis, e.g. '1,0;0.5,0.866' (columns ; separated)")
    p.add_argument("--param", default=None, help="fundamental-domain 'x,y'")
    p.add_argument("--volume", type=float, default=1.0)


def _parse_vector(text, name):
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise ValidationError(f"{name}: expected comma-separated numbers, "
                              f"got {text!r}")


def _build_lattice(args):
    given = [x is not None for x in (args.lattice, args.basis, args.param)]
    if sum(given) != 1:
        raise ValidationError(
            "lattice: give exactly one of --lattice, --basis, --param")
    if args.lattice:
        return lattices.named(args.lattice, args.volume)
    if args.basis:
        cols = [_parse_vector(c, "basis") for c in args.basis.split(";")]
        return lattices.from_basis(np.array(cols, dtype=float).T)
    x, y = _parse_vector(args.param, "param")
    return lattices.param_to_lattice(Param2D(x, y, args.volume))


def _load_defects(path):
    if path is None:
        return None
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"defects: cannot read {path} ({exc})")
    return DefectSpec.from_json(text)


def _sum_config(args):
    return SumConfig(tol=args.tol, max_points=args.max_points)


def _grid(args):
    kw = {"workers": args.workers}
    if getattr(args, "nx", None):
        kw["n_x"] = args.nx
    if getattr(args, "ny", None):
        kw["n_y"] = args.ny
    if getattr(args, "ymax", None):
        kw["y_range"] = (optimize._Y_MIN_DEFAULT, args.ymax)
    return GridSpec(**kw)


def _emit(obj):
    sys.stdout.write(render.dumps17(obj) + "\n")


def _energy_dict(ev):
    return {"value": ev.value, "tail_bound": ev.tail_bound,
            "cutoff_radius": ev.cutoff_radius, "points_used": ev.points_used,
            "cap_exceeded": ev.cap_exceeded}


def _apply_config(args, parser):
    """Merge a JSON config file into unset CLI flags; unknown keys rejected."""
    if not getattr(args, "config", None):
        return args
    try:
        data = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"config: cannot load {args.config} ({exc})")
    if not isinstance(data, dict):
        raise ValidationError("config: expected a JSON object")
    known = {a.dest for a in parser._actions}
    for key, value in data.items():
        dest = key.replace("-", "_")
        if dest not in known:
            raise ValidationError(f"config: unknown field {key!r}")
        if parser.get_default(dest) == getattr(args, dest):
            setattr(args, dest, value)
    return args


def _require(args, field):
    if getattr(args, field) is None:
        raise ValidationError(f"{field}: missing required option")


def cmd_energy(args):
    _require(args, "potential")
    lat = _build_lattice(args)
    f = parse_potential(args.potential)
    spec = _load_defects(args.defects)
    cfg = _sum_config(args)
    ev = (sums.energy_defect(lat, f, spec, cfg) if spec is not None
          else sums.energy(lat, f, cfg))
    _emit(_energy_dict(ev))
    return 3 if ev.cap_exceeded else 0


def cmd_theta(args):
    lat = _build_lattice(args)
    cfg = _sum_config(args)
    if args.alternating:
        ev = sums.theta_alternating(lat, args.alpha, cfg)
    elif args.center == "half":
        red = lattices.reduce2d(lat) if lat.dim == 2 else lat
        ev = sums.theta_shifted(red, lattices.cell_center(red), args.alpha, cfg)
    elif args.center not in (None, "none"):
        c = _parse_vector(args.center, "center")
        ev = sums.theta_shifted(lat, np.asarray(c), args.alpha, cfg)
    else:
        ev = sums.theta(lat, args.alpha, cfg)
    _emit(_energy_dict(ev))
    return 3 if ev.cap_exceeded else 0


def cmd_zeta(args):
    _require(args, "two_s")
    lat = _build_lattice(args)
    cfg = SumConfig(tol=args.tol, max_points=args.max_points,
                    zeta_mode=args.mode)
    ev = sums.epstein_zeta(lat, args.two_s, cfg)
    _emit(_energy_dict(ev))
    return 3 if ev.cap_exceeded else 0


def _parse_objective(text, defects, cfg):
    head, _, body = text.partition(":")
    params = {}
    for item in body.split(","):
        if not item.strip():
            continue
        key, sep, val = item.partition("=")
        if not sep:
            raise ValidationError(f"objective: bad parameter {item!r}")
        params[key.strip()] = float(val)
    if head == "theta":
        alpha = params.get("alpha", 1.0)
        return lambda L: sums.theta(L, alpha, cfg).value
    if head == "thetacent":
        alpha = params.get("alpha", 1.0)
        def obj(L):
            red = lattices.reduce2d(L)
            return sums.theta_shifted(red, lattices.cell_center(red), alpha,
                                      cfg).value
        return obj
    if head == "thetaalt":
        alpha = params.get("alpha", 1.0)
        return lambda L: sums.theta_alternating(L, alpha, cfg).value
    if head == "zeta":
        two_s = params.get("two_s", 4.0)
        return lambda L: sums.epstein_zeta(L, two_s, cfg).value
    f = parse_potential(text)
    if defects is not None:
        return lambda L: sums.energy_defect(L, f, defects, cfg).value
    return lambda L: sums.energy(L, f, cfg).value


def cmd_minimize(args):
    _require(args, "objective")
    cfg = _sum_config(args)
    spec = _load_defects(args.defects)
    objective = _parse_objective(args.objective, spec, cfg)
    res = optimize.minimize2d(objective, args.volume, _grid(args),
                              sense="max" if args.maximize else "min")
    _emit(res.as_dict())
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "minimize.json").write_text(render.dumps17(res.as_dict()))
    return 0


def _parse_range(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise ValidationError(f"alphas: expected 'start:stop:count', got {text!r}")
    start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    if start <= 0 or stop <= start or count < 2:
        raise ValidationError("alphas: need 0 < start < stop and count >= 2")
    return np.geomspace(start, stop, count)


def _parse_family(text, cfg):
    head, _, body = text.partition(":")
    params = {}
    for item in body.split(","):
        if not item.strip():
            continue
        key, sep, val = item.partition("=")
        if not sep:
            raise ValidationError(f"family: bad parameter {item!r}")
        params[key.strip()] = float(val)
    if head == "gauss-defect":
        k, a = int(params.get("k", 2)), params.get("a", 0.1)
        spec = DefectSpec(((k, a, ()),))
        return lambda alpha: (
            lambda L: sums.energy(L, DefectModified(Gaussian(alpha), spec),
                                  cfg).value)
    if head == "gauss-diff":
        a, m = params.get("a", 0.1), params.get("m", 2.0)
        def family(alpha):
            return lambda L: ((sums.theta(L, alpha, cfg).value - 1.0)
                              - a * (sums.theta(L, m * alpha, cfg).value - 1.0))
        return family
    if head == "gauss-shifted":
        a = params.get("a", -0.5)
        if a >= 0:
            raise ValidationError("family: gauss-shifted expects a < 0")
        def family(alpha):
            def obj(L):
                red = lattices.reduce2d(L)
                c = lattices.cell_center(red)
                return (sums.theta(red, alpha, cfg).value
                        + abs(a) * sums.theta_shifted(red, c, alpha, cfg).value)
            return obj
        return family
    raise ValidationError(f"family: unknown family {head!r}")


def cmd_scan(args):
    _require(args, "family")
    _require(args, "alphas")
    cfg = _sum_config(args)
    family = _parse_family(args.family, cfg)
    controls = _parse_range(args.alphas)
    rows = optimize.phase_scan(family, controls, args.volume, _grid(args))
    seq = [s.value for s in optimize.distinct_shapes(rows)]
    _emit({"family": args.family, "n_rows": len(rows), "shape_sequence": seq})
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "scan.csv").write_text(render.scan_csv(rows))
        (args.out / "scan.svg").write_text(render.scan_svg(rows))
    return 0


def cmd_verify(args):
    name = args.experiment
    if name not in experiments.EXPERIMENTS:
        raise ValidationError(
            f"experiment: unknown {name!r} (expected one of "
            f"{sorted(experiments.EXPERIMENTS)})")
    kwargs = {"seed": args.seed, "out_dir": args.out}
    if args.workers != 1:
        kwargs["grid"] = GridSpec(n_x=48, n_y=48, workers=args.workers)
    if name == "thm2ip":
        spec = _load_defects(args.spec)
        if spec is None:
            raise ValidationError("spec: thm2ip requires --spec FILE")
        kwargs.update(spec=spec, s=args.s, n_random=args.n_random)
    elif name == "thm02":
        kwargs.update(k=args.k, a=args.a, n_random=args.n_random)
        if args.shift:
            kwargs["shift"] = tuple(int(v) for v in args.shift.split(","))
    elif name == "thm0":
        kwargs.update(k=args.k, a_k=args.a)
        if args.alpha_list:
            kwargs["alpha_list"] = tuple(float(v)
                                         for v in args.alpha_list.split(","))
    elif name == "thm3lj":
        f = parse_potential(args.potential or "lj:c1=1,c2=1,x1=3,x2=6")
        spec = _load_defects(args.spec) or DefectSpec(((2, 1.0, ()),))
        kwargs.update(f=f, spec=spec)
    elif name == "jacobi":
        kwargs.update(n_random=args.n_random)
    report = experiments.EXPERIMENTS[name](**kwargs)
    _emit(report.as_dict())
    return 0 if report.passed else 1


def cmd_render(args):
    lat = _build_lattice(args)
    spec = _load_defects(args.defects) or DefectSpec()
    ps = sums.materialize(lat, spec, args.radius,
                          cap=args.max_points)
    out_dir = args.out or Path(".")
    out_dir.mkdir(parents=True, exist_ok=True)
    svg = out_dir / "patch.svg"
    csv = out_dir / "patch.csv"
    svg.write_text(render.pointset_svg(ps))
    csv.write_text(ps.to_csv())
    _emit({"points": len(ps), "svg": str(svg), "csv": str(csv)})
    return 0


def build_parser():
    ap = argparse.ArgumentParser(
        prog="latdef",
        description="Lattice energies with periodic arrays of defects")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("energy", help="defect-modified lattice energy")
    _add_common(p)
    _add_lattice_args(p)
    p.add_argument("--potential", default=None)
    p.add_argument("--defects", type=Path, default=None)
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("theta", help="lattice theta function")
    _add_common(p)
    _add_lattice_args(p)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--center", default=None,
                   help="'half' for the cell center, or 'cx,cy'")
    p.add_argument("--alternating", action="store_true")
    p.set_defaults(func=cmd_theta)

    p = sub.add_parser("zeta", help="Epstein zeta function")
    _add_common(p)
    _add_lattice_args(p)
    p.add_argument("--two-s", type=float, default=None, dest="two_s")
    p.add_argument("--mode", choices=("mellin", "direct"), default="mellin")
    p.set_defaults(func=cmd_zeta)

    p = sub.add_parser("minimize", help="optimize over the fundamental domain")
    _add_common(p)
    p.add_argument("--objective", default=None,
                   help="theta:alpha=1 | thetacent:... | thetaalt:... | "
                        "zeta:two_s=4 | a potential grammar")
    p.add_argument("--defects", type=Path, default=None)
    p.add_argument("--volume", type=float, default=1.0)
    p.add_argument("--maximize", action="store_true")
    p.add_argument("--nx", type=int, default=None)
    p.add_argument("--ny", type=int, default=None)
    p.add_argument("--ymax", type=float, default=None)
    p.set_defaults(func=cmd_minimize)

    p = sub.add_parser("scan", help="phase scan over a control parameter")
    _add_common(p)
    p.add_argument("--family", default=None,
                   help="gauss-defect:k=2,a=0.1 | gauss-diff:a=0.1,m=2 | "
                        "gauss-shifted:a=-0.5")
    p.add_argument("--alphas", default=None, help="start:stop:count")
    p.add_argument("--volume", type=float, default=1.0)
    p.add_argument("--nx", type=int, default=None)
    p.add_argument("--ny", type=int, default=None)
    p.add_argument("--ymax", type=float, default=None)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("verify", help="run a named experiment")
    _add_common(p)
    p.add_argument("experiment", choices=sorted(experiments.EXPERIMENTS))
    p.add_argument("--spec", type=Path, default=None)
    p.add_argument("--s", type=float, default=2.0)
    p.add_argument("--n-random", type=int, default=50, dest="n_random")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--shift", default=None, help="e.g. '1,1'")
    p.add_argument("--alpha-list", default=None, dest="alpha_list")
    p.add_argument("--potential", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("render", help="render a charged patch to SVG/CSV")
    _add_common(p)
    _add_lattice_args(p)
    p.add_argument("--defects", type=Path, default=None)
    p.add_argument("--radius", type=float, default=5.0)
    p.set_defaults(func=cmd_render)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    sub = next(a for a in ap._subparsers._group_actions[0].choices.values()
               if a.get_default("func") is args.func)
    try:
        args = _apply_config(args, sub)
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except LatdefError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
