"""Command-line surface: config-driven solves, optimization, data export.

One JSON config describes a run (geometry / background / zeta / params /
output blocks).  Outputs are plain CSV and JSON written so that identical
inputs give byte-identical files; every run drops a manifest that is
itself a valid config reproducing the run.

Exit codes: 0 success, 2 config or usage error, 3 numerical failure,
4 degenerate design.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import platform
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__, design, geometry, solver
from ._backend import BACKEND
from .analytic import (
    AnnulusSpec,
    ConfocalSpec,
    DegenerateLayoutError,
    annulus_cloak_zeta,
    annulus_shield_zeta,
    ellipse_cloak_zeta,
    ellipse_shield_zeta,
)
from .design import DesignError, DesignProblem, PhysicalParams, dimensionalize_zeta
from .geometry import EllipticFrame, GeometryError
from .kernels import NearFieldError
from .solver import BackgroundField, CloakConfig, SolverError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_DEGENERATE = 4

DEFAULT_NODES = 256
DEFAULT_RESOLUTION = (101, 101)

# manifest-only keys, ignored when a manifest is fed back in as a config
_EXTRA_KEYS = ("command", "versions", "mesh", "digests", "results")

_PARAM_KEYS = tuple(PhysicalParams.__dataclass_fields__)


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


# ---------------------------------------------------------------------------
# config ingestion


def _load_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - {"geometry", "background", "zeta", "params", "output"} - set(_EXTRA_KEYS)
    if unknown:
        raise ConfigError(f"unknown config blocks: {sorted(unknown)}")
    return raw


def _build_shape(block, frame, nodes_override, base_dir) -> geometry.QuadratureMesh:
    if not isinstance(block, dict) or "shape" not in block:
        raise ConfigError("each geometry entry must be an object with a 'shape' key")
    shape = block["shape"]
    n = int(nodes_override or block.get("nodes", DEFAULT_NODES))
    center = [float(c) for c in block.get("center", (0.0, 0.0))]
    scale = float(block.get("scale", 1.0))
    explicit_n = nodes_override or block.get("nodes")
    try:
        return _dispatch_shape(block, shape, frame, n, explicit_n, center, scale, base_dir)
    except KeyError as exc:
        raise ConfigError(f"shape {shape!r} is missing required key {exc}") from exc


def _dispatch_shape(block, shape, frame, n, explicit_n, center, scale, base_dir):
    if shape == "circle":
        return geometry.build_circle(float(block["radius"]), center, n)
    if shape == "ellipse":
        if frame is None:
            raise ConfigError("'ellipse' shapes need a 'focal' value in the geometry block")
        return geometry.build_confocal_ellipse(frame, float(block["xi"]), n)
    if shape in ("flower", "kite", "peanut"):
        builder = {
            "flower": geometry.build_flower,
            "kite": geometry.build_kite,
            "peanut": geometry.build_peanut,
        }[shape]
        return builder(n=n, center=center, scale=scale)
    if shape == "polygon":
        mesh = geometry.build_rounded_polygon(block["vertices"], float(block["rounding"]), n)
        return geometry.translated(mesh, center)
    if shape == "regular-polygon":
        rounding = block.get("rounding")
        mesh = geometry.build_regular_polygon(
            int(block["sides"]),
            float(block["circumradius"]),
            None if rounding is None else float(rounding),
            n,
        )
        return geometry.translated(mesh, center)
    if shape == "points":
        path = Path(block["file"])
        if not path.is_absolute():
            path = base_dir / path
        try:
            pts = np.loadtxt(path, delimiter=",", ndmin=2)
        except ValueError:
            pts = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        except OSError as exc:
            raise ConfigError(f"cannot read point list: {exc}") from exc
        return geometry.from_point_list(pts, None if explicit_n is None else int(explicit_n))
    raise ConfigError(f"unknown shape {shape!r}")


def _build_geometry(cfg, nodes_override, base_dir):
    g = cfg.get("geometry")
    if not isinstance(g, dict):
        raise ConfigError("config needs a 'geometry' block")
    focal = g.get("focal")
    frame = None if focal is None else EllipticFrame(float(focal))
    blocks = g.get("objects")
    if not isinstance(blocks, list) or not blocks:
        raise ConfigError("geometry.objects must be a non-empty list")
    if "exterior" not in g:
        raise ConfigError("geometry needs an 'exterior' shape")
    objects = [_build_shape(b, frame, nodes_override, base_dir) for b in blocks]
    exterior = _build_shape(g["exterior"], frame, nodes_override, base_dir)
    return objects, exterior, frame


def _build_background(cfg, frame) -> BackgroundField:
    b = cfg.get("background", {})
    if not isinstance(b, dict):
        raise ConfigError("'background' must be an object")
    elliptic = bool(b.get("elliptic", False))
    if elliptic and frame is None:
        raise ConfigError("an elliptic background needs a 'focal' value in the geometry block")
    amp_p = b.get("amp_p")
    return BackgroundField(
        n=int(b.get("n", 1)),
        parity=b.get("parity", "cos"),
        amp_h=float(b.get("amp_h", 1.0)),
        amp_p=None if amp_p is None else float(amp_p),
        frame=frame if elliptic else None,
    )


def _build_params(cfg) -> PhysicalParams:
    block = cfg.get("params", {})
    if not isinstance(block, dict):
        raise ConfigError("'params' must be an object")
    unknown = set(block) - set(_PARAM_KEYS)
    if unknown:
        raise ConfigError(f"unknown physical parameters: {sorted(unknown)}")
    return PhysicalParams(**{k: float(v) for k, v in block.items()})


def _zeta_block(cfg) -> tuple[str, dict]:
    z = cfg.get("zeta")
    if not isinstance(z, dict):
        raise ConfigError("config needs a 'zeta' block")
    sources = [k for k in ("value", "analytic", "optimize") if k in z]
    if len(sources) != 1:
        raise ConfigError("zeta block needs exactly one of 'value', 'analytic', 'optimize'")
    return sources[0], z


def _analytic_zeta(cfg, background) -> float:
    """Closed-form slip strength when the config is a circular or confocal pair."""
    _, z = _zeta_block(cfg)
    mode = z["analytic"]
    g = cfg["geometry"]
    blocks = g["objects"]
    ext = g["exterior"]
    if len(blocks) != 1:
        raise ConfigError("analytic zeta needs exactly one object")
    obj = blocks[0]
    if obj.get("shape") == "circle" and ext.get("shape") == "circle":
        if list(obj.get("center", (0, 0))) != list(ext.get("center", (0, 0))):
            raise ConfigError("analytic zeta needs concentric circles")
        spec = AnnulusSpec(float(obj["radius"]), float(ext["radius"]), background.n)
        return annulus_cloak_zeta(spec) if mode == "cloak" else annulus_shield_zeta(spec)
    if obj.get("shape") == "ellipse" and ext.get("shape") == "ellipse":
        spec = ConfocalSpec(float(g["focal"]), float(obj["xi"]), float(ext["xi"]), background.n)
        if mode == "shield":
            return ellipse_shield_zeta(spec)
        axis = z.get("axis", "x" if background.parity == "cos" else "y")
        return ellipse_cloak_zeta(spec, axis)
    raise ConfigError(
        "analytic zeta needs concentric circles or confocal ellipses; "
        "use the 'optimize' command for general shapes"
    )


# ---------------------------------------------------------------------------
# output plumbing


def _parse_grid(text) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError as exc:
        raise ConfigError(f"--grid expects WxH, got {text!r}") from exc


def _parse_window(text) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"--window expects four comma-separated numbers, got {text!r}") from exc
    if len(vals) != 4:
        raise ConfigError("--window expects x1min,x1max,x2min,x2max")
    return vals


def _resolve_output(cfg, exterior, args):
    block = cfg.get("output", {})
    if not isinstance(block, dict):
        raise ConfigError("'output' must be an object")
    window = _parse_window(args.window) if args.window else block.get("window")
    if window is None:
        r = 1.5 * exterior.bounding_radius()
        window = [-r, r, -r, r]
    window = [float(v) for v in window]
    resolution = _parse_grid(args.grid) if args.grid else block.get("resolution", DEFAULT_RESOLUTION)
    resolution = [int(v) for v in resolution]
    if resolution[0] < 2 or resolution[1] < 2:
        raise ConfigError("grid resolution must be at least 2x2")
    out_dir = Path(args.out) if args.out else Path(block.get("dir", "."))
    return window, resolution, out_dir


def _fmt(value) -> str:
    return f"{float(value):.17g}"


def _write_fields_csv(path, grid) -> None:
    cols = ("x1", "x2", "phi", "p", "u1", "u2", "mask")
    arrays = [np.asarray(grid[c], dtype=float).ravel() for c in cols]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(cols) + "\n")
        for row in zip(*arrays):
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _digest(obj) -> str:
    payload = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(payload).hexdigest()


def _write_json(path, payload) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _resolved_config(cfg, objects, exterior, background, params, window, resolution):
    g = cfg["geometry"]

    def _with_nodes(block, mesh):
        out = dict(block)
        out["nodes"] = mesh.n
        return out

    resolved_geometry = {
        k: v for k, v in g.items() if k not in ("objects", "exterior")
    }
    resolved_geometry["objects"] = [
        _with_nodes(b, m) for b, m in zip(g["objects"], objects)
    ]
    resolved_geometry["exterior"] = _with_nodes(g["exterior"], exterior)
    return {
        "geometry": resolved_geometry,
        "background": {
            "n": background.n,
            "parity": background.parity,
            "amp_h": background.amp_h,
            "amp_p": background.amp_p,
            "elliptic": background.frame is not None,
        },
        "zeta": cfg["zeta"],
        "params": {k: getattr(params, k) for k in _PARAM_KEYS},
        "output": {"window": window, "resolution": resolution},
    }


def _manifest(command, resolved, objects, exterior, results=None) -> dict:
    out = dict(resolved)
    out["command"] = command
    out["versions"] = {
        "helecloak": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
        "backend": BACKEND,
    }
    out["mesh"] = {"objects": [m.n for m in objects], "exterior": exterior.n}
    out["digests"] = {
        "geometry": _digest(resolved["geometry"]),
        "params": _digest(resolved["params"]),
    }
    if results is not None:
        out["results"] = results
    return out


# ---------------------------------------------------------------------------
# commands


def cmd_analytic(args) -> int:
    params = _build_params(_load_config(args.config)) if args.config else PhysicalParams()
    if args.shape == "annulus":
        if args.ri is None or args.re is None:
            raise ConfigError("annulus needs --ri and --re")
        spec = AnnulusSpec(args.ri, args.re, args.order)
        zeta = annulus_cloak_zeta(spec) if args.mode == "cloak" else annulus_shield_zeta(spec)
    elif args.shape == "confocal-ellipse":
        if args.xi_i is None or args.xi_e is None:
            raise ConfigError("confocal-ellipse needs --xi-i and --xi-e")
        spec = ConfocalSpec(args.focal, args.xi_i, args.xi_e, args.order)
        if args.mode == "cloak":
            zeta = ellipse_cloak_zeta(spec, args.axis)
        else:
            zeta = ellipse_shield_zeta(spec)
    else:
        raise ConfigError(
            f"no closed form for shape {args.shape!r}; supported shapes are 'annulus' and "
            "'confocal-ellipse' -- use the 'optimize' command for general geometry"
        )
    print(f"zeta0 = {zeta:.12g} (dimensionless)")
    print(f"zeta0 = {dimensionalize_zeta(zeta, params):.4f} V")
    return EXIT_OK


def cmd_convert(args) -> int:
    params = _build_params(_load_config(args.config)) if args.config else PhysicalParams()
    if (args.zeta is None) == (args.volts is None):
        raise ConfigError("provide exactly one of --zeta or --volts")
    if args.zeta is not None:
        print(f"{dimensionalize_zeta(args.zeta, params):.17g} V")
    else:
        print(f"{args.volts / params.zeta_scale:.17g} (dimensionless)")
    return EXIT_OK


def _prepare_run(args):
    if not args.config:
        raise ConfigError("--config is required for this command")
    cfg = _load_config(args.config)
    base_dir = Path(args.config).resolve().parent
    objects, exterior, frame = _build_geometry(cfg, args.nodes, base_dir)
    background = _build_background(cfg, frame)
    params = _build_params(cfg)
    return cfg, objects, exterior, background, params


def cmd_solve(args) -> int:
    cfg, objects, exterior, background, params = _prepare_run(args)
    source, z = _zeta_block(cfg)
    if source == "value":
        zeta0 = float(z["value"])
    elif source == "analytic":
        zeta0 = _analytic_zeta(cfg, background)
    else:
        opt = z["optimize"]
        problem = DesignProblem(objects, exterior, background, opt["mode"])
        zeta0 = problem.optimize(opt.get("interval", (-100.0, 100.0))).zeta0_opt

    config = CloakConfig(objects, exterior, zeta0)
    electro = solver.solve_electrostatic(objects, background)
    pressure = solver.solve_pressure(config, background, electro)
    window, resolution, out_dir = _resolve_output(cfg, exterior, args)
    grid = solver.field_grid(config, electro.evaluator, pressure.evaluator, window, resolution)

    out_dir.mkdir(parents=True, exist_ok=True)
    resolved = _resolved_config(cfg, objects, exterior, background, params, window, resolution)
    _write_fields_csv(out_dir / "fields.csv", grid)
    _write_json(out_dir / "manifest.json", _manifest("solve", resolved, objects, exterior))
    print(f"zeta0 = {zeta0:.12g} (dimensionless)")
    print(f"wrote {out_dir / 'fields.csv'}")
    print(f"wrote {out_dir / 'manifest.json'}")
    return EXIT_OK


def cmd_optimize(args) -> int:
    cfg, objects, exterior, background, params = _prepare_run(args)
    source, z = _zeta_block(cfg)
    if source != "optimize":
        raise ConfigError("the optimize command needs a zeta block of the form {\"optimize\": ...}")
    opt = z["optimize"]
    if "mode" not in opt:
        raise ConfigError("zeta.optimize needs a 'mode' (cloak or shield)")
    interval = opt.get("interval", (-100.0, 100.0))

    problem = DesignProblem(objects, exterior, background, opt["mode"])
    result = problem.optimize(interval)
    problem.certify(result)
    result.volts = dimensionalize_zeta(result.zeta0_opt, params)

    out_block = cfg.get("output", {})
    window, resolution, out_dir = _resolve_output(cfg, exterior, args)
    out_dir.mkdir(parents=True, exist_ok=True)
    resolved = _resolved_config(cfg, objects, exterior, background, params, window, resolution)
    payload = {
        "mode": result.mode,
        "zeta0_opt": result.zeta0_opt,
        "zeta0_unclipped": result.zeta0_unclipped,
        "interval": list(result.interval),
        "cost": result.cost,
        "sqrt_cost": result.sqrt_cost,
        "c_estimate": result.c_estimate,
        "bound": result.bound,
        "volts": result.volts,
        "geometry_digest": _digest(resolved["geometry"]),
        "params_digest": _digest(resolved["params"]),
    }
    _write_json(out_dir / "design.json", payload)

    wrote_fields = False
    if out_block or args.grid or args.window:
        config = CloakConfig(objects, exterior, result.zeta0_opt)
        electro = solver.solve_electrostatic(objects, background)
        pressure = solver.solve_pressure(config, background, electro)
        grid = solver.field_grid(config, electro.evaluator, pressure.evaluator, window, resolution)
        _write_fields_csv(out_dir / "fields.csv", grid)
        wrote_fields = True

    _write_json(
        out_dir / "manifest.json",
        _manifest("optimize", resolved, objects, exterior, results=payload),
    )
    print(f"zeta0_opt = {result.zeta0_opt:.12g} (dimensionless)")
    print(f"zeta0_opt = {result.volts:.4f} V")
    print(f"cost = {result.cost:.6g}, certified bound = {result.bound:.6g}")
    print(f"wrote {out_dir / 'design.json'}")
    if wrote_fields:
        print(f"wrote {out_dir / 'fields.csv'}")
    print(f"wrote {out_dir / 'manifest.json'}")
    return EXIT_OK


def cmd_force(args) -> int:
    cfg, objects, exterior, background, params = _prepare_run(args)
    source, z = _zeta_block(cfg)
    if source == "value":
        zeta0 = float(z["value"])
    elif source == "analytic":
        zeta0 = _analytic_zeta(cfg, background)
    else:
        raise ConfigError("the force command needs an explicit or analytic zeta value")
    config = CloakConfig(objects, exterior, zeta0)
    electro = solver.solve_electrostatic(objects, background)
    pressure = solver.solve_pressure(config, background, electro)
    print(f"zeta0 = {zeta0:.12g} (dimensionless)")
    for i in range(len(objects)):
        f = design.force(config, pressure, i)
        print(f"object {i}: F = ({f[0]:.12g}, {f[1]:.12g})")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="helecloak",
        description="Hele-Shaw electro-osmotic cloaking and shielding toolkit.",
        epilog="Set HELECLOAK_THREADS to cap kernel worker threads.",
    )
    parser.add_argument("--version", action="version", version=f"helecloak {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def _common(p, config_required=False):
        p.add_argument("--config", required=config_required, help="JSON run configuration")
        p.add_argument("--out", help="output directory (overrides output.dir)")
        p.add_argument("--nodes", type=int, help="override node count for every curve")
        p.add_argument("--grid", help="field grid resolution, e.g. 161x161")
        p.add_argument("--window", help="field window x1min,x1max,x2min,x2max")

    p = sub.add_parser("analytic", help="closed-form slip strength for circular or confocal shells")
    p.add_argument("--shape", required=True, help="annulus or confocal-ellipse")
    p.add_argument("--mode", required=True, choices=("cloak", "shield"))
    p.add_argument("--ri", type=float, help="object radius (annulus)")
    p.add_argument("--re", type=float, help="control-boundary radius (annulus)")
    p.add_argument("--xi-i", dest="xi_i", type=float, help="object elliptic radius")
    p.add_argument("--xi-e", dest="xi_e", type=float, help="control-boundary elliptic radius")
    p.add_argument("--focal", type=float, default=1.0, help="focal half-distance (ellipse)")
    p.add_argument("--axis", choices=("x", "y"), default="x", help="driving axis (ellipse cloak)")
    p.add_argument("--order", type=int, default=1, help="angular mode order")
    p.add_argument("--config", help="JSON config supplying a params block")
    p.set_defaults(func=cmd_analytic)

    p = sub.add_parser("solve", help="solve the fields for a run configuration")
    _common(p, config_required=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("optimize", help="find the best slip strength for a run configuration")
    _common(p, config_required=True)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("force", help="net pressure force on each object")
    _common(p, config_required=True)
    p.set_defaults(func=cmd_force)

    p = sub.add_parser("convert", help="convert between dimensionless and volt slip strengths")
    p.add_argument("--zeta", type=float, help="dimensionless value to convert to volts")
    p.add_argument("--volts", type=float, help="voltage to convert to dimensionless")
    p.add_argument("--config", help="JSON config supplying a params block")
    p.set_defaults(func=cmd_convert)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DesignError, DegenerateLayoutError) as exc:
        print(f"degenerate design: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (SolverError, NearFieldError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, GeometryError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
