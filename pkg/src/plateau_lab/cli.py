"""Command-line front end.

One binary, subcommand style.  Every run prints a ``schema: 1`` summary JSON
to stdout, writes its artifacts atomically after all computation succeeded
(so nonzero exits leave nothing behind), and exits 0 on success, 1 on domain
errors (bad geometry, unsatisfiable constraints), 2 on configuration errors
(unreadable inputs, unknown fields, bad parameter values).

A ``--config file.json`` may supply any long-option value by name;
explicit command-line flags win over the config file.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
import sys
from pathlib import Path

import click
import numpy as np
from click.core import ParameterSource

from . import cones
from .diagnostics import (SlidingContext, blowup, classify_point,
                          cone_slice_check, density_profile, sliding_profile)
from .geometry import meshio
from .geometry.core import Ball, EmbeddedMesh, Gauge, LineBoundary, measure
from .geometry.distance import local_hausdorff_distance
from .geometry.energy import circle_samples, douglas_energy
from .grids import DyadicGrid, FlatManifold
from .minimizer import run_scheme
from .projection import extra_collapse, project_to_skeleton, verify_cell_locality
from .steiner import Terminal, check_kirchhoff, optimize_steiner

SCHEMA = 1


# ---------------------------------------------------------------------------
# plumbing
# ---------------------------------------------------------------------------

class DomainError(Exception):
    """Input was readable but the computation rejected it (exit 1)."""


def _fail_config(messages) -> None:
    for m in messages:
        click.echo(f"config error: {m}", err=True)
    sys.exit(2)


def _fail_domain(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def _merge_config(ctx: click.Context, values: dict) -> dict:
    """Overlay config-file values under explicitly passed flags."""
    path = values.pop("config", None)
    if path is None:
        return values
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as e:
        _fail_config([f"cannot read config {path}: {e}"])
    except json.JSONDecodeError as e:
        _fail_config([f"config {path} is not valid JSON: {e}"])
    if not isinstance(raw, dict):
        _fail_config([f"config {path} must hold a JSON object"])
    errors = []
    for key, val in raw.items():
        name = key.replace("-", "_")
        if name not in values:
            errors.append(f"unknown field {key!r}")
            continue
        if ctx.get_parameter_source(name) != ParameterSource.COMMANDLINE:
            values[name] = val
    if errors:
        _fail_config(errors)
    return values


def _threads() -> int | None:
    raw = os.environ.get("PLATEAU_THREADS")
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        _fail_config([f"PLATEAU_THREADS must be an integer, got {raw!r}"])


def _vector(text, name: str) -> np.ndarray:
    if isinstance(text, (list, tuple)):
        vals = list(text)
    else:
        vals = str(text).split(",")
    try:
        arr = np.array([float(v) for v in vals], dtype=float)
    except (TypeError, ValueError):
        _fail_config([f"{name} must be a comma-separated number list, got {text!r}"])
    if arr.size == 0:
        _fail_config([f"{name} must not be empty"])
    return arr


def _floats(text, name: str) -> list:
    return [float(x) for x in _vector(text, name)]


def _ints(text, name: str) -> list:
    vals = _floats(text, name)
    out = [int(v) for v in vals]
    if any(abs(v - i) > 0 for v, i in zip(vals, out)):
        _fail_config([f"{name} must be integers, got {text!r}"])
    return out


def _read_mesh(path) -> EmbeddedMesh:
    try:
        return meshio.read_mesh(path)
    except OSError as e:
        _fail_config([f"cannot read mesh {path}: {e}"])
    except ValueError as e:
        _fail_config([f"mesh {path}: {e}"])


def _read_json(path, name: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as e:
        _fail_config([f"cannot read {name} {path}: {e}"])
    except json.JSONDecodeError as e:
        _fail_config([f"{name} {path} is not valid JSON: {e}"])


def _load_grid(path):
    """Grid spec JSON {corner, size, N, identifications?} -> (grid, manifold)."""
    spec = _read_json(path, "grid spec")
    errors = []
    corner = spec.get("corner")
    size = spec.get("size")
    N = spec.get("N")
    if corner is None:
        errors.append("grid spec misses 'corner'")
    if not isinstance(size, (int, float)) or size <= 0:
        errors.append("grid spec needs a positive 'size'")
    if not isinstance(N, int) or N < 1:
        errors.append("grid spec needs an integer 'N' >= 1")
    if errors:
        _fail_config(errors)
    corner = np.asarray(corner, dtype=float)
    grid = DyadicGrid(corner, float(size), int(N))
    ident = spec.get("identifications")
    manifold = None
    if ident == "torus":
        manifold = FlatManifold.torus(corner.size, float(size), corner)
    elif isinstance(ident, list):
        if any(ident):
            manifold = FlatManifold(corner, float(size), tuple(bool(b) for b in ident))
    elif ident is not None:
        _fail_config(["grid spec 'identifications' must be 'torus' or a boolean list"])
    return grid, manifold


def _mesh_text(path: str, mesh: EmbeddedMesh) -> str:
    suffix = Path(path).suffix.lower()
    if suffix == ".off":
        return meshio.mesh_to_off(mesh)
    if suffix == ".obj":
        return meshio.mesh_to_obj(mesh)
    if suffix == ".csv":
        return meshio.mesh_to_segment_csv(mesh)
    _fail_config([f"unsupported mesh format {suffix!r} for {path}"])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _jsonable(getattr(obj, f.name))
                for f in dataclasses.fields(obj)}
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def _emit(artifacts: list, summary: dict) -> None:
    """Write all staged artifacts atomically, then print the summary."""
    for path, text in artifacts:
        meshio.atomic_write_text(path, text)
    summary = {"schema": SCHEMA, "threads": _threads(), **summary,
               "artifacts": sorted(str(p) for p, _ in artifacts)}
    click.echo(meshio.dumps_json(_jsonable(summary)))


def _face_key_list(faces) -> list:
    return [[f.axes, list(f.lattice)] for f in sorted(faces)]


# ---------------------------------------------------------------------------
# group
# ---------------------------------------------------------------------------

@click.group()
@click.version_option(package_name="plateau-lab", prog_name="plateau-lab")
def main() -> None:
    """Desk-scale lab for grid deformations, nets and minimal-set probes."""


_config_opt = click.option("--config", type=click.Path(), default=None,
                           help="JSON file supplying option values by name.")
_seed_opt = click.option("--seed", type=int, default=0, show_default=True,
                         help="Seed for every randomized choice.")


# ---------------------------------------------------------------------------
# steiner
# ---------------------------------------------------------------------------

@main.command()
@_config_opt
@_seed_opt
@click.option("--instance", type=click.Path(), required=True,
              help="Instance JSON {terminals: [{pos, charge}], objective, beta}.")
@click.option("--functional", type=click.Choice(["size", "mass", "m_beta"]),
              default=None, help="Override the instance objective.")
@click.option("--beta", type=float, default=None, help="Exponent for m_beta.")
@click.option("--out", type=click.Path(), default=None,
              help="Solution JSON path.")
@click.option("--csv", "csv_path", type=click.Path(), default=None,
              help="Optional CSV polyline export of the optimal net.")
def steiner(config, seed, instance, functional, beta, out, csv_path):
    """Optimal Steiner/charge-flow net over an instance's terminals."""
    ctx = click.get_current_context()
    vals = _merge_config(ctx, dict(config=config, seed=seed, instance=instance,
                                   functional=functional, beta=beta, out=out,
                                   csv=csv_path))
    spec = _read_json(vals["instance"], "instance")
    raw_terms = spec.get("terminals")
    if not isinstance(raw_terms, list) or len(raw_terms) < 2:
        _fail_config(["instance needs a 'terminals' list with at least two entries"])
    terms = []
    errors = []
    for i, t in enumerate(raw_terms):
        pos = t.get("pos")
        if pos is None:
            errors.append(f"terminal {i} misses 'pos'")
            continue
        try:
            terms.append(Terminal(np.asarray(pos, dtype=float), int(t.get("charge", 1))))
        except (TypeError, ValueError) as e:
            errors.append(f"terminal {i}: {e}")
    if errors:
        _fail_config(errors)
    func = vals["functional"] or spec.get("objective", "size")
    if func not in ("size", "mass", "m_beta"):
        _fail_config([f"unknown objective {func!r}"])
    b = vals["beta"] if vals["beta"] is not None else float(spec.get("beta", 1.0))
    try:
        result = optimize_steiner(terms, functional=func, beta=b)
        if func == "size":
            # connected-size nets carry unit spanning flows, not the charges
            audit_terms = ([Terminal(t.point, 1) for t in terms[:-1]]
                           + [Terminal(terms[-1].point, -(len(terms) - 1))])
        else:
            audit_terms = terms
        check_kirchhoff(result.net, audit_terms)
    except ValueError as e:
        _fail_domain(str(e))
    net = result.net
    solution = {
        "nodes": [[float(x) for x in p] for p in net.points],
        "edges": [[int(a), int(b2)] for a, b2 in net.edges],
        "flows": [int(f) for f in net.flows],
        "multiplicities": [int(m) for m in net.multiplicities],
        "score": result.cost,
        "functional": func, "beta": b,
        "n_topologies": result.n_topologies,
        "upper_bound": result.upper_bound,
        "runner_up": result.runner_up,
        "angle_audit": result.audit,
    }
    artifacts = []
    if vals["out"]:
        artifacts.append((vals["out"], meshio.dumps_json(_jsonable(solution))))
    if vals["csv"]:
        artifacts.append((vals["csv"], meshio.mesh_to_segment_csv(net.as_segments_mesh())))
    _emit(artifacts, {"subcommand": "steiner", "seed": vals["seed"],
                      "score": result.cost, "functional": func,
                      "n_topologies": result.n_topologies,
                      "angle_audit": result.audit})


# ---------------------------------------------------------------------------
# ff-project
# ---------------------------------------------------------------------------

@main.command("ff-project")
@_config_opt
@_seed_opt
@click.option("--grid", "grid_path", type=click.Path(), required=True,
              help="Grid spec JSON {corner, size, N, identifications?}.")
@click.option("--mesh", "mesh_path", type=click.Path(), required=True)
@click.option("--strategy", type=click.Choice(["far", "chebyshev"]),
              default="chebyshev", show_default=True)
@click.option("--trials", type=int, default=32, show_default=True)
@click.option("--eta", default="auto", show_default=True,
              help="Refinement pitch; 'auto' lets the projector decide.")
@click.option("--collapse", is_flag=True, default=False,
              help="Attempt the final collapse onto the (d-1)-skeleton.")
@click.option("--out", type=click.Path(), default=None, help="Projected mesh path.")
@click.option("--report", "report_path", type=click.Path(), default=None,
              help="Projection report JSON path.")
def ff_project(config, seed, grid_path, mesh_path, strategy, trials, eta,
               collapse, out, report_path):
    """Push mesh content onto the grid's d-skeleton with measure ledgers."""
    ctx = click.get_current_context()
    vals = _merge_config(ctx, dict(config=config, seed=seed, grid=grid_path,
                                   mesh=mesh_path, strategy=strategy,
                                   trials=trials, eta=eta, collapse=collapse,
                                   out=out, report=report_path))
    grid, manifold = _load_grid(vals["grid"])
    mesh = _read_mesh(vals["mesh"])
    eta_val = None
    if vals["eta"] not in (None, "auto"):
        try:
            eta_val = float(vals["eta"])
        except (TypeError, ValueError):
            _fail_config([f"eta must be a number or 'auto', got {vals['eta']!r}"])
    try:
        result = project_to_skeleton(mesh, grid, eta=eta_val,
                                     strategy=vals["strategy"],
                                     trials=int(vals["trials"]),
                                     seed=int(vals["seed"]), manifold=manifold)
        if vals["collapse"]:
            result = extra_collapse(result, grid, manifold=manifold,
                                    seed=int(vals["seed"]))
    except ValueError as e:
        _fail_domain(str(e))
    locality_ok, locality_slack = verify_cell_locality(result, grid)
    report = {
        "measure_in": result.measure_in,
        "measure_out": result.measure_out,
        "error_bound": result.error_bound,
        "plan": result.plan,
        "stages": [{"dim": st.dim, "measure_in": st.measure_in,
                    "measure_out": st.measure_out,
                    "faces": len(st.faces)} for st in result.stages],
        "per_cell": [{"cell": [c.axes, list(c.lattice)], **rec}
                     for c, rec in sorted(result.per_cell.items())],
        "locality_ok": locality_ok,
        "collapse": {"applied": result.collapse_applied,
                     "report": result.collapse_report},
    }
    artifacts = []
    if vals["out"]:
        artifacts.append((vals["out"], _mesh_text(vals["out"], result.mesh)))
    if vals["report"]:
        artifacts.append((vals["report"], meshio.dumps_json(_jsonable(report))))
    _emit(artifacts, {"subcommand": "ff-project", "seed": vals["seed"],
                      "measure_in": result.measure_in,
                      "measure_out": result.measure_out,
                      "stages": len(result.stages),
                      "collapse_applied": result.collapse_applied,
                      "locality_ok": locality_ok})


# ---------------------------------------------------------------------------
# density / classify / cone-check / blowup
# ---------------------------------------------------------------------------

def _context_options(fn):
    fn = click.option("--line-base", default=None,
                      help="Sliding-boundary line base point (comma list).")(fn)
    fn = click.option("--line-direction", default=None,
                      help="Sliding-boundary line direction (comma list).")(fn)
    fn = click.option("--shade-direction", default=None,
                      help="Shade direction orthogonal to the line.")(fn)
    return fn


def _build_context(vals) -> SlidingContext | None:
    parts = [vals.get("line_base"), vals.get("line_direction"),
             vals.get("shade_direction")]
    if all(p is None for p in parts):
        return None
    if any(p is None for p in parts):
        _fail_config(["line-base, line-direction and shade-direction "
                      "must be given together"])
    try:
        line = LineBoundary(_vector(parts[0], "line-base"),
                            _vector(parts[1], "line-direction"))
        return SlidingContext(line, _vector(parts[2], "shade-direction"))
    except ValueError as e:
        _fail_config([str(e)])


@main.command()
@_config_opt
@_seed_opt
@click.option("--mesh", "mesh_path", type=click.Path(), required=True)
@click.option("--center", required=True, help="Ball center (comma list).")
@click.option("--radii", required=True, help="Radius ladder (comma list).")
@click.option("--gauge", "gauge_path", type=click.Path(), default=None,
              help="Gauge JSON {scale, exponent, cutoff}.")
@_context_options
@click.option("--out", type=click.Path(), default=None,
              help="CSV profile path (r,theta,adjusted,F,err).")
def density(config, seed, mesh_path, center, radii, gauge_path,
            line_base, line_direction, shade_direction, out):
    """Density profile over a radius ladder, optionally gauge-adjusted."""
    ctx = click.get_current_context()
    vals = _merge_config(ctx, dict(config=config, seed=seed, mesh=mesh_path,
                                   center=center, radii=radii, gauge=gauge_path,
                                   line_base=line_base,
                                   line_direction=line_direction,
                                   shade_direction=shade_direction, out=out))
    mesh = _read_mesh(vals["mesh"])
    c = _vector(vals["center"], "center")
    rs = _floats(vals["radii"], "radii")
    gauge = None
    if vals["gauge"]:
        try:
            gauge = meshio.gauge_from_dict(_read_json(vals["gauge"], "gauge"))
        except (KeyError, TypeError, ValueError) as e:
            _fail_config([f"gauge: {e}"])
    context = _build_context(vals)
    try:
        prof = density_profile(mesh, c, rs, gauge=gauge)
        slid = sliding_profile(mesh, c, rs, context, gauge=gauge) if context else None
    except ValueError as e:
        _fail_domain(str(e))
    f_col = slid["shaded_densities"] if slid else prof["densities"]
    lines = ["r,theta,adjusted,F,err"]
    for i, r in enumerate(prof["radii"]):
        lines.append(",".join(meshio.fmt_float(x) for x in
                              (r, prof["densities"][i], prof["adjusted"][i],
                               f_col[i], 0.0)))
    artifacts = []
    if vals["out"]:
        artifacts.append((vals["out"], "\n".join(lines) + "\n"))
    _emit(artifacts, {"subcommand": "density", "seed": vals["seed"],
                      "densities": prof["densities"], "flat": prof["flat"],
                      "spread": prof["spread"],
                      "low_density": prof["low_density"],
                      "sliding": slid is not None})


@main.command()
@_config_opt
@_seed_opt
@click.option("--mesh", "mesh_path", type=click.Path(), required=True)
@click.option("--center", required=True)
@click.option("--radius", type=float, required=True)
@click.option("--rotations", type=int, default=512, show_default=True)
@click.option("--depth", type=float, default=1e-4, show_default=True)
@_context_options
@click.option("--out", type=click.Path(), default=None,
              help="Classification report JSON path.")
def classify(config, seed, mesh_path, center, radius, rotations, depth,
             line_base, line_direction, shade_direction, out):
    """Match the ball around a point against the cone catalog."""
    ctx = click.get_current_context()
    vals = _merge_config(ctx, dict(config=config, seed=seed, mesh=mesh_path,
                                   center=center, radius=radius,
                                   rotations=rotations, depth=depth,
                                   line_base=line_base,
                                   line_direction=line_direction,
                                   shade_direction=shade_direction, out=out))
    mesh = _read_mesh(vals["mesh"])
    context = _build_context(vals)
    try:
        report = classify_point(mesh, _vector(vals["center"], "center"),
                                float(vals["radius"]), context=context,
                                seed=int(vals["seed"]),
                                rotations=int(vals["rotations"]),
                                depth=float(vals["depth"]))
    except ValueError as e:
        _fail_domain(str(e))
    artifacts = []
    if vals["out"]:
        artifacts.append((vals["out"], meshio.dumps_json(_jsonable(report))))
    best = report.get("best")
    _emit(artifacts, {"subcommand": "classify", "seed": vals["seed"],
                      "density": report["density"], "ok": report["ok"],
                      "best": (best or {}).get("name"),
                      "residual": (best or {}).get("residual")})


@main.command("cone-check")
@_config_opt
@_seed_opt
@click.option("--mesh", "mesh_path", type=click.Path(), required=True)
@click.option("--center", required=True)
@click.option("--radius", type=float, required=True)
@click.option("--tol", type=float, default=1e-9, show_default=True)
@click.option("--out", type=click.Path(), default=None)
def cone_check(config, seed, mesh_path, center, radius, tol, out):
    """Ball-versus-sphere-slice identity residual at one point."""
    ctx = click.get_current_context()
    vals = _merge_config(ctx, dict(config=config, seed=seed, mesh=mesh_path,
                                   center=center, radius=radius, tol=tol, out=out))
    mesh = _read_mesh(vals["mesh"])
    try:
        rep = cone_slice_check(mesh, _vector(vals["center"], "center"),
                               float(vals["radius"]), tol=float(vals["tol"]))
    except ValueError as e:
        _fail_domain(str(e))
    artifacts = []
    if vals["out"]:
        artifacts.append((vals["out"], meshio.dumps_json(_jsonable(rep))))
    _emit(artifacts, {"subcommand": "cone-check", "seed": vals["seed"], **rep})


@main.command()
@_config_opt
@_seed_opt
@click.option("--mesh", "mesh_path", type=click.Path(), required=True)
@click.option("--center", required=True)
@click.option("--radius", type=float, required=True)
@click.option("--clip/--no-clip", default=True, show_default=True,
              help="Restrict to the unit ball after rescaling.")
@click.option("--out", type=click.Path(), required=True,
              help="Rescaled mesh path.")
def blowup(config, seed, mesh_path, center, radius, clip, out):
    """Recenter and rescale a ball to unit size (one blow-up step)."""
    from . import diagnostics
    ctx = click.get_current_context()
    vals = _merge_config(ctx, dict(config=config, seed=seed, mesh=mesh_path,
                                   center=center, radius=radius, clip=clip,
                                   out=out))
    mesh = _read_mesh(vals["mesh"])
    try:
        small = diagnostics.blowup(mesh, _vector(vals["center"], "center"),
                                   float(vals["radius"]), clip=bool(vals["clip"]))
    except ValueError as e:
        _fail_domain(str(e))
    artifacts = [(vals["out"], _mesh_text(vals["out"], small))]
    _emit(artifacts, {"subcommand": "blowup", "seed": vals["seed"],
                      "measure": measure(small),
                      "simplices": small.n_simplices})


# ---------------------------------------------------------------------------
# hausdorff / minimize / douglas
# ---------------------------------------------------------------------------

@main.command()
@_config_opt
@_seed_opt
@click.option("--mesh-a", type=click.Path(), required=True)
@click.option("--mesh-b", type=click.Path(), required=True)
@click.option("--center", required=True)
@click.option("--radius", type=float, required=True)
@click.option("--spacing", type=float, default=None,
              help="Sample pitch; default radius/64.")
@click.option("--out", type=click.Path(), default=None)
def hausdorff(config, seed, mesh_a, mesh_b, center, radius, spacing, out):
    """Normalized two-sided local gap between two meshes on a ball."""
    ctx = click.get_current_context()
    vals = _merge_config(ctx, dict(config=config, seed=seed, mesh_a=mesh_a,
                                   mesh_b=mesh_b, center=center, radius=radius,
                                   spacing=spacing, out=out))
    ma = _read_mesh(vals["mesh_a"])
    mb = _read_mesh(vals["mesh_b"])
    ball = Ball(_vector(vals["center"], "center"), float(vals["radius"]))
    try:
        dist = local_hausdorff_distance(ma, mb, ball,
                                        spacing=vals["spacing"] and float(vals["spacing"]))
    except ValueError as e:
        _fail_domain(str(e))
    rep = {"distance": dist, "radius": float(vals["radius"]),
           "center": [float(x) for x in ball.center]}
    artifacts = []
    if vals["out"]:
        artifacts.append((vals["out"], meshio.dumps_json(_jsonable(rep))))
    _emit(artifacts, {"subcommand": "hausdorff", "seed": vals["seed"], **rep})


@main.command()
@_config_opt
@_seed_opt
@click.option("--manifold", default="torus3", show_default=True,
              help="torus<n> for a periodic grid, box<n> for frozen walls.")
@click.option("--init", "init_path", type=click.Path(), required=True,
              help="Initial content mesh.")
@click.option("--levels", default="4,8,16", show_default=True,
              help="Grid subdivision ladder.")
@click.option("--policy", type=click.Choice(["greedy", "priority"]),
              default="greedy", show_default=True)
@click.option("--threshold", type=float, default=0.5, show_default=True,
              help="Face retention fraction at initialization.")
@click.option("--strategy", type=click.Choice(["far", "chebyshev"]),
              default="far", show_default=True)
@click.option("--size", type=float, default=1.0, show_default=True,
              help="Domain side length.")
@click.option("--audit-trials", type=int, default=1000, show_default=True)
@click.option("--out", type=click.Path(), default=None,
              help="Final faceset JSON path.")
@click.option("--report", "report_path", type=click.Path(), default=None,
              help="Per-level report JSON path.")
@click.option("--export-prefix", type=click.Path(), default=None,
              help="Write each level's minimizer to PREFIX_N<k>.off.")
def minimize(config, seed, manifold, init_path, levels, policy, threshold,
             strategy, size, audit_trials, out, report_path, export_prefix):
    """Discrete Plateau descent over a ladder of grid refinements."""
    ctx = click.get_current_context()
    vals = _merge_config(ctx, dict(config=config, seed=seed, manifold=manifold,
                                   init=init_path, levels=levels, policy=policy,
                                   threshold=threshold, strategy=strategy,
                                   size=size, audit_trials=audit_trials,
                                   out=out, report=report_path,
                                   export_prefix=export_prefix))
    mesh = _read_mesh(vals["init"])
    name = str(vals["manifold"])
    periodic = name.startswith("torus")
    if not (periodic or name.startswith("box")):
        _fail_config([f"manifold must be torus<n> or box<n>, got {name!r}"])
    try:
        dim = int(name.removeprefix("torus").removeprefix("box"))
    except ValueError:
        _fail_config([f"manifold must end in its dimension, got {name!r}"])
    if mesh.ambient_dim != dim:
        _fail_config([f"mesh is {mesh.ambient_dim}-dimensional but manifold "
                      f"asks for {dim}"])
    level_list = _ints(vals["levels"], "levels")
    if any(n < 1 for n in level_list):
        _fail_config(["levels must be positive"])
    try:
        scheme = run_scheme(mesh, level_list,
                            manifold_size=float(vals["size"]) if periodic else None,
                            threshold=float(vals["threshold"]),
                            strategy=vals["strategy"], policy=vals["policy"],
                            seed=int(vals["seed"]),
                            audit_trials=int(vals["audit_trials"]))
    except ValueError as e:
        _fail_domain(str(e))
    last = scheme.levels[-1]
    fs = last.result.faceset
    final_doc = {
        "grid": {"corner": [float(x) for x in fs.grid.corner],
                 "size": fs.grid.size, "N": fs.grid.subdivisions,
                 "identifications": "torus" if periodic else None},
        "faces": _face_key_list(fs.faces),
        "measure": fs.measure(),
    }
    report = {"levels": [], "distances": scheme.distances}
    for lv in scheme.levels:
        report["levels"].append({
            "N": lv.subdivisions,
            "source": lv.init.source,
            "covered_faces": lv.init.covered_faces,
            "initial_measure": lv.result.initial_measure,
            "final_measure": lv.result.final_measure,
            "rounds": lv.result.rounds,
            "moves": lv.result.log.to_jsonable(),
            "audit": {"worst_ratio": lv.audit.worst_ratio,
                      "improving_trials": lv.audit.improving_trials,
                      "trials": lv.audit.trials},
        })
    artifacts = []
    if vals["out"]:
        artifacts.append((vals["out"], meshio.dumps_json(_jsonable(final_doc))))
    if vals["report"]:
        artifacts.append((vals["report"], meshio.dumps_json(_jsonable(report))))
    if vals["export_prefix"]:
        for lv in scheme.levels:
            path = f"{vals['export_prefix']}_N{lv.subdivisions}.off"
            artifacts.append((path, meshio.mesh_to_off(lv.result.faceset.to_mesh())))
    _emit(artifacts, {"subcommand": "minimize", "seed": vals["seed"],
                      "levels": [lv.subdivisions for lv in scheme.levels],
                      "measures": [lv.result.final_measure for lv in scheme.levels],
                      "final_measure": last.result.final_measure,
                      "audit_worst_ratio": last.audit.worst_ratio})


@main.command()
@_config_opt
@_seed_opt
@click.option("--samples", type=int, default=256, show_default=True,
              help="Sample count for the generated circle.")
@click.option("--radius", type=float, default=1.0, show_default=True)
@click.option("--loop", "loop_path", type=click.Path(), default=None,
              help="CSV of loop samples (one point per row) instead.")
@click.option("--out", type=click.Path(), default=None)
def douglas(config, seed, samples, radius, loop_path, out):
    """Boundary-parametrization energy of a loop (circle by default)."""
    ctx = click.get_current_context()
    vals = _merge_config(ctx, dict(config=config, seed=seed, samples=samples,
                                   radius=radius, loop=loop_path, out=out))
    if vals["loop"]:
        try:
            rows = Path(vals["loop"]).read_text().strip().splitlines()
        except OSError as e:
            _fail_config([f"cannot read loop {vals['loop']}: {e}"])
        try:
            pts = np.array([[float(x) for x in row.split(",")]
                            for row in rows if row.strip()])
        except ValueError:
            _fail_config([f"loop {vals['loop']} must be numeric CSV rows"])
        label = str(vals["loop"])
    else:
        if int(vals["samples"]) < 8:
            _fail_config(["need at least 8 samples"])
        pts = circle_samples(int(vals["samples"]), float(vals["radius"]))
        label = "circle"
    try:
        energy = douglas_energy(pts)
    except ValueError as e:
        _fail_domain(str(e))
    rep = {"energy": energy, "samples": int(pts.shape[0]), "loop": label}
    artifacts = []
    if vals["out"]:
        artifacts.append((vals["out"], meshio.dumps_json(_jsonable(rep))))
    _emit(artifacts, {"subcommand": "douglas", "seed": vals["seed"], **rep})


if __name__ == "__main__":
    main()
