"""Mesh and value-type serialization.

Triangle meshes (d=2, n=3) round-trip through OFF and OBJ; segment meshes
(d=1, any ambient) through a one-segment-per-row CSV.  JSON payloads are
emitted by a tiny deterministic writer: sorted keys, floats at 17 significant
digits, so identical values produce identical bytes.
"""

from __future__ import annotations

import io
import math
import os
from pathlib import Path
from typing import Union

import numpy as np

from .core import Ball, EmbeddedMesh, Gauge, LineBoundary

PathLike = Union[str, os.PathLike]


def fmt_float(x: float) -> str:
    """17-significant-digit decimal form (round-trips any float64)."""
    if isinstance(x, float) and math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return "{:.17g}".format(float(x))


# ---------------------------------------------------------------------------
# deterministic JSON
# ---------------------------------------------------------------------------

def dumps_json(obj, indent: int = 2) -> str:
    """Serialize dict/list/str/num/bool/None with sorted keys and 17g floats."""
    buf = io.StringIO()

    def emit(o, depth):
        pad = " " * (indent * depth)
        pad_in = " " * (indent * (depth + 1))
        if isinstance(o, dict):
            if not o:
                buf.write("{}")
                return
            buf.write("{\n")
            items = sorted(o.items(), key=lambda kv: kv[0])
            for i, (k, v) in enumerate(items):
                if not isinstance(k, str):
                    raise TypeError("JSON object keys must be strings")
                buf.write(pad_in + '"' + _escape(k) + '": ')
                emit(v, depth + 1)
                buf.write(",\n" if i < len(items) - 1 else "\n")
            buf.write(pad + "}")
        elif isinstance(o, (list, tuple, np.ndarray)):
            seq = list(o.tolist()) if isinstance(o, np.ndarray) else list(o)
            if not seq:
                buf.write("[]")
                return
            buf.write("[\n")
            for i, v in enumerate(seq):
                buf.write(pad_in)
                emit(v, depth + 1)
                buf.write(",\n" if i < len(seq) - 1 else "\n")
            buf.write(pad + "]")
        elif isinstance(o, bool) or o is None:
            buf.write("true" if o is True else "false" if o is False else "null")
        elif isinstance(o, (int, np.integer)):
            buf.write(str(int(o)))
        elif isinstance(o, (float, np.floating)):
            v = float(o)
            if math.isnan(v):
                buf.write("NaN")
            else:
                buf.write(fmt_float(v))
        elif isinstance(o, str):
            buf.write('"' + _escape(o) + '"')
        else:
            raise TypeError(f"cannot serialize {type(o)!r}")

    emit(obj, 0)
    buf.write("\n")
    return buf.getvalue()


def _escape(s: str) -> str:
    return (s.replace("\\", "\\\\").replace('"', '\\"')
             .replace("\n", "\\n").replace("\t", "\\t").replace("\r", "\\r"))


def atomic_write_text(path: PathLike, text: str) -> None:
    """Write via a temp file in the same directory plus rename."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def write_json(path: PathLike, obj) -> None:
    atomic_write_text(path, dumps_json(obj))


# ---------------------------------------------------------------------------
# triangle meshes: OFF / OBJ
# ---------------------------------------------------------------------------

def mesh_to_off(mesh: EmbeddedMesh) -> str:
    if mesh.dimension != 2 or mesh.ambient_dim != 3:
        raise ValueError("OFF export requires a triangle mesh in R^3")
    lines = ["OFF", f"{mesh.vertices.shape[0]} {mesh.n_simplices} 0"]
    for v in mesh.vertices:
        lines.append(" ".join(fmt_float(x) for x in v))
    for s in mesh.simplices:
        lines.append("3 " + " ".join(str(int(i)) for i in s))
    return "\n".join(lines) + "\n"


def mesh_from_off(text: str) -> EmbeddedMesh:
    tokens: list[str] = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            tokens.extend(line.split())
    if not tokens or tokens[0].upper() != "OFF":
        raise ValueError("not an OFF file")
    nv, nf = int(tokens[1]), int(tokens[2])
    pos = 4
    verts = np.array([[float(tokens[pos + 3 * i + j]) for j in range(3)]
                      for i in range(nv)], dtype=float).reshape(nv, 3)
    pos += 3 * nv
    faces = []
    for _ in range(nf):
        k = int(tokens[pos])
        if k != 3:
            raise ValueError("only triangle faces are supported")
        faces.append([int(tokens[pos + 1]), int(tokens[pos + 2]), int(tokens[pos + 3])])
        pos += 4
    return EmbeddedMesh(2, verts, np.array(faces, dtype=np.int64).reshape(len(faces), 3),
                        allow_degenerate=True)


def mesh_to_obj(mesh: EmbeddedMesh) -> str:
    if mesh.dimension != 2 or mesh.ambient_dim != 3:
        raise ValueError("OBJ export requires a triangle mesh in R^3")
    lines = []
    for v in mesh.vertices:
        lines.append("v " + " ".join(fmt_float(x) for x in v))
    for s in mesh.simplices:
        lines.append("f " + " ".join(str(int(i) + 1) for i in s))
    return "\n".join(lines) + "\n"


def mesh_from_obj(text: str) -> EmbeddedMesh:
    verts, faces = [], []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "v":
            verts.append([float(x) for x in parts[1:4]])
        elif parts[0] == "f":
            idx = [int(p.split("/", 1)[0]) - 1 for p in parts[1:]]
            if len(idx) != 3:
                raise ValueError("only triangle faces are supported")
            faces.append(idx)
    return EmbeddedMesh(2, np.array(verts, dtype=float).reshape(len(verts), 3),
                        np.array(faces, dtype=np.int64).reshape(len(faces), 3),
                        allow_degenerate=True)


# ---------------------------------------------------------------------------
# segment meshes: CSV, one segment per row
# ---------------------------------------------------------------------------

def mesh_to_segment_csv(mesh: EmbeddedMesh) -> str:
    if mesh.dimension != 1:
        raise ValueError("segment CSV export requires a d=1 mesh")
    n = mesh.ambient_dim
    lines = [f"# segments ambient={n}"]
    corners = mesh.simplex_corners()
    for i in range(mesh.n_simplices):
        row = list(corners[i, 0]) + list(corners[i, 1])
        lines.append(",".join(fmt_float(x) for x in row))
    return "\n".join(lines) + "\n"


def mesh_from_segment_csv(text: str) -> EmbeddedMesh:
    segs = []
    ambient = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if "ambient=" in line:
                ambient = int(line.split("ambient=")[1].split()[0])
            continue
        vals = [float(x) for x in line.split(",")]
        if len(vals) % 2 != 0:
            raise ValueError("segment row must hold two points")
        n = len(vals) // 2
        if ambient is None:
            ambient = n
        if n != ambient:
            raise ValueError("inconsistent ambient dimension in segment CSV")
        segs.append(np.array([vals[:n], vals[n:]], dtype=float))
    if not segs:
        raise ValueError("no segments in CSV")
    return EmbeddedMesh.from_segments(segs, allow_degenerate=True)


# ---------------------------------------------------------------------------
# dispatch + value types
# ---------------------------------------------------------------------------

def write_mesh(path: PathLike, mesh: EmbeddedMesh) -> None:
    suffix = Path(path).suffix.lower()
    if suffix == ".off":
        atomic_write_text(path, mesh_to_off(mesh))
    elif suffix == ".obj":
        atomic_write_text(path, mesh_to_obj(mesh))
    elif suffix == ".csv":
        atomic_write_text(path, mesh_to_segment_csv(mesh))
    else:
        raise ValueError(f"unsupported mesh format {suffix!r} (use .off/.obj/.csv)")


def read_mesh(path: PathLike) -> EmbeddedMesh:
    p = Path(path)
    suffix = p.suffix.lower()
    text = p.read_text()
    if suffix == ".off":
        return mesh_from_off(text)
    if suffix == ".obj":
        return mesh_from_obj(text)
    if suffix == ".csv":
        return mesh_from_segment_csv(text)
    raise ValueError(f"unsupported mesh format {suffix!r} (use .off/.obj/.csv)")


def ball_to_dict(ball: Ball) -> dict:
    return {"center": [float(x) for x in ball.center], "radius": float(ball.radius)}


def ball_from_dict(d: dict) -> Ball:
    return Ball(np.asarray(d["center"], dtype=float), float(d["radius"]))


def gauge_to_dict(g: Gauge) -> dict:
    return {"scale": g.scale, "exponent": g.exponent, "cutoff": g.cutoff}


def gauge_from_dict(d: dict) -> Gauge:
    return Gauge(float(d["scale"]), float(d["exponent"]), float(d["cutoff"]))


def line_to_dict(line: LineBoundary) -> dict:
    return {"base": [float(x) for x in line.base],
            "direction": [float(x) for x in line.direction]}


def line_from_dict(d: dict) -> LineBoundary:
    return LineBoundary(np.asarray(d["base"], dtype=float),
                        np.asarray(d["direction"], dtype=float))
