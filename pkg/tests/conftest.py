"""Shared builders for the test suite.

Everything here is deliberately dumb and explicit so that tests depending on
these helpers can be read without chasing indirection.
"""
from __future__ import annotations

import math

import numpy as np
import pytest

from plateau_lab.geometry.core import EmbeddedMesh


def segment_mesh(points, multiplicities=None) -> EmbeddedMesh:
    """Polyline through ``points`` as a 1-dimensional mesh."""
    pts = np.asarray(points, dtype=float)
    segs = np.column_stack([np.arange(len(pts) - 1), np.arange(1, len(pts))])
    mult = None if multiplicities is None else np.asarray(multiplicities, dtype=float)
    return EmbeddedMesh(1, pts, segs, mult)


def graph_mesh(height, n: int = 16, corner=(0.0, 0.0, 0.0), size: float = 1.0,
               periodic: bool = True) -> EmbeddedMesh:
    """Triangulated graph z = height(x, y) over an n x n grid of the base square.

    With ``periodic`` the height function is sampled on representatives of the
    unit 2-torus so the seam rows agree with the opposite side.
    """
    cx, cy, cz = corner
    verts = []
    for i in range(n + 1):
        for j in range(n + 1):
            u, v = i / n, j / n
            if periodic:
                h = height(u % 1.0, v % 1.0)
            else:
                h = height(u, v)
            verts.append((cx + size * u, cy + size * v, cz + size * h))
    tris = []
    for i in range(n):
        for j in range(n):
            a = i * (n + 1) + j
            b = (i + 1) * (n + 1) + j
            c = (i + 1) * (n + 1) + j + 1
            d = i * (n + 1) + j + 1
            tris.append((a, b, c))
            tris.append((a, c, d))
    return EmbeddedMesh(2, np.asarray(verts, dtype=float),
                        np.asarray(tris, dtype=np.int64))


def flat_slice_mesh(level: float = 0.5, n: int = 8) -> EmbeddedMesh:
    """Horizontal plane z = level over the unit square base."""
    return graph_mesh(lambda x, y: level, n=n, periodic=False)


def wiggle_mesh(amplitude: float = 0.1, n: int = 32) -> EmbeddedMesh:
    """The standard wobbly competitor: z = 1/2 + a sin(2 pi x) sin(2 pi y)."""
    return graph_mesh(
        lambda x, y: 0.5 + amplitude * math.sin(2 * math.pi * x) * math.sin(2 * math.pi * y),
        n=n,
    )


def square_patch(side: float = 1.0, z: float = 0.0) -> EmbeddedMesh:
    """Two triangles covering [0, side]^2 at height z."""
    v = np.array([
        [0.0, 0.0, z], [side, 0.0, z], [side, side, z], [0.0, side, z],
    ])
    t = np.array([[0, 1, 2], [0, 2, 3]])
    return EmbeddedMesh(2, v, t)


@pytest.fixture
def rng():
    return np.random.default_rng(20260815)
