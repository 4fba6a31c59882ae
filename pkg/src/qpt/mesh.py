"""Bloch-sphere ellipsoid meshes for visualizing an affine channel action.

A unit icosphere (subdivided icosahedron, re-projected to the sphere at
every level) is pushed through the channel's affine map; the deformed mesh
next to the untouched reference sphere shows which Bloch directions the
channel contracts.  Export is Wavefront OBJ with both objects in one file,
plus a JSON sidecar carrying the numbers a viewer cannot read off the
geometry: the affine pair, its singular values (the ellipsoid semi-axes),
and the largest image norm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import AffineMap
from .io import encode_affine, write_text_atomic

_GOLDEN = (1.0 + np.sqrt(5.0)) / 2.0

# Icosahedron: cyclic permutations of (0, +-1, +-golden), normalized below.
_BASE_VERTICES = np.array(
    [
        [-1.0, _GOLDEN, 0.0], [1.0, _GOLDEN, 0.0], [-1.0, -_GOLDEN, 0.0],
        [1.0, -_GOLDEN, 0.0], [0.0, -1.0, _GOLDEN], [0.0, 1.0, _GOLDEN],
        [0.0, -1.0, -_GOLDEN], [0.0, 1.0, -_GOLDEN], [_GOLDEN, 0.0, -1.0],
        [_GOLDEN, 0.0, 1.0], [-_GOLDEN, 0.0, -1.0], [-_GOLDEN, 0.0, 1.0],
    ]
)

_BASE_FACES = np.array(
    [
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ]
)


def icosphere(subdivisions: int = 3) -> tuple[np.ndarray, np.ndarray]:
    """Unit-sphere triangle mesh: ``(vertices (n, 3), faces (m, 3))``.

    Each subdivision splits every triangle in four through edge midpoints,
    shared between neighbors, and re-normalizes the new vertices onto the
    sphere.  ``subdivisions`` must be at least 1.
    """
    if subdivisions < 1:
        raise ValueError(f"subdivisions must be at least 1, got {subdivisions}")
    vertices = [v / np.linalg.norm(v) for v in _BASE_VERTICES]
    faces = _BASE_FACES
    for _ in range(subdivisions):
        midpoints: dict[tuple[int, int], int] = {}

        def midpoint(a: int, b: int) -> int:
            key = (a, b) if a < b else (b, a)
            if key not in midpoints:
                point = vertices[a] + vertices[b]
                vertices.append(point / np.linalg.norm(point))
                midpoints[key] = len(vertices) - 1
            return midpoints[key]

        next_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            next_faces.extend(
                [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
            )
        faces = np.array(next_faces)
    return np.array(vertices), faces


@dataclass(frozen=True)
class EllipsoidMesh:
    """Affine image of the unit sphere plus the reference sphere itself.

    ``vertices`` and ``reference_vertices`` are parallel arrays over the
    shared ``faces`` (1-to-1 vertex correspondence).
    """

    vertices: np.ndarray
    faces: np.ndarray
    reference_vertices: np.ndarray
    subdivisions: int


def ellipsoid_mesh(affine: AffineMap, subdivisions: int = 3) -> EllipsoidMesh:
    reference, faces = icosphere(subdivisions)
    vertices = reference @ affine.matrix.T + affine.translation
    return EllipsoidMesh(
        vertices=vertices,
        faces=faces,
        reference_vertices=reference,
        subdivisions=subdivisions,
    )


def obj_text(mesh: EllipsoidMesh) -> str:
    """Both objects in one OBJ document: ``unit_sphere`` then ``ellipsoid``."""
    lines = ["# Bloch sphere and its affine image"]
    lines.append("o unit_sphere")
    # repr of a Python float is the shortest exact decimal form.
    for v in mesh.reference_vertices:
        lines.append(f"v {float(v[0])!r} {float(v[1])!r} {float(v[2])!r}")
    for f in mesh.faces:
        lines.append(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}")
    offset = len(mesh.reference_vertices)
    lines.append("o ellipsoid")
    for v in mesh.vertices:
        lines.append(f"v {float(v[0])!r} {float(v[1])!r} {float(v[2])!r}")
    for f in mesh.faces:
        lines.append(
            f"f {f[0] + offset + 1} {f[1] + offset + 1} {f[2] + offset + 1}"
        )
    return "\n".join(lines) + "\n"


def write_obj(mesh: EllipsoidMesh, path: str) -> None:
    write_text_atomic(path, obj_text(mesh))


def mesh_metadata(affine: AffineMap, mesh: EllipsoidMesh) -> dict:
    """Sidecar numbers: the map, its semi-axes, and the mesh extent."""
    singular = np.linalg.svd(affine.matrix, compute_uv=False)
    return {
        "affine": encode_affine(affine),
        "axis_lengths": [float(s) for s in singular],
        "max_vertex_norm": float(np.linalg.norm(mesh.vertices, axis=1).max()),
        "vertex_count": int(len(mesh.vertices)),
        "face_count": int(len(mesh.faces)),
        "subdivisions": mesh.subdivisions,
    }
