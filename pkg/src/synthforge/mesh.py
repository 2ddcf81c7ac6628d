"""Triangle-mesh loading (OBJ / STL) and canonical normalization.

Meshes are normalized to a canonical frame before rendering: centered at
the axis-aligned bounding-box center and uniformly scaled so the bounding
sphere has radius 1.  One camera-distance formula then serves every mesh.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DegenerateMesh, EmptyMesh, UnreadableFile, UnsupportedFormat

__all__ = ["Mesh", "BoundingSphere", "load_mesh", "normalize_mesh", "bounding_sphere"]


@dataclass(frozen=True)
class Mesh:
    """Immutable triangle soup.

    vertices: (V, 3) float64, model units
    triangles: (T, 3) int64 vertex indices
    normals: (T, 3) float64 per-triangle unit normals (recomputed from winding)
    """

    vertices: np.ndarray
    triangles: np.ndarray
    normals: np.ndarray
    source_path: str = ""

    def __post_init__(self):
        if len(self.triangles) < 1:
            raise EmptyMesh(f"mesh has no triangles: {self.source_path!r}")
        if self.triangles.max() >= len(self.vertices):
            raise UnreadableFile(
                f"triangle index out of range in {self.source_path!r}"
            )


@dataclass(frozen=True)
class BoundingSphere:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise DegenerateMesh("bounding sphere radius must be positive")


def compute_normals(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """Unit normals from winding: n = (v1-v0) x (v2-v0), normalized.

    Degenerate triangles (zero area) get an arbitrary +z normal so the
    array stays unit length everywhere; the rasterizer skips them anyway.
    """
    v0 = vertices[triangles[:, 0]]
    v1 = vertices[triangles[:, 1]]
    v2 = vertices[triangles[:, 2]]
    n = np.cross(v1 - v0, v2 - v0)
    length = np.linalg.norm(n, axis=1)
    bad = length < 1e-300
    length[bad] = 1.0
    n = n / length[:, None]
    n[bad] = (0.0, 0.0, 1.0)
    return n


def _make_mesh(vertices, triangles, source_path: str) -> Mesh:
    vertices = np.asarray(vertices, dtype=np.float64).reshape(-1, 3)
    triangles = np.asarray(triangles, dtype=np.int64).reshape(-1, 3)
    if len(triangles) == 0:
        raise EmptyMesh(f"no faces in {source_path!r}")
    return Mesh(
        vertices=vertices,
        triangles=triangles,
        normals=compute_normals(vertices, triangles),
        source_path=source_path,
    )


def _parse_obj(text: str, source_path: str) -> Mesh:
    verts: list[tuple[float, float, float]] = []
    faces: list[tuple[int, int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        tag = parts[0]
        if tag == "v":
            if len(parts) < 4:
                raise UnreadableFile(f"{source_path}:{lineno}: bad vertex line")
            verts.append((float(parts[1]), float(parts[2]), float(parts[3])))
        elif tag == "f":
            idx = []
            for token in parts[1:]:
                # v, v/vt, v//vn, v/vt/vn all start with the vertex index
                i = int(token.split("/")[0])
                idx.append(i - 1 if i > 0 else len(verts) + i)
            if len(idx) < 3:
                raise UnreadableFile(f"{source_path}:{lineno}: face with <3 vertices")
            # fan-triangulate convex polygons
            for k in range(1, len(idx) - 1):
                faces.append((idx[0], idx[k], idx[k + 1]))
        # vn / vt / usemtl / o / g / s: ignored
    return _make_mesh(verts, faces, source_path)


def _parse_stl_ascii(text: str, source_path: str) -> Mesh:
    verts: list[tuple[float, float, float]] = []
    faces: list[tuple[int, int, int]] = []
    current: list[int] = []
    for raw in text.splitlines():
        parts = raw.split()
        if not parts:
            continue
        if parts[0] == "vertex":
            verts.append((float(parts[1]), float(parts[2]), float(parts[3])))
            current.append(len(verts) - 1)
            if len(current) == 3:
                faces.append(tuple(current))
                current = []
    return _make_mesh(verts, faces, source_path)


def _parse_stl_binary(data: bytes, source_path: str) -> Mesh:
    if len(data) < 84:
        raise UnreadableFile(f"binary STL too short: {source_path}")
    (count,) = struct.unpack_from("<I", data, 80)
    expected = 84 + 50 * count
    if len(data) < expected:
        raise UnreadableFile(
            f"binary STL truncated: declares {count} triangles, "
            f"{len(data)} bytes < {expected}: {source_path}"
        )
    if count == 0:
        raise EmptyMesh(f"binary STL declares zero triangles: {source_path}")
    records = np.frombuffer(data, dtype=np.uint8, count=50 * count, offset=84)
    records = records.reshape(count, 50)
    floats = records[:, :48].copy().view("<f4").reshape(count, 12)
    # stored normals (cols 0:3) are discarded and recomputed from winding
    verts = floats[:, 3:12].astype(np.float64).reshape(count * 3, 3)
    faces = np.arange(count * 3, dtype=np.int64).reshape(count, 3)
    return _make_mesh(verts, faces, source_path)


def load_mesh(path) -> Mesh:
    """Load an OBJ or STL file into a Mesh with recomputed normals."""
    p = Path(path)
    if not p.is_file():
        raise UnreadableFile(f"mesh file not found: {p}")
    suffix = p.suffix.lower()
    try:
        data = p.read_bytes()
    except OSError as exc:
        raise UnreadableFile(f"cannot read {p}: {exc}") from exc
    if suffix == ".obj":
        return _parse_obj(data.decode("utf-8", errors="replace"), str(p))
    if suffix == ".stl":
        # ASCII STL starts with "solid" and contains "facet"; some binary
        # exporters also write "solid" in the header, so check both.
        head = data[:512].lstrip()
        if head.startswith(b"solid") and b"facet" in data[:4096]:
            return _parse_stl_ascii(data.decode("ascii", errors="replace"), str(p))
        return _parse_stl_binary(data, str(p))
    raise UnsupportedFormat(f"unsupported mesh format {suffix!r} ({p})")


def bounding_sphere(mesh: Mesh) -> BoundingSphere:
    """AABB-center sphere: center of the bounding box, radius = max vertex
    distance from it.  Not the minimal enclosing sphere; deterministic and
    O(V), which is all the conservative fill-frame framing needs.
    """
    lo = mesh.vertices.min(axis=0)
    hi = mesh.vertices.max(axis=0)
    if not np.any(hi - lo > 0):
        raise DegenerateMesh(f"all vertices coincident: {mesh.source_path!r}")
    center = (lo + hi) / 2.0
    radius = float(np.linalg.norm(mesh.vertices - center, axis=1).max())
    return BoundingSphere(center=center, radius=radius)


def normalize_mesh(mesh: Mesh) -> Mesh:
    """Center at the AABB center and scale so bounding-sphere radius = 1."""
    sphere = bounding_sphere(mesh)
    vertices = (mesh.vertices - sphere.center) / sphere.radius
    return Mesh(
        vertices=vertices,
        triangles=mesh.triangles,
        normals=mesh.normals,  # rigid translate + uniform scale keep normals
        source_path=mesh.source_path,
    )
