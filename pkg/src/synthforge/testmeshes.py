"""Bundled procedural test meshes.

Five small device-like shapes stand in for user CAD files, plus a ~5k
triangle variant used for throughput benchmarking.  All builders are
deterministic pure functions.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .mesh import Mesh, compute_normals

__all__ = ["builtin_mesh", "builtin_names", "write_obj"]


def _mesh(verts, tris) -> Mesh:
    verts = np.asarray(verts, dtype=np.float64)
    tris = np.asarray(tris, dtype=np.int64)
    return Mesh(verts, tris, compute_normals(verts, tris), source_path="<builtin>")


def _box(cx, cy, cz, sx, sy, sz, base=0):
    """8 vertices / 12 triangles, outward winding."""
    hx, hy, hz = sx / 2, sy / 2, sz / 2
    corners = [
        (cx - hx, cy - hy, cz - hz),
        (cx + hx, cy - hy, cz - hz),
        (cx + hx, cy + hy, cz - hz),
        (cx - hx, cy + hy, cz - hz),
        (cx - hx, cy - hy, cz + hz),
        (cx + hx, cy - hy, cz + hz),
        (cx + hx, cy + hy, cz + hz),
        (cx - hx, cy + hy, cz + hz),
    ]
    quads = [
        (0, 3, 2, 1),  # -z
        (4, 5, 6, 7),  # +z
        (0, 1, 5, 4),  # -y
        (2, 3, 7, 6),  # +y
        (1, 2, 6, 5),  # +x
        (3, 0, 4, 7),  # -x
    ]
    tris = []
    for a, b, c, d in quads:
        tris.append((base + a, base + b, base + c))
        tris.append((base + a, base + c, base + d))
    return corners, tris


def _boxes(specs):
    verts, tris = [], []
    for spec in specs:
        v, t = _box(*spec, base=len(verts))
        verts.extend(v)
        tris.extend(t)
    return _mesh(verts, tris)


def _cylinder(cx, cy, cz, radius, height, segments, base=0):
    """Closed cylinder along +z with fan caps."""
    verts = []
    tris = []
    zb, zt = cz - height / 2, cz + height / 2
    for z in (zb, zt):
        for k in range(segments):
            a = 2.0 * np.pi * k / segments
            verts.append((cx + radius * np.cos(a), cy + radius * np.sin(a), z))
    bot = lambda k: base + k % segments
    top = lambda k: base + segments + k % segments
    for k in range(segments):
        tris.append((bot(k), bot(k + 1), top(k)))
        tris.append((bot(k + 1), top(k + 1), top(k)))
    verts.append((cx, cy, zb))
    verts.append((cx, cy, zt))
    cb, ct = base + 2 * segments, base + 2 * segments + 1
    for k in range(segments):
        tris.append((cb, bot(k + 1), bot(k)))
        tris.append((ct, top(k), top(k + 1)))
    return verts, tris


def _cube() -> Mesh:
    return _boxes([(0, 0, 0, 2, 2, 2)])


def _box_with_fins() -> Mesh:
    specs = [(0, 0, 0, 2.0, 1.2, 0.8)]
    for i in range(3):
        specs.append((-0.6 + 0.6 * i, 0, 0.55, 0.12, 1.2, 0.3))
    return _boxes(specs)


def _l_bracket() -> Mesh:
    return _boxes([
        (0, 0, 0.15, 2.0, 1.0, 0.3),
        (-0.85, 0, 0.95, 0.3, 1.0, 1.6),
    ])


def _cylinder_cluster(segments=48) -> Mesh:
    verts, tris = [], []
    for (cx, cy, r, h) in [(-0.6, -0.3, 0.45, 1.6), (0.5, 0.2, 0.35, 2.0),
                           (0.0, 0.8, 0.25, 1.0)]:
        v, t = _cylinder(cx, cy, 0, r, h, segments, base=len(verts))
        verts.extend(v)
        tris.extend(t)
    return _mesh(verts, tris)


def _plate_with_holes() -> Mesh:
    # plate assembled from strips around two square holes
    t = 0.2  # thickness
    specs = [
        (0, -0.8, 0, 3.0, 0.4, t),   # bottom rail
        (0, 0.8, 0, 3.0, 0.4, t),    # top rail
        (-1.3, 0, 0, 0.4, 1.2, t),   # left rail
        (1.3, 0, 0, 0.4, 1.2, t),    # right rail
        (0, 0, 0, 0.5, 1.2, t),      # center divider
    ]
    return _boxes(specs)


_BUILDERS = {
    "cube": _cube,
    "box_with_fins": _box_with_fins,
    "l_bracket": _l_bracket,
    "cylinder_cluster": _cylinder_cluster,
    "plate_with_holes": _plate_with_holes,
    # ~5k-triangle benchmark mesh (3 cylinders x 4*420 triangles)
    "bench_cluster": lambda: _cylinder_cluster(segments=420),
}


def builtin_names() -> list[str]:
    return sorted(_BUILDERS)


def builtin_mesh(name: str) -> Mesh:
    try:
        return _BUILDERS[name]()
    except KeyError:
        raise ConfigError(
            f"unknown builtin mesh {name!r}; choose from {builtin_names()}"
        ) from None


def write_obj(mesh: Mesh, path) -> None:
    """Write a mesh as a minimal OBJ file (v/f records)."""
    with open(path, "w") as fh:
        for v in mesh.vertices:
            fh.write(f"v {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}\n")
        for t in mesh.triangles:
            fh.write(f"f {t[0] + 1} {t[1] + 1} {t[2] + 1}\n")
