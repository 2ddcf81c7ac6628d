"""Headless software rasterizer with pixel-precise auto-labels.

Perspective projection, z-buffered triangle rasterization with the
pixel-center sample rule and top-left tie-breaking, flat per-triangle
Lambert shading, linear color.  Pure per sample: the same (mesh, scene,
config) always produces the same bytes, independent of worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ConfigError, InvalidSpec, ObjectNotVisible
from .mesh import Mesh
from .scene import SceneParams

__all__ = ["RenderConfig", "LabeledImage", "render", "shade", "quaternion_matrix"]


@dataclass(frozen=True)
class RenderConfig:
    width: int = 256
    height: int = 256
    fov_vertical: float = 60.0
    ambient: float = 0.25
    near: float = 0.1
    far: float = 100.0
    background: str = "scene"  # "scene", "transparent", or "r,g,b" override
    object_color: tuple[float, float, float] = (0.72, 0.72, 0.72)
    backface_cull: bool = True

    def validate(self) -> None:
        if self.width < 16 or self.height < 16:
            raise ConfigError(f"frame must be at least 16x16, got {self.width}x{self.height}")
        if not 0 < self.fov_vertical < 180:
            raise ConfigError(f"fov_vertical must be in (0,180), got {self.fov_vertical}")
        if not self.near < self.far:
            raise ConfigError(f"near must be < far, got {self.near} >= {self.far}")
        if not 0 <= self.ambient <= 1:
            raise ConfigError(f"ambient must be in [0,1], got {self.ambient}")

    def background_override(self) -> tuple[int, int, int] | None:
        if self.background in ("scene", "transparent"):
            return None
        try:
            r, g, b = (int(x) for x in self.background.split(","))
        except ValueError:
            raise ConfigError(f"bad background {self.background!r}")
        return (r, g, b)

    def to_dict(self) -> dict:
        from dataclasses import asdict

        return asdict(self)


@dataclass(frozen=True)
class LabeledImage:
    pixels: np.ndarray  # (H, W, 3) or (H, W, 4) uint8
    class_id: int
    mask: np.ndarray  # (H, W) uint8, values {0, 255}
    bbox: tuple[int, int, int, int]  # inclusive (x_min, y_min, x_max, y_max)
    scene: SceneParams


def shade(normal, light_direction, intensity: float, ambient: float) -> float:
    """Lambert term: clamp(ambient + intensity * max(0, n.l), 0, 1)."""
    ndotl = float(np.dot(normal, light_direction))
    return min(1.0, max(0.0, ambient + intensity * max(0.0, ndotl)))


def quaternion_matrix(q) -> np.ndarray:
    """Rotation matrix of a unit quaternion (w, x, y, z)."""
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


@njit(cache=True)
def _rasterize(xy, invz, colors, color_buf, zbuf, mask):
    """Fill rule: pixel centers (ix+0.5, iy+0.5); a center exactly on an
    edge counts as covered only for top (dy==0, dx>0) and left (dy<0)
    edges, after orienting the triangle to positive doubled area.
    """
    height, width = mask.shape
    n = xy.shape[0]
    for t in range(n):
        x0, y0 = xy[t, 0, 0], xy[t, 0, 1]
        x1, y1 = xy[t, 1, 0], xy[t, 1, 1]
        x2, y2 = xy[t, 2, 0], xy[t, 2, 1]
        z0, z1, z2 = invz[t, 0], invz[t, 1], invz[t, 2]
        area2 = (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0)
        if area2 == 0.0:
            continue
        if area2 < 0.0:
            x1, y1, x2, y2 = x2, y2, x1, y1
            z1, z2 = z2, z1
            area2 = -area2
        min_x = min(x0, min(x1, x2))
        max_x = max(x0, max(x1, x2))
        min_y = min(y0, min(y1, y2))
        max_y = max(y0, max(y1, y2))
        ix0 = max(0, int(math.ceil(min_x - 0.5)))
        ix1 = min(width - 1, int(math.floor(max_x - 0.5)))
        iy0 = max(0, int(math.ceil(min_y - 0.5)))
        iy1 = min(height - 1, int(math.floor(max_y - 0.5)))
        if ix1 < ix0 or iy1 < iy0:
            continue
        # top-left acceptance per edge (edge i is opposite vertex i)
        tl0 = (y2 - y1) < 0.0 or ((y2 - y1) == 0.0 and (x2 - x1) > 0.0)
        tl1 = (y0 - y2) < 0.0 or ((y0 - y2) == 0.0 and (x0 - x2) > 0.0)
        tl2 = (y1 - y0) < 0.0 or ((y1 - y0) == 0.0 and (x1 - x0) > 0.0)
        for iy in range(iy0, iy1 + 1):
            py = iy + 0.5
            # covered pixels form one contiguous span per row (convexity),
            # so stop scanning once the span has been entered and left
            in_span = False
            for ix in range(ix0, ix1 + 1):
                px = ix + 0.5
                e0 = (x2 - x1) * (py - y1) - (y2 - y1) * (px - x1)
                e1 = (x0 - x2) * (py - y2) - (y0 - y2) * (px - x2)
                e2 = (x1 - x0) * (py - y0) - (y1 - y0) * (px - x0)
                if (e0 > 0.0 or (e0 == 0.0 and tl0)) and \
                   (e1 > 0.0 or (e1 == 0.0 and tl1)) and \
                   (e2 > 0.0 or (e2 == 0.0 and tl2)):
                    in_span = True
                    mask[iy, ix] = 255
                    depth = (e0 * z0 + e1 * z1 + e2 * z2) / area2
                    if depth > zbuf[iy, ix]:
                        zbuf[iy, ix] = depth
                        color_buf[iy, ix, 0] = colors[t, 0]
                        color_buf[iy, ix, 1] = colors[t, 1]
                        color_buf[iy, ix, 2] = colors[t, 2]
                elif in_span:
                    break


def mask_bbox(mask: np.ndarray) -> tuple[int, int, int, int]:
    """Tight inclusive bounds (x_min, y_min, x_max, y_max) of set pixels."""
    ys, xs = np.nonzero(mask)
    if len(ys) == 0:
        raise ObjectNotVisible("mask is empty")
    return (int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max()))


def render(mesh: Mesh, scene: SceneParams, cfg: RenderConfig, class_id: int = 0) -> LabeledImage:
    """Render one labeled sample.

    The camera sits at (0, 0, d) looking down -z with +y up; the mesh is
    rotated by the scene quaternion about the origin.  Triangles touching
    the near/far planes are conservatively dropped rather than clipped
    (normalized meshes sit well inside the frustum).
    """
    cfg.validate()
    if scene.camera_distance <= cfg.near:
        raise InvalidSpec(
            f"camera_distance {scene.camera_distance} must exceed near plane {cfg.near}"
        )

    rot = quaternion_matrix(scene.rotation)
    verts = mesh.vertices @ rot.T
    normals = mesh.normals @ rot.T
    tris = mesh.triangles
    d = scene.camera_distance

    if cfg.backface_cull:
        to_cam = np.array([0.0, 0.0, d]) - verts[tris[:, 0]]
        keep = np.einsum("ij,ij->i", normals, to_cam) > 0.0
        tris = tris[keep]
        normals = normals[keep]

    tri_z = d - verts[tris, 2]  # positive depth into the scene
    in_range = np.all((tri_z > cfg.near) & (tri_z < cfg.far), axis=1)
    tris = tris[in_range]
    normals = normals[in_range]
    tri_z = tri_z[in_range]

    height, width = cfg.height, cfg.width
    bg_override = cfg.background_override()
    transparent = cfg.background == "transparent"
    bg = (0, 0, 0) if transparent else (bg_override or scene.background_color)

    color_buf = np.empty((height, width, 3), dtype=np.uint8)
    color_buf[:, :] = np.array(bg, dtype=np.uint8)
    mask = np.zeros((height, width), dtype=np.uint8)

    if len(tris) > 0:
        f = 1.0 / math.tan(math.radians(cfg.fov_vertical) / 2.0)
        aspect = height / width
        vx = verts[tris][:, :, 0]
        vy = verts[tris][:, :, 1]
        ndc_x = f * aspect * vx / tri_z
        ndc_y = f * vy / tri_z
        xy = np.empty((len(tris), 3, 2), dtype=np.float64)
        xy[:, :, 0] = (ndc_x + 1.0) * (width / 2.0)
        xy[:, :, 1] = (1.0 - ndc_y) * (height / 2.0)
        invz = 1.0 / tri_z

        lam = np.einsum("ij,j->i", normals, np.asarray(scene.light_direction, dtype=np.float64))
        level = np.clip(cfg.ambient + scene.light_intensity * np.maximum(0.0, lam), 0.0, 1.0)
        base = np.asarray(cfg.object_color, dtype=np.float64)
        colors = np.clip(np.round(level[:, None] * base[None, :] * 255.0), 0, 255).astype(np.uint8)

        zbuf = np.zeros((height, width), dtype=np.float64)
        _rasterize(xy, invz, colors, color_buf, zbuf, mask)

    bbox = mask_bbox(mask)  # raises ObjectNotVisible on empty mask

    if transparent:
        pixels = np.dstack([color_buf, mask])
    else:
        pixels = color_buf
    return LabeledImage(pixels=pixels, class_id=class_id, mask=mask, bbox=bbox, scene=scene)
