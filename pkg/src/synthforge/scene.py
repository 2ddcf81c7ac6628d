"""Per-sample scene randomization.

Every field of a SceneParams is a pure function of (seed, sample index,
RandomizationSpec): the draws never look at mesh content, so two object
classes rendered at the same (seed, index) share pose, lighting, and
background.  The same seed therefore yields the same random scene for
every object.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np

from . import rng
from .errors import InvalidFov, InvalidSpec

__all__ = [
    "RandomizationSpec",
    "SceneParams",
    "scene_params",
    "fill_frame_distance",
    "random_rotation",
]

VARIABLE_SCALE = "variable_scale"
FIXED_SCALE = "fixed_scale"


@dataclass(frozen=True)
class RandomizationSpec:
    """Declared randomization ranges; recorded in every manifest."""

    mode: str = FIXED_SCALE
    distance_range: tuple[float, float] = (2.2, 6.0)  # variable mode only
    fill_fraction: float = 0.95
    intensity_range: tuple[float, float] = (0.5, 1.5)
    fov_vertical: float = 60.0
    background: str = "random"  # "random" or "r,g,b" fixed color

    def validate(self) -> None:
        if self.mode not in (VARIABLE_SCALE, FIXED_SCALE):
            raise InvalidSpec(f"mode must be variable_scale|fixed_scale, got {self.mode!r}")
        d0, d1 = self.distance_range
        if not d0 <= d1 or d0 <= 0:
            raise InvalidSpec(f"bad distance_range {self.distance_range}")
        if not 0 < self.fill_fraction <= 1:
            raise InvalidSpec(f"fill_fraction must be in (0,1], got {self.fill_fraction}")
        i0, i1 = self.intensity_range
        if not 0 <= i0 <= i1:
            raise InvalidSpec(f"bad intensity_range {self.intensity_range}")
        if not 0 < self.fov_vertical < 180:
            raise InvalidSpec(f"fov_vertical must be in (0,180), got {self.fov_vertical}")
        if self.background != "random":
            self.background_color()

    def background_color(self) -> tuple[int, int, int] | None:
        if self.background == "random":
            return None
        try:
            r, g, b = (int(x) for x in self.background.split(","))
        except ValueError:
            raise InvalidSpec(f"background must be 'random' or 'r,g,b', got {self.background!r}")
        if not all(0 <= c <= 255 for c in (r, g, b)):
            raise InvalidSpec(f"background channels out of [0,255]: {self.background!r}")
        return (r, g, b)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SceneParams:
    rotation: tuple[float, float, float, float]  # unit quaternion (w, x, y, z)
    camera_distance: float
    light_direction: tuple[float, float, float]  # unit vector
    light_intensity: float
    background_color: tuple[int, int, int]
    sample_index: int


def fill_frame_distance(radius: float, fov_vertical: float, fill_fraction: float) -> float:
    """Camera distance at which the bounding sphere spans ``fill_fraction``
    of the frame's vertical extent: d = r / (fill * sin(fov/2)).
    """
    if not 0 < fov_vertical < 180:
        raise InvalidFov(f"fov must be in (0,180), got {fov_vertical}")
    if radius <= 0:
        raise InvalidSpec(f"radius must be positive, got {radius}")
    if not 0 < fill_fraction <= 1:
        raise InvalidSpec(f"fill_fraction must be in (0,1], got {fill_fraction}")
    return radius / (fill_fraction * math.sin(math.radians(fov_vertical) / 2.0))


def random_rotation(gen: np.random.Generator) -> tuple[float, float, float, float]:
    """Uniform unit quaternion from three uniform variates (Shoemake)."""
    u1, u2, u3 = gen.uniform(0.0, 1.0, 3)
    a, b = math.sqrt(1.0 - u1), math.sqrt(u1)
    t2, t3 = 2.0 * math.pi * u2, 2.0 * math.pi * u3
    return (
        a * math.sin(t2),
        a * math.cos(t2),
        b * math.sin(t3),
        b * math.cos(t3),
    )


def _upper_hemisphere_direction(gen: np.random.Generator) -> tuple[float, float, float]:
    """Uniform direction on the y >= 0 hemisphere (light from above)."""
    z = gen.uniform(-1.0, 1.0)
    phi = gen.uniform(0.0, 2.0 * math.pi)
    s = math.sqrt(max(0.0, 1.0 - z * z))
    x, y = s * math.cos(phi), s * math.sin(phi)
    return (x, abs(y), z)


def scene_params(
    seed: int,
    index: int,
    spec: RandomizationSpec,
    object_radius: float,
    attempt: int = 0,
) -> SceneParams:
    """Derive one sample's scene from (seed, index) alone.

    ``attempt`` reserves deterministic re-draw sub-streams for samples
    rejected as not visible; attempt 0 is the primary draw.
    """
    spec.validate()
    if index < 0:
        raise InvalidSpec(f"index must be >= 0, got {index}")
    if object_radius <= 0:
        raise InvalidSpec(f"object_radius must be positive, got {object_radius}")

    tag = f"a{attempt}/" if attempt else ""
    rotation = random_rotation(rng.stream(seed, index, tag + "rotation"))
    if spec.mode == FIXED_SCALE:
        distance = fill_frame_distance(object_radius, spec.fov_vertical, spec.fill_fraction)
    else:
        d0, d1 = spec.distance_range
        distance = float(rng.stream(seed, index, tag + "distance").uniform(d0, d1))
    light_direction = _upper_hemisphere_direction(rng.stream(seed, index, tag + "light_dir"))
    i0, i1 = spec.intensity_range
    intensity = float(rng.stream(seed, index, tag + "light_int").uniform(i0, i1))
    fixed_bg = spec.background_color()
    if fixed_bg is None:
        bg = tuple(int(c) for c in rng.stream(seed, index, tag + "background").integers(0, 255, 3, endpoint=True))
    else:
        bg = fixed_bg
    return SceneParams(
        rotation=rotation,
        camera_distance=distance,
        light_direction=light_direction,
        light_intensity=intensity,
        background_color=bg,
        sample_index=index,
    )
