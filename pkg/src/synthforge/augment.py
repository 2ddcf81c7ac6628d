"""Training-time augmentation and zoom evaluation probes.

One augmented sample is a fixed-order chain rotation -> crop -> zoom ->
brightness, with every parameter drawn deterministically from
(seed, index).  Output dimensions always equal input dimensions.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import cv2
import numpy as np

from . import rng
from .errors import InvalidSpec

__all__ = ["AugmentSpec", "augment", "rotate", "crop_sides", "zoom_probe", "brightness"]


@dataclass(frozen=True)
class AugmentSpec:
    rotation_max: float = 360.0
    crop_max_frac: float = 0.30
    brightness_range: tuple[float, float] = (0.5, 1.2)
    zoom_range: tuple[float, float] = (1.0, 1.5)

    def validate(self) -> None:
        if not 0 <= self.crop_max_frac < 0.5:
            raise InvalidSpec(f"crop_max_frac must be in [0,0.5), got {self.crop_max_frac}")
        if not 0 <= self.rotation_max <= 360:
            raise InvalidSpec(f"rotation_max must be in [0,360], got {self.rotation_max}")
        for name, (lo, hi) in (("brightness_range", self.brightness_range),
                               ("zoom_range", self.zoom_range)):
            if not 0 < lo <= hi:
                raise InvalidSpec(f"{name} must satisfy 0 < lo <= hi, got ({lo}, {hi})")

    def to_dict(self) -> dict:
        return asdict(self)


def _border(image: np.ndarray):
    # RGBA inputs pad with transparent pixels, RGB with edge replication
    if image.ndim == 3 and image.shape[2] == 4:
        return cv2.BORDER_CONSTANT, (0, 0, 0, 0)
    return cv2.BORDER_REPLICATE, None


def rotate(image: np.ndarray, angle: float) -> np.ndarray:
    """Rotate counter-clockwise about the image center.

    Right angles take an exact index-permutation path; everything else is
    bilinear with edge-replicated (or transparent, for RGBA) fill.
    """
    angle = angle % 360.0
    if angle == 0.0:
        return image.copy()
    if angle % 90.0 == 0.0 and image.shape[0] == image.shape[1]:
        return np.ascontiguousarray(np.rot90(image, int(angle // 90)))
    h, w = image.shape[:2]
    matrix = cv2.getRotationMatrix2D((w / 2.0 - 0.5, h / 2.0 - 0.5), angle, 1.0)
    mode, value = _border(image)
    return cv2.warpAffine(
        image, matrix, (w, h), flags=cv2.INTER_LINEAR, borderMode=mode, borderValue=value
    )


def crop_sides(image: np.ndarray, fracs) -> np.ndarray:
    """Remove (top, bottom, left, right) fractions, resize back."""
    top, bottom, left, right = fracs
    for f in fracs:
        if not 0 <= f < 0.5:
            raise InvalidSpec(f"crop fraction must be in [0,0.5), got {f}")
    h, w = image.shape[:2]
    y0, y1 = round(h * top), h - round(h * bottom)
    x0, x1 = round(w * left), w - round(w * right)
    inner = image[y0:y1, x0:x1]
    if inner.shape[:2] == (h, w):
        return image.copy()
    return cv2.resize(inner, (w, h), interpolation=cv2.INTER_LINEAR)


def zoom_probe(image: np.ndarray, factor: float) -> np.ndarray:
    """Scale probe: factor > 1 center-crops 1/factor of each dimension and
    upscales; factor < 1 shrinks content onto an edge-replicated canvas.
    """
    if factor <= 0:
        raise InvalidSpec(f"zoom factor must be positive, got {factor}")
    h, w = image.shape[:2]
    if factor == 1.0:
        return image.copy()
    if factor > 1.0:
        ch, cw = int(h / factor), int(w / factor)
        y0, x0 = (h - ch) // 2, (w - cw) // 2
        inner = image[y0 : y0 + ch, x0 : x0 + cw]
        return cv2.resize(inner, (w, h), interpolation=cv2.INTER_LINEAR)
    nh, nw = max(1, round(h * factor)), max(1, round(w * factor))
    small = cv2.resize(image, (nw, nh), interpolation=cv2.INTER_LINEAR)
    oy, ox = (h - nh) // 2, (w - nw) // 2
    pads = [(oy, h - nh - oy), (ox, w - nw - ox)] + [(0, 0)] * (image.ndim - 2)
    if image.ndim == 3 and image.shape[2] == 4:
        return np.pad(small, pads, mode="constant", constant_values=0)
    return np.pad(small, pads, mode="edge")


def brightness(image: np.ndarray, factor: float) -> np.ndarray:
    """Multiplicative brightness with clamping at 255 (alpha untouched)."""
    out = image.astype(np.float64)
    out[..., :3] = np.clip(np.round(out[..., :3] * factor), 0, 255)
    return out.astype(np.uint8)


def draw_params(spec: AugmentSpec, seed: int, index: int) -> dict:
    """Deterministic parameter draw for one sample."""
    spec.validate()
    gen = rng.stream(seed, index, "augment")
    return {
        "angle": float(gen.uniform(0.0, spec.rotation_max)),
        "crops": tuple(float(f) for f in gen.uniform(0.0, spec.crop_max_frac, 4)),
        "zoom": float(gen.uniform(*spec.zoom_range)),
        "brightness": float(gen.uniform(*spec.brightness_range)),
    }


def augment(image: np.ndarray, spec: AugmentSpec, seed: int, index: int) -> np.ndarray:
    """Apply the full chain with parameters drawn from (seed, index)."""
    if image.shape[0] < 16 or image.shape[1] < 16:
        raise InvalidSpec(f"image must be at least 16x16, got {image.shape[:2]}")
    p = draw_params(spec, seed, index)
    out = image
    if spec.rotation_max > 0:
        out = rotate(out, p["angle"])
    if spec.crop_max_frac > 0:
        out = crop_sides(out, p["crops"])
    if spec.zoom_range != (1.0, 1.0):
        out = zoom_probe(out, p["zoom"])
    if spec.brightness_range != (1.0, 1.0):
        out = brightness(out, p["brightness"])
    if out is image:
        out = image.copy()
    return out
