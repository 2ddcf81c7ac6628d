"""Chroma-key cutout pipeline: HSV thresholding, morphological cleanup,
scale-normalized transparent cutouts, and runtime background substitution.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import cv2
import numpy as np
from scipy import ndimage

from .errors import EmptyMask, InvalidSpec
from .render import mask_bbox

__all__ = [
    "HsvThresholds",
    "MorphKernel",
    "rgb_to_hsv",
    "hsv_to_rgb",
    "chroma_mask",
    "morph_open",
    "morph_close",
    "cutout_normalize",
    "composite",
]


@dataclass(frozen=True)
class HsvThresholds:
    """A pixel is keyed out as backdrop when its hue falls in any range
    (degrees, wraparound allowed as lo > hi) and saturation/value clear
    the minimums.  Defaults key a red backdrop.
    """

    hue_ranges: tuple[tuple[float, float], ...] = ((348.0, 360.0), (0.0, 12.0))
    sat_min: float = 0.45
    val_min: float = 0.20

    def validate(self) -> None:
        if not self.hue_ranges:
            raise InvalidSpec("at least one hue range required")
        for lo, hi in self.hue_ranges:
            if not (0 <= lo <= 360 and 0 <= hi <= 360):
                raise InvalidSpec(f"hue range outside [0,360]: ({lo}, {hi})")
        if not 0 <= self.sat_min <= 1 or not 0 <= self.val_min <= 1:
            raise InvalidSpec("sat_min/val_min must be in [0,1]")

    def to_dict(self) -> dict:
        return {"hue_ranges": [list(r) for r in self.hue_ranges],
                "sat_min": self.sat_min, "val_min": self.val_min}


@dataclass(frozen=True)
class MorphKernel:
    shape: tuple[tuple[int, ...], ...] = ((1, 1, 1), (1, 1, 1), (1, 1, 1))
    iterations_open: int = 1
    iterations_close: int = 1

    def structure(self) -> np.ndarray:
        arr = np.asarray(self.shape, dtype=bool)
        if arr.size == 0 or not arr[arr.shape[0] // 2, arr.shape[1] // 2]:
            raise InvalidSpec("kernel must be non-empty and contain its center")
        return arr

    def to_dict(self) -> dict:
        return {"shape": [list(r) for r in self.shape],
                "iterations_open": self.iterations_open,
                "iterations_close": self.iterations_close}


def rgb_to_hsv(rgb) -> np.ndarray:
    """Hexcone RGB->HSV. Accepts one pixel or an (..., 3) array in
    [0,255]; returns hue in degrees [0,360), saturation and value in [0,1].
    Achromatic pixels get hue 0 by convention.
    """
    arr = np.asarray(rgb, dtype=np.float64) / 255.0
    r, g, b = arr[..., 0], arr[..., 1], arr[..., 2]
    v = np.maximum(np.maximum(r, g), b)
    c = v - np.minimum(np.minimum(r, g), b)
    with np.errstate(divide="ignore", invalid="ignore"):
        hue = np.where(
            c == 0, 0.0,
            np.where(v == r, (g - b) / c,
                     np.where(v == g, (b - r) / c + 2.0, (r - g) / c + 4.0)),
        )
    hue = (hue * 60.0) % 360.0
    sat = np.where(v == 0, 0.0, c / np.where(v == 0, 1.0, v))
    return np.stack([hue, sat, v], axis=-1)


def hsv_to_rgb(hsv) -> np.ndarray:
    """Inverse hexcone conversion back to [0,255] floats."""
    arr = np.asarray(hsv, dtype=np.float64)
    h, s, v = arr[..., 0] / 60.0, arr[..., 1], arr[..., 2]
    c = v * s
    x = c * (1.0 - np.abs(h % 2.0 - 1.0))
    m = v - c
    k = np.floor(h).astype(int) % 6
    shapes = [(c, x, 0), (x, c, 0), (0, c, x), (0, x, c), (x, 0, c), (c, 0, x)]
    r = np.choose(k, [np.broadcast_to(t[0], h.shape) for t in shapes])
    g = np.choose(k, [np.broadcast_to(t[1], h.shape) for t in shapes])
    b = np.choose(k, [np.broadcast_to(t[2], h.shape) for t in shapes])
    return np.stack([r + m, g + m, b + m], axis=-1) * 255.0


def chroma_mask(image: np.ndarray, thresholds: HsvThresholds) -> np.ndarray:
    """Foreground mask: marks pixels NOT matching the backdrop key."""
    thresholds.validate()
    hsv = rgb_to_hsv(image[..., :3])
    hue, sat, val = hsv[..., 0], hsv[..., 1], hsv[..., 2]
    in_hue = np.zeros(hue.shape, dtype=bool)
    for lo, hi in thresholds.hue_ranges:
        if lo <= hi:
            in_hue |= (hue >= lo) & (hue <= hi)
        else:  # wraparound interval
            in_hue |= (hue >= lo) | (hue <= hi)
    background = in_hue & (sat >= thresholds.sat_min) & (val >= thresholds.val_min)
    return np.where(background, 0, 255).astype(np.uint8)


def _binary(mask: np.ndarray) -> np.ndarray:
    return np.asarray(mask) > 0


def morph_open(mask: np.ndarray, kernel: MorphKernel) -> np.ndarray:
    """Erosion then dilation; pixels outside the frame count as unset."""
    out = _binary(mask)
    structure = kernel.structure()
    for _ in range(kernel.iterations_open):
        out = ndimage.binary_dilation(ndimage.binary_erosion(out, structure), structure)
    return np.where(out, 255, 0).astype(np.uint8)


def morph_close(mask: np.ndarray, kernel: MorphKernel) -> np.ndarray:
    """Dilation then erosion; pixels outside the frame count as unset."""
    out = _binary(mask)
    structure = kernel.structure()
    for _ in range(kernel.iterations_close):
        out = ndimage.binary_erosion(ndimage.binary_dilation(out, structure), structure)
    return np.where(out, 255, 0).astype(np.uint8)


def cutout_normalize(
    image: np.ndarray, mask: np.ndarray, out_size: int, fill_fraction: float = 0.95
) -> np.ndarray:
    """Crop to the tight mask bbox, rescale so the larger side spans
    fill_fraction * out_size, and center on a transparent square canvas.
    Alpha stays binary: resampled then re-thresholded at 0.5.
    """
    if not 0 < fill_fraction <= 1:
        raise InvalidSpec(f"fill_fraction must be in (0,1], got {fill_fraction}")
    mask_b = _binary(mask)
    if not mask_b.any():
        raise EmptyMask("cutout requires a non-empty mask")
    x0, y0, x1, y1 = mask_bbox(np.where(mask_b, 255, 0).astype(np.uint8))
    crop = image[y0 : y1 + 1, x0 : x1 + 1, :3].astype(np.float64)
    alpha = mask_b[y0 : y1 + 1, x0 : x1 + 1].astype(np.float64)

    h, w = crop.shape[:2]
    target = max(1, round(fill_fraction * out_size))
    scale = target / max(h, w)
    new_w = max(1, round(w * scale))
    new_h = max(1, round(h * scale))
    crop_r = cv2.resize(crop, (new_w, new_h), interpolation=cv2.INTER_LINEAR)
    alpha_r = cv2.resize(alpha, (new_w, new_h), interpolation=cv2.INTER_LINEAR) >= 0.5

    canvas = np.zeros((out_size, out_size, 4), dtype=np.uint8)
    oy = (out_size - new_h) // 2
    ox = (out_size - new_w) // 2
    region = canvas[oy : oy + new_h, ox : ox + new_w]
    region[..., :3] = np.clip(np.round(crop_r.reshape(new_h, new_w, 3)), 0, 255).astype(np.uint8)
    region[..., 3] = np.where(alpha_r, 255, 0).astype(np.uint8)
    return canvas


def composite(rgba: np.ndarray, background_color) -> np.ndarray:
    """Replace transparent pixels by a solid color (alpha is binary)."""
    rgb = rgba[..., :3]
    opaque = rgba[..., 3:4] >= 128
    bg = np.asarray(background_color, dtype=np.uint8).reshape(1, 1, 3)
    return np.where(opaque, rgb, bg).astype(np.uint8)
