"""Luma/chroma split and the blue-channel haze-weight map."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import DimensionMismatch
from .image_io import RgbImage

# full-range BT.601
KR, KG, KB = 0.299, 0.587, 0.114
CB_SCALE = 0.564
CR_SCALE = 0.713

HazeMapMode = Literal["scale", "minmax"]
HAZE_MAP_MODES = ("scale", "minmax")


@dataclass(frozen=True)
class YCbCrImage:
    y: np.ndarray
    cb: np.ndarray
    cr: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.y.shape


@dataclass(frozen=True)
class HazeWeightMap:
    p: np.ndarray
    mode: HazeMapMode = "scale"

    @property
    def shape(self) -> tuple[int, int]:
        return self.p.shape


def rgb_to_ycbcr(img: RgbImage) -> YCbCrImage:
    y = KR * img.r + KG * img.g + KB * img.b
    cb = CB_SCALE * (img.b - y) + 0.5
    cr = CR_SCALE * (img.r - y) + 0.5
    return YCbCrImage(y, cb, cr)


def ycbcr_to_rgb(img: YCbCrImage, clamp: bool = True) -> RgbImage:
    """Algebraic inverse of :func:`rgb_to_ycbcr`, clamped to [0, 1] by default."""
    r = img.y + (img.cr - 0.5) / CR_SCALE
    b = img.y + (img.cb - 0.5) / CB_SCALE
    g = (img.y - KR * r - KB * b) / KG
    if clamp:
        r, g, b = (np.clip(c, 0.0, 1.0) for c in (r, g, b))
    return RgbImage(r, g, b)


def compute_haze_map(img: RgbImage, mode: HazeMapMode = "scale") -> HazeWeightMap:
    """Per-pixel haze weight from the blue channel.

    ``scale`` uses the blue samples as they are (already in [0, 1]);
    ``minmax`` stretches them to span [0, 1], falling back to 0.5 on a
    constant plane.
    """
    b = img.b
    if mode == "scale":
        p = np.clip(b, 0.0, 1.0)
    elif mode == "minmax":
        lo, hi = b.min(), b.max()
        if hi == lo:
            p = np.full_like(b, 0.5)
        else:
            p = np.clip((b - lo) / (hi - lo), 0.0, 1.0)
    else:
        raise ValueError(f"unknown haze map mode {mode!r}; expected one of {HAZE_MAP_MODES}")
    return HazeWeightMap(p, mode)


def pool2(grid: np.ndarray) -> np.ndarray:
    """One 2x2 box-average step, replicate-padding odd sizes first."""
    h, w = grid.shape
    if h % 2 or w % 2:
        grid = np.pad(grid, ((0, h % 2), (0, w % 2)), mode="edge")
    return 0.25 * (grid[0::2, 0::2] + grid[0::2, 1::2] + grid[1::2, 0::2] + grid[1::2, 1::2])


def downsample_map(
    hmap: HazeWeightMap, level: int, shape: tuple[int, int] | None = None
) -> HazeWeightMap:
    """Shrink the haze map to the coefficient grid size of ``level``.

    If ``shape`` is given, the pooled map must come out at exactly that size.
    """
    if level < 1:
        raise ValueError(f"level must be >= 1, got {level}")
    p = hmap.p
    for _ in range(level):
        p = pool2(p)
    # rounding in the pooling sum can stray by an ulp past the input range
    p = np.clip(p, hmap.p.min(), hmap.p.max())
    if shape is not None and p.shape != tuple(shape):
        raise DimensionMismatch(
            f"haze map {hmap.shape} pools to {p.shape} at level {level}, expected {tuple(shape)}"
        )
    return HazeWeightMap(p, hmap.mode)
