"""Haze-weighted Haar fusion of a luma plane with its NIR counterpart.

The pyramids are fused bottom-up. At every level the approximation bands
are blended with a pooled copy of the haze map and the detail bands are
merged by choose-max. Below the coarsest level, the running reconstruction
is first histogram-matched to that level's fused approximation and then
used as the approximation band for synthesis.
"""

from __future__ import annotations

import logging
from collections.abc import Iterator
from dataclasses import dataclass

import numpy as np

from .colorspace import (
    HAZE_MAP_MODES,
    HazeWeightMap,
    YCbCrImage,
    compute_haze_map,
    downsample_map,
    rgb_to_ycbcr,
    ycbcr_to_rgb,
)
from .errors import DimensionMismatch, EmptyInput, PyramidMismatch
from .image_io import ImagePair, RgbImage
from .wavelet import CoefficientSet, HaarPyramid, decompose, idwt2_level

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FusionConfig:
    n_levels: int = 2
    haze_map_mode: str = "scale"
    histogram_bins: int = 256

    def __post_init__(self):
        if not isinstance(self.n_levels, (int, np.integer)) or self.n_levels < 1:
            raise ValueError(f"n_levels must be an integer >= 1, got {self.n_levels!r}")
        if self.haze_map_mode not in HAZE_MAP_MODES:
            raise ValueError(
                f"haze_map_mode must be one of {HAZE_MAP_MODES}, got {self.haze_map_mode!r}"
            )
        if not isinstance(self.histogram_bins, (int, np.integer)) or self.histogram_bins < 2:
            raise ValueError(f"histogram_bins must be an integer >= 2, got {self.histogram_bins!r}")

    def as_dict(self) -> dict:
        return {"levels": int(self.n_levels), "haze_map": self.haze_map_mode, "bins": int(self.histogram_bins)}


@dataclass(frozen=True)
class FusedLevelImage:
    z: np.ndarray
    level: int


def _same_shape(*grids: np.ndarray) -> None:
    shapes = [np.shape(g) for g in grids]
    if any(s != shapes[0] for s in shapes[1:]):
        raise DimensionMismatch(f"grid shapes differ: {shapes}")


def convex_blend(base: np.ndarray, target: np.ndarray, weight: np.ndarray) -> np.ndarray:
    """``weight * target + (1 - weight) * base``; weight 0 returns ``base`` exactly."""
    return weight * target + (1.0 - weight) * base


def fuse_approx(la: np.ndarray, na: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Blend approximation bands; ``p`` is the weight given to NIR."""
    _same_shape(la, na, p)
    return convex_blend(la, na, p)


def fuse_detail(lc: np.ndarray, nc: np.ndarray) -> np.ndarray:
    """Choose-max on absolute value; ties keep the luma coefficient."""
    _same_shape(lc, nc)
    return np.where(np.abs(nc) > np.abs(lc), nc, lc)


def _histogram_cdf(x: np.ndarray, bins: int) -> tuple[float, float, np.ndarray, np.ndarray]:
    """Equal-width histogram over the data's own range.

    Returns ``(lo, width, idx, cdf)`` where ``idx`` is each sample's bin and
    ``cdf`` has ``bins + 1`` knots: 0 at ``lo``, then the cumulative mass at
    each upper bin edge.
    """
    lo, hi = float(x.min()), float(x.max())
    width = (hi - lo) / bins
    idx = np.minimum(((x - lo) / width).astype(np.intp), bins - 1)
    counts = np.bincount(idx.ravel(), minlength=bins)
    cdf = np.empty(bins + 1)
    cdf[0] = 0.0
    np.cumsum(counts, out=cdf[1:])
    cdf /= x.size
    return lo, width, idx, cdf


def histogram_match(source: np.ndarray, reference: np.ndarray, bins: int = 256) -> np.ndarray:
    """Remap ``source`` so its value distribution follows ``reference``.

    Both CDFs are built from ``bins`` equal-width bins over each input's
    own range and treated as piecewise linear between bin edges. Each
    source sample is pushed through the source CDF and then through the
    inverse of the reference CDF; flat stretches of the reference CDF (empty
    bins) are skipped, so outputs never land inside a gap in the reference.
    """
    source = np.asarray(source, dtype=np.float64)
    reference = np.asarray(reference, dtype=np.float64)
    if source.size == 0 or reference.size == 0:
        raise EmptyInput("histogram matching needs non-empty inputs")
    if bins < 2:
        raise ValueError(f"bins must be >= 2, got {bins}")

    r_lo, r_hi = float(reference.min()), float(reference.max())
    if r_lo == r_hi:
        return np.full(source.shape, r_lo)

    if source.min() == source.max():
        level = np.ones(source.shape)
    else:
        s_lo, s_width, s_idx, s_cdf = _histogram_cdf(source, bins)
        frac = (source - (s_lo + s_idx * s_width)) / s_width
        level = s_cdf[s_idx] + np.clip(frac, 0.0, 1.0) * (s_cdf[s_idx + 1] - s_cdf[s_idx])

    _, r_width, _, r_cdf = _histogram_cdf(reference, bins)
    edges = r_lo + r_width * np.arange(bins + 1)
    edges[-1] = r_hi

    # first knot strictly above the level; interpolate from the knot before it
    j = np.searchsorted(r_cdf, level, side="right")
    top = j > bins
    j = np.clip(j, 1, bins)
    c0, c1 = r_cdf[j - 1], r_cdf[j]
    t = np.divide(level - c0, c1 - c0, out=np.zeros_like(level), where=c1 > c0)
    out = edges[j - 1] + t * (edges[j] - edges[j - 1])
    out[top] = r_hi
    return np.clip(out, r_lo, r_hi)


def _check_pyramids(luma_pyr: HaarPyramid, nir_pyr: HaarPyramid) -> None:
    if luma_pyr.n_levels != nir_pyr.n_levels:
        raise PyramidMismatch(f"level counts differ: {luma_pyr.n_levels} vs {nir_pyr.n_levels}")
    if luma_pyr.original_dims != nir_pyr.original_dims:
        raise PyramidMismatch(
            f"pyramid dims differ: {luma_pyr.original_dims} vs {nir_pyr.original_dims}"
        )
    for k, (lc, nc) in enumerate(zip(luma_pyr.levels, nir_pyr.levels), start=1):
        if lc.shape != nc.shape:
            raise PyramidMismatch(f"level {k}: grid shapes differ {lc.shape} vs {nc.shape}")


def fuse_levels(
    luma_pyr: HaarPyramid,
    nir_pyr: HaarPyramid,
    hmap: HazeWeightMap,
    cfg: FusionConfig,
) -> Iterator[FusedLevelImage]:
    """Yield the running reconstruction after each level, coarsest first."""
    _check_pyramids(luma_pyr, nir_pyr)
    if hmap.shape != luma_pyr.original_dims[0]:
        raise DimensionMismatch(
            f"haze map {hmap.shape} does not match image {luma_pyr.original_dims[0]}"
        )
    n = luma_pyr.n_levels
    z = None
    for k in range(n, 0, -1):
        lc, nc = luma_pyr.levels[k - 1], nir_pyr.levels[k - 1]
        p_k = downsample_map(hmap, k, shape=lc.shape).p
        approx = fuse_approx(lc.a, nc.a, p_k)
        if z is not None:
            approx = histogram_match(z, approx, cfg.histogram_bins)
        fused = CoefficientSet(
            approx,
            fuse_detail(lc.h, nc.h),
            fuse_detail(lc.v, nc.v),
            fuse_detail(lc.d, nc.d),
        )
        z = idwt2_level(fused, luma_pyr.original_dims[k - 1])
        yield FusedLevelImage(z, k)


def fuse_pyramids(
    luma_pyr: HaarPyramid,
    nir_pyr: HaarPyramid,
    hmap: HazeWeightMap,
    cfg: FusionConfig = FusionConfig(),
) -> np.ndarray:
    """Fuse two pyramids and return the full-resolution reconstruction."""
    result = None
    for result in fuse_levels(luma_pyr, nir_pyr, hmap, cfg):
        pass
    return result.z


def dehaze_ycbcr(
    pair: ImagePair,
    cfg: FusionConfig = FusionConfig(),
    haze_map: HazeWeightMap | None = None,
) -> YCbCrImage:
    """Run the fusion pipeline and return the unclamped luma/chroma result.

    ``haze_map`` overrides the map normally derived from the blue channel.
    The chroma planes are passed through untouched.
    """
    ycc = rgb_to_ycbcr(pair.rgb)
    hmap = haze_map if haze_map is not None else compute_haze_map(pair.rgb, cfg.haze_map_mode)
    if hmap.shape != ycc.shape:
        raise DimensionMismatch(f"haze map {hmap.shape} does not match image {ycc.shape}")

    luma_pyr = decompose(ycc.y, cfg.n_levels)
    nir_pyr = decompose(pair.nir.plane, cfg.n_levels)
    z = fuse_pyramids(luma_pyr, nir_pyr, hmap, cfg)
    z = histogram_match(z, ycc.y, cfg.histogram_bins)
    y_out = convex_blend(ycc.y, z, hmap.p)
    log.debug("fused luma range [%.4f, %.4f]", y_out.min(), y_out.max())
    return YCbCrImage(y_out, ycc.cb, ycc.cr)


def dehaze(
    pair: ImagePair,
    cfg: FusionConfig = FusionConfig(),
    haze_map: HazeWeightMap | None = None,
) -> RgbImage:
    """Remove haze from a registered RGB/NIR pair; output clamped to [0, 1]."""
    return ycbcr_to_rgb(dehaze_ycbcr(pair, cfg, haze_map), clamp=True)
