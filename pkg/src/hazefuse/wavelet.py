"""Orthonormal 2-D Haar transform and multi-level pyramids.

For each 2x2 block ``[[p, q], [r, s]]`` a level produces::

    a = (p + q + r + s) / 2     approximation
    h = (p + q - r - s) / 2     horizontal detail (column high-pass)
    v = (p - q + r - s) / 2     vertical detail (row high-pass)
    d = (p - q - r + s) / 2     diagonal detail

Odd-sized planes are replicate-padded to even size before analysis and
cropped back after synthesis, so every plane round-trips exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CorruptPyramid, DimensionMismatch, EmptyInput, TooManyLevels

Shape = tuple[int, int]


@dataclass(frozen=True)
class CoefficientSet:
    a: np.ndarray
    h: np.ndarray
    v: np.ndarray
    d: np.ndarray

    @property
    def shape(self) -> Shape:
        return self.a.shape

    def details(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.h, self.v, self.d


@dataclass
class HaarPyramid:
    """Coefficient sets from level 1 (finest) to level N (coarsest).

    ``original_dims[k]`` is the unpadded size of the plane that was
    transformed to produce ``levels[k]``.
    """

    levels: list[CoefficientSet]
    original_dims: list[Shape] = field(default_factory=list)

    @property
    def n_levels(self) -> int:
        return len(self.levels)

    def validate(self) -> None:
        if not self.levels:
            raise CorruptPyramid("pyramid has no levels")
        if len(self.original_dims) != len(self.levels):
            raise CorruptPyramid(
                f"{len(self.levels)} levels but {len(self.original_dims)} recorded dims"
            )
        for k, (cs, dims) in enumerate(zip(self.levels, self.original_dims)):
            shapes = {g.shape for g in (cs.a, cs.h, cs.v, cs.d)}
            if len(shapes) != 1:
                raise CorruptPyramid(f"level {k + 1}: sub-band shapes differ {sorted(shapes)}")
            if cs.shape != _half(dims):
                raise CorruptPyramid(
                    f"level {k + 1}: grids {cs.shape} do not match source dims {dims}"
                )
            if k + 1 < len(self.levels) and self.original_dims[k + 1] != cs.shape:
                raise CorruptPyramid(
                    f"level {k + 2} source dims {self.original_dims[k + 1]} "
                    f"!= level {k + 1} grid {cs.shape}"
                )


def _half(dims: Shape) -> Shape:
    return ((dims[0] + 1) // 2, (dims[1] + 1) // 2)


def max_levels(dims: Shape) -> int:
    """Deepest pyramid accepted for a plane of size ``dims``.

    Replicate padding keeps every level well defined, so the limit only
    stops runaway requests: two levels past the one that first reaches a
    1x1 approximation.
    """
    return max(0, math.ceil(math.log2(max(dims)))) + 2


def dwt2_level(plane: np.ndarray) -> CoefficientSet:
    x = np.asarray(plane, dtype=np.float64)
    if x.ndim != 2 or x.size == 0:
        raise EmptyInput(f"need a non-empty 2-D plane, got shape {x.shape}")
    h, w = x.shape
    if h % 2 or w % 2:
        x = np.pad(x, ((0, h % 2), (0, w % 2)), mode="edge")
    p = x[0::2, 0::2]
    q = x[0::2, 1::2]
    r = x[1::2, 0::2]
    s = x[1::2, 1::2]
    top_sum, top_diff = p + q, p - q
    bot_sum, bot_diff = r + s, r - s
    return CoefficientSet(
        a=0.5 * (top_sum + bot_sum),
        h=0.5 * (top_sum - bot_sum),
        v=0.5 * (top_diff + bot_diff),
        d=0.5 * (top_diff - bot_diff),
    )


def idwt2_level(coeffs: CoefficientSet, target_dims: Shape | None = None) -> np.ndarray:
    """Invert :func:`dwt2_level`, cropping to ``target_dims`` if given."""
    a, h, v, d = (np.asarray(g, dtype=np.float64) for g in (coeffs.a, coeffs.h, coeffs.v, coeffs.d))
    if not (a.shape == h.shape == v.shape == d.shape):
        raise DimensionMismatch(
            f"sub-band shapes differ: a{a.shape} h{h.shape} v{v.shape} d{d.shape}"
        )
    rows, cols = a.shape
    if target_dims is None:
        target_dims = (2 * rows, 2 * cols)
    th, tw = target_dims
    if not (2 * rows - 1 <= th <= 2 * rows and 2 * cols - 1 <= tw <= 2 * cols):
        raise DimensionMismatch(f"target {tuple(target_dims)} incompatible with grids {a.shape}")

    out = np.empty((2 * rows, 2 * cols))
    a_plus_h, a_minus_h = a + h, a - h
    v_plus_d, v_minus_d = v + d, v - d
    out[0::2, 0::2] = 0.5 * (a_plus_h + v_plus_d)
    out[0::2, 1::2] = 0.5 * (a_plus_h - v_plus_d)
    out[1::2, 0::2] = 0.5 * (a_minus_h + v_minus_d)
    out[1::2, 1::2] = 0.5 * (a_minus_h - v_minus_d)
    return out[:th, :tw]


def decompose(plane: np.ndarray, n_levels: int) -> HaarPyramid:
    x = np.asarray(plane, dtype=np.float64)
    if x.ndim != 2 or x.size == 0:
        raise EmptyInput(f"need a non-empty 2-D plane, got shape {x.shape}")
    if n_levels < 1:
        raise ValueError(f"n_levels must be >= 1, got {n_levels}")
    limit = max_levels(x.shape)
    if n_levels > limit:
        raise TooManyLevels(f"{n_levels} levels requested for a {x.shape} plane (max {limit})")

    levels, dims = [], []
    for _ in range(n_levels):
        dims.append(x.shape)
        cs = dwt2_level(x)
        levels.append(cs)
        x = cs.a
    return HaarPyramid(levels, dims)


def reconstruct(pyr: HaarPyramid) -> np.ndarray:
    pyr.validate()
    z = pyr.levels[-1].a
    for cs, dims in zip(reversed(pyr.levels), reversed(pyr.original_dims)):
        z = idwt2_level(CoefficientSet(z, cs.h, cs.v, cs.d), dims)
    return z
