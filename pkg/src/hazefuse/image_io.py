"""Reading and writing registered RGB/NIR image pairs.

Every plane handed to the rest of the package is a 2-D ``float64`` array
with samples in [0, 1]. Decoding goes through OpenCV, which covers 8- and
16-bit PNG and TIFF, grayscale or colour.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import cv2
import numpy as np

from .errors import DecodeError, DimensionMismatch, ImageWriteError, UnsupportedFormat

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"
_TIFF_MAGIC = (b"II*\x00", b"MM\x00*")
_MAXVAL = {np.dtype(np.uint8): 255.0, np.dtype(np.uint16): 65535.0}


def _check_plane(plane: np.ndarray, name: str) -> np.ndarray:
    plane = np.asarray(plane, dtype=np.float64)
    if plane.ndim != 2 or plane.size == 0:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {plane.shape}")
    return plane


@dataclass(frozen=True)
class RgbImage:
    r: np.ndarray
    g: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        planes = [_check_plane(p, n) for p, n in zip((self.r, self.g, self.b), "rgb")]
        if not (planes[0].shape == planes[1].shape == planes[2].shape):
            raise DimensionMismatch(
                f"colour planes differ in shape: {[p.shape for p in planes]}"
            )
        for name, p in zip("rgb", planes):
            object.__setattr__(self, name, p)

    @property
    def height(self) -> int:
        return self.r.shape[0]

    @property
    def width(self) -> int:
        return self.r.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.r.shape

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "RgbImage":
        """Build from an ``(H, W, 3)`` array in RGB channel order."""
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError(f"expected an (H, W, 3) array, got {arr.shape}")
        return cls(arr[..., 0], arr[..., 1], arr[..., 2])

    def to_array(self) -> np.ndarray:
        return np.stack([self.r, self.g, self.b], axis=-1)


@dataclass(frozen=True)
class NirImage:
    plane: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "plane", _check_plane(self.plane, "plane"))

    @property
    def height(self) -> int:
        return self.plane.shape[0]

    @property
    def width(self) -> int:
        return self.plane.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.plane.shape


@dataclass(frozen=True)
class ImagePair:
    rgb: RgbImage
    nir: NirImage

    def __post_init__(self):
        if self.rgb.shape != self.nir.shape:
            raise DimensionMismatch(
                "RGB and NIR images are not registered: "
                f"rgb {self.rgb.width}x{self.rgb.height}, "
                f"nir {self.nir.width}x{self.nir.height}"
            )


def _read(path: str | os.PathLike) -> np.ndarray:
    """Decode one file to a float array in [0, 1], shape (H, W) or (H, W, 3) RGB."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            head = fh.read(8)
    except OSError as exc:
        raise DecodeError(f"cannot read {path}: {exc}") from exc
    if not (head.startswith(_PNG_MAGIC) or head[:4] in _TIFF_MAGIC):
        raise UnsupportedFormat(f"{path}: only PNG and TIFF inputs are supported")

    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise DecodeError(f"cannot decode {path}")
    maxval = _MAXVAL.get(raw.dtype)
    if maxval is None:
        raise UnsupportedFormat(f"{path}: unsupported sample type {raw.dtype}")

    if raw.ndim == 3:
        if raw.shape[2] == 4:
            raw = raw[..., :3]
        elif raw.shape[2] == 1:
            raw = raw[..., 0]
        elif raw.shape[2] != 3:
            raise UnsupportedFormat(f"{path}: {raw.shape[2]} channels")
        if raw.ndim == 3:
            raw = raw[..., ::-1]  # OpenCV decodes to BGR
    return raw.astype(np.float64) / maxval


def load_rgb(path: str | os.PathLike) -> RgbImage:
    arr = _read(path)
    if arr.ndim == 2:
        return RgbImage(arr, arr, arr)
    return RgbImage.from_array(arr)


def load_nir(path: str | os.PathLike) -> NirImage:
    arr = _read(path)
    if arr.ndim == 3:
        # NIR files saved as colour hold replicated channels
        arr = arr.mean(axis=2)
    return NirImage(arr)


def load_pair(rgb_path: str | os.PathLike, nir_path: str | os.PathLike) -> ImagePair:
    """Load a registered RGB/NIR pair.

    Samples are scaled by ``1 / (2**bitdepth - 1)``. A colour NIR file is
    reduced to one plane by averaging its channels.

    Raises
    ------
    DecodeError
        A file is missing or cannot be decoded.
    UnsupportedFormat
        Not a PNG/TIFF, or not 8/16-bit.
    DimensionMismatch
        The two images differ in size.
    """
    rgb = load_rgb(rgb_path)
    nir = load_nir(nir_path)
    try:
        return ImagePair(rgb, nir)
    except DimensionMismatch as exc:
        raise DimensionMismatch(f"{rgb_path} / {nir_path}: {exc}") from None


def quantize(samples: np.ndarray, bitdepth: int = 8) -> np.ndarray:
    """Clamp to [0, 1] and round half up to integer codes."""
    if bitdepth not in (8, 16):
        raise ValueError(f"bitdepth must be 8 or 16, got {bitdepth}")
    maxval = (1 << bitdepth) - 1
    clamped = np.clip(np.asarray(samples, dtype=np.float64), 0.0, 1.0)
    codes = np.floor(clamped * maxval + 0.5)
    return codes.astype(np.uint8 if bitdepth == 8 else np.uint16)


def save_image(img: RgbImage, path: str | os.PathLike, bitdepth: int = 8) -> None:
    """Write ``img`` as a PNG, whatever the extension of ``path``."""
    codes = quantize(img.to_array(), bitdepth)
    ok, buf = cv2.imencode(".png", np.ascontiguousarray(codes[..., ::-1]))
    if not ok:
        raise ImageWriteError(f"PNG encoding failed for {path}")
    try:
        Path(path).write_bytes(buf.tobytes())
    except OSError as exc:
        raise ImageWriteError(f"cannot write {path}: {exc}") from exc
