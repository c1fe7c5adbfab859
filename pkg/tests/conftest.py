import os
from pathlib import Path

import cv2
import numpy as np
import pytest

from hazefuse import ImagePair, NirImage, RgbImage

DATASET_ENV = "HAZEFUSE_DATASET"
SCORED_PAIRS = ["country/0000", "country/0008", "country/0021", "country/0039", "mountain/0000"]


def hazy_scene(h, w, seed=0):
    """Synthetic hazy RGB and near-clear NIR of the same scene.

    Random coloured rectangles plus a faint texture; haze thickens toward
    the top of the frame and scatters blue most, NIR least.
    """
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:h, 0:w]
    clear = np.zeros((h, w, 3)) + rng.uniform(0.2, 0.6, 3)
    for _ in range(40):
        cy, cx = rng.integers(0, h), rng.integers(0, w)
        ry = rng.integers(h // 30 + 2, h // 6 + 3)
        rx = rng.integers(w // 30 + 2, w // 6 + 3)
        clear[(abs(yy - cy) < ry) & (abs(xx - cx) < rx)] = rng.uniform(0.05, 0.9, 3)
    clear += 0.03 * (np.sin(xx / 3.0) * np.cos(yy / 5.0))[..., None]
    clear = np.clip(clear, 0, 1)

    depth = 1.0 - yy / max(h - 1, 1)
    beta = np.array([0.9, 1.2, 1.8])
    t = np.exp(-1.5 * beta * depth[..., None])
    airlight = np.array([0.85, 0.88, 0.95])
    rgb = clear * t + airlight * (1 - t)
    t_nir = np.exp(-0.15 * depth)
    nir = (clear @ np.array([0.35, 0.35, 0.3])) * t_nir + 0.8 * (1 - t_nir)
    return rgb, nir


def quantized_pair(h, w, seed=0):
    """Synthetic pair snapped to 8-bit codes, as if loaded from PNG."""
    rgb, nir = hazy_scene(h, w, seed)
    rgb = np.floor(rgb * 255 + 0.5) / 255
    nir = np.floor(nir * 255 + 0.5) / 255
    return ImagePair(RgbImage.from_array(rgb), NirImage(nir))


def write_png(path, arr, bitdepth=8):
    """Write a float [0, 1] array (H, W) or (H, W, 3) RGB as PNG."""
    maxval = (1 << bitdepth) - 1
    codes = np.floor(np.clip(arr, 0, 1) * maxval + 0.5).astype(np.uint8 if bitdepth == 8 else np.uint16)
    if codes.ndim == 3:
        codes = codes[..., ::-1]
    assert cv2.imwrite(str(path), codes)
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def synthetic_files(tmp_path):
    """Factory writing a synthetic RGB/NIR PNG pair to disk."""

    def make(name="scene", h=96, w=128, seed=0):
        rgb, nir = hazy_scene(h, w, seed)
        return (
            write_png(tmp_path / f"{name}_rgb.png", rgb),
            write_png(tmp_path / f"{name}_nir.png", nir),
        )

    return make


def dataset_root():
    root = os.environ.get(DATASET_ENV)
    return Path(root) if root else None


def dataset_pair_paths(stem):
    """(rgb, nir) paths for e.g. ``country/0008`` in the RGB-NIR Scene dataset."""
    root = dataset_root()
    if root is None:
        return None
    for ext in (".tiff", ".tif", ".png"):
        rgb = root / f"{stem}_rgb{ext}"
        nir = root / f"{stem}_nir{ext}"
        if rgb.exists() and nir.exists():
            return rgb, nir
    return None


@pytest.fixture(scope="session")
def scored_pairs():
    """Paths of the five scored pairs; xfails (reported as FAIL) when the data is absent."""
    found = {stem: dataset_pair_paths(stem) for stem in SCORED_PAIRS}
    missing = [s for s, p in found.items() if p is None]
    if missing:
        pytest.xfail(
            f"RGB-NIR Scene dataset pairs not available ({', '.join(missing)}); "
            f"set {DATASET_ENV} to the dataset root"
        )
    return found


# -- acceptance summary ----------------------------------------------------

_criterion_results = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    n = marker.args[0]
    doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
    prev = _criterion_results.get(n, ("PASS", doc))
    if report.failed or hasattr(report, "wasxfail"):
        _criterion_results[n] = ("FAIL", doc)
    elif report.when == "call" and prev[0] != "FAIL":
        _criterion_results[n] = ("PASS" if report.passed else "SKIP", doc)


def pytest_terminal_summary(terminalreporter):
    if not _criterion_results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criterion_results, key=str):
        status, doc = _criterion_results[n]
        terminalreporter.write_line(f"criterion {n}: {status}  {doc}")
