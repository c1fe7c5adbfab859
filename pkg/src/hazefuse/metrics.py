"""Image quality measures for dehazing results.

Reference-free measures (entropy, standard deviation, spatial frequency)
take one plane. Pairwise measures take the original first and the
restored/fused plane second. All planes are expected in [0, 1].
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy import ndimage

from .errors import DegenerateInput, DimensionMismatch, EmptyInput, NoVisibleEdges, TooSmall

#: Sobel gradient magnitude (per pixel, [0, 1] range) above which an edge is visible.
VISIBILITY_THRESHOLD = 0.05
RATIO_EPS = 1e-12
SSIM_WINDOW = 8
SSIM_K1, SSIM_K2 = 0.01, 0.03


@dataclass
class MetricsReport:
    entropy: float
    std_dev: float
    ssim: float
    cc: float
    sf: float
    e: float
    sigma_sat: float
    r_bar: float

    FIELDS = ("entropy", "std_dev", "ssim", "cc", "sf", "e", "sigma_sat", "r_bar")

    def as_dict(self) -> dict[str, float]:
        return {k: float(v) for k, v in asdict(self).items()}


def _plane(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        raise EmptyInput("metric needs a non-empty image")
    return x


def _pair(i, f) -> tuple[np.ndarray, np.ndarray]:
    i, f = _plane(i), _plane(f)
    if i.shape != f.shape:
        raise DimensionMismatch(f"image shapes differ: {i.shape} vs {f.shape}")
    return i, f


def entropy(img: np.ndarray) -> float:
    """Shannon entropy in bits of a 256-bin histogram over [0, 1]."""
    x = _plane(img)
    idx = np.clip((x * 256).astype(np.intp), 0, 255)
    counts = np.bincount(idx.ravel(), minlength=256)
    prob = counts[counts > 0] / x.size
    return float(-(prob * np.log2(prob)).sum()) + 0.0


def std_dev(img: np.ndarray) -> float:
    """Population standard deviation."""
    x = _plane(img)
    return float(np.std(x - x.flat[0]))


def correlation_coefficient(i: np.ndarray, f: np.ndarray) -> float:
    i, f = _pair(i, f)
    di = i - i.mean()
    df = f - f.mean()
    denom = np.sqrt(np.sum(di * di)) * np.sqrt(np.sum(df * df))
    if not denom > 0:
        raise DegenerateInput("correlation coefficient is undefined for a constant image")
    cc = np.sum(di * df) / denom
    return float(np.clip(cc, -1.0, 1.0))


def spatial_frequency(f: np.ndarray) -> float:
    """sqrt(RF**2 + CF**2); both squared sums are divided by the pixel count."""
    f = _plane(f)
    if f.ndim != 2 or min(f.shape) < 2:
        raise TooSmall(f"spatial frequency needs at least 2x2, got {f.shape}")
    mn = f.size
    rf2 = np.sum(np.diff(f, axis=1) ** 2) / mn
    cf2 = np.sum(np.diff(f, axis=0) ** 2) / mn
    return float(np.sqrt(rf2 + cf2))


def _window_sums(x: np.ndarray, k: int) -> np.ndarray:
    """Sums over every k x k window that fits inside ``x`` (stride 1)."""
    c = np.zeros((x.shape[0] + 1, x.shape[1] + 1))
    np.cumsum(np.cumsum(x, axis=0), axis=1, out=c[1:, 1:])
    return c[k:, k:] - c[:-k, k:] - c[k:, :-k] + c[:-k, :-k]


def ssim(i: np.ndarray, f: np.ndarray, data_range: float = 1.0) -> float:
    """Mean SSIM over all 8x8 windows with uniform weights.

    Local variances and covariance are population estimates.
    """
    i, f = _pair(i, f)
    k = SSIM_WINDOW
    if i.ndim != 2 or min(i.shape) < k:
        raise TooSmall(f"SSIM needs at least {k}x{k}, got {i.shape}")
    c1 = (SSIM_K1 * data_range) ** 2
    c2 = (SSIM_K2 * data_range) ** 2
    n = k * k

    mu_i = _window_sums(i, k) / n
    mu_f = _window_sums(f, k) / n
    # second moments on globally centred data keep the cumulative sums small
    ic = i - i.mean()
    fc = f - f.mean()
    mu_ic = _window_sums(ic, k) / n
    mu_fc = _window_sums(fc, k) / n
    var_i = _window_sums(ic * ic, k) / n - mu_ic * mu_ic
    var_f = _window_sums(fc * fc, k) / n - mu_fc * mu_fc
    cov = _window_sums(ic * fc, k) / n - mu_ic * mu_fc

    num = (2 * mu_i * mu_f + c1) * (2 * cov + c2)
    den = (mu_i * mu_i + mu_f * mu_f + c1) * (var_i + var_f + c2)
    return float(np.mean(num / den))


def gradient_magnitude(img: np.ndarray) -> np.ndarray:
    """Sobel gradient magnitude scaled to intensity change per pixel."""
    x = _plane(img)
    gx = ndimage.sobel(x, axis=1, mode="nearest") / 8.0
    gy = ndimage.sobel(x, axis=0, mode="nearest") / 8.0
    return np.hypot(gx, gy)


def blind_assessment(original: np.ndarray, restored: np.ndarray) -> tuple[float, float, float]:
    """Visible-edge rate ``e``, newly saturated percentage and mean gradient ratio.

    Returns ``(e, sigma_sat, r_bar)``:

    * ``e`` -- relative change in the number of visible-edge pixels,
      ``(n_restored - n_original) / n_original``.
    * ``sigma_sat`` -- percentage of pixels that are black or white in the
      restored image but were not in the original.
    * ``r_bar`` -- geometric mean, over visible edges of the restored image,
      of restored/original gradient magnitude.

    An edge is visible where the Sobel magnitude exceeds
    :data:`VISIBILITY_THRESHOLD`. ``r_bar`` is reported as 0 when the
    restored image has no visible edges at all.
    """
    o, r = _pair(original, restored)
    go, gr = gradient_magnitude(o), gradient_magnitude(r)
    vis_o = go > VISIBILITY_THRESHOLD
    vis_r = gr > VISIBILITY_THRESHOLD
    n_o, n_r = int(vis_o.sum()), int(vis_r.sum())
    if n_o == 0:
        raise NoVisibleEdges("original image has no visible edges; e is undefined")
    e = (n_r - n_o) / n_o

    sat_o = (o <= 0.0) | (o >= 1.0)
    sat_r = (r <= 0.0) | (r >= 1.0)
    sigma_sat = 100.0 * np.count_nonzero(sat_r & ~sat_o) / o.size

    if n_r == 0:
        r_bar = 0.0
    else:
        ratios = gr[vis_r] / (go[vis_r] + RATIO_EPS)
        r_bar = float(np.exp(np.mean(np.log(ratios))))
    return float(e), float(sigma_sat), r_bar


def evaluate(original: np.ndarray, restored: np.ndarray) -> MetricsReport:
    """Full report for one original/restored pair of luma planes."""
    e, sigma_sat, r_bar = blind_assessment(original, restored)
    return MetricsReport(
        entropy=entropy(restored),
        std_dev=std_dev(restored),
        ssim=ssim(original, restored),
        cc=correlation_coefficient(original, restored),
        sf=spatial_frequency(restored),
        e=e,
        sigma_sat=sigma_sat,
        r_bar=r_bar,
    )
