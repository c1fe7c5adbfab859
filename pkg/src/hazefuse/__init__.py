"""Haze removal for registered RGB/NIR image pairs via Haar wavelet fusion."""

from .colorspace import (
    HazeWeightMap,
    YCbCrImage,
    compute_haze_map,
    downsample_map,
    rgb_to_ycbcr,
    ycbcr_to_rgb,
)
from .errors import *  # noqa: F401,F403
from .fusion import (
    FusedLevelImage,
    FusionConfig,
    dehaze,
    dehaze_ycbcr,
    fuse_approx,
    fuse_detail,
    fuse_levels,
    fuse_pyramids,
    histogram_match,
)
from .image_io import ImagePair, NirImage, RgbImage, load_pair, save_image
from .metrics import (
    MetricsReport,
    blind_assessment,
    correlation_coefficient,
    entropy,
    evaluate,
    spatial_frequency,
    ssim,
    std_dev,
)
from .wavelet import CoefficientSet, HaarPyramid, decompose, dwt2_level, idwt2_level, reconstruct

__version__ = "0.1.0"
