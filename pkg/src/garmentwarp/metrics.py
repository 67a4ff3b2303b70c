"""Image-quality metrics: SSIM, normalized masked SSIM, mask IoU.

SSIM uses the canonical 11x11 Gaussian window (sigma 1.5) with
C1 = 0.01^2, C2 = 0.03^2 on the [0, 1] range. The local statistics map is
computed only where the full window fits (valid positions), so an H x W
image yields an (H-10) x (W-10) map; the scalar SSIM is its mean over
positions and channels.

The normalized masked SSIM of a pair is the sum of the SSIM map inside the
union of the two garment masks divided by the TOTAL number of map positions,
i.e. the masked mean scaled down by the union's area fraction. A perfect
match confined to a quarter of the frame therefore scores 0.25, not 1.0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import convolve2d

from .rasters import BinaryMask, RgbImage, _require_same_shape

WINDOW = 11
SIGMA = 1.5
C1 = 0.01**2
C2 = 0.03**2
_PAD = WINDOW // 2


def _gaussian_window() -> np.ndarray:
    half = WINDOW // 2
    g = np.exp(-np.arange(-half, half + 1) ** 2 / (2.0 * SIGMA**2))
    return g / g.sum()


_KERNEL_1D = _gaussian_window()


def _local_mean(plane: np.ndarray) -> np.ndarray:
    rows = convolve2d(plane, _KERNEL_1D[None, :], mode="valid")
    return convolve2d(rows, _KERNEL_1D[:, None], mode="valid")


def ssim_map(a: RgbImage, b: RgbImage) -> np.ndarray:
    """Channel-averaged SSIM map over all valid window positions, float64."""
    _require_same_shape("a", a.pixels, "b", b.pixels)
    if a.width < WINDOW or a.height < WINDOW:
        raise ValueError(f"images must be at least {WINDOW}x{WINDOW} for SSIM")
    maps = []
    for c in range(3):
        x = a.pixels[:, :, c].astype(np.float64)
        y = b.pixels[:, :, c].astype(np.float64)
        mu_x = _local_mean(x)
        mu_y = _local_mean(y)
        sxx = _local_mean(x * x) - mu_x * mu_x
        syy = _local_mean(y * y) - mu_y * mu_y
        sxy = _local_mean(x * y) - mu_x * mu_y
        num = (2.0 * mu_x * mu_y + C1) * (2.0 * sxy + C2)
        den = (mu_x * mu_x + mu_y * mu_y + C1) * (sxx + syy + C2)
        maps.append(num / den)
    return np.mean(maps, axis=0)


def ssim(a: RgbImage, b: RgbImage) -> float:
    """Mean structural similarity; 1.0 exactly for identical images."""
    return float(ssim_map(a, b).mean())


def nm_ssim(
    t: RgbImage, gt: RgbImage, warped_mask: BinaryMask, gt_garment_mask: BinaryMask
) -> float:
    """SSIM restricted to the union of the garment masks, normalized by the
    full map area (see module docstring)."""
    _require_same_shape("image", t.pixels, "warped mask", warped_mask.bits)
    _require_same_shape("image", t.pixels, "gt mask", gt_garment_mask.bits)
    union = warped_mask.bits | gt_garment_mask.bits
    smap = ssim_map(t, gt)
    inside = union[_PAD:-_PAD, _PAD:-_PAD]
    return float(smap[inside].sum() / smap.size)


def miou(a: BinaryMask, b: BinaryMask) -> float:
    """Intersection over union; two empty masks agree perfectly (1.0)."""
    _require_same_shape("a", a.bits, "b", b.bits)
    union = int((a.bits | b.bits).sum())
    if union == 0:
        return 1.0
    inter = int((a.bits & b.bits).sum())
    return inter / union


@dataclass(frozen=True)
class MetricReport:
    """Scores for one image pair, with pixel diagnostics.

    ``pixel_counts`` is (warped-garment pixels, union pixels inside the SSIM
    map footprint, SSIM map positions); the last two are the numerator domain
    and denominator of nm_ssim, so total >= union always.
    """

    ssim: float
    nm_ssim: float | None
    miou: float | None
    pixel_counts: tuple[int, int, int]


def evaluate_pair(
    pred: RgbImage,
    gt: RgbImage,
    warped_mask: BinaryMask | None = None,
    gt_mask: BinaryMask | None = None,
) -> MetricReport:
    """Score one try-on result; mask metrics require both masks."""
    score = ssim(pred, gt)
    total = (pred.height - 2 * _PAD) * (pred.width - 2 * _PAD)
    if warped_mask is None or gt_mask is None:
        return MetricReport(score, None, None, (0, 0, total))
    union_in_map = int((warped_mask.bits | gt_mask.bits)[_PAD:-_PAD, _PAD:-_PAD].sum())
    return MetricReport(
        ssim=score,
        nm_ssim=nm_ssim(pred, gt, warped_mask, gt_mask),
        miou=miou(warped_mask, gt_mask),
        pixel_counts=(warped_mask.area, union_in_map, total),
    )


def summarize(reports: list[MetricReport]) -> dict:
    """Dataset means (compensated summation), in the batch report schema."""
    if not reports:
        raise ValueError("no image pairs to summarize")
    n = len(reports)
    out: dict = {"pairs": n, "ssim": math.fsum(r.ssim for r in reports) / n}
    if all(r.nm_ssim is not None for r in reports):
        out["nm_ssim"] = math.fsum(r.nm_ssim for r in reports) / n
        out["miou"] = math.fsum(r.miou for r in reports) / n
    else:
        out["nm_ssim"] = None
        out["miou"] = None
    return out
