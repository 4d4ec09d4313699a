"""Image-quality metrics: masked PSNR, SSIM, and the seen/unseen split.

Images are float arrays in [0, 1] with peak signal 1.0. PSNR of an exact
match is reported as the +inf sentinel, never a capped number.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyMask, TooSmall

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


@dataclass(frozen=True)
class MetricReport:
    """One evaluated prediction/ground-truth pair."""

    psnr_db: float
    ssim: float
    mse: float
    valid_pixel_count: int
    seen_psnr_db: float | None = None
    unseen_psnr_db: float | None = None

    def to_json(self) -> str:
        """Single-line JSON record; infinities serialize as the string "inf"."""

        def enc(x):
            if x is None:
                return None
            return "inf" if math.isinf(x) else x

        record = {
            "psnr_db": enc(self.psnr_db),
            "ssim": self.ssim,
            "mse": self.mse,
            "valid_pixel_count": self.valid_pixel_count,
            "seen_psnr_db": enc(self.seen_psnr_db),
            "unseen_psnr_db": enc(self.unseen_psnr_db),
        }
        return json.dumps(record)


def _check_pair(pred, gt):
    p = np.asarray(pred, dtype=np.float64)
    g = np.asarray(gt, dtype=np.float64)
    if p.shape != g.shape:
        raise DimensionMismatch(f"shape mismatch: {p.shape} vs {g.shape}")
    return p, g


def masked_mse(pred, gt, mask) -> float:
    """Mean squared error over masked pixels, all channels."""
    p, g = _check_pair(pred, gt)
    m = np.asarray(mask, dtype=bool)
    if m.shape != p.shape[:2]:
        raise DimensionMismatch(f"mask shape {m.shape} vs image {p.shape[:2]}")
    if not m.any():
        raise EmptyMask("mask selects zero pixels")
    diff = p[m] - g[m]
    return float(np.mean(diff * diff))


def psnr_from_mse(mse: float) -> float:
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def masked_psnr(pred, gt, mask) -> float:
    """PSNR (peak 1.0) over masked pixels; +inf when the masked MSE is 0."""
    return psnr_from_mse(masked_mse(pred, gt, mask))


def full_mask(image) -> np.ndarray:
    return np.ones(np.asarray(image).shape[:2], dtype=bool)


def _gaussian_kernel(size: int, sigma: float) -> np.ndarray:
    ax = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-0.5 * (ax / sigma) ** 2)
    k = np.outer(g, g)
    return k / k.sum()


def _windowed(x: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    # valid-mode weighted local mean via a strided window view
    win = np.lib.stride_tricks.sliding_window_view(x, kernel.shape)
    return np.einsum("hwij,ij->hw", win, kernel)


def ssim(pred, gt) -> float:
    """Mean structural similarity with an 11x11 Gaussian window, sigma 1.5.

    Computed per channel over valid window positions, then averaged across
    channels. Both grayscale (H, W) and color (H, W, 3) pairs are accepted.
    """
    p, g = _check_pair(pred, gt)
    if p.ndim == 2:
        p = p[:, :, None]
        g = g[:, :, None]
    if p.ndim != 3:
        raise DimensionMismatch(f"expected (H, W[, C]) image, got shape {p.shape}")
    h, w = p.shape[:2]
    if min(h, w) < SSIM_WINDOW:
        raise TooSmall(f"image {h}x{w} smaller than {SSIM_WINDOW}x{SSIM_WINDOW} window")

    kernel = _gaussian_kernel(SSIM_WINDOW, SSIM_SIGMA)
    c1 = (SSIM_K1 * 1.0) ** 2
    c2 = (SSIM_K2 * 1.0) ** 2
    channel_means = []
    for c in range(p.shape[2]):
        x, y = p[:, :, c], g[:, :, c]
        mu_x = _windowed(x, kernel)
        mu_y = _windowed(y, kernel)
        var_x = _windowed(x * x, kernel) - mu_x * mu_x
        var_y = _windowed(y * y, kernel) - mu_y * mu_y
        cov = _windowed(x * y, kernel) - mu_x * mu_y
        score = ((2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)) / (
            (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
        )
        channel_means.append(np.mean(score))
    return float(np.mean(channel_means))


def seen_unseen_split(coverage, dilation_radius: float = 0.0):
    """Partition pixels into seen (covered, optionally disc-dilated) and unseen."""
    cov = np.asarray(coverage, dtype=bool)
    seen = cov.copy()
    if dilation_radius > 0:
        r = int(math.floor(dilation_radius))
        h, w = cov.shape
        for dy in range(-r, r + 1):
            for dx in range(-r, r + 1):
                if dy == 0 and dx == 0:
                    continue
                if dy * dy + dx * dx > dilation_radius * dilation_radius:
                    continue
                src = cov[
                    max(0, -dy) : h - max(0, dy), max(0, -dx) : w - max(0, dx)
                ]
                seen[
                    max(0, dy) : h - max(0, -dy), max(0, dx) : w - max(0, -dx)
                ] |= src
    return seen, ~seen


def evaluate_pair(pred, gt, mask=None, coverage=None) -> MetricReport:
    """Full metric report for one pair.

    PSNR/MSE run over `mask` (default: all pixels); SSIM always runs on the
    full image. When `coverage` is given, seen/unseen PSNR are reported over
    the split intersected with the mask (sides with zero pixels report None).
    """
    if mask is None:
        mask = full_mask(pred)
    mask = np.asarray(mask, dtype=bool)
    mse = masked_mse(pred, gt, mask)
    report_ssim = ssim(pred, gt)
    seen_psnr = unseen_psnr = None
    if coverage is not None:
        seen, unseen = seen_unseen_split(coverage)
        if (seen & mask).any():
            seen_psnr = masked_psnr(pred, gt, seen & mask)
        if (unseen & mask).any():
            unseen_psnr = masked_psnr(pred, gt, unseen & mask)
    return MetricReport(
        psnr_db=psnr_from_mse(mse),
        ssim=report_ssim,
        mse=mse,
        valid_pixel_count=int(mask.sum()),
        seen_psnr_db=seen_psnr,
        unseen_psnr_db=unseen_psnr,
    )
