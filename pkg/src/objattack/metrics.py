"""Evaluation metrics: PSNR, windowed SSIM, batch aggregation, and the
query-distribution histogram.

Histogram bins are 200 queries wide from 0 to 5000; runs needing more than
5000 queries and failed runs share a single overflow bin. Aggregate query
and distortion statistics are computed over successful runs only (the
convention is recorded in the report so the per-run records can be
re-aggregated either way).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .errors import ShapeMismatchError
from .tensor import ImageTensor

HISTOGRAM_BIN_WIDTH = 200
HISTOGRAM_LIMIT = 5000
HISTOGRAM_OVERFLOW_BIN = HISTOGRAM_LIMIT // HISTOGRAM_BIN_WIDTH  # index 25

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
SSIM_DYNAMIC_RANGE = 1.0


@dataclass(frozen=True)
class RunRecord:
    """Per-image attack outcome."""

    image_id: str
    success: bool
    queries: int
    l2: float
    psnr: float
    ssim: float

    def __post_init__(self):
        if self.queries < 1:
            raise ValueError(f"queries {self.queries} must be >= 1")
        if not self.l2 >= 0.0:
            raise ValueError(f"l2 {self.l2} must be >= 0")
        if not -1.0 <= self.ssim <= 1.0:
            raise ValueError(f"ssim {self.ssim} must lie in [-1, 1]")


@dataclass(frozen=True)
class AggregateReport:
    average_queries: float | None
    median_queries: float | None
    average_l2: float | None
    median_l2: float | None
    success_rate: float
    average_psnr: float | None
    average_ssim: float | None
    histogram: tuple[tuple[int, int], ...]  # (bin lower bound, count)


def psnr(a: ImageTensor, b: ImageTensor) -> float:
    """10 * log10(1 / MSE) over all H*W*C values; inf for identical images."""
    if a.shape != b.shape:
        raise ShapeMismatchError(f"shape mismatch: {a.shape} vs {b.shape}")
    mse = float(np.mean((a.data - b.data) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def _gaussian_window(size: int, sigma: float) -> np.ndarray:
    offsets = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-(offsets**2) / (2.0 * sigma**2))
    return g / g.sum()


def _windowed_mean(plane: np.ndarray, window: np.ndarray) -> np.ndarray:
    half = window.size // 2
    out = correlate1d(plane, window, axis=0)
    out = correlate1d(out, window, axis=1)
    return out[half:-half, half:-half]  # interior == valid-mode windows


def ssim(a: ImageTensor, b: ImageTensor) -> float:
    """Mean structural similarity over 11x11 Gaussian windows (sigma 1.5),
    per channel, with K1=0.01, K2=0.03 on a dynamic range of 1.0."""
    if a.shape != b.shape:
        raise ShapeMismatchError(f"shape mismatch: {a.shape} vs {b.shape}")
    if min(a.height, a.width) < SSIM_WINDOW:
        raise ShapeMismatchError(
            f"image {a.height}x{a.width} smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} window"
        )
    window = _gaussian_window(SSIM_WINDOW, SSIM_SIGMA)
    c1 = (SSIM_K1 * SSIM_DYNAMIC_RANGE) ** 2
    c2 = (SSIM_K2 * SSIM_DYNAMIC_RANGE) ** 2

    channel_means = []
    for ch in range(a.channels):
        x = a.data[:, :, ch]
        y = b.data[:, :, ch]
        mu_x = _windowed_mean(x, window)
        mu_y = _windowed_mean(y, window)
        var_x = _windowed_mean(x * x, window) - mu_x * mu_x
        var_y = _windowed_mean(y * y, window) - mu_y * mu_y
        cov = _windowed_mean(x * y, window) - mu_x * mu_y
        num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
        den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
        channel_means.append(np.mean(num / den))
    return float(np.mean(channel_means))


def histogram_bin(queries: int, success: bool) -> int:
    """Bin index for the query-distribution histogram.

    Successful runs land in 200-wide bins [0,200) .. [4800,5000); everything
    at or beyond 5000 queries, and every failed run, lands in the overflow
    bin.
    """
    if queries < 0:
        raise ValueError("queries must be >= 0")
    if not success or queries >= HISTOGRAM_LIMIT:
        return HISTOGRAM_OVERFLOW_BIN
    return queries // HISTOGRAM_BIN_WIDTH


def _median(values: list[float]) -> float:
    s = sorted(values)
    n = len(s)
    if n % 2 == 1:
        return float(s[n // 2])
    return (s[n // 2 - 1] + s[n // 2]) / 2.0


def aggregate(records: list[RunRecord]) -> AggregateReport:
    """Summary statistics over a batch of run records.

    Success rate counts all records; query/L2/PSNR/SSIM averages and medians
    are over successful runs only (None when there were no successes). Even
    counts take the midpoint of the two central order statistics.
    """
    if not records:
        raise ValueError("cannot aggregate an empty record list")
    counts = [0] * (HISTOGRAM_OVERFLOW_BIN + 1)
    for r in records:
        counts[histogram_bin(r.queries, r.success)] += 1
    histogram = tuple(
        (i * HISTOGRAM_BIN_WIDTH, counts[i]) for i in range(HISTOGRAM_OVERFLOW_BIN + 1)
    )

    successes = [r for r in records if r.success]
    if successes:
        queries = [float(r.queries) for r in successes]
        l2s = [r.l2 for r in successes]
        stats = dict(
            average_queries=float(np.mean(queries)),
            median_queries=_median(queries),
            average_l2=float(np.mean(l2s)),
            median_l2=_median(l2s),
            average_psnr=float(np.mean([r.psnr for r in successes])),
            average_ssim=float(np.mean([r.ssim for r in successes])),
        )
    else:
        stats = dict(
            average_queries=None,
            median_queries=None,
            average_l2=None,
            median_l2=None,
            average_psnr=None,
            average_ssim=None,
        )
    return AggregateReport(
        success_rate=len(successes) / len(records),
        histogram=histogram,
        **stats,
    )
