"""Attackable-region construction.

Detection boxes above a confidence threshold are rasterized into a mask,
intersected with a saliency mask, and the activation-factor rule decides
whether the intersection is trustworthy or the box mask should be used
instead. The selected mask is then expanded into a shuffled coordinate set
over all channels, which is what the attack engine consumes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator

import numpy as np
from PIL import Image

from .errors import BoundsError, ConfigurationError, ShapeMismatchError
from .tensor import Coordinate

SALIENCY_THRESHOLD = 128  # grayscale value at or above which a pixel counts as salient


class RegionMode(str, Enum):
    OA = "oa"      # boxes intersected with saliency, activation-factor fallback
    SLY = "sly"    # boxes only
    SLH = "slh"    # saliency only
    FULL = "full"  # whole image


@dataclass(frozen=True)
class DetectionBox:
    """Half-open rectangle [top, bottom) x [left, right) with a confidence."""

    label: str
    confidence: float
    left: int
    top: int
    right: int
    bottom: int

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ConfigurationError(f"confidence {self.confidence} outside [0, 1]")
        if self.left >= self.right or self.top >= self.bottom:
            raise ConfigurationError(
                f"degenerate box [{self.top}:{self.bottom}, {self.left}:{self.right}]"
            )


@dataclass(frozen=True)
class RegionMask:
    """H x W boolean mask of attackable pixels."""

    bits: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.bits, dtype=bool)
        if arr.ndim != 2:
            raise ShapeMismatchError(f"mask must be 2-D, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "bits", arr)

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    def area(self) -> int:
        return int(self.bits.sum())

    def is_empty(self) -> bool:
        return not self.bits.any()

    def intersect(self, other: "RegionMask") -> "RegionMask":
        _check_same_dims(self, other)
        return RegionMask(self.bits & other.bits)

    def union(self, other: "RegionMask") -> "RegionMask":
        _check_same_dims(self, other)
        return RegionMask(self.bits | other.bits)

    @classmethod
    def empty(cls, height: int, width: int) -> "RegionMask":
        return cls(np.zeros((height, width), dtype=bool))

    @classmethod
    def full(cls, height: int, width: int) -> "RegionMask":
        return cls(np.ones((height, width), dtype=bool))


@dataclass(frozen=True)
class RegionConfig:
    """Region-selection hyperparameters: confidence threshold, activation
    threshold, and which mask sources to use."""

    p_t: float = 0.3
    epsilon: float = 3.0
    mode: RegionMode = RegionMode.OA

    def __post_init__(self):
        if not 0.0 <= self.p_t <= 1.0:
            raise ConfigurationError(f"p_t {self.p_t} outside [0, 1]")
        if not self.epsilon > 1.0:
            raise ConfigurationError(f"epsilon {self.epsilon} must be > 1")


@dataclass(frozen=True)
class CoordinateSet:
    """Duplicate-free ordered set of (y, x, c) coordinates, stored as flat
    indices under the canonical layout. Iteration order is the stored order."""

    flat_indices: np.ndarray
    shape: tuple[int, int, int]

    def __post_init__(self):
        arr = np.ascontiguousarray(self.flat_indices, dtype=np.int64)
        arr.setflags(write=False)
        object.__setattr__(self, "flat_indices", arr)
        if arr.size != np.unique(arr).size:
            raise ConfigurationError("coordinate set contains duplicates")
        total = self.shape[0] * self.shape[1] * self.shape[2]
        if arr.size and (arr.min() < 0 or arr.max() >= total):
            raise BoundsError("flat index outside image shape")

    def __len__(self) -> int:
        return int(self.flat_indices.size)

    def __iter__(self) -> Iterator[Coordinate]:
        h, w, ch = self.shape
        for idx in self.flat_indices:
            i = int(idx)
            yield Coordinate(i // (ch * w), (i // ch) % w, i % ch)

    def as_set(self) -> set[Coordinate]:
        return set(self)

    def as_index_set(self) -> set[int]:
        return set(int(i) for i in self.flat_indices)


def _check_same_dims(a: RegionMask, b: RegionMask) -> None:
    if a.bits.shape != b.bits.shape:
        raise ShapeMismatchError(f"mask dimensions differ: {a.bits.shape} vs {b.bits.shape}")


def rasterize_boxes(
    boxes: list[DetectionBox], p_t: float, shape: tuple[int, int, int]
) -> RegionMask:
    """Union of all boxes with confidence strictly above p_t.

    Boxes must lie inside the image; an out-of-bounds box raises BoundsError.
    """
    h, w = shape[0], shape[1]
    bits = np.zeros((h, w), dtype=bool)
    for box in boxes:
        if box.left < 0 or box.top < 0 or box.right > w or box.bottom > h:
            raise BoundsError(
                f"box [{box.top}:{box.bottom}, {box.left}:{box.right}] outside {h}x{w} image"
            )
        if box.confidence > p_t:
            bits[box.top : box.bottom, box.left : box.right] = True
    return RegionMask(bits)


def activation_factor(s1: RegionMask, s2: RegionMask) -> float:
    """Area ratio |S1| / |S1 n S2|.

    Returns math.inf when the intersection is empty but S1 is not (the
    saliency result is unusable), and 0.0 when S1 itself is empty.
    """
    _check_same_dims(s1, s2)
    area1 = s1.area()
    if area1 == 0:
        return 0.0
    inter = s1.intersect(s2).area()
    if inter == 0:
        return math.inf
    return area1 / inter


def combine(
    boxes: list[DetectionBox],
    saliency: RegionMask,
    cfg: RegionConfig,
    shape: tuple[int, int, int],
) -> RegionMask:
    """Build the attackable mask for the configured mode.

    OA: intersect boxes with saliency unless the activation factor exceeds
    epsilon (saliency too incomplete), in which case the box mask wins.
    Empty sources fall back to the full image so the attack degrades to a
    plain whole-image search rather than failing.
    """
    h, w = shape[0], shape[1]
    if cfg.mode is RegionMode.FULL:
        return RegionMask.full(h, w)

    if saliency.bits.shape != (h, w):
        raise ShapeMismatchError(
            f"saliency mask {saliency.bits.shape} does not match image {(h, w)}"
        )

    s1 = rasterize_boxes(boxes, cfg.p_t, shape)

    if cfg.mode is RegionMode.SLY:
        return s1 if not s1.is_empty() else RegionMask.full(h, w)
    if cfg.mode is RegionMode.SLH:
        return saliency if not saliency.is_empty() else RegionMask.full(h, w)

    # OA
    if s1.is_empty():
        return RegionMask.full(h, w)
    intersection = s1.intersect(saliency)
    k = activation_factor(s1, saliency)
    if k > cfg.epsilon:
        return s1
    return intersection


def mask_to_coordinates(mask: RegionMask, channels: int, seed: int) -> CoordinateSet:
    """All (y, x, c) coordinates of true mask pixels, in a seeded pseudorandom
    order. Cardinality is channels * mask.area()."""
    pixel_idx = np.flatnonzero(mask.bits.reshape(-1))
    flat = (pixel_idx[:, None] * channels + np.arange(channels)[None, :]).reshape(-1)
    order = np.random.default_rng(seed).permutation(flat.size)
    return CoordinateSet(flat[order], (mask.height, mask.width, channels))


def load_detection_boxes(path) -> list[DetectionBox]:
    """Read a JSON array of {label, confidence, left, top, right, bottom}."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, list):
        raise ConfigurationError(f"{path}: expected a JSON array of boxes")
    return [
        DetectionBox(
            label=str(item["label"]),
            confidence=float(item["confidence"]),
            left=int(item["left"]),
            top=int(item["top"]),
            right=int(item["right"]),
            bottom=int(item["bottom"]),
        )
        for item in raw
    ]


def save_detection_boxes(boxes: list[DetectionBox], path) -> None:
    payload = [
        {
            "label": b.label,
            "confidence": b.confidence,
            "left": b.left,
            "top": b.top,
            "right": b.right,
            "bottom": b.bottom,
        }
        for b in boxes
    ]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def load_saliency_mask(path) -> RegionMask:
    """Read an 8-bit grayscale PNG; values >= 128 count as salient."""
    with Image.open(path) as im:
        arr = np.asarray(im.convert("L"), dtype=np.uint8)
    return RegionMask(arr >= SALIENCY_THRESHOLD)


def save_saliency_mask(mask: RegionMask, path) -> None:
    arr = np.where(mask.bits, 255, 0).astype(np.uint8)
    Image.fromarray(arr, mode="L").save(path, format="PNG")
