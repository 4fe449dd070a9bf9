"""Image tensors, coordinate flattening, single-pixel steps, and PNG I/O.

Layout is fixed: row-major, channels-last, so the flat index of (y, x, c)
is (y * width + x) * channels + c. Pixel values live in [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from PIL import Image

from .errors import BoundsError, ConfigurationError, ShapeMismatchError


class Coordinate(NamedTuple):
    y: int
    x: int
    c: int


@dataclass(frozen=True)
class ImageTensor:
    """H x W x C float64 image with every value in [0, 1]."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float64, order="C", copy=True)
        if arr.ndim != 3:
            raise ConfigurationError(f"expected H x W x C array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ConfigurationError("image contains non-finite values")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ConfigurationError("pixel values must lie in [0, 1]")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @classmethod
    def _trusted(cls, arr: np.ndarray) -> "ImageTensor":
        # internal fast path: arr must be float64 C-contiguous, in [0, 1], and
        # owned by the caller (it is frozen in place, not copied)
        obj = object.__new__(cls)
        arr.setflags(write=False)
        object.__setattr__(obj, "data", arr)
        return obj

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape  # (height, width, channels)

    def flat(self) -> np.ndarray:
        """Read-only flat view in the canonical (y, x, c) order."""
        return self.data.reshape(-1)


@dataclass(frozen=True)
class Perturbation:
    """Signed elementwise difference between an adversarial image and its original."""

    data: np.ndarray

    def support(self) -> set[Coordinate]:
        """Coordinates of all nonzero elements."""
        ys, xs, cs = np.nonzero(self.data)
        return {Coordinate(int(y), int(x), int(c)) for y, x, c in zip(ys, xs, cs)}

    def max_magnitude(self) -> float:
        return float(np.abs(self.data).max()) if self.data.size else 0.0


def _check_coord(coord: Coordinate, shape: tuple[int, int, int]) -> None:
    h, w, ch = shape
    if not (0 <= coord.y < h and 0 <= coord.x < w and 0 <= coord.c < ch):
        raise BoundsError(f"coordinate {tuple(coord)} outside shape {shape}")


def flatten_index(coord: Coordinate, shape: tuple[int, int, int]) -> int:
    """Flat position of (y, x, c) under the channels-last row-major layout."""
    _check_coord(coord, shape)
    _, w, ch = shape
    return (coord.y * w + coord.x) * ch + coord.c


def unflatten_index(index: int, shape: tuple[int, int, int]) -> Coordinate:
    """Inverse of flatten_index."""
    h, w, ch = shape
    if not 0 <= index < h * w * ch:
        raise BoundsError(f"flat index {index} outside shape {shape}")
    c = index % ch
    x = (index // ch) % w
    y = index // (ch * w)
    return Coordinate(y, x, c)


def step_value(old: float, alpha: float) -> float:
    """New pixel value after adding alpha and clamping to [0, 1].

    The achieved delta (new - old) is guaranteed to satisfy |delta| <= |alpha|
    exactly: float addition can overshoot by an ulp, so the result is nudged
    back toward old until the bound holds.
    """
    new = old + alpha
    if new > 1.0:
        new = 1.0
    elif new < 0.0:
        new = 0.0
    bound = abs(alpha)
    while abs(new - old) > bound:
        new = float(np.nextafter(new, old))
    return new


def apply_step(image: ImageTensor, coord: Coordinate, alpha: float) -> ImageTensor:
    """Copy of image with alpha added (then clamped) at one coordinate."""
    _check_coord(coord, image.shape)
    if not np.isfinite(alpha):
        raise ValueError("step must be finite")
    out = image.data.copy()
    out[coord.y, coord.x, coord.c] = step_value(out[coord.y, coord.x, coord.c], alpha)
    return ImageTensor(out)


def l2_distance(a: ImageTensor, b: ImageTensor) -> float:
    """Euclidean norm of the elementwise difference over all H*W*C values."""
    if a.shape != b.shape:
        raise ShapeMismatchError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a.data - b.data))


def read_png(path) -> ImageTensor:
    """Decode an 8-bit RGB PNG; byte v maps to v / 255.0."""
    with Image.open(path) as im:
        arr = np.asarray(im.convert("RGB"), dtype=np.float64)
    return ImageTensor(arr / 255.0)


def write_png(image: ImageTensor, path) -> None:
    """Encode to 8-bit RGB PNG; real r maps to round(r * 255), half up, clamped."""
    scaled = np.floor(image.data * 255.0 + 0.5)
    bytes_ = np.clip(scaled, 0, 255).astype(np.uint8)
    Image.fromarray(bytes_, mode="RGB").save(path, format="PNG")
