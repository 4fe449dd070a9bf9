"""Seeded synthetic datasets for tests and demos.

Generates small PNG images with detection-box and saliency sidecars plus a
manifest, labeled by a builtin oracle so every entry is correctly classified
by construction (labels are assigned after PNG quantization, from the pixels
a consumer will actually read back).
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .oracle import make_builtin_oracle, predict
from .region import DetectionBox, RegionMask, save_detection_boxes, save_saliency_mask
from .tensor import ImageTensor, read_png, write_png


def random_image(rng: np.random.Generator, height: int, width: int, channels: int = 3) -> ImageTensor:
    return ImageTensor(rng.uniform(0.0, 1.0, size=(height, width, channels)))


def random_boxes(
    rng: np.random.Generator, height: int, width: int, count: int
) -> list[DetectionBox]:
    boxes = []
    for _ in range(count):
        top = int(rng.integers(0, height - 1))
        left = int(rng.integers(0, width - 1))
        bottom = int(rng.integers(top + 1, height + 1))
        right = int(rng.integers(left + 1, width + 1))
        boxes.append(
            DetectionBox(
                label=int(rng.integers(0, 80)),
                confidence=float(rng.uniform(0.0, 1.0)),
                left=left,
                top=top,
                right=right,
                bottom=bottom,
            )
        )
    return boxes


def random_saliency(rng: np.random.Generator, height: int, width: int) -> RegionMask:
    """Random axis-aligned salient rectangle covering a modest area."""
    bits = np.zeros((height, width), dtype=bool)
    top = int(rng.integers(0, height - 1))
    left = int(rng.integers(0, width - 1))
    bottom = int(rng.integers(top + 1, height + 1))
    right = int(rng.integers(left + 1, width + 1))
    bits[top:bottom, left:right] = True
    return RegionMask(bits)


def make_dataset(
    out_dir: str | Path,
    count: int,
    shape: tuple[int, int, int] = (16, 16, 3),
    num_classes: int = 10,
    oracle_seed: int = 5,
    seed: int = 0,
    mislabel_every: int | None = None,
    label_names: list[str] | None = None,
) -> Path:
    """Write `count` synthetic entries under `out_dir` and return the
    manifest path.

    Every entry carries a boxes sidecar and a saliency sidecar. The label id
    is the builtin oracle's prediction on the quantized (written-then-reread)
    image, so a harness using the same oracle seed attacks every entry;
    `mislabel_every=k` deliberately mislabels every k-th entry instead, for
    skip-path tests.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    height, width, channels = shape
    rng = np.random.default_rng(seed)
    oracle = make_builtin_oracle(oracle_seed, shape, num_classes)

    manifest_path = out / "manifest.jsonl"
    with open(manifest_path, "w", encoding="utf-8") as fh:
        for i in range(count):
            image_path = out / f"img{i:03d}.png"
            boxes_path = out / f"img{i:03d}.boxes.json"
            saliency_path = out / f"img{i:03d}.saliency.png"

            write_png(random_image(rng, height, width, channels), image_path)
            save_detection_boxes(
                random_boxes(rng, height, width, count=int(rng.integers(1, 4))),
                boxes_path,
            )
            save_saliency_mask(random_saliency(rng, height, width), saliency_path)

            label = predict(oracle, read_png(image_path))
            if mislabel_every and i % mislabel_every == 0:
                label = (label + 1) % num_classes
            name = label_names[label] if label_names else f"class{label}"
            entry = {
                "image": image_path.name,
                "label_id": label,
                "label_name": name,
                "boxes": boxes_path.name,
                "saliency": saliency_path.name,
            }
            fh.write(json.dumps(entry, sort_keys=True) + "\n")
    return manifest_path
