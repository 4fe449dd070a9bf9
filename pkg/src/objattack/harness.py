"""Batch evaluation pipeline: manifest handling, per-entry orchestration,
JSONL run records, and the aggregate report.

Manifests are JSON-lines files; sidecar paths inside an entry are resolved
relative to the manifest's directory. Per-run records are one JSON object
per line, written in manifest order with deterministic float formatting, so
identical plans produce byte-identical record files. Every aggregate in the
report is recomputable from the records alone.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .attack import AttackConfig, run_attack
from .errors import ConfigurationError
from .metrics import (
    HISTOGRAM_BIN_WIDTH,
    HISTOGRAM_OVERFLOW_BIN,
    RunRecord,
    aggregate,
    psnr,
    ssim,
)
from .oracle import ExternalOracle, Oracle, make_builtin_oracle
from .region import (
    RegionMask,
    RegionMode,
    combine,
    load_detection_boxes,
    load_saliency_mask,
    mask_to_coordinates,
)
from .tensor import read_png

STATISTICS_CONVENTION = "aggregates over successful runs only"

AGGREGATE_FIELDS = (
    "average_queries",
    "median_queries",
    "average_l2",
    "median_l2",
    "success_rate",
    "average_psnr",
    "average_ssim",
)


@dataclass(frozen=True)
class ManifestEntry:
    image: str
    label_id: int
    label_name: str
    boxes: str | None = None
    saliency: str | None = None


@dataclass(frozen=True)
class RunPlan:
    mode: RegionMode
    attack: AttackConfig
    oracle_spec: str
    out_dir: str

    def __post_init__(self):
        if self.mode is not self.attack.region.mode:
            raise ConfigurationError(
                f"plan mode {self.mode.value} does not match region config "
                f"mode {self.attack.region.mode.value}"
            )
        parse_oracle_spec(self.oracle_spec)


@dataclass(frozen=True)
class BatchOutcome:
    attacked: int
    skipped: int
    errored: int
    report: dict
    records_path: Path
    report_path: Path


def parse_oracle_spec(spec: str) -> tuple[str, ...]:
    """Split an oracle spec into its parts.

    "builtin:<seed>:<classes>" -> ("builtin", seed, classes) and
    "exec:<command>" -> ("exec", command).
    """
    kind, _, rest = spec.partition(":")
    if kind == "builtin":
        seed_text, sep, classes_text = rest.partition(":")
        try:
            if not sep:
                raise ValueError(spec)
            return ("builtin", str(int(seed_text)), str(int(classes_text)))
        except ValueError:
            raise ConfigurationError(
                f"builtin oracle spec {spec!r} must be builtin:<seed>:<classes>"
            ) from None
    if kind == "exec":
        if not rest.strip():
            raise ConfigurationError("exec oracle spec has an empty command")
        return ("exec", rest)
    raise ConfigurationError(
        f"oracle spec {spec!r} must start with 'builtin:' or 'exec:'"
    )


def load_manifest(path: str | Path) -> list[ManifestEntry]:
    entries = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
                entries.append(
                    ManifestEntry(
                        image=raw["image"],
                        label_id=int(raw["label_id"]),
                        label_name=raw["label_name"],
                        boxes=raw.get("boxes"),
                        saliency=raw.get("saliency"),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ConfigurationError(
                    f"{path}:{lineno}: bad manifest entry: {exc}"
                ) from exc
    return entries


def save_manifest(entries: list[ManifestEntry], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for e in entries:
            raw = {"image": e.image, "label_id": e.label_id, "label_name": e.label_name}
            if e.boxes is not None:
                raw["boxes"] = e.boxes
            if e.saliency is not None:
                raw["saliency"] = e.saliency
            fh.write(json.dumps(raw, sort_keys=True) + "\n")


def filter_manifest(
    entries: list[ManifestEntry], allowed_labels: set[str]
) -> list[ManifestEntry]:
    """Entries whose label name is in the allowed set, order preserved."""
    return [e for e in entries if e.label_name in allowed_labels]


def load_label_set(path: str | Path) -> set[str]:
    """Plain text label list, one label per line; blank lines ignored."""
    with open(path, "r", encoding="utf-8") as fh:
        return {line.strip() for line in fh if line.strip()}


def _entry_seed(batch_seed: int, index: int) -> int:
    seq = np.random.SeedSequence([batch_seed, index])
    return int(seq.generate_state(1, np.uint64)[0])


def _json_float(value: float) -> float | str:
    # report files stay valid strict JSON: infinities travel as text
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


def _parse_float(value: float | str) -> float:
    if value == "inf":
        return math.inf
    if value == "-inf":
        return -math.inf
    return float(value)


def records_to_run_records(raw_records: list[dict]) -> tuple[list[RunRecord], dict]:
    """Split raw per-run record dicts into RunRecords (attacked entries only)
    and a status-count dict."""
    runs = []
    counts = {"attacked": 0, "skipped": 0, "errored": 0}
    for raw in raw_records:
        status = raw.get("status")
        if status not in counts:
            raise ConfigurationError(f"record has unknown status {status!r}")
        counts[status] += 1
        if status == "attacked":
            runs.append(
                RunRecord(
                    image_id=raw["image_id"],
                    success=bool(raw["success"]),
                    queries=int(raw["queries"]),
                    l2=_parse_float(raw["l2"]),
                    psnr=_parse_float(raw["psnr"]),
                    ssim=_parse_float(raw["ssim"]),
                )
            )
    counts["total"] = sum(counts.values())
    return runs, counts


def load_records(path: str | Path) -> list[dict]:
    with open(path, "r", encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def report_payload(runs: list[RunRecord], counts: dict) -> dict:
    """The recomputable part of a report: aggregates, histogram, counts."""
    if runs:
        agg = aggregate(runs)
        aggregates = {name: getattr(agg, name) for name in AGGREGATE_FIELDS}
        if aggregates["average_psnr"] is not None:
            aggregates["average_psnr"] = _json_float(aggregates["average_psnr"])
        histogram = [[lower, count] for lower, count in agg.histogram]
    else:
        aggregates = {name: None for name in AGGREGATE_FIELDS}
        histogram = [
            [i * HISTOGRAM_BIN_WIDTH, 0] for i in range(HISTOGRAM_OVERFLOW_BIN + 1)
        ]
    return {"aggregates": aggregates, "counts": counts, "histogram": histogram}


def run_batch(plan: RunPlan, entries: list[ManifestEntry], base_dir: str | Path) -> BatchOutcome:
    """Attack every manifest entry and write records.jsonl plus report.json
    under the plan's output directory.

    Entries the oracle misclassifies are recorded as skipped; per-entry
    failures (unreadable files, oracle protocol errors) are recorded as
    errored without aborting the batch. Entries run sequentially in manifest
    order, each with a seed derived from (plan seed, entry index), so a
    repeated run produces byte-identical records.
    """
    if not entries:
        raise ConfigurationError("manifest is empty")
    base = Path(base_dir)
    out = Path(plan.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records_path = out / "records.jsonl"
    report_path = out / "report.json"

    spec = parse_oracle_spec(plan.oracle_spec)
    external = ExternalOracle(spec[1]) if spec[0] == "exec" else None
    builtin: Oracle | None = None
    raw_records: list[dict] = []
    runs: list[RunRecord] = []

    def oracle_for(shape: tuple[int, int, int]) -> Oracle:
        nonlocal builtin
        if external is not None:
            return external
        if builtin is None:
            builtin = make_builtin_oracle(int(spec[1]), shape, int(spec[2]))
        return builtin

    try:
        for index, entry in enumerate(entries):
            seed = _entry_seed(plan.attack.seed, index)
            base_record = {"image_id": entry.image, "mode": plan.mode.value, "seed": seed}
            try:
                raw_records.append(
                    _run_entry(plan, entry, base, seed, oracle_for, base_record, runs)
                )
            except Exception as exc:
                raw_records.append(
                    dict(base_record, status="errored", error=f"{type(exc).__name__}: {exc}")
                )
    finally:
        if external is not None:
            external.close()

    with open(records_path, "w", encoding="utf-8") as fh:
        for raw in raw_records:
            fh.write(json.dumps(raw, sort_keys=True) + "\n")

    _, counts = records_to_run_records(raw_records)
    report = report_payload(runs, counts)
    report["config"] = {
        "epsilon": plan.attack.region.epsilon,
        "max_queries": plan.attack.max_queries,
        "mode": plan.mode.value,
        "mu": plan.attack.mu,
        "oracle": plan.oracle_spec,
        "p_t": plan.attack.region.p_t,
        "seed": plan.attack.seed,
        "statistics": STATISTICS_CONVENTION,
    }
    with open(report_path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(report, sort_keys=True, indent=2) + "\n")

    return BatchOutcome(
        attacked=counts["attacked"],
        skipped=counts["skipped"],
        errored=counts["errored"],
        report=report,
        records_path=records_path,
        report_path=report_path,
    )


def _run_entry(plan, entry, base, seed, oracle_for, base_record, runs) -> dict:
    image = read_png(base / entry.image)
    oracle = oracle_for(image.shape)

    predicted = int(np.argmax(oracle.classify(image).values))
    if predicted != entry.label_id:
        return dict(
            base_record,
            status="skipped",
            reason="misclassified",
            label_id=entry.label_id,
            predicted=predicted,
        )

    boxes = load_detection_boxes(base / entry.boxes) if entry.boxes else []
    saliency = (
        load_saliency_mask(base / entry.saliency)
        if entry.saliency
        else RegionMask.empty(image.height, image.width)
    )
    mask = combine(boxes, saliency, plan.attack.region, image.shape)
    coords = mask_to_coordinates(mask, image.channels, seed)

    result = run_attack(image, oracle, coords, plan.attack, true_class=entry.label_id)
    record = RunRecord(
        image_id=entry.image,
        success=result.success,
        queries=result.queries,
        l2=result.l2,
        psnr=psnr(image, result.adversarial),
        ssim=ssim(image, result.adversarial),
    )
    runs.append(record)
    return dict(
        base_record,
        status="attacked",
        success=record.success,
        queries=record.queries,
        iterations=result.iterations,
        l2=record.l2,
        psnr=_json_float(record.psnr),
        ssim=record.ssim,
    )
