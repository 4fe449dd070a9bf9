import json
import math

import numpy as np
import pytest

from objattack.attack import AttackConfig, run_attack
from objattack.errors import ConfigurationError
from objattack.harness import (
    ManifestEntry,
    RunPlan,
    filter_manifest,
    load_label_set,
    load_manifest,
    load_records,
    parse_oracle_spec,
    records_to_run_records,
    report_payload,
    run_batch,
    save_manifest,
)
from objattack.oracle import make_builtin_oracle
from objattack.region import RegionConfig, RegionMask, RegionMode, mask_to_coordinates
from objattack.synthetic import make_dataset
from objattack.tensor import read_png

ORACLE_SEED = 5
CLASSES = 10


def make_plan(out_dir, mode=RegionMode.OA, seed=7, max_queries=2000, oracle=None):
    region = RegionConfig(mode=mode)
    cfg = AttackConfig(max_queries=max_queries, seed=seed, region=region)
    return RunPlan(
        mode=mode,
        attack=cfg,
        oracle_spec=oracle or f"builtin:{ORACLE_SEED}:{CLASSES}",
        out_dir=str(out_dir),
    )


@pytest.fixture()
def dataset(tmp_path):
    manifest = make_dataset(
        tmp_path / "data",
        count=6,
        shape=(16, 16, 3),
        num_classes=CLASSES,
        oracle_seed=ORACLE_SEED,
        seed=0,
        mislabel_every=5,
    )
    return manifest


class TestManifestIO:
    def test_roundtrip(self, tmp_path):
        entries = [
            ManifestEntry("a.png", 3, "cat", boxes="a.json", saliency="a_s.png"),
            ManifestEntry("b.png", 1, "dog"),
        ]
        path = tmp_path / "m.jsonl"
        save_manifest(entries, path)
        assert load_manifest(path) == entries

    def test_bad_line_reports_position(self, tmp_path):
        path = tmp_path / "m.jsonl"
        path.write_text('{"image": "a.png", "label_id": 1, "label_name": "x"}\nnot json\n')
        with pytest.raises(ConfigurationError, match="2"):
            load_manifest(path)

    def test_missing_field(self, tmp_path):
        path = tmp_path / "m.jsonl"
        path.write_text('{"image": "a.png"}\n')
        with pytest.raises(ConfigurationError):
            load_manifest(path)


class TestFilterManifest:
    ENTRIES = [
        ManifestEntry("a.png", 0, "cat"),
        ManifestEntry("b.png", 1, "dog"),
        ManifestEntry("c.png", 2, "tree"),
    ]

    def test_keeps_allowed(self):
        kept = filter_manifest(self.ENTRIES, {"cat", "dog"})
        assert [e.label_name for e in kept] == ["cat", "dog"]

    def test_empty_allowed(self):
        assert filter_manifest(self.ENTRIES, set()) == []

    def test_superset_is_identity(self):
        allowed = {"cat", "dog", "tree", "bird"}
        assert filter_manifest(self.ENTRIES, allowed) == self.ENTRIES

    def test_label_set_file(self, tmp_path):
        path = tmp_path / "labels.txt"
        path.write_text("cat\n\ndog\n")
        assert load_label_set(path) == {"cat", "dog"}


class TestOracleSpec:
    def test_builtin(self):
        assert parse_oracle_spec("builtin:5:10") == ("builtin", "5", "10")
        assert parse_oracle_spec("builtin:-3:2") == ("builtin", "-3", "2")

    def test_exec(self):
        assert parse_oracle_spec("exec:python3 -m objattack.serve") == (
            "exec",
            "python3 -m objattack.serve",
        )

    @pytest.mark.parametrize(
        "spec", ["builtin:5", "builtin:x:10", "builtin:5:ten", "exec:", "serve:foo", "builtin"]
    )
    def test_invalid(self, spec):
        with pytest.raises(ConfigurationError):
            parse_oracle_spec(spec)


class TestRunPlan:
    def test_mode_mismatch_rejected(self, tmp_path):
        region = RegionConfig(mode=RegionMode.OA)
        cfg = AttackConfig(region=region)
        with pytest.raises(ConfigurationError):
            RunPlan(
                mode=RegionMode.FULL,
                attack=cfg,
                oracle_spec="builtin:1:2",
                out_dir=str(tmp_path),
            )


class TestRunBatch:
    def test_counts_and_files(self, dataset, tmp_path):
        plan = make_plan(tmp_path / "out")
        outcome = run_batch(plan, load_manifest(dataset), dataset.parent)
        assert outcome.attacked + outcome.skipped + outcome.errored == 6
        assert outcome.skipped == 2  # entries 0 and 5 are mislabeled
        assert outcome.errored == 0
        lines = load_records(outcome.records_path)
        assert len(lines) == 6
        report = json.loads(outcome.report_path.read_text())
        assert report["counts"]["attacked"] == outcome.attacked

    def test_skipped_entries_flagged(self, dataset, tmp_path):
        plan = make_plan(tmp_path / "out")
        outcome = run_batch(plan, load_manifest(dataset), dataset.parent)
        skipped = [r for r in load_records(outcome.records_path) if r["status"] == "skipped"]
        assert {r["image_id"] for r in skipped} == {"img000.png", "img005.png"}
        assert all(r["reason"] == "misclassified" for r in skipped)
        assert all(r["predicted"] != r["label_id"] for r in skipped)

    def test_byte_identical_reruns(self, dataset, tmp_path):
        entries = load_manifest(dataset)
        out_a = run_batch(make_plan(tmp_path / "a"), entries, dataset.parent)
        out_b = run_batch(make_plan(tmp_path / "b"), entries, dataset.parent)
        assert out_a.records_path.read_bytes() == out_b.records_path.read_bytes()
        assert out_a.report_path.read_bytes() == out_b.report_path.read_bytes()

    def test_report_recomputable_from_records(self, dataset, tmp_path):
        outcome = run_batch(make_plan(tmp_path / "out"), load_manifest(dataset), dataset.parent)
        runs, counts = records_to_run_records(load_records(outcome.records_path))
        payload = report_payload(runs, counts)
        assert payload["aggregates"] == outcome.report["aggregates"]
        assert payload["histogram"] == outcome.report["histogram"]
        assert payload["counts"] == outcome.report["counts"]

    def test_errored_entry_does_not_abort(self, dataset, tmp_path):
        entries = load_manifest(dataset)
        broken = entries + [ManifestEntry("missing.png", 0, "class0")]
        outcome = run_batch(make_plan(tmp_path / "out"), broken, dataset.parent)
        assert outcome.errored == 1
        assert outcome.attacked == 4
        errored = [r for r in load_records(outcome.records_path) if r["status"] == "errored"]
        assert len(errored) == 1
        assert "missing.png" == errored[0]["image_id"]
        assert errored[0]["error"]

    def test_all_skipped_gives_null_aggregates(self, tmp_path):
        manifest = make_dataset(
            tmp_path / "data",
            count=3,
            num_classes=CLASSES,
            oracle_seed=ORACLE_SEED,
            seed=1,
            mislabel_every=1,
        )
        outcome = run_batch(make_plan(tmp_path / "out"), load_manifest(manifest), manifest.parent)
        assert outcome.attacked == 0
        assert outcome.skipped == 3
        aggregates = outcome.report["aggregates"]
        assert all(v is None for v in aggregates.values())
        assert all(count == 0 for _, count in outcome.report["histogram"])

    def test_full_mode_equals_all_true_mask(self, dataset, tmp_path):
        entries = load_manifest(dataset)
        plan = make_plan(tmp_path / "out", mode=RegionMode.FULL)
        outcome = run_batch(plan, entries, dataset.parent)
        attacked = {
            r["image_id"]: r
            for r in load_records(outcome.records_path)
            if r["status"] == "attacked"
        }

        oracle = make_builtin_oracle(ORACLE_SEED, (16, 16, 3), CLASSES)
        for index, entry in enumerate(entries):
            if entry.image not in attacked:
                continue
            rec = attacked[entry.image]
            image = read_png(dataset.parent / entry.image)
            coords = mask_to_coordinates(RegionMask.full(16, 16), 3, rec["seed"])
            res = run_attack(image, oracle, coords, plan.attack, entry.label_id)
            assert res.queries == rec["queries"]
            assert res.success == rec["success"]
            assert res.l2 == rec["l2"]

    def test_empty_manifest_rejected(self, tmp_path):
        with pytest.raises(ConfigurationError):
            run_batch(make_plan(tmp_path / "out"), [], tmp_path)

    def test_infinite_psnr_serialized_as_text(self, tmp_path):
        # a failed run with zero accepted steps leaves the image identical
        manifest = make_dataset(
            tmp_path / "data",
            count=2,
            num_classes=2,
            oracle_seed=0,
            seed=3,
        )
        # zero-weight oracle: every probe is rejected, runs fail, psnr is inf
        plan = make_plan(tmp_path / "out", oracle="builtin:0:2", max_queries=30)
        entries = load_manifest(manifest)
        relabeled = [
            ManifestEntry(e.image, 0, "class0", e.boxes, e.saliency) for e in entries
        ]
        import objattack.harness as harness_module

        original = harness_module.make_builtin_oracle

        def zero_weight_oracle(seed, shape, classes):
            return original(seed, shape, classes, weight_scale=0.0, bias_scale=0.0)

        harness_module.make_builtin_oracle = zero_weight_oracle
        try:
            outcome = run_batch(plan, relabeled, manifest.parent)
        finally:
            harness_module.make_builtin_oracle = original

        records = [r for r in load_records(outcome.records_path) if r["status"] == "attacked"]
        assert len(records) == 2
        assert all(r["psnr"] == "inf" for r in records)
        assert all(not r["success"] for r in records)
        runs, _ = records_to_run_records(load_records(outcome.records_path))
        assert all(math.isinf(r.psnr) for r in runs)


class TestSyntheticDataset:
    def test_deterministic(self, tmp_path):
        a = make_dataset(tmp_path / "a", count=3, seed=9)
        b = make_dataset(tmp_path / "b", count=3, seed=9)
        assert a.read_bytes() == b.read_bytes()
        assert (a.parent / "img000.png").read_bytes() == (b.parent / "img000.png").read_bytes()

    def test_labels_match_oracle(self, tmp_path):
        manifest = make_dataset(
            tmp_path / "d", count=4, num_classes=CLASSES, oracle_seed=ORACLE_SEED, seed=2
        )
        oracle = make_builtin_oracle(ORACLE_SEED, (16, 16, 3), CLASSES)
        for entry in load_manifest(manifest):
            image = read_png(manifest.parent / entry.image)
            assert int(np.argmax(oracle.classify(image).values)) == entry.label_id

    def test_sidecars_exist(self, tmp_path):
        manifest = make_dataset(tmp_path / "d", count=2, seed=4)
        for entry in load_manifest(manifest):
            assert (manifest.parent / entry.boxes).exists()
            assert (manifest.parent / entry.saliency).exists()
