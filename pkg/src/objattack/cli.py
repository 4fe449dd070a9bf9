"""Command line interface.

Subcommands: `run` (batch-attack a manifest), `filter-manifest` (keep only
entries whose label name appears in a plain-text label list), and `report`
(recompute aggregates from a records file). Exit codes: 0 clean, 1 usage or
startup error, 2 batch finished with errored entries.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .attack import AttackConfig
from .errors import AttackToolkitError
from .harness import (
    RunPlan,
    filter_manifest,
    load_label_set,
    load_manifest,
    load_records,
    records_to_run_records,
    report_payload,
    run_batch,
    save_manifest,
)
from .region import RegionConfig, RegionMode


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; the contract reserves 2 for
    # partial batch failures, so usage errors leave with 1
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="attack", description="object-region black-box attack toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="attack every entry of a manifest")
    run.add_argument("--manifest", required=True, help="JSONL manifest path")
    run.add_argument(
        "--mode",
        required=True,
        choices=[m.value for m in RegionMode],
        help="region source: oa (boxes combined with saliency), sly (boxes "
        "only), slh (saliency only), full (whole image)",
    )
    run.add_argument("--pt", type=float, default=0.3, help="detection confidence threshold")
    run.add_argument("--epsilon", type=float, default=3.0, help="activation factor threshold")
    run.add_argument("--step", type=float, default=0.2, help="per-coordinate step size")
    run.add_argument("--max-queries", type=int, default=20000, help="oracle query budget per image")
    run.add_argument("--seed", type=int, default=0, help="batch seed")
    run.add_argument(
        "--oracle",
        required=True,
        help="'builtin:<seed>:<classes>' or 'exec:<command>'",
    )
    run.add_argument("--out", required=True, help="output directory for records and report")
    run.set_defaults(func=_cmd_run)

    filt = sub.add_parser(
        "filter-manifest", help="keep entries whose label name is in a label list"
    )
    filt.add_argument("--manifest", required=True)
    filt.add_argument("--labels", required=True, help="text file, one label name per line")
    filt.add_argument("--out", required=True, help="filtered manifest path")
    filt.set_defaults(func=_cmd_filter)

    rep = sub.add_parser("report", help="recompute aggregates from a records file")
    rep.add_argument("--records", required=True, help="records.jsonl path")
    rep.set_defaults(func=_cmd_report)

    return parser


def _cmd_run(args) -> int:
    region = RegionConfig(p_t=args.pt, epsilon=args.epsilon, mode=RegionMode(args.mode))
    cfg = AttackConfig(
        mu=args.step, max_queries=args.max_queries, seed=args.seed, region=region
    )
    plan = RunPlan(mode=region.mode, attack=cfg, oracle_spec=args.oracle, out_dir=args.out)
    entries = load_manifest(args.manifest)
    outcome = run_batch(plan, entries, Path(args.manifest).parent)

    rate = outcome.report["aggregates"]["success_rate"]
    print(
        f"attacked {outcome.attacked}, skipped {outcome.skipped}, "
        f"errored {outcome.errored}; success rate "
        + ("n/a" if rate is None else f"{rate:.3f}")
    )
    print(f"records: {outcome.records_path}")
    print(f"report: {outcome.report_path}")
    return 2 if outcome.errored else 0


def _cmd_filter(args) -> int:
    entries = load_manifest(args.manifest)
    kept = filter_manifest(entries, load_label_set(args.labels))
    save_manifest(kept, args.out)
    print(f"kept {len(kept)} of {len(entries)} entries")
    return 0


def _cmd_report(args) -> int:
    runs, counts = records_to_run_records(load_records(args.records))
    print(json.dumps(report_payload(runs, counts), sort_keys=True, indent=2))
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (AttackToolkitError, OSError) as exc:
        print(f"attack: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
