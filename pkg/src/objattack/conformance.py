"""Wire-protocol conformance driver.

Builds a deterministic transcript of requests (one handshake plus a batch of
seeded classify queries), replays it against a live oracle process, and
checks every reply: handshake fields, id echo, vector length, per-value
range, and sum-to-one within tolerance. Used to qualify external oracle
adapters independently of any attack run.
"""

from __future__ import annotations

import base64
import json
import queue
import shlex
import subprocess
import threading
from dataclasses import dataclass

import numpy as np

from .oracle import PROB_SUM_TOLERANCE

# largest integer JSON implementations backed by IEEE doubles can echo
# exactly; ids beyond it would fail through no fault of the adapter
MAX_EXACT_ID = 2**53 - 1


@dataclass(frozen=True)
class ConformanceReport:
    passed: bool
    checks_run: int
    failures: tuple[str, ...]


class _LineReader:
    """Pull lines from a pipe on a daemon thread so reads can time out."""

    def __init__(self, stream):
        self._lines: queue.Queue = queue.Queue()
        thread = threading.Thread(target=self._pump, args=(stream,), daemon=True)
        thread.start()

    def _pump(self, stream) -> None:
        for line in stream:
            self._lines.put(line)
        self._lines.put(None)

    def readline(self, timeout: float) -> str | None:
        try:
            return self._lines.get(timeout=timeout)
        except queue.Empty:
            raise TimeoutError("oracle produced no reply before the timeout") from None


def _transcript_ids(cases: int, rng: np.random.Generator) -> list[int]:
    ids = [int(rng.integers(0, MAX_EXACT_ID, endpoint=True)) for _ in range(cases)]
    if cases:
        ids[-1] = MAX_EXACT_ID  # pin one boundary id into every transcript
    return ids


def run_conformance(
    command: str, cases: int = 8, seed: int = 0, timeout: float = 10.0
) -> ConformanceReport:
    """Replay the conformance transcript against `command` and report."""
    failures: list[str] = []
    checks = 0

    def check(ok: bool, description: str) -> bool:
        nonlocal checks
        checks += 1
        if not ok:
            failures.append(description)
        return ok

    process = subprocess.Popen(
        shlex.split(command),
        stdin=subprocess.PIPE,
        stdout=subprocess.PIPE,
        text=True,
        bufsize=1,
    )
    reader = _LineReader(process.stdout)

    def roundtrip(request: dict) -> dict | None:
        try:
            process.stdin.write(json.dumps(request) + "\n")
            process.stdin.flush()
        except (BrokenPipeError, OSError):
            failures.append("oracle process closed its input pipe")
            return None
        try:
            line = reader.readline(timeout)
        except TimeoutError as exc:
            failures.append(str(exc))
            return None
        if line is None:
            failures.append("oracle closed its output stream mid-transcript")
            return None
        try:
            reply = json.loads(line)
        except json.JSONDecodeError:
            failures.append(f"reply is not valid JSON: {line.strip()!r}")
            return None
        if not isinstance(reply, dict):
            failures.append(f"reply is not a JSON object: {line.strip()!r}")
            return None
        return reply

    try:
        meta = roundtrip({"type": "meta"})
        if meta is None:
            return ConformanceReport(False, checks, tuple(failures))

        check(meta.get("type") == "meta", f"handshake type is {meta.get('type')!r}, not 'meta'")
        num_classes = meta.get("num_classes")
        width = meta.get("width")
        height = meta.get("height")
        check(
            isinstance(num_classes, int) and num_classes >= 2,
            f"num_classes is {num_classes!r}, need an integer >= 2",
        )
        check(
            isinstance(width, int) and width >= 1,
            f"width is {width!r}, need an integer >= 1",
        )
        check(
            isinstance(height, int) and height >= 1,
            f"height is {height!r}, need an integer >= 1",
        )
        check(meta.get("channels") == 3, f"channels is {meta.get('channels')!r}, not 3")
        if failures:
            return ConformanceReport(False, checks, tuple(failures))

        rng = np.random.default_rng(seed)
        ids = _transcript_ids(cases, rng)
        for case, request_id in enumerate(ids):
            pixels = rng.uniform(0.0, 1.0, size=height * width * 3).astype("<f4")
            reply = roundtrip(
                {
                    "type": "classify",
                    "id": request_id,
                    "pixels": base64.b64encode(pixels.tobytes()).decode("ascii"),
                }
            )
            if reply is None:
                break
            prefix = f"case {case}:"
            check(
                reply.get("type") == "probs",
                f"{prefix} reply type is {reply.get('type')!r}, not 'probs'",
            )
            check(
                reply.get("id") == request_id,
                f"{prefix} id {reply.get('id')!r} does not echo {request_id}",
            )
            values = reply.get("values")
            if not check(
                isinstance(values, list) and len(values) == num_classes,
                f"{prefix} values length is not num_classes={num_classes}",
            ):
                continue
            numeric = all(isinstance(v, (int, float)) for v in values)
            if not check(numeric, f"{prefix} values contain non-numbers"):
                continue
            check(
                all(0.0 <= v <= 1.0 for v in values),
                f"{prefix} values fall outside [0, 1]",
            )
            total = float(sum(values))
            check(
                abs(total - 1.0) <= PROB_SUM_TOLERANCE,
                f"{prefix} values sum to {total}, not 1 within {PROB_SUM_TOLERANCE}",
            )
    finally:
        try:
            process.stdin.close()
        except OSError:
            pass
        try:
            process.wait(timeout=5.0)
        except subprocess.TimeoutExpired:
            process.kill()
            process.wait()

    return ConformanceReport(not failures, checks, tuple(failures))
