"""The black-box classifier boundary.

Three oracle kinds share one interface: a deterministic builtin
linear-softmax model for desk-scale experiments, an external child process
speaking newline-delimited JSON over stdin/stdout, and a spy wrapper that
counts queries. `predict` is argmax with ties broken toward the lowest
index so runs are reproducible.
"""

from __future__ import annotations

import base64
import json
import shlex
import subprocess
import threading
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigurationError, OracleFailure, ShapeMismatchError
from .region import RegionMask
from .tensor import ImageTensor

PROB_SUM_TOLERANCE = 1e-5


@dataclass(frozen=True)
class ProbabilityVector:
    """Classifier output: one probability per class, summing to 1."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.values, dtype=np.float64)
        if arr.ndim != 1 or arr.size < 2:
            raise ConfigurationError(
                f"probability vector must be 1-D with >= 2 classes, got {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise ConfigurationError("probability vector contains non-finite values")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ConfigurationError("probabilities must lie in [0, 1]")
        if abs(float(arr.sum()) - 1.0) > PROB_SUM_TOLERANCE:
            raise ConfigurationError(f"probabilities sum to {arr.sum()}, not 1")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def num_classes(self) -> int:
        return int(self.values.size)

    def top_class(self) -> int:
        return int(np.argmax(self.values))


class Oracle:
    """Interface every classifier oracle implements."""

    kind: str = "abstract"

    @property
    def num_classes(self) -> int:
        raise NotImplementedError

    @property
    def image_shape(self) -> tuple[int, int, int]:
        raise NotImplementedError

    def classify(self, image: ImageTensor) -> ProbabilityVector:
        raise NotImplementedError

    def _check_shape(self, image: ImageTensor) -> None:
        if image.shape != self.image_shape:
            raise ShapeMismatchError(
                f"image shape {image.shape} does not match oracle shape {self.image_shape}"
            )


def predict(oracle: Oracle, image: ImageTensor) -> int:
    """Predicted class: index of the maximum probability (lowest index wins ties)."""
    return oracle.classify(image).top_class()


class LinearSoftmaxOracle(Oracle):
    """softmax(W @ flatten(x) + b); deterministic and dependency-free.

    W has shape (num_classes, H*W*C) over the canonical flat layout, so a
    column of zeros makes the corresponding coordinate provably irrelevant.
    """

    kind = "builtin"

    def __init__(self, W: np.ndarray, b: np.ndarray, shape: tuple[int, int, int]):
        W = np.ascontiguousarray(W, dtype=np.float64)
        b = np.ascontiguousarray(b, dtype=np.float64)
        h, w, c = shape
        if W.ndim != 2 or W.shape[1] != h * w * c:
            raise ConfigurationError(f"weight shape {W.shape} does not match image shape {shape}")
        if b.shape != (W.shape[0],):
            raise ConfigurationError(f"bias shape {b.shape} does not match {W.shape[0]} classes")
        if W.shape[0] < 2:
            raise ConfigurationError("oracle needs at least 2 classes")
        self.W = W
        self.b = b
        self._shape = (h, w, c)

    @property
    def num_classes(self) -> int:
        return int(self.W.shape[0])

    @property
    def image_shape(self) -> tuple[int, int, int]:
        return self._shape

    def classify(self, image: ImageTensor) -> ProbabilityVector:
        self._check_shape(image)
        return ProbabilityVector(kernels.linear_probs(self.W, self.b, image.flat()))


def make_builtin_oracle(
    seed: int,
    shape: tuple[int, int, int],
    num_classes: int,
    support: RegionMask | None = None,
    weight_scale: float = 1.0,
    bias_scale: float = 0.1,
) -> LinearSoftmaxOracle:
    """Seeded linear-softmax oracle.

    With `support` given, weight columns outside the pixel region are zeroed,
    so only that region can influence the output — a ground-truth object
    region for tests. weight_scale=0 with bias_scale=0 yields the constant
    uniform oracle.
    """
    if num_classes < 2:
        raise ConfigurationError("num_classes must be >= 2")
    h, w, c = shape
    rng = np.random.default_rng(seed)
    W = rng.standard_normal((num_classes, h * w * c)) * weight_scale
    b = rng.standard_normal(num_classes) * bias_scale
    if support is not None:
        if support.bits.shape != (h, w):
            raise ShapeMismatchError(
                f"support mask {support.bits.shape} does not match image {(h, w)}"
            )
        keep = np.repeat(support.bits.reshape(-1), c)
        W[:, ~keep] = 0.0
    return LinearSoftmaxOracle(W, b, shape)


class QueryLedger:
    """Monotone query counter; one increment per classify on the spied oracle."""

    def __init__(self):
        self._lock = threading.Lock()
        self._total = 0

    @property
    def total_queries(self) -> int:
        return self._total

    def increment(self) -> None:
        with self._lock:
            self._total += 1


class SpyOracle(Oracle):
    """Delegating wrapper that counts every classify call."""

    kind = "spy-wrapped"

    def __init__(self, inner: Oracle, ledger: QueryLedger):
        self.inner = inner
        self.ledger = ledger

    @property
    def num_classes(self) -> int:
        return self.inner.num_classes

    @property
    def image_shape(self) -> tuple[int, int, int]:
        return self.inner.image_shape

    def classify(self, image: ImageTensor) -> ProbabilityVector:
        self.ledger.increment()
        return self.inner.classify(image)


def wrap_with_spy(oracle: Oracle) -> tuple[SpyOracle, QueryLedger]:
    ledger = QueryLedger()
    return SpyOracle(oracle, ledger), ledger


class ExternalOracle(Oracle):
    """Child process speaking newline-delimited JSON over stdin/stdout.

    Handshake: send {"type": "meta"}, the child replies with num_classes and
    the expected image dimensions. Each query ships the pixels as base64 of
    little-endian float32 in the canonical flat order; the reply must echo
    the query id. Any malformed line, id mismatch, or wrong-length vector is
    a protocol violation and raises OracleFailure. One request in flight at
    a time; callers must not share a handle across threads.
    """

    kind = "external"

    def __init__(self, command: str | list[str]):
        argv = shlex.split(command) if isinstance(command, str) else list(command)
        try:
            self._proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=None,  # diagnostics pass through to our stderr
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise OracleFailure(f"could not launch oracle process {argv!r}: {exc}") from exc
        self._next_id = 0
        meta = self._roundtrip({"type": "meta"})
        if meta.get("type") != "meta":
            raise OracleFailure(f"handshake reply has type {meta.get('type')!r}, expected 'meta'")
        try:
            self._num_classes = int(meta["num_classes"])
            self._shape = (int(meta["height"]), int(meta["width"]), int(meta["channels"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise OracleFailure(f"malformed handshake reply: {meta!r}") from exc
        if self._num_classes < 2:
            raise OracleFailure(f"oracle reports {self._num_classes} classes, need >= 2")
        if self._shape[2] != 3:
            raise OracleFailure(f"oracle reports {self._shape[2]} channels, expected 3")

    def _roundtrip(self, request: dict) -> dict:
        if self._proc.poll() is not None:
            raise OracleFailure(f"oracle process exited with code {self._proc.returncode}")
        try:
            self._proc.stdin.write(json.dumps(request) + "\n")
            self._proc.stdin.flush()
            line = self._proc.stdout.readline()
        except (BrokenPipeError, OSError) as exc:
            raise OracleFailure(f"oracle pipe failed: {exc}") from exc
        if not line:
            code = self._proc.poll()
            raise OracleFailure(f"oracle closed its output (exit code {code})")
        try:
            reply = json.loads(line)
        except json.JSONDecodeError as exc:
            raise OracleFailure(f"oracle sent a malformed line: {line[:200]!r}") from exc
        if not isinstance(reply, dict):
            raise OracleFailure(f"oracle reply is not an object: {line[:200]!r}")
        return reply

    @property
    def num_classes(self) -> int:
        return self._num_classes

    @property
    def image_shape(self) -> tuple[int, int, int]:
        return self._shape

    def classify(self, image: ImageTensor) -> ProbabilityVector:
        self._check_shape(image)
        qid = self._next_id
        self._next_id += 1
        pixels = base64.b64encode(image.flat().astype("<f4").tobytes()).decode("ascii")
        reply = self._roundtrip({"type": "classify", "id": qid, "pixels": pixels})
        if reply.get("type") != "probs":
            raise OracleFailure(f"reply type {reply.get('type')!r}, expected 'probs'")
        if reply.get("id") != qid:
            raise OracleFailure(f"reply id {reply.get('id')!r} does not echo query id {qid}")
        values = reply.get("values")
        if not isinstance(values, list) or len(values) != self._num_classes:
            raise OracleFailure(
                f"reply carries {len(values) if isinstance(values, list) else 'no'} values, "
                f"expected {self._num_classes}"
            )
        try:
            return ProbabilityVector(np.asarray(values, dtype=np.float64))
        except ValueError as exc:
            raise OracleFailure(f"invalid probability vector from oracle: {exc}") from exc

    def close(self) -> None:
        if self._proc.poll() is None:
            self._proc.terminate()
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()

    def __enter__(self) -> "ExternalOracle":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()
