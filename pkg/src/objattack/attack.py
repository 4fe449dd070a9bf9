"""The coordinate-descent attack loop.

Each iteration consumes one coordinate from the (pre-shuffled) set, probes
+mu and, if that fails, -mu, and keeps a candidate iff it lowers the
probability the oracle assigns to the originally predicted class. The run
stops on a predicted-class flip, on query-budget exhaustion, or when the
coordinate set runs out. Queries include the initial classification that
validates the input and establishes the tracked probability.

A bare builtin oracle is dispatched to the fused kernel (compiled when
available); anything else — external processes, spy wrappers — goes through
the generic loop, which performs the exact same sequence of oracle calls.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ConfigurationError, PreconditionError, ShapeMismatchError
from .oracle import LinearSoftmaxOracle, Oracle
from .region import CoordinateSet, RegionConfig
from .tensor import Coordinate, ImageTensor, Perturbation, l2_distance, step_value, unflatten_index


@dataclass(frozen=True)
class AttackConfig:
    mu: float = 0.2
    max_queries: int = 20000
    seed: int = 0
    region: RegionConfig = field(default_factory=RegionConfig)

    def __post_init__(self):
        if not (np.isfinite(self.mu) and 0.0 < self.mu <= 1.0):
            raise ConfigurationError(f"step size {self.mu} must lie in (0, 1]")
        if self.max_queries < 1:
            raise ConfigurationError(f"max_queries {self.max_queries} must be >= 1")


@dataclass(frozen=True)
class AttackResult:
    adversarial: ImageTensor
    success: bool
    queries: int
    iterations: int
    accepted_steps: tuple[tuple[Coordinate, float], ...]
    final_probability: float
    l2: float


def run_attack(
    original: ImageTensor,
    oracle: Oracle,
    coords: CoordinateSet,
    cfg: AttackConfig,
    true_class: int,
) -> AttackResult:
    """Attack `original` within the coordinates of `coords`.

    `true_class` is the caller's ground truth; the oracle must classify the
    original image as that class or the run refuses to start.
    """
    if len(coords) == 0:
        raise ConfigurationError("coordinate set is empty")
    if original.shape != coords.shape:
        raise ShapeMismatchError(
            f"coordinate set shape {coords.shape} does not match image {original.shape}"
        )
    if not 0 <= true_class < oracle.num_classes:
        raise PreconditionError(
            f"true class {true_class} outside oracle's {oracle.num_classes} classes"
        )

    if isinstance(oracle, LinearSoftmaxOracle):
        return _run_fused(original, oracle, coords, cfg, true_class)
    return _run_generic(original, oracle, coords, cfg, true_class)


def _run_fused(
    original: ImageTensor,
    oracle: LinearSoftmaxOracle,
    coords: CoordinateSet,
    cfg: AttackConfig,
    true_class: int,
) -> AttackResult:
    oracle._check_shape(original)
    x_adv, acc_idx, acc_delta, queries, iterations, success, final_p, initial_pred = (
        kernels.linear_attack(
            oracle.W,
            oracle.b,
            original.flat(),
            coords.flat_indices,
            cfg.mu,
            cfg.max_queries,
            true_class,
        )
    )
    if initial_pred != true_class:
        raise PreconditionError(
            f"oracle predicts class {initial_pred} for the original image, not {true_class}"
        )
    adversarial = ImageTensor(x_adv.reshape(original.shape))
    steps = tuple(
        (unflatten_index(int(j), original.shape), float(d)) for j, d in zip(acc_idx, acc_delta)
    )
    return AttackResult(
        adversarial=adversarial,
        success=success,
        queries=int(queries),
        iterations=int(iterations),
        accepted_steps=steps,
        final_probability=float(final_p),
        l2=l2_distance(adversarial, original),
    )


def _run_generic(
    original: ImageTensor,
    oracle: Oracle,
    coords: CoordinateSet,
    cfg: AttackConfig,
    true_class: int,
) -> AttackResult:
    shape = original.shape
    x = original.data.copy()
    flat = x.reshape(-1)

    # every classify gets its own frozen copy so oracles may retain references
    probs = oracle.classify(ImageTensor._trusted(x.copy())).values
    queries = 1
    if int(np.argmax(probs)) != true_class:
        raise PreconditionError(
            f"oracle predicts class {int(np.argmax(probs))} for the original image, "
            f"not {true_class}"
        )
    p = float(probs[true_class])

    steps: list[tuple[Coordinate, float]] = []
    success = False
    iterations = 0

    for j in coords.flat_indices:
        if queries >= cfg.max_queries:
            break
        iterations += 1
        j = int(j)
        old = float(flat[j])
        for alpha in (cfg.mu, -cfg.mu):
            flat[j] = step_value(old, alpha)
            cand = oracle.classify(ImageTensor._trusted(x.copy())).values
            queries += 1
            if float(cand[true_class]) < p:
                p = float(cand[true_class])
                steps.append((unflatten_index(j, shape), float(flat[j] - old)))
                if int(np.argmax(cand)) != true_class:
                    success = True
                break
            flat[j] = old
            if queries >= cfg.max_queries:
                break
        if success:
            break

    adversarial = ImageTensor(x)
    return AttackResult(
        adversarial=adversarial,
        success=success,
        queries=queries,
        iterations=iterations,
        accepted_steps=tuple(steps),
        final_probability=p,
        l2=l2_distance(adversarial, original),
    )


def perturbation_of(result: AttackResult, original: ImageTensor) -> Perturbation:
    """Elementwise difference adversarial - original."""
    if result.adversarial.shape != original.shape:
        raise ShapeMismatchError(
            f"shape mismatch: {result.adversarial.shape} vs {original.shape}"
        )
    return Perturbation(result.adversarial.data - original.data)
