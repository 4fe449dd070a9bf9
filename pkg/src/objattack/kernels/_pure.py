"""Pure-numpy kernels: the fallback used when the compiled extension is not
available, and the reference the native kernels are tested against."""

from __future__ import annotations

import numpy as np

from ..tensor import step_value


def linear_probs(W: np.ndarray, b: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Softmax of W @ x + b."""
    z = W @ x + b
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


def linear_attack(
    W: np.ndarray,
    b: np.ndarray,
    x0: np.ndarray,
    coords: np.ndarray,
    mu: float,
    max_queries: int,
    expected_class: int,
):
    """Coordinate-descent attack loop specialized to the linear-softmax model.

    Walks `coords` in order, probing +mu then -mu at each position and keeping
    any candidate that lowers the tracked-class probability. Stops on a
    predicted-class flip, on budget exhaustion, or when coords run out.

    Returns (x_adv, accepted_idx, accepted_delta, queries, iterations,
    success, final_p, initial_pred). If initial_pred differs from
    expected_class the attack never starts.
    """
    x = np.array(x0, dtype=np.float64, copy=True)
    probs = linear_probs(W, b, x)
    queries = 1
    initial_pred = int(np.argmax(probs))
    if initial_pred != expected_class:
        return x, np.empty(0, np.int64), np.empty(0, np.float64), queries, 0, False, 0.0, initial_pred

    p = float(probs[expected_class])
    accepted_idx: list[int] = []
    accepted_delta: list[float] = []
    success = False
    iterations = 0

    for j in coords:
        if queries >= max_queries:
            break
        iterations += 1
        j = int(j)
        old = float(x[j])
        for alpha in (mu, -mu):
            x[j] = step_value(old, alpha)
            cand = linear_probs(W, b, x)
            queries += 1
            if float(cand[expected_class]) < p:
                p = float(cand[expected_class])
                accepted_idx.append(j)
                accepted_delta.append(float(x[j] - old))
                if int(np.argmax(cand)) != expected_class:
                    success = True
                break
            x[j] = old
            if queries >= max_queries:
                break
        if success:
            break

    return (
        x,
        np.asarray(accepted_idx, dtype=np.int64),
        np.asarray(accepted_delta, dtype=np.float64),
        queries,
        iterations,
        success,
        p,
        initial_pred,
    )
