"""Kernel selection: the compiled extension when it built, numpy otherwise.

Both implementations expose the same two functions with the same contract;
`HAVE_NATIVE` reports which one is active. `benchmarks/bench_kernels.py`
compares their throughput side by side.
"""

from . import _pure

try:
    from . import _native as _impl

    HAVE_NATIVE = True
except ImportError:  # extension not built on this install
    _impl = _pure
    HAVE_NATIVE = False

linear_probs = _impl.linear_probs
linear_attack = _impl.linear_attack

__all__ = ["linear_probs", "linear_attack", "HAVE_NATIVE", "_pure"]
