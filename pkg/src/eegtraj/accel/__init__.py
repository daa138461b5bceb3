"""Kernel lane selection.

The hot kernels (lag embedding, conv1d, max pooling, LSTM recurrence) exist
twice: a numba @njit build and a pure-numpy fallback. The numba lane is the
default when numba imports; set EEGTRAJ_DISABLE_NUMBA=1 to force the numpy
lane. Both lanes share layouts and produce matching results (see
tests/test_accel.py and benchmarks/bench_kernels.py).
"""
import os

from . import numpy_impl

_KERNEL_NAMES = (
    "lag_embed",
    "conv1d_fwd",
    "conv1d_bwd",
    "maxpool_fwd",
    "maxpool_bwd",
    "lstm_fwd",
    "lstm_bwd",
)


def _pick_lane():
    if os.environ.get("EEGTRAJ_DISABLE_NUMBA", "").strip() not in ("", "0"):
        return numpy_impl
    try:
        from . import numba_impl
        return numba_impl
    except ImportError:
        return numpy_impl


_impl = _pick_lane()


def active_lane() -> str:
    """Name of the lane the package-level kernels are bound to."""
    return _impl.LANE


def get_impl(lane: str):
    """Fetch a lane module by name ('numpy' or 'numba'), bypassing selection."""
    if lane == "numpy":
        return numpy_impl
    if lane == "numba":
        from . import numba_impl
        return numba_impl
    raise ValueError(f"unknown kernel lane: {lane!r}")


lag_embed = _impl.lag_embed
conv1d_fwd = _impl.conv1d_fwd
conv1d_bwd = _impl.conv1d_bwd
maxpool_fwd = _impl.maxpool_fwd
maxpool_bwd = _impl.maxpool_bwd
lstm_fwd = _impl.lstm_fwd
lstm_bwd = _impl.lstm_bwd

__all__ = ["active_lane", "get_impl", *_KERNEL_NAMES]
