"""Backend selection for the hot kernels.

The compiled extension is preferred; the numpy twin in ``_fallback`` is
used when it is missing or when ``RADBOUND_PURE=1`` is set.
"""
import os

from radbound import _fallback

if os.environ.get("RADBOUND_PURE", "") not in ("", "0"):
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from radbound import _kernels as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

exact_sign_average = _impl.exact_sign_average
pairwise_distances = _impl.pairwise_distances
greedy_cover = _impl.greedy_cover
exact_cover = _impl.exact_cover

__all__ = [
    "BACKEND",
    "exact_sign_average",
    "pairwise_distances",
    "greedy_cover",
    "exact_cover",
]
