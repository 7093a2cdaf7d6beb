"""One-sided truncated normal sampling that stays exact far into the tail.

For a lower bound ``a > 0`` (in standard units) draws use the exponential
proposal of Robert (1995) with the optimal rate ``(a + sqrt(a^2 + 4)) / 2``;
acceptance never drops below ~0.76. For ``a <= 0`` plain rejection from the
untruncated normal accepts at least half the time.
"""
from __future__ import annotations

import numpy as np

from . import _kernels as _k

NEGATIVE = "negative"
POSITIVE = "positive"


def sample_truncated_normal(mean: float, sd: float, side: str, rng, size=None):
    """Draw from ``N(mean, sd^2)`` restricted to ``x < 0`` or ``x > 0``.

    Parameters
    ----------
    side : {"negative", "positive"}
    size : int, optional
        Number of draws; a float is returned when omitted.
    """
    if not sd > 0:
        raise ValueError("sd must be positive")
    if side not in (NEGATIVE, POSITIVE):
        raise ValueError(f"side must be 'negative' or 'positive', got {side!r}")
    positive = side == POSITIVE
    if size is None:
        return _k.truncnorm_draw(float(mean), float(sd), positive, rng)
    out = np.empty(int(size))
    _k.truncnorm_fill(float(mean), float(sd), positive, out, rng)
    return out
