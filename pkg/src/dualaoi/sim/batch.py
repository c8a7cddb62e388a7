"""Batch-means confidence intervals."""

from __future__ import annotations

import math
from collections.abc import Sequence

import numpy as np
from scipy import stats


def batch_half_width(batch_estimates: Sequence[float], confidence: float = 0.95) -> float:
    """Student-t half-width of the mean of (approximately independent) batch estimates.

    Returns NaN with fewer than two batches.
    """
    x = np.asarray(batch_estimates, dtype=float)
    b = x.size
    if b < 2:
        return math.nan
    t = stats.t.ppf(0.5 + confidence / 2, b - 1)
    return float(t * x.std(ddof=1) / math.sqrt(b))
