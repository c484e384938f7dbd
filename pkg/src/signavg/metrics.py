"""Kendall Tau-b and trailing moving averages."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np


class UndefinedCorrelationError(ValueError):
    """Raised when a coordinate is entirely tied, leaving Tau-b undefined."""


def kendall_tau_b(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Tie-corrected Kendall rank correlation.

    (C - D) / sqrt((n0 - n1)(n0 - n2)) where n0 = n(n-1)/2 and n1, n2 count
    pairs tied in xs and in ys.  O(n^2); populations here are small.
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("xs and ys must be 1-d and of equal length")
    n = len(x)
    if n < 2:
        raise ValueError("need at least two pairs")
    iu = np.triu_indices(n, k=1)
    sx = np.sign(x[:, None] - x[None, :])[iu]
    sy = np.sign(y[:, None] - y[None, :])[iu]
    n0 = n * (n - 1) // 2
    untied_x = n0 - int(np.count_nonzero(sx == 0))
    untied_y = n0 - int(np.count_nonzero(sy == 0))
    if untied_x == 0 or untied_y == 0:
        raise UndefinedCorrelationError("Tau-b is undefined when a coordinate is entirely tied")
    s = int(np.sum(sx * sy))
    return s / math.sqrt(untied_x * untied_y)


def moving_average(series: Sequence[float], span: int) -> np.ndarray:
    """Trailing mean over min(span, i + 1) values; output has the input's length.

    NaN entries are skipped; a window holding only NaN yields NaN.
    """
    if span < 1:
        raise ValueError("span must be at least 1")
    a = np.asarray(series, dtype=float)
    out = np.empty_like(a)
    for i in range(len(a)):
        window = a[max(0, i - span + 1):i + 1]
        window = window[~np.isnan(window)]
        out[i] = window.mean() if len(window) else math.nan
    return out
