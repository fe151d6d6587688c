"""Small numeric helpers: log-log fitting and compensated summation."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np


class LogLogFit(NamedTuple):
    slope: float
    intercept: float
    stderr: float  # standard error of the slope
    rms: float     # rms residual of the fit


def loglog_fit(x: np.ndarray, y: np.ndarray) -> LogLogFit:
    """Least-squares fit of log y against log x.

    Inputs must be strictly positive; callers filter zeros first.
    """
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    if lx.size < 2:
        raise ValueError("need at least two points for a log-log fit")
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    slope, intercept = float(coef[0]), float(coef[1])
    resid = ly - (slope * lx + intercept)
    rms = float(np.sqrt(np.mean(resid**2)))
    n = lx.size
    sxx = float(np.sum((lx - lx.mean()) ** 2))
    if n > 2 and sxx > 0:
        stderr = float(np.sqrt(np.sum(resid**2) / (n - 2) / sxx))
    else:
        stderr = float("inf") if sxx == 0 else 0.0
    return LogLogFit(slope, intercept, stderr, rms)


def kahan_cumsum(values: np.ndarray) -> np.ndarray:
    """Compensated running sum; used for prefix sums of very long levels."""
    out = np.empty(len(values), dtype=float)
    total = 0.0
    comp = 0.0
    for i, v in enumerate(values):
        y = float(v) - comp
        t = total + y
        comp = (t - total) - y
        total = t
        out[i] = total
    return out


# Prefer plain numpy below this size; compensated summation only pays off
# for very long levels.
KAHAN_THRESHOLD = 1 << 16


def prefix_sums(values: np.ndarray) -> np.ndarray:
    if len(values) > KAHAN_THRESHOLD:
        return kahan_cumsum(values)
    return np.cumsum(values)


def bucket_maxima(logx: np.ndarray, vals: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-dyadic-bucket envelope points.

    Buckets by floor(logx / log 2); returns (logx, val) of the argmax of
    ``vals`` within each nonempty bucket, ordered by bucket.
    """
    b = np.floor(logx / np.log(2.0)).astype(np.int64)
    order = np.lexsort((vals, b))
    bs = b[order]
    # last element of each bucket group is its max after the lexsort
    last = np.nonzero(np.diff(bs))[0]
    pick = np.concatenate([last, [bs.size - 1]])
    sel = order[pick]
    return logx[sel], vals[sel]
