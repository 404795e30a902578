"""Log-log growth exponents."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    stderr: float
    npoints: int


def fit_loglog(x, y) -> FitResult:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 3:
        raise ValueError("at least 3 points are needed for a fit")
    if len(np.unique(x)) != len(x):
        raise ValueError("x values must be distinct")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs positive data")
    res = stats.linregress(np.log(x), np.log(y))
    return FitResult(float(res.slope), float(res.intercept), float(res.stderr), len(x))


def sweep_and_fit(records, x_key: str = "N") -> FitResult:
    """Slope of log(ratio) against log(N) (``x_key="N"``) or log(1/delta) (``"inv_delta"``)."""
    if x_key == "N":
        x = [r.N for r in records]
    elif x_key in ("inv_delta", "1/delta"):
        x = [1.0 / r.delta for r in records]
    else:
        raise ValueError(f"unknown x key {x_key!r}")
    return fit_loglog(x, [r.ratio for r in records])
