"""Log-log slope fits with regression diagnostics."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    stderr: float
    ci95: tuple[float, float]
    r_squared: float
    n_points: int

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ci95"] = list(self.ci95)
        return d


class DegenerateFitError(ValueError):
    pass


def loglog_slope(x, y) -> SlopeFit:
    """Least-squares slope of ``log y`` against ``log x`` with a 95% t-interval."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = (x > 0) & (y > 0) & np.isfinite(x) & np.isfinite(y)
    if keep.sum() < 2 or np.ptp(np.log(x[keep])) == 0:
        raise DegenerateFitError("need at least two distinct positive points")
    lx, ly = np.log(x[keep]), np.log(y[keep])
    res = stats.linregress(lx, ly)
    n = int(keep.sum())
    if n > 2:
        half = float(stats.t.ppf(0.975, n - 2) * res.stderr)
    else:
        half = math.inf
    return SlopeFit(
        slope=float(res.slope),
        intercept=float(res.intercept),
        stderr=float(res.stderr) if n > 2 else math.inf,
        ci95=(float(res.slope) - half, float(res.slope) + half),
        r_squared=float(res.rvalue**2),
        n_points=n,
    )
