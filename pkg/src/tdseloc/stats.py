"""Small fitting helpers shared by the diagnostics."""

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError


@dataclass(frozen=True)
class LogLogFit:
    slope: float
    intercept: float
    n: int

    def predict(self, t):
        return np.exp(self.intercept) * np.asarray(t, dtype=float) ** self.slope


def loglog_fit(t, y) -> LogLogFit:
    """Least-squares line through (log t, log y); needs two or more positive points."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    m = (t > 0) & (y > 0) & np.isfinite(y)
    if m.sum() < 2:
        raise InsufficientDataError("a log-log fit needs at least two positive samples")
    slope, icpt = np.polyfit(np.log(t[m]), np.log(y[m]), 1)
    return LogLogFit(float(slope), float(icpt), int(m.sum()))
