"""Power-law fitting on log-log axes."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["ScalingFit", "fit_power_law"]


@dataclass(frozen=True)
class ScalingFit:
    """Least-squares power-law fit ``y ~ C * x**exponent``.

    ``window`` records the (smallest, largest) abscissa actually used and
    ``npoints`` how many points entered the fit.  ``r2`` is the coefficient
    of determination of the log-log regression, clipped to [0, 1].
    """

    exponent: float
    intercept: float
    r2: float
    window: tuple[float, float]
    npoints: int

    def to_dict(self) -> dict:
        return {
            "exponent": self.exponent,
            "intercept": self.intercept,
            "r2": self.r2,
            "window": list(self.window),
            "npoints": self.npoints,
        }


def fit_power_law(abscissae, ordinates, window: tuple[float, float] | None = None) -> ScalingFit:
    """Fit ``log y`` against ``log x`` by least squares.

    Parameters
    ----------
    abscissae, ordinates : array_like
        Strictly positive samples of equal length.
    window : (lo, hi), optional
        Inclusive abscissa window (with a small relative tolerance) selecting
        the points used; all points by default.

    Raises
    ------
    ValueError
        For nonpositive data or fewer than three points in the window.
    """
    x = np.asarray(abscissae, dtype=np.float64)
    y = np.asarray(ordinates, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("abscissae and ordinates must be 1d arrays of equal length")
    if np.any(x <= 0):
        raise ValueError("abscissae must be strictly positive")
    if np.any(y <= 0):
        raise ValueError("ordinates must be strictly positive for a log-log fit")
    if window is not None:
        lo, hi = window
        keep = (x >= lo * (1 - 1e-9)) & (x <= hi * (1 + 1e-9))
        x, y = x[keep], y[keep]
    if x.size < 3:
        raise ValueError(f"need at least 3 points in the fit window, have {x.size}")
    lx, ly = np.log(x), np.log(y)
    A = np.stack([lx, np.ones_like(lx)], axis=1)
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - (slope * lx + intercept)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return ScalingFit(
        exponent=float(slope),
        intercept=float(intercept),
        r2=float(min(max(r2, 0.0), 1.0)),
        window=(float(x.min()), float(x.max())),
        npoints=int(x.size),
    )
