"""Velocity-increment statistics on periodic movies.

Absolute structure functions average the p-th power of the increment
magnitude ``|u(x + l z) - u(x)|`` over grid points, saved frames and a
fixed set of unit directions.  The longitudinal variant averages the
signed cube of the direction-projected increment and applies the
dimensional prefactor ``d (d + 2) / 12``.  Exponent estimates come from
least-squares fits on log-log axes.

Separations are physical lengths and must be whole multiples of the grid
spacing; directions off the grid axes sample the shifted field by
bilinear interpolation.  Averages use uniform weights throughout, and
each curve records which frames and how many directions entered it.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fields import PeriodicGrid, SpaceTimeField
from .fitting import ScalingFit, fit_power_law

__all__ = [
    "SFCurve",
    "direction_set",
    "longitudinal_prefactor",
    "absolute_sf",
    "longitudinal_sf",
    "fit_zeta",
    "exponent_table",
]


def direction_set(d: int, ndirections: int) -> np.ndarray:
    """Unit direction vectors, shape ``(ndirections, d)``.

    One dimension admits one or two directions (right, then left).  Two
    dimensions use equi-angular vectors starting on the positive x axis;
    at least 8 are required so the angular quadrature integrates cubic
    integrands exactly.
    """
    if d == 1:
        if ndirections not in (1, 2):
            raise ValueError("1d fields take 1 or 2 directions")
        return np.array([[1.0], [-1.0]][:ndirections])
    if d == 2:
        if ndirections < 8:
            raise ValueError("2d direction sets need at least 8 equi-angular vectors")
        angles = 2.0 * np.pi * np.arange(ndirections) / ndirections
        return np.stack([np.cos(angles), np.sin(angles)], axis=1)
    raise ValueError(f"no direction set for d = {d}")


def longitudinal_prefactor(d: int) -> float:
    """Dimensional constant ``d (d + 2) / 12`` of the longitudinal average."""
    if d < 2:
        raise ValueError("longitudinal increments need d >= 2")
    return d * (d + 2) / 12.0


def _shifted(data: np.ndarray, grid: PeriodicGrid, cells: np.ndarray) -> np.ndarray:
    """Sample ``data`` at every point displaced by ``cells`` grid units.

    Integer displacements reduce to periodic rolls; fractional ones use
    bilinear corner weights.  Near-integers are snapped so axis-aligned
    directions stay exact.
    """
    snapped = np.where(np.abs(cells - np.round(cells)) < 1e-9, np.round(cells), cells)
    base = np.floor(snapped).astype(int)
    frac = snapped - base
    axes = tuple(range(2, 2 + grid.d))
    out: np.ndarray | None = None
    for corner in itertools.product((0, 1), repeat=grid.d):
        w = 1.0
        for a, bit in enumerate(corner):
            w *= frac[a] if bit else 1.0 - frac[a]
        if w == 0.0:
            continue
        shift = tuple(-(base[a] + corner[a]) for a in range(grid.d))
        term = np.roll(data, shift, axis=axes)
        out = w * term if out is None else out + w * term
    assert out is not None
    return out


@dataclass(frozen=True)
class SFCurve:
    """Structure-function values over a list of separations.

    ``averaging`` records the estimator's sample population: which frames
    entered, with what weights, and how many directions.  Absolute curves
    are nonnegative by construction; longitudinal ones are signed.
    """

    p: float
    kind: str
    separations: np.ndarray
    values: np.ndarray
    averaging: dict

    def __post_init__(self) -> None:
        if self.kind not in ("absolute", "longitudinal"):
            raise ValueError(f"unknown curve kind {self.kind!r}")
        seps = np.asarray(self.separations, dtype=np.float64)
        vals = np.asarray(self.values, dtype=np.float64)
        if seps.ndim != 1 or seps.shape != vals.shape:
            raise ValueError("separations and values must be matching 1d arrays")
        if np.any(np.diff(seps) <= 0):
            raise ValueError("separations must be strictly increasing")
        if self.kind == "absolute" and np.any(vals < 0):
            raise ValueError("absolute curve values cannot be negative")

    def to_rows(self) -> list[tuple[float, float]]:
        """(separation, value) pairs, ready for tabular output."""
        return [(float(l), float(v)) for l, v in zip(self.separations, self.values)]


def _separation_cells(grid: PeriodicGrid, separations: Sequence[float]) -> np.ndarray:
    seps = np.asarray(separations, dtype=np.float64)
    if seps.ndim != 1 or seps.size == 0:
        raise ValueError("separations must be a nonempty 1d sequence")
    if np.any(seps <= 0) or np.any(np.diff(seps) <= 0):
        raise ValueError("separations must be positive and strictly increasing")
    cells = seps / grid.dx
    if np.any(np.abs(cells - np.round(cells)) > 1e-8 * np.maximum(1.0, cells)):
        raise ValueError("separations must be whole multiples of the grid spacing")
    cells = np.round(cells)
    if cells.max() > grid.n // 4:
        raise ValueError(
            f"separation {seps[np.argmax(cells)]:.4g} exceeds a quarter period; "
            "periodic wrap-around would contaminate the census"
        )
    return cells


def _frame_block(u: SpaceTimeField, frames: Sequence[int] | None) -> tuple[np.ndarray, str]:
    if frames is None:
        return u.samples, f"{u.grid.nt} frames, uniform weights"
    idx = np.asarray(frames, dtype=int)
    if idx.ndim != 1 or idx.size == 0:
        raise ValueError("frames must be a nonempty 1d index sequence")
    if np.any(idx < 0) or np.any(idx >= u.grid.nt):
        raise ValueError("frame index out of range")
    return u.samples[idx], f"{idx.size} selected frames, uniform weights"


def absolute_sf(u: SpaceTimeField, ps: Sequence[float], separations: Sequence[float],
                ndirections: int | None = None,
                frames: Sequence[int] | None = None) -> list[SFCurve]:
    """Absolute structure functions for each moment order in ``ps``.

    Every curve shares one increment census: for each separation and
    direction the field is sampled at the displaced points, the increment
    magnitude taken over components, and the p-th powers averaged over
    space, frames and directions with uniform weights.
    """
    grid = u.grid
    cells = _separation_cells(grid, separations)
    m = ndirections if ndirections is not None else (2 if grid.d == 1 else 16)
    dirs = direction_set(grid.d, m)
    data, frame_note = _frame_block(u, frames)
    ps = [float(p) for p in ps]
    if any(p <= 0 for p in ps):
        raise ValueError("moment orders must be positive")
    table = np.zeros((len(ps), cells.size))
    for i, c in enumerate(cells):
        for z in dirs:
            delta = _shifted(data, grid, c * z) - data
            mag = np.sqrt(np.sum(delta**2, axis=1))
            for j, p in enumerate(ps):
                table[j, i] += float(np.mean(mag**p))
    table /= len(dirs)
    averaging = {
        "space": "all grid points",
        "time": frame_note,
        "directions": f"{len(dirs)} equi-angular",
    }
    seps = np.asarray(separations, dtype=np.float64)
    return [SFCurve(p=p, kind="absolute", separations=seps.copy(),
                    values=table[j].copy(), averaging=dict(averaging))
            for j, p in enumerate(ps)]


def longitudinal_sf(u: SpaceTimeField, separations: Sequence[float],
                    ndirections: int | None = None,
                    frames: Sequence[int] | None = None) -> SFCurve:
    """Signed third-order longitudinal structure function.

    Averages ``(z . delta u)^3`` over space, frames and directions, then
    scales by ``d (d + 2) / 12``.  Needs a d-component velocity on a
    two-dimensional or larger grid; the cube keeps its sign, so values
    can be negative.
    """
    grid = u.grid
    if grid.d < 2 or u.components != grid.d:
        raise ValueError("longitudinal increments need a d-component velocity, d >= 2")
    cells = _separation_cells(grid, separations)
    m = ndirections if ndirections is not None else 16
    dirs = direction_set(grid.d, m)
    data, frame_note = _frame_block(u, frames)
    pref = longitudinal_prefactor(grid.d)
    vals = np.zeros(cells.size)
    for i, c in enumerate(cells):
        for z in dirs:
            delta = _shifted(data, grid, c * z) - data
            proj = np.einsum("a,ta...->t...", z, delta)
            vals[i] += float(np.mean(proj**3))
    vals *= pref / len(dirs)
    averaging = {
        "space": "all grid points",
        "time": frame_note,
        "directions": f"{len(dirs)} equi-angular",
    }
    return SFCurve(p=3.0, kind="longitudinal",
                   separations=np.asarray(separations, dtype=np.float64),
                   values=vals, averaging=averaging)


def fit_zeta(curve: SFCurve, window: tuple[float, float] | None = None) -> ScalingFit:
    """Scaling exponent of a structure-function curve.

    Log-log slope of the values against the separations over ``window``
    (all separations by default).  At least four points must survive the
    window; zero or signed values are degenerate and raise, since the fit
    lives on logarithms.  The matching regularity index is
    ``exponent / p``.
    """
    seps = np.asarray(curve.separations, dtype=np.float64)
    if window is not None:
        lo, hi = window
        inside = int(np.sum((seps >= lo * (1 - 1e-9)) & (seps <= hi * (1 + 1e-9))))
    else:
        inside = seps.size
    if inside < 4:
        raise ValueError(f"need at least 4 separations in the fit window, have {inside}")
    return fit_power_law(seps, curve.values, window=window)


def exponent_table(curves: Sequence[SFCurve],
                   window: tuple[float, float] | None = None) -> list[dict]:
    """Fitted exponents for several curves as JSON-ready rows.

    Each row carries the moment order, the fitted exponent ``zeta``, the
    regularity index ``sigma = zeta / p`` and the fit's ``r2``.
    """
    rows = []
    for curve in curves:
        fit = fit_zeta(curve, window=window)
        rows.append({
            "p": curve.p,
            "zeta": fit.exponent,
            "sigma": fit.exponent / curve.p,
            "r2": fit.r2,
        })
    return rows
