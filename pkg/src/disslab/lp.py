"""Dyadic frequency decomposition and Besov-norm estimation.

The dyadic family is built from a quintic smoothstep profile in ``log2 |xi|``:
``chi(xi) = 1`` for ``|xi| <= 1``, ``0`` for ``|xi| >= 2``, and
``1 - S(log2 |xi|)`` in between with ``S(s) = 6 s^5 - 15 s^4 + 10 s^3``.
Band multipliers are differences of rescaled copies,

    phi_k = chi(xi / 2^k) - chi(xi / 2^(k-1)),   k = 1 .. K-1,

supported on the open annulus ``2^(k-1) < |xi| < 2^(k+1)``, with the low-pass
``psi = chi`` on ``|xi| < 2``.  A finite lattice has a top frequency, so the
last band closes the telescope, ``phi_K = 1 - chi(xi / 2^(K-1))``, absorbing
everything above ``2^(K-1)``; the multipliers then sum to 1 exactly at every
lattice frequency.  ``K = log2(n/2) - 1``.

Dyadic levels are indexed on the integer frequency lattice (physical
wavenumber times ``L / 2 pi``); a space-time family measures time
frequencies in units of the spatial fundamental so the radial magnitude is
dimensionally consistent.

L^p norms use unit-normalized measure: the mean over grid points (and over
frames for movies), with ``p = inf`` as the grid max.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .fields import PeriodicGrid, SpaceTimeField
from .fitting import ScalingFit, fit_power_law

__all__ = [
    "DyadicFamily",
    "DegenerateBandsError",
    "BesovEstimate",
    "build_dyadic_family",
    "band_project",
    "besov_norm",
    "fit_besov_exponent",
]


class DegenerateBandsError(ValueError):
    """Raised when every band in a fit window is numerically zero."""


def _smootherstep(s: np.ndarray) -> np.ndarray:
    return s**3 * (6.0 * s**2 - 15.0 * s + 10.0)


def _chi(r: np.ndarray) -> np.ndarray:
    """Radial cutoff: 1 on ``r <= 1``, 0 on ``r >= 2``, quintic in log2 r between."""
    out = np.ones_like(r)
    out[r >= 2.0] = 0.0
    mid = (r > 1.0) & (r < 2.0)
    out[mid] = 1.0 - _smootherstep(np.log2(r[mid]))
    return out


@dataclass(frozen=True)
class DyadicFamily:
    """Bank of dyadic multipliers on a grid's frequency lattice."""

    grid: PeriodicGrid
    K: int
    space_time: bool = False

    def __post_init__(self) -> None:
        if self.grid.n < 16:
            raise ValueError(f"need n >= 16 for at least two bands, got n={self.grid.n}")
        if self.space_time and self.grid.nt < 4:
            raise ValueError("space-time family needs nt >= 4")

    # The magnitude lattice and per-level chi values are cached per family.

    def _radius(self) -> np.ndarray:
        scale = self.grid.L / (2.0 * math.pi)  # physical k -> integer lattice
        r2 = self.grid.k_squared() * scale**2
        if self.space_time:
            w = 2.0 * math.pi * np.fft.fftfreq(self.grid.nt, d=self.grid.dt) * scale
            r2 = r2[None, ...] + (w**2).reshape((self.grid.nt,) + (1,) * self.grid.d)
        return np.sqrt(r2)

    @lru_cache(maxsize=None)
    def _chi_level(self, level: int) -> np.ndarray:
        return _chi(self._radius() / float(2**level))

    def psi_hat(self) -> np.ndarray:
        """Low-pass multiplier, supported on ``|xi| < 2``."""
        return self._chi_level(0)

    def phi_hat(self, k: int) -> np.ndarray:
        """Band-``k`` multiplier, ``1 <= k <= K``."""
        if not (1 <= k <= self.K):
            raise ValueError(f"band index {k} outside [1, {self.K}]")
        if k == self.K:
            return 1.0 - self._chi_level(self.K - 1)
        return self._chi_level(k) - self._chi_level(k - 1)

    def band_support(self, k: int) -> tuple[float, float]:
        """Open annulus ``(2^(k-1), 2^(k+1))`` carrying band k (top band: up to Nyquist)."""
        hi = math.inf if k == self.K else float(2 ** (k + 1))
        return (float(2 ** (k - 1)), hi)


def build_dyadic_family(grid: PeriodicGrid, space_time: bool = False) -> DyadicFamily:
    """Dyadic family with ``K = log2(n/2) - 1`` bands."""
    K = int(math.log2(grid.n // 2)) - 1
    return DyadicFamily(grid=grid, K=K, space_time=space_time)


def _apply_multiplier(field: SpaceTimeField, family: DyadicFamily, mult: np.ndarray) -> np.ndarray:
    grid = field.grid
    if family.space_time:
        axes = (0,) + tuple(range(2, 2 + grid.d))
        f_hat = np.fft.fftn(field.samples, axes=axes)
        m = mult.reshape((grid.nt, 1) + grid.shape_space)
        return np.fft.ifftn(f_hat * m, axes=axes).real
    axes = tuple(range(2, 2 + grid.d))
    f_hat = np.fft.fftn(field.samples, axes=axes)
    m = mult.reshape((1, 1) + grid.shape_space)
    return np.fft.ifftn(f_hat * m, axes=axes).real


def band_project(field: SpaceTimeField, family: DyadicFamily, k: int) -> SpaceTimeField:
    """Project onto band ``k`` (``k = 0`` selects the low-pass block)."""
    if field.grid.n != family.grid.n or field.grid.d != family.grid.d:
        raise ValueError("field and family live on different grids")
    mult = family.psi_hat() if k == 0 else family.phi_hat(k)
    out = _apply_multiplier(field, family, mult)
    return field.with_samples(out, name=f"{field.name}:band{k}",
                              metadata={"band": k, "space_time": family.space_time})


def _magnitude(samples: np.ndarray) -> np.ndarray:
    # (nt, c, *space) -> (nt, *space) pointwise Euclidean magnitude
    if samples.shape[1] == 1:
        return np.abs(samples[:, 0])
    return np.sqrt(np.sum(samples**2, axis=1))


def _movie_lp(samples: np.ndarray, p: float) -> float:
    """Unit-normalized L^p over frames of spatial slice L^p norms."""
    mag = _magnitude(samples)
    if math.isinf(p):
        return float(mag.max())
    space_axes = tuple(range(1, mag.ndim))
    slice_norms = np.mean(mag**p, axis=space_axes) ** (1.0 / p)
    return float(np.mean(slice_norms**p) ** (1.0 / p))


@dataclass(frozen=True)
class BesovEstimate:
    """Band norms and the assembled Besov norm at one (alpha, p)."""

    p: float
    alpha: float
    lowpass: float
    band_norms: tuple[float, ...]
    norm: float
    sigma_fit: ScalingFit | None = None

    def to_dict(self) -> dict:
        return {
            "p": None if math.isinf(self.p) else self.p,
            "alpha": self.alpha,
            "lowpass": self.lowpass,
            "bands": list(self.band_norms),
            "norm": self.norm,
            "sigma_fit": self.sigma_fit.to_dict() if self.sigma_fit else None,
        }


def _band_norms(field: SpaceTimeField, family: DyadicFamily, p: float) -> tuple[float, list[float]]:
    lowpass = _movie_lp(band_project(field, family, 0).samples, p)
    bands = [_movie_lp(band_project(field, family, k).samples, p)
             for k in range(1, family.K + 1)]
    return lowpass, bands


def besov_norm(field: SpaceTimeField, alpha: float, p: float,
               family: DyadicFamily) -> BesovEstimate:
    """Besov norm ``lowpass + sup_k 2^(k alpha) ||band_k||_p``.

    Movies are measured per time slice with the slice norms combined in
    L^p over frames; a space-time family measures the full (d+1)-lattice
    blocks instead.
    """
    lowpass, bands = _band_norms(field, family, p)
    weighted = [2.0 ** (k * alpha) * bands[k - 1] for k in range(1, family.K + 1)]
    return BesovEstimate(p=p, alpha=alpha, lowpass=lowpass,
                         band_norms=tuple(bands), norm=lowpass + max(weighted))


def fit_besov_exponent(field: SpaceTimeField, p: float, family: DyadicFamily,
                       window: tuple[float, float] | None = None) -> ScalingFit:
    """Regularity exponent from the decay of dyadic band norms.

    Fits ``log ||band_k||_p`` against ``log 2^k`` and returns the negated
    slope as the exponent.  The default window spans bands 2 .. K-1; the
    aggregated top band and the mode-starved first band are excluded.
    """
    lowpass, bands = _band_norms(field, family, p)
    ks = np.arange(1, family.K + 1)
    x = 2.0**ks
    y = np.asarray(bands)
    if window is None:
        if family.K < 4:
            raise ValueError("too few bands for the default fit window; pass one explicitly")
        window = (float(2**2), float(2 ** (family.K - 1)))
    keep = (x >= window[0] * (1 - 1e-9)) & (x <= window[1] * (1 + 1e-9))
    floor = 1e-14 * max(lowpass, max(bands, default=0.0))
    if not np.any(keep) or np.max(y[keep], initial=0.0) <= floor:
        raise DegenerateBandsError(
            "all bands in the fit window are numerically zero (field too smooth "
            "or window outside the populated range)"
        )
    if np.any(y[keep] <= 0.0):
        raise DegenerateBandsError("zero band norm inside the fit window")
    fit = fit_power_law(x[keep], y[keep])
    return ScalingFit(exponent=-fit.exponent, intercept=fit.intercept, r2=fit.r2,
                      window=fit.window, npoints=fit.npoints)
