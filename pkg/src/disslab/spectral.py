"""Spectral derivative and transform helpers.

All routines act on the trailing ``d`` axes of an array (any leading time or
component axes broadcast through), using the angular wavenumber lattice of
the supplied grid.  Derivatives of band-limited grid functions are exact up
to roundoff.
"""
from __future__ import annotations

import numpy as np

from .fields import PeriodicGrid

__all__ = [
    "fft_space",
    "ifft_space",
    "spectral_gradient",
    "spectral_divergence",
    "spectral_laplacian",
    "dealias_mask",
    "solve_poisson",
]


def _space_axes(grid: PeriodicGrid, arr: np.ndarray) -> tuple[int, ...]:
    if arr.ndim < grid.d:
        raise ValueError("array has fewer axes than the grid dimension")
    return tuple(range(arr.ndim - grid.d, arr.ndim))


def _broadcast_k(grid: PeriodicGrid, arr_ndim: int, axis: int) -> np.ndarray:
    k = grid.wavenumbers()[axis]
    return k.reshape((1,) * (arr_ndim - grid.d) + k.shape)


def fft_space(arr: np.ndarray, grid: PeriodicGrid) -> np.ndarray:
    return np.fft.fftn(arr, axes=_space_axes(grid, arr))


def ifft_space(arr_hat: np.ndarray, grid: PeriodicGrid) -> np.ndarray:
    return np.fft.ifftn(arr_hat, axes=_space_axes(grid, arr_hat)).real


def spectral_gradient(arr: np.ndarray, grid: PeriodicGrid) -> np.ndarray:
    """Gradient along each spatial axis; output has a new leading axis of size d."""
    axes = _space_axes(grid, arr)
    arr_hat = np.fft.fftn(arr, axes=axes)
    out = np.empty((grid.d,) + arr.shape, dtype=np.float64)
    for axis in range(grid.d):
        k = _broadcast_k(grid, arr.ndim, axis)
        out[axis] = np.fft.ifftn(1j * k * arr_hat, axes=axes).real
    return out

def spectral_divergence(vec: np.ndarray, grid: PeriodicGrid, component_axis: int = 0) -> np.ndarray:
    """Divergence of a vector field whose components sit on ``component_axis``."""
    vec = np.moveaxis(vec, component_axis, 0)
    if vec.shape[0] != grid.d:
        raise ValueError(f"expected {grid.d} components, got {vec.shape[0]}")
    out = np.zeros(vec.shape[1:])
    axes = _space_axes(grid, vec[0])
    for axis in range(grid.d):
        comp_hat = np.fft.fftn(vec[axis], axes=axes)
        k = _broadcast_k(grid, vec[axis].ndim, axis)
        out = out + np.fft.ifftn(1j * k * comp_hat, axes=axes).real
    return out


def spectral_laplacian(arr: np.ndarray, grid: PeriodicGrid) -> np.ndarray:
    axes = _space_axes(grid, arr)
    arr_hat = np.fft.fftn(arr, axes=axes)
    k2 = grid.k_squared().reshape((1,) * (arr.ndim - grid.d) + grid.shape_space)
    return np.fft.ifftn(-k2 * arr_hat, axes=axes).real


def dealias_mask(grid: PeriodicGrid) -> np.ndarray:
    """Two-thirds rule mask: keep ``|k| <= n/3`` along every axis."""
    cutoff = (2.0 / 3.0) * (np.pi * grid.n / grid.L)  # two thirds of Nyquist
    mask = np.ones(grid.shape_space, dtype=bool)
    for k in grid.wavenumbers():
        mask &= np.abs(k) <= cutoff + 1e-12
    return mask


def solve_poisson(rhs: np.ndarray, grid: PeriodicGrid) -> np.ndarray:
    """Zero-mean solution of ``-lap(q) = rhs`` (the rhs mean is projected out)."""
    axes = _space_axes(grid, rhs)
    rhs_hat = np.fft.fftn(rhs, axes=axes)
    k2 = grid.k_squared().reshape((1,) * (rhs.ndim - grid.d) + grid.shape_space)
    with np.errstate(divide="ignore", invalid="ignore"):
        q_hat = np.where(k2 > 0, rhs_hat / np.where(k2 > 0, k2, 1.0), 0.0)
    return np.fft.ifftn(q_hat, axes=axes).real
