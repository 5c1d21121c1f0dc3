"""Compact-support mollification of grid fields.

The mollifier is a discrete stencil sampled from the polynomial bump
``b(r) = (1 - r^2)^power`` on ``r < 1`` (``power = 4`` by default), rescaled
to a spatial radius ``ell`` and optionally a time radius ``ell_t``, and
renormalized to unit mass on the stencil.  The operator is genuinely a
physical-space convolution with non-negative compactly supported weights;
the circular spatial convolution is evaluated through FFTs, which computes
the identical sums to roundoff.

Space is periodic, time is not: space-time mollification trims a validity
window of ``radius`` frames at each end of a movie.  Scales below two grid
spacings degenerate to the identity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as _dc_field
from typing import Any

import numpy as np

from .fields import PeriodicGrid, SpaceTimeField, lp_norm
from .fitting import ScalingFit, fit_power_law
from .spectral import spectral_gradient

__all__ = [
    "Mollifier",
    "make_mollifier",
    "mollify",
    "commutator",
    "commutator_pairs",
    "mollification_rate_report",
]


def _bump(r2: np.ndarray, power: int) -> np.ndarray:
    core = np.clip(1.0 - r2, 0.0, None)
    return core**power


@dataclass(frozen=True)
class Mollifier:
    """Discrete bump stencil at spatial scale ``ell`` (and time scale ``ell_t``).

    ``ell_t is None`` gives a space-only stencil applied frame by frame.
    Otherwise the profile is radial in the scaled variable
    ``sqrt(|x/ell|^2 + (t/ell_t)^2)``; isotropic space-time smoothing
    passes ``ell_t = ell`` (times and lengths in the same physical units).
    """

    grid: PeriodicGrid
    ell: float
    ell_t: float | None = None
    power: int = 4
    _cache: dict[str, Any] = _dc_field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.ell <= 0:
            raise ValueError(f"ell must be positive, got {self.ell}")
        if self.ell > self.grid.L / 2:
            raise ValueError(f"ell={self.ell} exceeds half the domain {self.grid.L / 2}")
        if self.power < 1:
            raise ValueError("power must be >= 1")
        if self.ell_t is not None:
            if self.ell_t <= 0:
                raise ValueError(f"ell_t must be positive, got {self.ell_t}")
            if self.grid.nt < 2:
                raise ValueError("space-time mollifier needs a movie grid (nt > 1)")

    # -- stencil construction ----------------------------------------------

    @property
    def is_identity(self) -> bool:
        return self.ell < 2.0 * self.grid.dx and (
            self.ell_t is None or self.ell_t < 2.0 * self.grid.dt
        )

    @property
    def space_radius_cells(self) -> int:
        if self.ell < 2.0 * self.grid.dx:
            return 0
        return int(math.ceil(self.ell / self.grid.dx)) - 1

    @property
    def time_radius_frames(self) -> int:
        if self.ell_t is None or self.ell_t < 2.0 * self.grid.dt:
            return 0
        return int(math.ceil(self.ell_t / self.grid.dt)) - 1

    def time_offsets(self) -> np.ndarray:
        rt = self.time_radius_frames
        return np.arange(-rt, rt + 1)

    def _offset_grids(self) -> tuple[list[np.ndarray], np.ndarray]:
        """Spatial offset coordinate arrays and the scaled r^2 lattice per time slice."""
        rs = self.space_radius_cells
        ax = np.arange(-rs, rs + 1) * self.grid.dx
        coords = np.meshgrid(*([ax] * self.grid.d), indexing="ij")
        r2x = sum(c**2 for c in coords) / self.ell**2
        return coords, r2x

    def _stencil(self) -> tuple[np.ndarray, float]:
        """Raw bump samples of shape (ntoff,) + space-stencil shape and their sum."""
        if "stencil" not in self._cache:
            _, r2x = self._offset_grids()
            toffs = self.time_offsets()
            if self.ell_t is None or self.time_radius_frames == 0:
                r2 = r2x[None]
            else:
                tt = (toffs * self.grid.dt) / self.ell_t
                r2 = r2x[None] + (tt**2).reshape((-1,) + (1,) * self.grid.d)
            raw = _bump(r2, self.power)
            if self.is_identity:
                raw = np.zeros_like(raw)
                center = tuple(s // 2 for s in raw.shape)
                raw[center] = 1.0
            total = float(raw.sum())
            self._cache["stencil"] = (raw / total, 1.0)
        return self._cache["stencil"]

    def _embed_slice(self, sl: np.ndarray) -> np.ndarray:
        """Place a spatial stencil slice on the periodic grid (offset 0 at index 0)."""
        rs = self.space_radius_cells
        kernel = np.zeros(self.grid.shape_space)
        idx = [np.arange(-rs, rs + 1) % self.grid.n] * self.grid.d
        mesh = np.meshgrid(*idx, indexing="ij")
        np.add.at(kernel, tuple(m for m in mesh), sl)
        return kernel

    def slice_kernel_hats(self) -> np.ndarray:
        """FFTs of the per-time-offset spatial kernels, shape (ntoff,) + space."""
        if "hats" not in self._cache:
            w, _ = self._stencil()
            hats = np.empty((w.shape[0],) + self.grid.shape_space)
            for j in range(w.shape[0]):
                hats[j] = np.fft.fftn(self._embed_slice(w[j])).real
            self._cache["hats"] = hats
        return self._cache["hats"]

    def spatial_multiplier(self) -> np.ndarray:
        """Frequency response of the space-collapsed stencil (sums time slices)."""
        return self.slice_kernel_hats().sum(axis=0)

    def weights_sum(self) -> float:
        w, _ = self._stencil()
        return float(w.sum())

    # -- application --------------------------------------------------------

    def valid_frames(self, nt: int) -> tuple[int, int]:
        """Inclusive frame window unaffected by the movie's time boundary."""
        rt = self.time_radius_frames
        if 2 * rt >= nt:
            raise ValueError(f"time radius {rt} frames does not fit a movie of {nt} frames")
        return (rt, nt - 1 - rt)

    def apply(self, samples: np.ndarray) -> np.ndarray:
        """Mollify ``(nt, c, *space)`` samples.

        Frames outside the valid window use edge-clamped time indexing and
        should not feed quantitative estimates; ``valid_frames`` gives the
        trustworthy range.
        """
        nt = samples.shape[0]
        hats = self.slice_kernel_hats()
        toffs = self.time_offsets()
        axes = tuple(range(2, 2 + self.grid.d))
        f_hat = np.fft.fftn(samples, axes=axes)
        if len(toffs) == 1:
            out_hat = f_hat * hats[0][None, None]
            return np.fft.ifftn(out_hat, axes=axes).real
        self.valid_frames(nt)
        out_hat = np.zeros_like(f_hat)
        for j, frame_shift in enumerate(toffs):
            src = np.clip(np.arange(nt) - frame_shift, 0, nt - 1)
            out_hat += f_hat[src] * hats[j][None, None]
        return np.fft.ifftn(out_hat, axes=axes).real

    # -- kernels for materialized weak pairings ----------------------------

    def time_derivative_stencil(self) -> np.ndarray:
        """Sampled analytic d/dt of the normalized bump, shape (ntoff,) + space.

        Antisymmetric across the time offsets, so it annihilates fields
        that are constant in time regardless of the frame spacing.
        """
        _, r2x = self._offset_grids()
        toffs = self.time_offsets()
        if self.ell_t is None or self.time_radius_frames == 0:
            return np.zeros((1,) + r2x.shape)
        tt = (toffs * self.grid.dt) / self.ell_t
        r2 = r2x[None] + (tt**2).reshape((-1,) + (1,) * self.grid.d)
        raw = _bump(r2, self.power)
        Z = float(raw.sum())
        p = self.power
        core = np.clip(1.0 - r2, 0.0, None)
        bp_over_r = np.where(r2 < 1.0, -2.0 * p * core ** (p - 1), 0.0)   # b'(r)/r
        tphys = (toffs * self.grid.dt).reshape((-1,) + (1,) * self.grid.d)
        return (bp_over_r * tphys / self.ell_t**2) / Z

    def pairing_kernel_hats(self) -> dict[str, np.ndarray]:
        """Fourier-side derivative kernels for materialized weak pairings.

        One array of shape (ntoff,) + space per key.  ``value`` and ``dt``
        transform the sampled bump and its sampled analytic time
        derivative; ``dx0..`` and ``lap`` are spectral multipliers applied
        to the value transform, so every spatial kernel kills constant
        fields on the grid exactly instead of up to a sampling defect.
        """
        vhat = self.slice_kernel_hats()
        dts = self.time_derivative_stencil()
        dthat = np.stack([np.fft.fftn(self._embed_slice(dts[j])).real
                          for j in range(dts.shape[0])])
        ks = self.grid.wavenumbers()
        out: dict[str, np.ndarray] = {"value": vhat, "dt": dthat}
        for axis in range(self.grid.d):
            out[f"dx{axis}"] = 1j * ks[axis] * vhat
        out["lap"] = -sum(k**2 for k in ks) * vhat
        return out


def make_mollifier(grid: PeriodicGrid, ell: float, ell_t: float | None = None,
                   power: int = 4) -> Mollifier:
    return Mollifier(grid=grid, ell=ell, ell_t=ell_t, power=power)


def mollify(field: SpaceTimeField, mollifier: Mollifier | float) -> SpaceTimeField:
    """Mollified copy of ``field``; scalar second argument means a space-only scale."""
    if not isinstance(mollifier, Mollifier):
        mollifier = make_mollifier(field.grid, float(mollifier))
    if mollifier.grid.n != field.grid.n or mollifier.grid.d != field.grid.d:
        raise ValueError("mollifier and field grids do not match")
    out = mollifier.apply(field.samples)
    meta: dict[str, Any] = {"ell": mollifier.ell, "ell_t": mollifier.ell_t}
    if mollifier.time_radius_frames > 0:
        meta["valid_frames"] = mollifier.valid_frames(field.grid.nt)
    return field.with_samples(out, name=f"{field.name}:mollified", metadata=meta)


def commutator_pairs(c: int) -> list[tuple[int, int]]:
    """Component index pairs (i <= j) for the symmetric tensor storage order."""
    return [(i, j) for i in range(c) for j in range(i, c)]


def commutator(field: SpaceTimeField, mollifier: Mollifier | float) -> SpaceTimeField:
    """Smoothing commutator ``u_l (x) u_l - (u (x) u)_l`` in symmetric storage.

    The result has ``c (c + 1) / 2`` components ordered ``(0,0), (0,1), ...``.
    Vector fields only; the quadratic structure is what makes this a tensor.
    """
    if field.components < 2:
        raise ValueError("commutator needs a vector field (>= 2 components)")
    if not isinstance(mollifier, Mollifier):
        mollifier = make_mollifier(field.grid, float(mollifier))
    pairs = commutator_pairs(field.components)
    out = _pair_commutator(field.samples, mollifier, pairs)
    return field.with_samples(out, name=f"{field.name}:commutator",
                              metadata={"ell": mollifier.ell, "pairs": pairs})


def _pair_commutator(samples: np.ndarray, mollifier: Mollifier,
                     pairs: list[tuple[int, int]]) -> np.ndarray:
    smooth = mollifier.apply(samples)
    out = np.empty((samples.shape[0], len(pairs)) + samples.shape[2:])
    for idx, (i, j) in enumerate(pairs):
        prod = samples[:, i] * samples[:, j]
        prod_smooth = mollifier.apply(prod[:, None])[:, 0]
        out[:, idx] = smooth[:, i] * smooth[:, j] - prod_smooth
    return out


def mollification_rate_report(field: SpaceTimeField, p: float,
                              sigma_target: float | None, ells,
                              power: int = 4) -> dict:
    """Scaling of the three basic mollification estimates over ``ells``.

    Fits, against the scale, the norms of ``f - f_l`` (expected exponent
    ``sigma``), of ``grad f_l`` (expected ``sigma - 1``), and of
    ``grad(f_l g_l - (f g)_l)`` with ``g = f`` (expected ``2 sigma - 1``),
    the last in L^{p/2}.  Returns the raw curves, the fits and, when a
    target roughness is given, the predicted exponents.  A field with no
    small-scale content (all defect norms at roundoff) is reported with
    ``degenerate: True`` and no fits.
    """
    ells = sorted(float(e) for e in ells)
    if len(ells) < 4:
        raise ValueError("need at least 4 scales")
    grid = field.grid
    diff_norms, grad_norms, comm_norms = [], [], []
    for ell in ells:
        mol = make_mollifier(grid, ell, power=power)
        smooth = mol.apply(field.samples)
        diff = field.samples - smooth
        diff_norms.append(lp_norm(np.sqrt(np.sum(diff**2, axis=1)), p))
        grad = spectral_gradient(smooth, grid)  # (d, nt, c, *space)
        grad_norms.append(lp_norm(np.sqrt(np.sum(grad**2, axis=0)), p))
        comm = _pair_commutator(field.samples, mol, [(i, i) for i in range(field.components)])
        comm_grad = spectral_gradient(comm, grid)
        comm_norms.append(lp_norm(np.sqrt(np.sum(comm_grad**2, axis=0)), p / 2.0))
    scale = max(lp_norm(field.samples, p), 1.0)
    if max(diff_norms) <= 1e-13 * scale:
        return {"ells": ells, "degenerate": True,
                "difference": {"norms": diff_norms, "fit": None},
                "gradient": {"norms": grad_norms, "fit": None},
                "commutator_gradient": {"norms": comm_norms, "fit": None}}
    report = {
        "ells": ells,
        "degenerate": False,
        "difference": {"norms": diff_norms, "fit": fit_power_law(ells, diff_norms)},
        "gradient": {"norms": grad_norms, "fit": fit_power_law(ells, grad_norms)},
        "commutator_gradient": {"norms": comm_norms, "fit": fit_power_law(ells, comm_norms)},
    }
    if sigma_target is not None:
        report["predicted"] = {
            "difference": sigma_target,
            "gradient": sigma_target - 1.0,
            "commutator_gradient": 2.0 * sigma_target - 1.0,
        }
    return report
