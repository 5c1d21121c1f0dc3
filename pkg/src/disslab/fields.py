"""Periodic grids, space-time field containers and synthetic field factories.

Fields live on uniform periodic grids over ``[0, L)^d`` with ``n`` points per
axis (power of two) and an optional uniform time axis of ``nt`` frames spaced
``dt`` apart.  Samples are stored in physical space as float64 arrays of shape
``(nt, c, n, ..., n)`` with time outermost and space row-major, which is also
the payload order of the DLF1 container (see :mod:`disslab.io`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as _dc_field
from typing import Any, Callable

import numpy as np

TWO_PI = 2.0 * math.pi

__all__ = [
    "PeriodicGrid",
    "SpaceTimeField",
    "make_grid",
    "synth_field",
    "taylor_green_movie",
    "taylor_green_pressure_movie",
    "crossed_shear_velocity",
    "lp_norm",
]


def _is_power_of_two(m: int) -> bool:
    return m >= 1 and (m & (m - 1)) == 0


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform periodic grid on ``[0, L)^d``, optionally carrying a time axis.

    Parameters
    ----------
    d : int
        Spatial dimension, one of 1, 2, 3.
    n : int
        Points per axis; a power of two, at least 8.
    L : float
        Domain edge length.  Defaults to ``2*pi``.
    nt : int
        Number of time frames (1 for static fields).
    dt : float
        Frame spacing; ignored for ``nt == 1``.
    """

    d: int
    n: int
    L: float = TWO_PI
    nt: int = 1
    dt: float = 1.0

    def __post_init__(self) -> None:
        if self.d not in (1, 2, 3):
            raise ValueError(f"d must be 1, 2 or 3, got {self.d}")
        if self.n < 8 or not _is_power_of_two(self.n):
            raise ValueError(f"n must be a power of two >= 8, got {self.n}")
        if not (self.L > 0.0):
            raise ValueError(f"L must be positive, got {self.L}")
        if self.nt < 1:
            raise ValueError(f"nt must be >= 1, got {self.nt}")
        if self.nt > 1 and not (self.dt > 0.0):
            raise ValueError(f"dt must be positive for nt > 1, got {self.dt}")

    # -- geometry -----------------------------------------------------------

    @property
    def dx(self) -> float:
        return self.L / self.n

    @property
    def shape_space(self) -> tuple[int, ...]:
        return (self.n,) * self.d

    @property
    def npoints_space(self) -> int:
        return self.n**self.d

    @property
    def volume(self) -> float:
        return self.L**self.d

    @property
    def cell_volume(self) -> float:
        return self.dx**self.d

    @property
    def duration(self) -> float:
        return 0.0 if self.nt == 1 else (self.nt - 1) * self.dt

    def times(self) -> np.ndarray:
        return np.arange(self.nt) * (self.dt if self.nt > 1 else 0.0)

    def axis_coords(self) -> np.ndarray:
        return np.arange(self.n) * self.dx

    def meshgrid(self) -> list[np.ndarray]:
        """Coordinate arrays, one per axis, broadcastable over space."""
        x = self.axis_coords()
        out = []
        for axis in range(self.d):
            shape = [1] * self.d
            shape[axis] = self.n
            out.append(x.reshape(shape))
        return out

    # -- frequency lattice --------------------------------------------------

    def wavenumbers(self) -> list[np.ndarray]:
        """Angular wavenumber arrays, one per axis, broadcastable over space."""
        k = TWO_PI * np.fft.fftfreq(self.n, d=self.dx)
        out = []
        for axis in range(self.d):
            shape = [1] * self.d
            shape[axis] = self.n
            out.append(k.reshape(shape))
        return out

    def k_squared(self) -> np.ndarray:
        ks = self.wavenumbers()
        out = np.zeros(self.shape_space)
        for k in ks:
            out = out + k**2
        return out

    def k_magnitude(self) -> np.ndarray:
        return np.sqrt(self.k_squared())

    def with_time(self, nt: int, dt: float) -> "PeriodicGrid":
        return PeriodicGrid(self.d, self.n, self.L, nt, dt)

    def space_only(self) -> "PeriodicGrid":
        return PeriodicGrid(self.d, self.n, self.L, 1, 1.0)


def make_grid(d: int, n: int, L: float = TWO_PI, nt: int = 1, dt: float = 1.0) -> PeriodicGrid:
    """Construct a validated :class:`PeriodicGrid`."""
    return PeriodicGrid(d=d, n=n, L=L, nt=nt, dt=dt)


@dataclass(frozen=True)
class SpaceTimeField:
    """Physical-space samples of a (possibly vector) field on a grid.

    ``samples`` has shape ``(nt, c) + grid.shape_space`` and is made
    read-only at construction; derived fields are new instances.
    """

    grid: PeriodicGrid
    samples: np.ndarray
    name: str = "field"
    viscosity: float = 0.0
    metadata: dict[str, Any] = _dc_field(default_factory=dict)

    def __post_init__(self) -> None:
        arr = np.asarray(self.samples, dtype=np.float64)
        expected = (self.grid.nt, arr.shape[1] if arr.ndim > 1 else 0) + self.grid.shape_space
        if arr.ndim != 2 + self.grid.d or arr.shape != expected:
            raise ValueError(
                f"samples shape {arr.shape} does not match grid "
                f"(want (nt, c) + {self.grid.shape_space} with nt={self.grid.nt})"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("samples contain non-finite values")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @property
    def components(self) -> int:
        return self.samples.shape[1]

    def frame(self, it: int) -> np.ndarray:
        """View of frame ``it`` with shape ``(c,) + shape_space``."""
        return self.samples[it]

    def component(self, ic: int) -> np.ndarray:
        """View of component ``ic`` with shape ``(nt,) + shape_space``."""
        return self.samples[:, ic]

    def is_static(self) -> bool:
        if self.grid.nt == 1:
            return True
        return bool(np.array_equal(self.samples[0], self.samples[-1]) and
                    np.array_equal(self.samples[0], self.samples[self.grid.nt // 2]))

    def with_samples(self, samples: np.ndarray, **meta: Any) -> "SpaceTimeField":
        md = dict(self.metadata)
        md.update(meta.pop("metadata", {}))
        return SpaceTimeField(self.grid, samples, meta.pop("name", self.name),
                              meta.pop("viscosity", self.viscosity), md)


def _as_movie(grid: PeriodicGrid, frame: np.ndarray) -> np.ndarray:
    """Broadcast one frame of shape (c, *space) over the grid's time axis."""
    return np.broadcast_to(frame, (grid.nt,) + frame.shape).copy()


def _synth_constant(grid: PeriodicGrid, params: dict, rng: np.random.Generator) -> np.ndarray:
    value = float(params.get("value", 0.0))
    c = int(params.get("components", 1))
    return np.full((1, c) + grid.shape_space, value)


def _synth_fourier_mode(grid: PeriodicGrid, params: dict, rng: np.random.Generator) -> np.ndarray:
    j = int(params.get("j", 1))
    amplitude = float(params.get("amplitude", 1.0))
    if not (1 <= j <= grid.n // 2):
        raise ValueError(f"mode number j={j} outside [1, n/2]")
    x = grid.meshgrid()[0]
    u = amplitude * np.cos(j * TWO_PI / grid.L * x)
    u = np.broadcast_to(u, grid.shape_space).copy()
    return u[None, None]

def _synth_taylor_green(grid: PeriodicGrid, params: dict, rng: np.random.Generator) -> np.ndarray:
    if grid.d != 2:
        raise ValueError("taylor_green requires d = 2")
    amplitude = float(params.get("amplitude", 1.0))
    x, y = grid.meshgrid()
    kx = TWO_PI / grid.L
    u = amplitude * np.sin(kx * x) * np.cos(kx * y)
    v = -amplitude * np.cos(kx * x) * np.sin(kx * y)
    return np.stack([np.broadcast_to(u, grid.shape_space),
                     np.broadcast_to(v, grid.shape_space)])[None]


def _synth_sawtooth(grid: PeriodicGrid, params: dict, rng: np.random.Generator) -> np.ndarray:
    if grid.d != 1:
        raise ValueError("sawtooth requires d = 1")
    nshocks = int(params.get("nshocks", 1))
    jump = float(params.get("jump", 1.0))
    if nshocks < 1 or grid.n % nshocks != 0:
        raise ValueError(f"nshocks must divide n, got {nshocks}")
    m = grid.n // nshocks
    # Linear ramp attaining exactly +-jump/2, then a descending jump of size
    # `jump` at each period boundary.
    ramp = jump * (np.arange(m) / (m - 1) - 0.5)
    u = np.tile(ramp, nshocks)
    return u[None, None]


def _power_law_spectrum_field(grid: PeriodicGrid, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Real field with |u_hat(xi)| proportional to |xi|^(-(sigma + d/2))."""
    white = rng.standard_normal(grid.shape_space)
    w_hat = np.fft.fftn(white)
    mag = np.abs(w_hat)
    phase = np.where(mag > 0, w_hat / np.where(mag > 0, mag, 1.0), 1.0)
    kmag = grid.k_magnitude() * (grid.L / TWO_PI)  # integer lattice radius
    with np.errstate(divide="ignore"):
        amp = np.where(kmag > 0, kmag ** (-(sigma + grid.d / 2.0)), 0.0)
    f = np.fft.ifftn(amp * phase).real
    rms = np.sqrt(np.mean(f**2))
    return f / rms if rms > 0 else f


def _synth_random_phase_besov(grid: PeriodicGrid, params: dict, rng: np.random.Generator) -> np.ndarray:
    sigma = float(params["sigma"])
    if not (0.0 < sigma < 1.0):
        raise ValueError(f"sigma must lie in (0, 1), got {sigma}")
    return _power_law_spectrum_field(grid, sigma, rng)[None, None]


def _synth_weierstrass(grid: PeriodicGrid, params: dict, rng: np.random.Generator) -> np.ndarray:
    if grid.d != 1:
        raise ValueError("weierstrass requires d = 1")
    sigma = float(params["sigma"])
    if not (0.0 < sigma < 1.0):
        raise ValueError(f"sigma must lie in (0, 1), got {sigma}")
    jmax = int(params.get("jmax", int(math.log2(grid.n // 2)) - 1))
    random_phases = bool(params.get("random_phases", True))
    x = grid.axis_coords() * (TWO_PI / grid.L)
    u = np.zeros(grid.n)
    for j in range(jmax + 1):
        phase = rng.uniform(0.0, TWO_PI) if random_phases else 0.0
        u += 2.0 ** (-sigma * j) * np.cos((2**j) * x + phase)
    return u[None, None]


_SYNTH_KINDS: dict[str, Callable[[PeriodicGrid, dict, np.random.Generator], np.ndarray]] = {
    "constant": _synth_constant,
    "fourier_mode": _synth_fourier_mode,
    "taylor_green": _synth_taylor_green,
    "sawtooth": _synth_sawtooth,
    "random_phase_besov": _synth_random_phase_besov,
    "weierstrass": _synth_weierstrass,
}


def synth_field(grid: PeriodicGrid, kind: str, params: dict | None = None,
                seed: int | None = None) -> SpaceTimeField:
    """Deterministic synthetic field of the requested kind.

    Supported kinds: ``constant``, ``fourier_mode``, ``taylor_green``,
    ``sawtooth``, ``random_phase_besov``, ``weierstrass``.  Randomized kinds
    draw from a seeded PCG64 generator; the same seed reproduces the field
    bit for bit.  Static kinds are broadcast over the grid's time axis.
    """
    if kind not in _SYNTH_KINDS:
        raise ValueError(f"unknown field kind {kind!r}; choose from {sorted(_SYNTH_KINDS)}")
    params = dict(params or {})
    rng = np.random.default_rng(seed)
    frame = _SYNTH_KINDS[kind](grid, params, rng)[0]
    samples = _as_movie(grid, frame)
    meta = {"kind": kind, "params": params, "seed": seed, "generator": "pcg64", "static": True}
    return SpaceTimeField(grid, samples, name=kind, metadata=meta)


def crossed_shear_velocity(grid: PeriodicGrid, sigma: float, seed: int | None = None,
                           kind: str = "random_phase_besov") -> SpaceTimeField:
    """Divergence-free velocity ``u = (f(y), g(x))`` from two 1D profiles.

    A single unidirectional shear is a steady Euler flow with vanishing
    scale-transfer, so two independent profiles are crossed to obtain a
    field whose coarse-graining terms are active at every scale.
    """
    if grid.d != 2:
        raise ValueError("crossed_shear_velocity requires d = 2")
    line = make_grid(1, grid.n, grid.L)
    rng = np.random.default_rng(seed)
    sub_seeds = rng.integers(0, 2**63 - 1, size=2)
    f = synth_field(line, kind, {"sigma": sigma}, seed=int(sub_seeds[0])).samples[0, 0]
    g = synth_field(line, kind, {"sigma": sigma}, seed=int(sub_seeds[1])).samples[0, 0]
    u = np.broadcast_to(f[None, :], grid.shape_space)   # f(y): varies along axis 1
    v = np.broadcast_to(g[:, None], grid.shape_space)   # g(x): varies along axis 0
    frame = np.stack([u, v])
    meta = {"kind": "crossed_shear", "params": {"sigma": sigma, "profile": kind},
            "seed": seed, "generator": "pcg64", "static": True}
    return SpaceTimeField(grid, _as_movie(grid, frame), name="crossed_shear", metadata=meta)


def taylor_green_movie(grid: PeriodicGrid, nu: float, amplitude: float = 1.0) -> SpaceTimeField:
    """Exact decaying Taylor-Green velocity ``e^{-2 nu t} (sin x cos y, -cos x sin y)``."""
    base = _synth_taylor_green(grid, {"amplitude": amplitude}, np.random.default_rng(0))[0]
    decay = np.exp(-2.0 * nu * grid.times())
    samples = base[None] * decay[:, None, None, None]
    meta = {"kind": "taylor_green_movie", "params": {"nu": nu, "amplitude": amplitude},
            "static": nu == 0.0}
    return SpaceTimeField(grid, samples, name="taylor_green", viscosity=nu, metadata=meta)


def taylor_green_pressure_movie(grid: PeriodicGrid, nu: float, amplitude: float = 1.0) -> SpaceTimeField:
    """Pressure field matching :func:`taylor_green_movie`: ``(cos 2x + cos 2y)/4 e^{-4 nu t}``.

    For this cell orientation the momentum balance gives the positive
    sign: (u . grad u)_x = sin x cos x, so dq/dx = -(sin 2x)/2.
    """
    if grid.d != 2:
        raise ValueError("taylor_green_pressure_movie requires d = 2")
    x, y = grid.meshgrid()
    kx = TWO_PI / grid.L
    q = (amplitude**2) * (np.cos(2 * kx * x) + np.cos(2 * kx * y)) / 4.0
    q = np.broadcast_to(q, grid.shape_space)
    decay = np.exp(-4.0 * nu * grid.times())
    samples = q[None, None] * decay[:, None, None, None]
    meta = {"kind": "taylor_green_pressure", "params": {"nu": nu, "amplitude": amplitude},
            "static": nu == 0.0}
    return SpaceTimeField(grid, samples, name="taylor_green_pressure", viscosity=nu, metadata=meta)


def lp_norm(values: np.ndarray, p: float, grid: PeriodicGrid | None = None,
            physical: bool = False) -> float:
    """Elementwise L^p norm of an array of field values.

    The measure is unit-normalized unless ``physical`` is set, in which
    case the result is scaled to the spatial measure ``dx^d`` (time, when
    a movie axis is present, is left to the caller).  ``p = inf`` is the
    max.  Callers take component magnitudes before calling when a vector
    pointwise norm is wanted.
    """
    mag = np.abs(np.asarray(values, dtype=np.float64))
    if math.isinf(p):
        return float(mag.max())
    if p <= 0:
        raise ValueError(f"p must be positive, got {p}")
    mean_pow = float(np.mean(mag**p))
    value = mean_pow ** (1.0 / p)
    if physical:
        if grid is None:
            raise ValueError("physical norms need the grid")
        value *= grid.volume ** (1.0 / p)
    return value
