"""Pseudo-spectral solvers for the movie producers.

Three periodic model systems share one integrator: 1D viscous Burgers,
2D incompressible Navier-Stokes in vorticity form, and 2D passive
advection-diffusion.  The linear diffusive part is handled exactly by an
integrating factor and the nonlinear part by classical RK4 on the
transformed variable; quadratic products are dealiased by the 2/3 rule.
On power-of-2 grids the inclusive 2/3 cutoff retains no aliased product
modes, so the truncated nonlinearity is exactly energy-neutral and the
discrete energy budget closes to time-integration error.

Step size is fixed over a run (saved frames must be uniformly spaced) at
the advective CFL limit of the initial state; the limit is re-checked
every ``checks_every`` steps and a violation raises ``CFLError`` rather
than silently adapting.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .fields import PeriodicGrid, SpaceTimeField, make_grid

__all__ = [
    "SolverConfig",
    "CFLError",
    "BlowupError",
    "solve_burgers",
    "solve_ns2d",
    "solve_advection",
    "load_solver_config",
    "movie_energy_budget",
]


class CFLError(RuntimeError):
    """The fixed step exceeded the advective stability limit mid-run."""


class BlowupError(RuntimeError):
    """Non-finite values appeared in the evolving state."""


@dataclass(frozen=True)
class SolverConfig:
    """Run parameters shared by all three solvers.

    ``nu`` is the viscosity for Burgers and Navier-Stokes, ``kappa`` the
    diffusivity for the passive scalar.  ``nframes`` requests an exact
    number of uniformly spaced saved frames spanning [0, T] (including
    both ends) and takes precedence over ``output_stride``.
    """

    nu: float = 0.0
    kappa: float = 0.0
    T: float = 1.0
    cfl: float = 0.4
    dealias: bool = True
    output_stride: int = 1
    nframes: int | None = None
    forcing: dict | None = None
    checks_every: int = 10
    speed_scale: float | None = None

    def __post_init__(self) -> None:
        if self.T <= 0:
            raise ValueError(f"T must be positive, got {self.T}")
        if not (0.0 < self.cfl <= 1.0):
            raise ValueError(f"cfl must lie in (0, 1], got {self.cfl}")
        if self.nu < 0 or self.kappa < 0:
            raise ValueError("diffusion coefficients must be >= 0")
        if self.output_stride < 1:
            raise ValueError("output_stride must be >= 1")
        if self.nframes is not None and self.nframes < 2:
            raise ValueError("nframes must be >= 2")
        if self.checks_every < 1:
            raise ValueError("checks_every must be >= 1")
        if self.speed_scale is not None and self.speed_scale <= 0:
            raise ValueError("speed_scale must be positive")


def _plan_steps(config: SolverConfig, dt_cfl: float) -> tuple[float, int, int]:
    """Fixed step, total step count, save-every consistent with the config.

    The step divides T exactly so saved frames land on a uniform grid that
    includes both endpoints.
    """
    T = config.T
    if config.nframes is not None:
        nseg = config.nframes - 1
        per = max(1, math.ceil(T / (nseg * dt_cfl)))
        return T / (nseg * per), nseg * per, per
    stride = config.output_stride
    nsteps = max(1, math.ceil(T / dt_cfl))
    nsteps = stride * math.ceil(nsteps / stride)
    return T / nsteps, nsteps, stride


def _forcing_profile(grid: PeriodicGrid, forcing: dict) -> np.ndarray:
    """Time-independent random band-limited forcing, physical space, mean zero."""
    shell = forcing.get("shell", (1.0, 2.0))
    amplitude = float(forcing.get("amplitude", 1.0))
    seed = forcing.get("seed", 0)
    rng = np.random.default_rng(seed)
    ks = grid.wavenumbers()
    kmag = np.sqrt(sum((k * (grid.L / (2.0 * math.pi))) ** 2 for k in ks))
    band = (kmag >= float(shell[0]) - 1e-9) & (kmag <= float(shell[1]) + 1e-9)
    noise = np.fft.fftn(rng.standard_normal(grid.shape_space))
    fhat = np.where(band, noise, 0.0)
    f = np.fft.ifftn(fhat).real
    f -= f.mean()
    rms = math.sqrt(float(np.mean(f**2)))
    if rms > 0:
        f *= amplitude / rms
    return f


def _rk4_if_step(state: np.ndarray, nonlinear: Callable[[np.ndarray], np.ndarray],
                 decay_half: np.ndarray, decay_full: np.ndarray, dt: float) -> np.ndarray:
    k1 = nonlinear(state)
    k2 = nonlinear(decay_half * (state + 0.5 * dt * k1))
    k3 = nonlinear(decay_half * state + 0.5 * dt * k2)
    k4 = nonlinear(decay_full * state + dt * decay_half * k3)
    return decay_full * state + (dt / 6.0) * (
        decay_full * k1 + 2.0 * decay_half * (k2 + k3) + k4
    )


class _BudgetTape:
    """Accumulates dissipation and injection with the RK4 stage weights.

    The nonlinear callback reports the stage dissipation/injection rates in
    call order (k1..k4); weighting them 1,2,2,1 over the step reproduces the
    classical quadrature, so the tallies match the integrator's own order.
    """

    _W = (1.0, 2.0, 2.0, 1.0)

    def __init__(self) -> None:
        self.dissipated = 0.0
        self.injected = 0.0
        self._stage = 0
        self._acc = [0.0, 0.0]

    def record(self, dissipation_rate: float, injection_rate: float) -> None:
        w = self._W[self._stage]
        self._acc[0] += w * dissipation_rate
        self._acc[1] += w * injection_rate
        self._stage += 1

    def close_step(self, dt: float) -> None:
        if self._stage != 4:
            raise RuntimeError("budget tape expected 4 stage records per step")
        self.dissipated += dt * self._acc[0] / 6.0
        self.injected += dt * self._acc[1] / 6.0
        self._stage = 0
        self._acc = [0.0, 0.0]


def _budget_dict(e0: float, e1: float, tape: _BudgetTape, T: float) -> dict:
    residual = (e1 - e0) + tape.dissipated - tape.injected
    return {
        "initial": e0,
        "final": e1,
        "dissipated": tape.dissipated,
        "injected": tape.injected,
        "residual_per_time": abs(residual) / T,
    }


def _check_finite(arr: np.ndarray, step: int) -> None:
    if not np.all(np.isfinite(arr)):
        raise BlowupError(f"non-finite state at step {step}")


def _require_snapshot(field: SpaceTimeField, what: str) -> np.ndarray:
    if field.grid.nt != 1 and not field.is_static():
        raise ValueError(f"{what} must be a single snapshot or a static movie")
    return field.frame(0)


# ---------------------------------------------------------------------------
# Burgers


def solve_burgers(u0: SpaceTimeField, config: SolverConfig) -> SpaceTimeField:
    """Integrate 1D viscous Burgers from the snapshot ``u0`` up to ``config.T``.

    Returns a movie of the velocity with the step-level energy budget in
    ``metadata["energy_budget"]``.
    """
    grid = u0.grid
    if grid.d != 1 or u0.components != 1:
        raise ValueError("solve_burgers needs a scalar 1D initial state")
    if config.nu <= 0:
        raise ValueError("solve_burgers requires nu > 0")
    from .spectral import dealias_mask

    u = _require_snapshot(u0, "u0")[0].astype(np.float64)
    n = grid.n
    k = grid.wavenumbers()[0]
    mask = dealias_mask(grid) if config.dealias else np.ones(grid.shape_space, bool)
    uhat = np.fft.fft(u) * mask
    fphys = _forcing_profile(grid.space_only(), config.forcing) if config.forcing else None
    fhat = np.fft.fft(fphys) * mask if fphys is not None else None

    umax = float(np.max(np.abs(u))) + (float(np.max(np.abs(fphys))) if fphys is not None else 0.0)
    if config.speed_scale is not None:
        umax = max(umax, config.speed_scale)
    dt_cfl = config.cfl * grid.dx / max(umax, 1e-12)
    dt, nsteps, save_every = _plan_steps(config, dt_cfl)

    decay_half = np.exp(-config.nu * k**2 * (dt / 2.0))
    decay_full = decay_half**2
    tape = _BudgetTape()
    inv_n2 = 1.0 / n**2

    def energy(what: np.ndarray) -> float:
        return 0.5 * float(np.sum(np.abs(what) ** 2)) * inv_n2

    def nonlinear(what: np.ndarray) -> np.ndarray:
        u_phys = np.fft.ifft(what).real
        tape.record(config.nu * float(np.sum(k**2 * np.abs(what) ** 2)) * inv_n2,
                    0.0 if fhat is None else float(np.sum((fhat * np.conj(what)).real)) * inv_n2)
        out = -0.5j * k * (np.fft.fft(u_phys**2) * mask)
        if fhat is not None:
            out = out + fhat
        return out

    frames = np.empty((nsteps // save_every + 1, 1, n))
    frames[0, 0] = np.fft.ifft(uhat).real
    e0 = energy(uhat)
    for step in range(1, nsteps + 1):
        uhat = _rk4_if_step(uhat, nonlinear, decay_half, decay_full, dt)
        tape.close_step(dt)
        if step % config.checks_every == 0 or step == nsteps:
            u_now = np.fft.ifft(uhat).real
            _check_finite(u_now, step)
            if dt > config.cfl * grid.dx / max(float(np.max(np.abs(u_now))), 1e-12):
                raise CFLError(f"step {step}: fixed dt {dt:.3e} exceeds the advective limit")
        if step % save_every == 0:
            frames[step // save_every, 0] = np.fft.ifft(uhat).real
    budget = _budget_dict(e0, energy(uhat), tape, config.T)

    out_grid = make_grid(d=1, n=n, L=grid.L, nt=frames.shape[0], dt=save_every * dt)
    meta = {"solver": "burgers", "nu": config.nu, "dt_step": dt, "steps": nsteps,
            "cfl": config.cfl, "dealias": config.dealias, "initial_projection": True,
            "energy_budget": budget, "forcing": config.forcing}
    return SpaceTimeField(out_grid, frames, name="burgers", viscosity=config.nu, metadata=meta)


# ---------------------------------------------------------------------------
# 2D Navier-Stokes, vorticity form


def _velocity_from_vorticity(what: np.ndarray, kx: np.ndarray, ky: np.ndarray,
                             inv_k2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    psi_hat = what * inv_k2
    u_hat = 1j * ky * psi_hat
    v_hat = -1j * kx * psi_hat
    return u_hat, v_hat


def solve_ns2d(omega0: SpaceTimeField, config: SolverConfig) -> SpaceTimeField:
    """Integrate 2D incompressible Navier-Stokes from a vorticity snapshot.

    The state advances in vorticity form; saved frames hold the velocity
    recovered through the streamfunction, which is divergence-free to
    roundoff by construction.
    """
    grid = omega0.grid
    if grid.d != 2 or omega0.components != 1:
        raise ValueError("solve_ns2d needs a scalar 2D vorticity snapshot")
    if config.nu <= 0:
        raise ValueError("solve_ns2d requires nu > 0")
    from .spectral import dealias_mask

    w = _require_snapshot(omega0, "omega0")[0].astype(np.float64)
    mean = float(np.mean(w))
    if abs(mean) > 1e-10 * max(float(np.sqrt(np.mean(w**2))), 1e-12):
        raise ValueError(f"vorticity must be mean-zero, got mean {mean:.3e}")
    n = grid.n
    kx, ky = grid.wavenumbers()
    k2 = kx**2 + ky**2
    inv_k2 = np.where(k2 > 0, 1.0 / np.where(k2 > 0, k2, 1.0), 0.0)
    mask = dealias_mask(grid) if config.dealias else np.ones(grid.shape_space, bool)
    what = np.fft.fftn(w) * mask
    fphys = _forcing_profile(grid.space_only(), config.forcing) if config.forcing else None
    fhat = np.fft.fftn(fphys) * mask if fphys is not None else None

    u_hat, v_hat = _velocity_from_vorticity(what, kx, ky, inv_k2)
    u0p = np.fft.ifftn(u_hat).real
    v0p = np.fft.ifftn(v_hat).real
    umax = float(np.max(np.hypot(u0p, v0p)))
    if config.speed_scale is not None:
        umax = max(umax, config.speed_scale)
    dt_cfl = config.cfl * grid.dx / max(umax, 1e-12)
    dt, nsteps, save_every = _plan_steps(config, dt_cfl)

    decay_half = np.exp(-config.nu * k2 * (dt / 2.0))
    decay_full = decay_half**2
    tape = _BudgetTape()
    inv_n4 = 1.0 / n**4

    def kinetic_energy(wh: np.ndarray) -> float:
        uh, vh = _velocity_from_vorticity(wh, kx, ky, inv_k2)
        return 0.5 * float(np.sum(np.abs(uh) ** 2 + np.abs(vh) ** 2)) * inv_n4

    def nonlinear(wh: np.ndarray) -> np.ndarray:
        uh, vh = _velocity_from_vorticity(wh, kx, ky, inv_k2)
        up = np.fft.ifftn(uh).real
        vp = np.fft.ifftn(vh).real
        wx = np.fft.ifftn(1j * kx * wh).real
        wy = np.fft.ifftn(1j * ky * wh).real
        # enstrophy of the filtered velocity equals the velocity-gradient
        # dissipation integral on the torus
        tape.record(config.nu * float(np.sum(np.abs(wh) ** 2)) * inv_n4,
                    0.0 if fhat is None else
                    float(np.sum((fhat * np.conj(wh) * inv_k2).real)) * inv_n4)
        out = -np.fft.fftn(up * wx + vp * wy) * mask
        if fhat is not None:
            out = out + fhat
        return out

    nframes_out = nsteps // save_every + 1
    frames = np.empty((nframes_out, 2, n, n))
    frames[0, 0], frames[0, 1] = u0p, v0p
    div_max = 0.0
    e0 = kinetic_energy(what)
    for step in range(1, nsteps + 1):
        what = _rk4_if_step(what, nonlinear, decay_half, decay_full, dt)
        tape.close_step(dt)
        if step % config.checks_every == 0 or step == nsteps:
            uh, vh = _velocity_from_vorticity(what, kx, ky, inv_k2)
            up = np.fft.ifftn(uh).real
            vp = np.fft.ifftn(vh).real
            _check_finite(up, step)
            speed = float(np.max(np.hypot(up, vp)))
            if dt > config.cfl * grid.dx / max(speed, 1e-12):
                raise CFLError(f"step {step}: fixed dt {dt:.3e} exceeds the advective limit")
        if step % save_every == 0:
            uh, vh = _velocity_from_vorticity(what, kx, ky, inv_k2)
            div_hat = 1j * kx * uh + 1j * ky * vh
            div_max = max(div_max, float(np.sqrt(np.sum(np.abs(div_hat) ** 2)) / n**2))
            frames[step // save_every, 0] = np.fft.ifftn(uh).real
            frames[step // save_every, 1] = np.fft.ifftn(vh).real
    budget = _budget_dict(e0, kinetic_energy(what), tape, config.T)

    out_grid = make_grid(d=2, n=n, L=grid.L, nt=nframes_out, dt=save_every * dt)
    meta = {"solver": "ns2d", "nu": config.nu, "dt_step": dt, "steps": nsteps,
            "cfl": config.cfl, "dealias": config.dealias, "initial_projection": True,
            "energy_budget": budget, "div_spectral_max": div_max,
            "forcing": config.forcing}
    return SpaceTimeField(out_grid, frames, name="ns2d", viscosity=config.nu, metadata=meta)


# ---------------------------------------------------------------------------
# Passive scalar advection-diffusion


def _velocity_sampler(velocity: SpaceTimeField | dict,
                      grid: PeriodicGrid) -> Callable[[float], tuple[np.ndarray, np.ndarray]]:
    """Uniform access to the advecting velocity at arbitrary times.

    Accepts a static snapshot (steady flow), a movie (linear interpolation
    in time between frames), or an analytic descriptor dict:
    ``{"kind": "taylor_green", "nu": ..., "amplitude": ...}``.
    """
    if isinstance(velocity, dict):
        if velocity.get("kind") != "taylor_green":
            raise ValueError(f"unknown analytic velocity {velocity.get('kind')!r}")
        nu_v = float(velocity.get("nu", 0.0))
        amp = float(velocity.get("amplitude", 1.0))
        xs, ys = grid.meshgrid()
        scale = 2.0 * math.pi / grid.L
        ux = amp * np.sin(scale * xs) * np.cos(scale * ys)
        uy = -amp * np.cos(scale * xs) * np.sin(scale * ys)

        def analytic(t: float) -> tuple[np.ndarray, np.ndarray]:
            decay = math.exp(-2.0 * nu_v * scale**2 * t)
            return ux * decay, uy * decay

        return analytic

    if velocity.grid.d != 2 or velocity.components != 2:
        raise ValueError("advecting velocity must be a 2D two-component field")
    if velocity.grid.n != grid.n or abs(velocity.grid.L - grid.L) > 1e-12 * grid.L:
        raise ValueError("velocity grid does not match the scalar grid")
    if velocity.is_static():
        vx = velocity.frame(0)[0].copy()
        vy = velocity.frame(0)[1].copy()
        return lambda t: (vx, vy)

    vgrid = velocity.grid
    tmax = (vgrid.nt - 1) * vgrid.dt

    def interpolated(t: float) -> tuple[np.ndarray, np.ndarray]:
        if t < -1e-9 or t > tmax + 1e-9:
            raise ValueError(f"time {t} outside the velocity movie range [0, {tmax}]")
        s = min(max(t, 0.0), tmax) / vgrid.dt
        j = min(int(s), vgrid.nt - 2)
        w = s - j
        fr0, fr1 = velocity.frame(j), velocity.frame(j + 1)
        return ((1 - w) * fr0[0] + w * fr1[0], (1 - w) * fr0[1] + w * fr1[1])

    return interpolated


def solve_advection(theta0: SpaceTimeField, velocity: SpaceTimeField | dict,
                    config: SolverConfig) -> SpaceTimeField:
    """Advect and diffuse a passive scalar in a prescribed 2D velocity."""
    grid = theta0.grid
    if grid.d != 2 or theta0.components != 1:
        raise ValueError("solve_advection needs a scalar 2D initial state")
    if config.kappa <= 0:
        raise ValueError("solve_advection requires kappa > 0")
    from .spectral import dealias_mask

    sample_v = _velocity_sampler(velocity, grid)
    th = _require_snapshot(theta0, "theta0")[0].astype(np.float64)
    n = grid.n
    kx, ky = grid.wavenumbers()
    k2 = kx**2 + ky**2
    mask = dealias_mask(grid) if config.dealias else np.ones(grid.shape_space, bool)
    that = np.fft.fftn(th) * mask

    vx0, vy0 = sample_v(0.0)
    vmax = float(np.max(np.hypot(vx0, vy0)))
    if config.speed_scale is not None:
        vmax = max(vmax, config.speed_scale)
    dt_cfl = config.cfl * grid.dx / max(vmax, 1e-12)
    dt, nsteps, save_every = _plan_steps(config, dt_cfl)

    decay_half = np.exp(-config.kappa * k2 * (dt / 2.0))
    decay_full = decay_half**2
    tape = _BudgetTape()
    inv_n4 = 1.0 / n**4
    stage_shift = (0.0, 0.5, 0.5, 1.0)
    stage_idx = [0]
    now = [0.0]

    def nonlinear(th_hat: np.ndarray) -> np.ndarray:
        t_stage = now[0] + stage_shift[stage_idx[0] % 4] * dt
        stage_idx[0] += 1
        vx, vy = sample_v(t_stage)
        tx = np.fft.ifftn(1j * kx * th_hat).real
        ty = np.fft.ifftn(1j * ky * th_hat).real
        tape.record(config.kappa * float(np.sum(k2 * np.abs(th_hat) ** 2)) * inv_n4, 0.0)
        return -np.fft.fftn(vx * tx + vy * ty) * mask

    def scalar_energy(th_hat: np.ndarray) -> float:
        return 0.5 * float(np.sum(np.abs(th_hat) ** 2)) * inv_n4

    frames = np.empty((nsteps // save_every + 1, 1, n, n))
    frames[0, 0] = np.fft.ifftn(that).real
    mean0 = float(np.mean(frames[0, 0]))
    e0 = scalar_energy(that)
    for step in range(1, nsteps + 1):
        that = _rk4_if_step(that, nonlinear, decay_half, decay_full, dt)
        tape.close_step(dt)
        now[0] = step * dt
        if step % config.checks_every == 0 or step == nsteps:
            th_now = np.fft.ifftn(that).real
            _check_finite(th_now, step)
            vx, vy = sample_v(now[0])
            vmax_now = float(np.max(np.hypot(vx, vy)))
            if dt > config.cfl * grid.dx / max(vmax_now, 1e-12):
                raise CFLError(f"step {step}: fixed dt {dt:.3e} exceeds the advective limit")
        if step % save_every == 0:
            frames[step // save_every, 0] = np.fft.ifftn(that).real
    budget = _budget_dict(e0, scalar_energy(that), tape, config.T)
    mean_drift = abs(float(np.mean(frames[-1, 0])) - mean0)

    out_grid = make_grid(d=2, n=n, L=grid.L, nt=frames.shape[0], dt=save_every * dt)
    meta = {"solver": "advection", "kappa": config.kappa, "dt_step": dt, "steps": nsteps,
            "cfl": config.cfl, "dealias": config.dealias, "initial_projection": True,
            "energy_budget": budget, "mean_drift": mean_drift}
    return SpaceTimeField(out_grid, frames, name="scalar", viscosity=config.kappa, metadata=meta)


# ---------------------------------------------------------------------------
# Config files and movie-level budgets


_CONFIG_KEYS = {
    "nu": float, "kappa": float, "T": float, "cfl": float,
    "dealias": None, "stride": int, "nframes": int, "checks_every": int,
    "forcing_shell": None, "forcing_amplitude": float, "seed": int,
}


def load_solver_config(path: str | Path) -> tuple[SolverConfig, dict]:
    """Parse a ``key = value`` text file into a SolverConfig.

    Recognized keys: nu, kappa, T, cfl, dealias, stride, nframes,
    checks_every, forcing_shell (two comma-separated radii),
    forcing_amplitude, seed.  Unrecognized keys are returned verbatim in
    the second element for the caller (grid size, field kind, and so on).
    """
    raw: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {body!r}")
        key, value = (part.strip() for part in body.split("=", 1))
        raw[key] = value

    kwargs: dict[str, Any] = {}
    extras: dict[str, str] = {}
    forcing: dict[str, Any] = {}
    for key, value in raw.items():
        if key not in _CONFIG_KEYS:
            extras[key] = value
            continue
        if key == "dealias":
            kwargs["dealias"] = value.lower() in ("1", "true", "yes", "on")
        elif key == "stride":
            kwargs["output_stride"] = int(value)
        elif key == "forcing_shell":
            lo, hi = (float(part) for part in value.split(","))
            forcing["shell"] = (lo, hi)
        elif key == "forcing_amplitude":
            forcing["amplitude"] = float(value)
        elif key == "seed":
            forcing["seed"] = int(value)
            extras["seed"] = value
        else:
            kwargs[key] = _CONFIG_KEYS[key](value)
    if "shell" in forcing or "amplitude" in forcing:
        forcing.setdefault("shell", (1.0, 2.0))
        forcing.setdefault("amplitude", 1.0)
        forcing.setdefault("seed", 0)
        kwargs["forcing"] = forcing
    return SolverConfig(**kwargs), extras


def movie_energy_budget(field: SpaceTimeField, nu: float | None = None) -> dict:
    """Frame-level energy budget of a saved movie (trapezoid in time).

    Coarser than the solver's own step-level tally (available in the
    movie metadata) but computable for any movie, including ones read
    back from disk.  Unforced budgets only.
    """
    from .spectral import spectral_gradient

    nu = field.viscosity if nu is None else nu
    if nu is None:
        raise ValueError("viscosity unknown; pass nu explicitly")
    energies = 0.5 * np.mean(np.sum(field.samples**2, axis=1), axis=tuple(range(1, field.grid.d + 1)))
    grads = spectral_gradient(field.samples, field.grid)
    rates = nu * np.mean(np.sum(grads**2, axis=(0, 2)), axis=tuple(range(1, field.grid.d + 1)))
    dt = field.grid.dt
    trapezoid = getattr(np, "trapezoid", np.trapz)
    dissipated = float(trapezoid(rates, dx=dt))
    residual = abs((float(energies[-1]) - float(energies[0])) + dissipated)
    return {
        "initial": float(energies[0]),
        "final": float(energies[-1]),
        "dissipated": dissipated,
        "residual_per_time": residual / field.grid.duration,
        "energies": energies.tolist(),
    }
