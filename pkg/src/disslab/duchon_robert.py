"""Local energy-balance defect of incompressible flow movies.

The central object is the scale-by-scale energy balance of a velocity
movie: the defect distribution is evaluated weakly against smooth
compactly-supported test functions, decomposed into fluctuation energy,
flux, commutator stress, and transfer fields at a coarse-graining scale,
and mollified into a concrete space-time density when a pointwise field
is needed downstream.

Everything here treats the movie as data: no equation of motion is
assumed, time derivatives always land on the test function, and the
balance identity is checked rather than imposed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as _dc_field
from typing import Any, Sequence

import numpy as np

from .fields import PeriodicGrid, SpaceTimeField, lp_norm
from .fitting import ScalingFit, fit_power_law
from .mollify import Mollifier, commutator_pairs, make_mollifier
from .spectral import dealias_mask, fft_space, ifft_space

__all__ = [
    "TestFunction",
    "DecompositionTerms",
    "DissipationSample",
    "PairingContext",
    "make_test_functions",
    "time_only_test_function",
    "mollify_test_function",
    "solve_pressure",
    "pressure_movie",
    "decomposition_terms",
    "build_pairing_context",
    "dr_pairing",
    "identity_residual",
    "identity_table",
    "identity_scan",
    "DrRates",
    "dr_mollification_rates",
    "materialize_dissipation",
]


# ---------------------------------------------------------------------------
# Test functions


def _time_bump_frames(nt: int, dt: float, i0: int, i1: int,
                      power: int) -> tuple[np.ndarray, np.ndarray]:
    """Polynomial bump (1 - z^2)^power on frames (i0, i1), with derivative.

    ``z`` is built from integer frame indices, so the sampled profile is
    bitwise even about the window center and its derivative bitwise odd;
    ``power - 1`` derivatives vanish at the endpoints, making plain frame
    sums integrate the bump to high order.
    """
    if i1 - i0 < 2:
        raise ValueError("bump window needs at least two frame intervals")
    z = (2 * np.arange(nt) - (i0 + i1)) / float(i1 - i0)
    inside = np.abs(z) < 1.0
    z = np.where(inside, z, 1.0)
    core = (1.0 - z * z) ** power
    width = (i1 - i0) * dt
    dcore = -4.0 * power * z * (1.0 - z * z) ** (power - 1) / width
    return np.where(inside, core, 0.0), np.where(inside, dcore, 0.0)


@dataclass(frozen=True)
class TestFunction:
    """Smooth space-time test function as a sum of separable terms.

    Each term pairs a band-limited spatial profile with a polynomial time
    bump sampled on the movie's frame grid; spatial derivatives are
    spectral, time derivatives analytic.  The function vanishes
    identically outside its frame window.
    """

    grid: PeriodicGrid
    space_profiles: np.ndarray      # (m, *shape_space)
    time_profiles: np.ndarray       # (m, nt)
    time_derivs: np.ndarray         # (m, nt)
    window: tuple[int, int]         # inclusive frame range of the support
    label: str = "phi"
    _cache: dict[str, Any] = _dc_field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        m = self.space_profiles.shape[0]
        if self.time_profiles.shape != (m, self.grid.nt):
            raise ValueError("time profile shape mismatch")
        if self.space_profiles.shape[1:] != self.grid.shape_space:
            raise ValueError("space profile shape mismatch")
        lo, hi = self.window
        outside = np.ones(self.grid.nt, dtype=bool)
        outside[lo:hi + 1] = False
        if np.any(np.abs(self.time_profiles[:, outside]) > 0):
            raise ValueError("time profiles leak outside the declared window")

    @property
    def nterms(self) -> int:
        return int(self.space_profiles.shape[0])

    def _flat(self, key: str) -> np.ndarray:
        if key in self._cache:
            return self._cache[key]
        N = self.grid.npoints_space
        if key == "value":
            mat = self.space_profiles.reshape(self.nterms, N)
        elif key == "lap":
            hat = fft_space(self.space_profiles, self.grid)
            k2 = self.grid.k_squared()
            mat = ifft_space(-k2[None] * hat, self.grid).real.reshape(self.nterms, N)
        elif key.startswith("grad"):
            axis = int(key[4:])
            hat = fft_space(self.space_profiles, self.grid)
            k = self.grid.wavenumbers()[axis]
            mat = ifft_space(1j * k[None] * hat, self.grid).real.reshape(self.nterms, N)
        else:
            raise KeyError(key)
        self._cache[key] = mat
        return mat

    def sup_norm(self) -> float:
        """Upper bound on max |phi|: sum of term sup-norm products."""
        space_sup = np.max(np.abs(self.space_profiles.reshape(self.nterms, -1)), axis=1)
        time_sup = np.max(np.abs(self.time_profiles), axis=1)
        return float(np.sum(space_sup * time_sup))

    def sample(self) -> np.ndarray:
        """Materialize phi on the movie grid, shape (nt, *space)."""
        out = np.einsum("it,i...->t...", self.time_profiles, self.space_profiles)
        return out

    def smoothness_bound(self) -> dict[str, float]:
        g = [float(np.max(np.abs(self._flat(f"grad{a}")))) for a in range(self.grid.d)]
        return {
            "sup": self.sup_norm(),
            "grad_sup": max(g) if g else 0.0,
            "lap_sup": float(np.max(np.abs(self._flat("lap")))),
            "dt_sup": float(np.max(np.abs(self.time_derivs))),
        }

    # -- pairings ----------------------------------------------------------

    def _pair(self, scalars: np.ndarray, space_key: str, use_dt: bool) -> float:
        grid = self.grid
        nt = grid.nt
        F = scalars.reshape(nt, grid.npoints_space)
        B = self._flat(space_key)
        H = self.time_derivs if use_dt else self.time_profiles
        lo, hi = self.window
        measure = grid.cell_volume * grid.dt
        # static movies repeat one frame; one spatial dot then suffices
        if nt >= 3 and np.array_equal(F[lo], F[(lo + hi) // 2]) and np.array_equal(F[lo], F[hi]):
            dots = B @ F[lo]                       # (m,)
            return float(np.sum(dots * H[:, lo:hi + 1].sum(axis=1))) * measure
        G = F[lo:hi + 1] @ B.T                      # (frames, m)
        return float(np.einsum("ti,it->", G, H[:, lo:hi + 1])) * measure

    def pair_value(self, scalars: np.ndarray) -> float:
        """Integral of F * phi over space-time (physical measure)."""
        return self._pair(scalars, "value", use_dt=False)

    def pair_dt(self, scalars: np.ndarray) -> float:
        """Integral of F * (d phi / dt)."""
        return self._pair(scalars, "value", use_dt=True)

    def pair_lap(self, scalars: np.ndarray) -> float:
        """Integral of F * (Laplacian of phi)."""
        return self._pair(scalars, "lap", use_dt=False)

    def pair_grad(self, vectors: np.ndarray) -> float:
        """Integral of F . grad(phi) for a (nt, d, *space) vector movie."""
        if vectors.shape[1] != self.grid.d:
            raise ValueError("vector movie must have d components")
        return sum(self._pair(vectors[:, a], f"grad{a}", use_dt=False)
                   for a in range(self.grid.d))


def make_test_functions(grid: PeriodicGrid, count: int, seed: int | None = None,
                        kmax: int = 4, time_power: int = 6,
                        margin: float = 0.08,
                        width_range: tuple[float, float] = (0.55, 0.8)) -> list[TestFunction]:
    """Random smooth test functions: band-limited space x polynomial time bump.

    Spatial profiles draw random coefficients on integer modes with
    |mode| <= kmax and are normalized to unit sup; time windows are drawn
    inside the movie with a safety margin at both ends.  Wide windows and
    a high bump power keep the frame-sum quadrature error far below the
    movie's own discretization error; callers that convolve the test
    function in time pass a larger margin and narrower windows instead.
    """
    if grid.nt < 8:
        raise ValueError("need a movie grid with nt >= 8")
    rng = np.random.default_rng(seed)
    times = grid.times()
    T = grid.duration
    out = []
    for idx in range(count):
        ks = grid.wavenumbers()
        lattice = np.sqrt(sum((k * (grid.L / (2.0 * math.pi))) ** 2 for k in ks))
        band = (lattice <= kmax + 1e-9)
        noise = np.fft.fftn(rng.standard_normal(grid.shape_space))
        prof = np.fft.ifftn(np.where(band, noise, 0.0)).real
        prof /= max(float(np.max(np.abs(prof))), 1e-300)
        wlo, whi = width_range
        width = rng.uniform(wlo, whi) * T
        width = min(width, (1.0 - 2.0 * margin) * T)
        a = margin * T + rng.uniform(0.0, max((1.0 - 2.0 * margin) * T - width, 0.0))
        width = max(width, 6.0 * grid.dt)
        # snap the window to frame times: the sampled bump derivative is then
        # odd about the window center and sums to zero exactly
        i0 = max(int(round(a / grid.dt)), 1)
        i1 = min(int(round((a + width) / grid.dt)), grid.nt - 2)
        if i1 - i0 < 6:
            raise ValueError("time window too narrow for the frame grid")
        h, hd = _time_bump_frames(grid.nt, grid.dt, i0, i1, time_power)
        out.append(TestFunction(grid, prof[None], h[None], hd[None], (i0 + 1, i1 - 1),
                                label=f"phi{idx}"))
    return out


def time_only_test_function(grid: PeriodicGrid, t0: float, t1: float,
                            time_power: int = 6, label: str = "eta") -> TestFunction:
    """Space-constant test function: a pure time bump on (t0, t1).

    The window endpoints snap to the nearest frames, which keeps the
    sampled derivative exactly odd about the window center.
    """
    i0 = int(round(t0 / grid.dt))
    i1 = int(round(t1 / grid.dt))
    if i0 < 0 or i1 > grid.nt - 1 or i1 - i0 < 6:
        raise ValueError("time window does not fit the frame grid")
    h, hd = _time_bump_frames(grid.nt, grid.dt, i0, i1, time_power)
    prof = np.ones((1,) + grid.shape_space)
    return TestFunction(grid, prof, h[None], hd[None], (i0 + 1, i1 - 1), label=label)


def mollify_test_function(phi: TestFunction, mollifier: Mollifier) -> TestFunction:
    """The adjoint-convolved test function phi * rho (rho is even).

    Each separable term becomes one term per time offset of the stencil:
    the spatial profile convolved with that time slice of the kernel, the
    time bump shifted by the offset (resampled analytically is not needed
    since bumps are stored on the frame grid: offsets are whole frames).
    """
    grid = phi.grid
    if mollifier.grid.n != grid.n or mollifier.grid.d != grid.d:
        raise ValueError("mollifier grid does not match")
    if mollifier.ell_t is not None and abs(mollifier.grid.dt - grid.dt) > 1e-12 * grid.dt:
        raise ValueError("space-time mollifier must share the movie's frame spacing")
    hats = mollifier.slice_kernel_hats()
    toffs = mollifier.time_offsets()
    prof_hat = fft_space(phi.space_profiles, grid)
    m = phi.nterms
    n_out = m * len(toffs)
    spaces = np.empty((n_out,) + grid.shape_space)
    timesP = np.zeros((n_out, grid.nt))
    timesD = np.zeros((n_out, grid.nt))
    lo, hi = phi.window
    new_lo, new_hi = grid.nt, -1
    idx = 0
    for j, off in enumerate(toffs):
        conv = ifft_space(prof_hat * hats[j][None], grid).real
        for i in range(m):
            spaces[idx] = conv[i]
            # (phi * rho)(t) = sum_j w_j phi(t - j dt): shift the bump forward by off
            shifted_lo, shifted_hi = lo + off, hi + off
            if shifted_lo < 0 or shifted_hi > grid.nt - 1:
                raise ValueError("mollified test function leaves the movie's time range")
            sl = slice(shifted_lo, shifted_hi + 1)
            timesP[idx, sl] = phi.time_profiles[i, lo:hi + 1]
            timesD[idx, sl] = phi.time_derivs[i, lo:hi + 1]
            new_lo = min(new_lo, shifted_lo)
            new_hi = max(new_hi, shifted_hi)
            idx += 1
    return TestFunction(grid, spaces, timesP, timesD, (new_lo, new_hi),
                        label=f"{phi.label}*rho")


# ---------------------------------------------------------------------------
# Pressure


def solve_pressure(frame: np.ndarray, grid: PeriodicGrid, dealias: bool = True) -> np.ndarray:
    """Zero-mean pressure of one velocity frame from the div-div balance.

    Solves -lap q = div div (u (x) u) spectrally; the quadratic product is
    dealiased before differentiation.  Raises on non-divergence-free input.
    """
    if frame.shape != (grid.d,) + grid.shape_space:
        raise ValueError(f"expected a ({grid.d},...) velocity frame")
    ks = grid.wavenumbers()
    uhat = np.fft.fftn(frame, axes=tuple(range(1, grid.d + 1)))
    div_hat = sum(1j * ks[a] * uhat[a] for a in range(grid.d))
    gnorm = math.sqrt(float(sum(np.sum(np.abs(ks[a] * uhat) ** 2) for a in range(grid.d))))
    dnorm = math.sqrt(float(np.sum(np.abs(div_hat) ** 2)))
    if dnorm > 1e-8 * max(gnorm, 1e-300):
        raise ValueError(f"velocity is not divergence-free (relative {dnorm / max(gnorm, 1e-300):.2e})")
    mask = dealias_mask(grid) if dealias else None
    k2 = grid.k_squared()
    inv_k2 = np.where(k2 > 0, 1.0 / np.where(k2 > 0, k2, 1.0), 0.0)
    qhat = np.zeros(grid.shape_space, dtype=complex)
    for a in range(grid.d):
        for b in range(grid.d):
            prod = frame[a] * frame[b]
            phat = np.fft.fftn(prod)
            if mask is not None:
                phat = phat * mask
            qhat -= ks[a] * ks[b] * phat
    qhat *= inv_k2           # k^2 q = -(sum ka kb T_ab): the loop holds that sum
    qhat[(0,) * grid.d] = 0.0
    return np.fft.ifftn(qhat).real


def pressure_movie(u: SpaceTimeField, dealias: bool = True) -> SpaceTimeField:
    """Frame-by-frame pressure recovery for a velocity movie."""
    grid = u.grid
    if u.components != grid.d:
        raise ValueError("velocity movie must have d components")
    out = np.empty((grid.nt, 1) + grid.shape_space)
    for t in range(grid.nt):
        if t > 0 and np.array_equal(u.samples[t], u.samples[0]):
            out[t, 0] = out[0, 0]
            continue
        out[t, 0] = solve_pressure(u.frame(t), grid, dealias=dealias)
    return u.with_samples(out, name=f"{u.name}:pressure", metadata={"derived": "pressure"})


# ---------------------------------------------------------------------------
# Decomposition at a coarse-graining scale


@dataclass(frozen=True)
class DecompositionTerms:
    """Scale-local energy balance fields at coarse-graining scale ``ell``.

    ``energy`` is the fluctuation kinetic energy (>= 0 pointwise),
    ``flux`` its transport including the pressure defect, ``stress`` the
    smoothing commutator in symmetric storage, ``transfer`` the scalar
    scale-flux density.  Viscous extras are populated when nu > 0.
    """

    ell: float
    nu: float
    energy: np.ndarray          # (nt, 1, *space)
    flux: np.ndarray            # (nt, d, *space)
    stress: np.ndarray          # (nt, d(d+1)/2, *space)
    transfer: np.ndarray        # (nt, 1, *space)
    smooth_velocity: np.ndarray  # (nt, d, *space)
    gradsq_smooth: np.ndarray | None = None
    cross_grad: np.ndarray | None = None
    gradsq_rough: np.ndarray | None = None   # |grad(u_l - u)|^2

    def norms(self, grid: PeriodicGrid) -> dict[str, float]:
        qmag = np.sqrt(np.sum(self.flux**2, axis=1))
        return {
            "energy_l1": lp_norm(self.energy, 1.0, grid, physical=True),
            "flux_l1": lp_norm(qmag, 1.0, grid, physical=True),
            "transfer_l1": lp_norm(self.transfer, 1.0, grid, physical=True),
        }


def _symmetric_divergence(stress: np.ndarray, grid: PeriodicGrid) -> np.ndarray:
    """Divergence of a symmetric tensor movie stored as upper-triangle pairs."""
    d = grid.d
    pairs = commutator_pairs(d)
    index = {}
    for slot, (i, j) in enumerate(pairs):
        index[(i, j)] = slot
        index[(j, i)] = slot
    ks = grid.wavenumbers()
    hat = fft_space(stress, grid)
    out = np.empty(stress.shape[:1] + (d,) + grid.shape_space)
    for i in range(d):
        acc = np.zeros(stress.shape[:1] + grid.shape_space, dtype=complex)
        for j in range(d):
            acc += 1j * ks[j] * hat[:, index[(i, j)]]
        out[:, i] = ifft_space(acc, grid).real
    return out


def decomposition_terms(u: SpaceTimeField, q: SpaceTimeField | None, ell: float,
                        nu: float = 0.0, dealias_products: bool = True) -> DecompositionTerms:
    """All coarse-graining fields of the energy balance at scale ``ell``.

    The pressure movie is recomputed when ``q`` is None.  Quadratic and
    cubic products feeding further spectral work are dealiased (the
    fluctuation energy itself is a plain square, keeping it nonnegative).
    """
    grid = u.grid
    if u.components != grid.d:
        raise ValueError("velocity movie must have d components")
    if ell > grid.L / 2:
        raise ValueError(f"scale {ell} exceeds half the domain")
    if q is None:
        q = pressure_movie(u)
    if q.components != 1:
        raise ValueError("pressure movie must be scalar")
    mol = make_mollifier(grid, ell)
    mask = dealias_mask(grid) if dealias_products else None

    def clean(arr: np.ndarray) -> np.ndarray:
        if mask is None:
            return arr
        hat = fft_space(arr, grid)
        return ifft_space(hat * mask, grid).real

    usm = mol.apply(u.samples)
    w = u.samples - usm
    energy = 0.5 * np.sum(w**2, axis=1, keepdims=True)
    qsm = mol.apply(q.samples)
    qdiff = q.samples - qsm
    flux = clean((energy + qdiff) * w)

    pairs = commutator_pairs(grid.d)
    stress = np.empty((grid.nt, len(pairs)) + grid.shape_space)
    for slot, (i, j) in enumerate(pairs):
        prod = clean(u.samples[:, i:i + 1] * u.samples[:, j:j + 1])[:, 0]
        stress[:, slot] = usm[:, i] * usm[:, j] - mol.apply(prod[:, None])[:, 0]
    stress = clean(stress)

    div_stress = _symmetric_divergence(stress, grid)
    transfer = np.sum(w * div_stress, axis=1, keepdims=True)
    del div_stress
    ks = grid.wavenumbers()
    usm_hat = fft_space(usm, grid)
    for i in range(grid.d):
        for j in range(grid.d):
            dj_usm_i = ifft_space(1j * ks[j] * usm_hat[:, i], grid).real
            transfer[:, 0] += w[:, i] * w[:, j] * dj_usm_i
    transfer = clean(transfer)

    gradsq_smooth = cross = gradsq_rough = None
    if nu > 0:
        gradsq_smooth = np.zeros((grid.nt, 1) + grid.shape_space)
        cross = np.zeros_like(gradsq_smooth)
        gradsq_rough = np.zeros_like(gradsq_smooth)
        u_hat = fft_space(u.samples, grid)
        for a in range(grid.d):
            for c in range(grid.d):
                gs = ifft_space(1j * ks[a] * usm_hat[:, c], grid).real
                gu = ifft_space(1j * ks[a] * u_hat[:, c], grid).real
                gradsq_smooth[:, 0] += gs**2
                cross[:, 0] += gs * gu
                gradsq_rough[:, 0] += (gs - gu) ** 2
    return DecompositionTerms(ell=ell, nu=nu, energy=energy, flux=flux, stress=stress,
                              transfer=transfer, smooth_velocity=usm,
                              gradsq_smooth=gradsq_smooth, cross_grad=cross,
                              gradsq_rough=gradsq_rough)


# ---------------------------------------------------------------------------
# Weak pairings


@dataclass(frozen=True)
class PairingContext:
    """Movie-level fields every pairing reuses: energy, transport, gradients."""

    grid: PeriodicGrid
    nu: float
    energy: np.ndarray          # (nt, *space): |u|^2/2
    transport: np.ndarray       # (nt, d, *space): (|u|^2/2 + q) u
    gradsq: np.ndarray | None   # (nt, *space): |grad u|^2 (nu > 0 only)
    u: SpaceTimeField
    q: SpaceTimeField


def build_pairing_context(u: SpaceTimeField, q: SpaceTimeField | None,
                          nu: float = 0.0) -> PairingContext:
    grid = u.grid
    if q is None:
        q = pressure_movie(u)
    e = 0.5 * np.sum(u.samples**2, axis=1)
    transport = (e[:, None] + q.samples) * u.samples
    gradsq = None
    if nu > 0:
        gradsq = np.zeros((grid.nt,) + grid.shape_space)
        ks = grid.wavenumbers()
        u_hat = fft_space(u.samples, grid)
        for a in range(grid.d):
            for c in range(grid.d):
                gradsq += ifft_space(1j * ks[a] * u_hat[:, c], grid).real ** 2
    return PairingContext(grid=grid, nu=nu, energy=e, transport=transport,
                          gradsq=gradsq, u=u, q=q)


def dr_pairing(u: SpaceTimeField | PairingContext, q: SpaceTimeField | None = None,
               nu: float = 0.0, phi: TestFunction | None = None) -> float:
    """Weak dissipation-defect pairing of a velocity movie with ``phi``.

    Evaluates the distributional defect of the local energy balance:
    the kinetic energy density against (d/dt + nu lap) phi, plus the
    energy-pressure transport against grad phi, minus the viscous
    gradient-square against phi.  Zero for exact solutions.
    """
    if phi is None:
        raise ValueError("phi is required")
    ctx = u if isinstance(u, PairingContext) else build_pairing_context(u, q, nu)
    value = phi.pair_dt(ctx.energy) + phi.pair_grad(ctx.transport)
    if ctx.nu > 0:
        value += ctx.nu * (phi.pair_lap(ctx.energy) - phi.pair_value(ctx.gradsq))
    return value


def _identity_rhs(ctx: PairingContext, terms: DecompositionTerms,
                  phi: TestFunction) -> float:
    e = terms.energy[:, 0]
    rhs = -phi.pair_dt(e)
    rhs -= phi.pair_grad(terms.smooth_velocity * terms.energy)
    rhs -= phi.pair_grad(terms.flux)
    rhs += phi.pair_value(terms.transfer[:, 0])
    if ctx.nu > 0:
        rhs -= ctx.nu * phi.pair_lap(e)
        rhs += ctx.nu * phi.pair_value(terms.gradsq_rough[:, 0])
    return rhs


def _pairing_floor(u: SpaceTimeField, phi: TestFunction) -> float:
    """Magnitude below which pairings of this movie are roundoff crumbs."""
    grid = u.grid
    umax = float(np.max(np.abs(u.samples)))
    return (1e-13 * (1.0 + umax) ** 3 * grid.volume
            * max(grid.duration, grid.dt) * max(phi.sup_norm(), 1.0))


def identity_residual(u: SpaceTimeField | PairingContext, q: SpaceTimeField | None,
                      nu: float, ell: float, phi: TestFunction,
                      terms: DecompositionTerms | None = None) -> float:
    """Relative defect of the scale-``ell`` energy-balance identity.

    Compares the direct weak pairing (sign-flipped) with the decomposed
    right-hand side; the denominator carries a scale guard, and movies
    whose pairings sit at the roundoff floor report zero rather than a
    ratio of crumbs.
    """
    ctx = u if isinstance(u, PairingContext) else build_pairing_context(u, q, nu)
    if terms is None:
        terms = decomposition_terms(ctx.u, ctx.q, ell, nu=nu)
    lhs = -dr_pairing(ctx, phi=phi)
    rhs = _identity_rhs(ctx, terms, phi)
    norms = terms.norms(ctx.grid)
    guard = max(norms["flux_l1"], norms["transfer_l1"]) * phi.sup_norm()
    denom = abs(lhs) + abs(rhs) + guard
    if denom <= _pairing_floor(ctx.u, phi):
        return 0.0
    return abs(lhs - rhs) / denom


def identity_table(u: SpaceTimeField, q: SpaceTimeField | None, nu: float,
                   ells: Sequence[float], phis: Sequence[TestFunction]) -> list[dict]:
    """Residual rows over a scale list and test-function list (CSV-ready)."""
    ctx = build_pairing_context(u, q, nu)
    rows = []
    for ell in ells:
        terms = decomposition_terms(ctx.u, ctx.q, ell, nu=nu)
        for phi in phis:
            lhs = -dr_pairing(ctx, phi=phi)
            rhs = _identity_rhs(ctx, terms, phi)
            norms = terms.norms(ctx.grid)
            guard = max(norms["flux_l1"], norms["transfer_l1"]) * phi.sup_norm()
            denom = abs(lhs) + abs(rhs) + guard
            ok = denom > _pairing_floor(ctx.u, phi)
            rows.append({
                "phi_id": phi.label, "ell": ell, "lhs": lhs, "rhs": rhs,
                "residual": abs(lhs - rhs) / denom if ok else 0.0,
            })
    return rows


def identity_scan(u: SpaceTimeField, q: SpaceTimeField | None, nu: float,
                  ells: Sequence[float], phis: Sequence[TestFunction]) -> list[dict]:
    """Memory-frugal equivalent of :func:`identity_table`.

    Streams every field through half-spectrum transforms and never holds
    a full decomposition at once, trading a little roundoff noise against
    the plain path for a working set a 512-grid movie fits into.  Rows
    match :func:`identity_table` to solver precision.
    """
    grid = u.grid
    if q is None:
        q = pressure_movie(u)
    d, nt, n = grid.d, grid.nt, grid.n
    axes = tuple(range(-d, 0))
    half = (Ellipsis, slice(0, n // 2 + 1))
    mask_h = dealias_mask(grid)[half]
    ks_h = [k[half] if a == d - 1 else k for a, k in enumerate(grid.wavenumbers())]

    def rfft(arr):
        return np.fft.rfftn(arr, axes=axes)

    def irfft(hat):
        return np.fft.irfftn(hat, s=grid.shape_space, axes=axes)

    # movie-level: LHS pairings, then free everything but u, q
    e = 0.5 * np.sum(u.samples**2, axis=1)
    lhs_vals = {}
    for phi in phis:
        lhs_vals[phi.label] = phi.pair_dt(e) + (nu * phi.pair_lap(e) if nu > 0 else 0.0)
    for a in range(d):
        trans_a = (e + q.samples[:, 0]) * u.samples[:, a]
        for phi in phis:
            lhs_vals[phi.label] += phi._pair(trans_a, f"grad{a}", use_dt=False)
        del trans_a
    if nu > 0:
        gsq = np.zeros((nt,) + grid.shape_space)
        uh_tmp = rfft(u.samples)
        for a in range(d):
            for c in range(d):
                gsq += irfft(1j * ks_h[a] * uh_tmp[:, c]) ** 2
        del uh_tmp
        for phi in phis:
            lhs_vals[phi.label] -= nu * phi.pair_value(gsq)
        del gsq
    del e
    lhs_vals = {k: -v for k, v in lhs_vals.items()}

    rows = []
    pairs = commutator_pairs(d)
    slot_of = {}
    for slot, (i, j) in enumerate(pairs):
        slot_of[(i, j)] = slot
        slot_of[(j, i)] = slot
    for ell in ells:
        mol = make_mollifier(grid, ell)
        mol_h = mol.spatial_multiplier()[half]
        uh = rfft(u.samples)
        ush = uh * mol_h
        usm = irfft(ush)
        qsm = irfft(rfft(q.samples[:, 0]) * mol_h)
        qd = q.samples[:, 0] - qsm
        del qsm
        w = u.samples - usm
        E = 0.5 * np.sum(w**2, axis=1)
        rhs_vals = {phi.label: -phi.pair_dt(E) - (nu * phi.pair_lap(E) if nu > 0 else 0.0)
                    for phi in phis}
        # viscous defect |grad(u_l - u)|^2 while both spectra are resident
        if nu > 0:
            rough = np.zeros((nt,) + grid.shape_space)
            for a in range(d):
                for c in range(d):
                    rough += irfft(1j * ks_h[a] * (ush[:, c] - uh[:, c])) ** 2
            for phi in phis:
                rhs_vals[phi.label] += nu * phi.pair_value(rough)
            del rough
        del uh
        # transport of E by the smooth field, and the flux with pressure defect
        flux_sq = np.zeros((nt,) + grid.shape_space)
        for a in range(d):
            ta = usm[:, a] * E
            fa = irfft(rfft((E + qd) * w[:, a]) * mask_h)
            flux_sq += fa**2
            for phi in phis:
                rhs_vals[phi.label] -= phi._pair(ta, f"grad{a}", use_dt=False)
                rhs_vals[phi.label] -= phi._pair(fa, f"grad{a}", use_dt=False)
            del ta, fa
        flux_l1 = lp_norm(np.sqrt(flux_sq), 1.0, grid, physical=True)
        del flux_sq, qd
        # transfer: w . div R + (w (x) w) : grad u_l, assembled slot by slot
        transfer = np.zeros((nt,) + grid.shape_space)
        for i in range(d):
            for j in range(d):
                transfer += w[:, i] * w[:, j] * irfft(1j * ks_h[j] * ush[:, i])
        del ush
        rhat = [None] * len(pairs)
        for slot, (i, j) in enumerate(pairs):
            prod = irfft(rfft(u.samples[:, i] * u.samples[:, j]) * mask_h * mol_h)
            rhat[slot] = rfft(usm[:, i] * usm[:, j] - prod) * mask_h
            del prod
        for i in range(d):
            acc = np.zeros_like(rhat[0])
            for j in range(d):
                acc += 1j * ks_h[j] * rhat[slot_of[(i, j)]]
            transfer += w[:, i] * irfft(acc)
            del acc
        del rhat, w, usm
        transfer = irfft(rfft(transfer) * mask_h)
        transfer_l1 = lp_norm(transfer, 1.0, grid, physical=True)
        for phi in phis:
            rhs_vals[phi.label] += phi.pair_value(transfer)
        del transfer, E
        guard_base = max(flux_l1, transfer_l1)
        for phi in phis:
            lhs, rhs = lhs_vals[phi.label], rhs_vals[phi.label]
            denom = abs(lhs) + abs(rhs) + guard_base * phi.sup_norm()
            ok = denom > _pairing_floor(u, phi)
            rows.append({
                "phi_id": phi.label, "ell": ell, "lhs": lhs, "rhs": rhs,
                "residual": abs(lhs - rhs) / denom if ok else 0.0,
            })
    return rows


# ---------------------------------------------------------------------------
# Mollification-rate measurements and materialized density


@dataclass(frozen=True)
class DrRates:
    """Fitted decay of the unresolved and mollified dissipation pairings."""

    difference_fit: ScalingFit | None
    mollified_fit: ScalingFit | None
    trivial: bool
    deltas: tuple[float, ...]
    difference_means: tuple[float, ...]
    mollified_means: tuple[float, ...]
    predicted: tuple[float, float] | None = None

    def passes(self, slack: float = 0.15) -> bool | None:
        if self.trivial or self.predicted is None:
            return None
        return (self.difference_fit.exponent >= self.predicted[0] - slack
                and self.mollified_fit.exponent >= self.predicted[1] - slack)


def dr_mollification_rates(u: SpaceTimeField, q: SpaceTimeField | None, nu: float,
                           phis: Sequence[TestFunction], deltas: Sequence[float],
                           sigma: float | None = None) -> DrRates:
    """Scaling in delta of the two dissipation pairings.

    For each smoothing scale the pairing against phi * rho_delta and the
    difference from the plain pairing are averaged in magnitude over the
    test functions and fitted against delta.  With a known upstream
    regularity ``sigma`` the result carries the predicted exponent pair
    (2 sigma / (1 - sigma), same minus one).  A movie whose pairings drown
    in quadrature noise is reported trivial and left unfitted.
    """
    deltas = sorted(float(d) for d in deltas)
    if len(deltas) < 4:
        raise ValueError("need at least 4 smoothing scales")
    ctx = build_pairing_context(u, q, nu)
    plain = {phi.label: dr_pairing(ctx, phi=phi) for phi in phis}
    diff_means, moll_means = [], []
    for delta in deltas:
        mol = make_mollifier(ctx.grid, delta, ell_t=delta)
        diffs, molls = [], []
        for phi in phis:
            phi_m = mollify_test_function(phi, mol)
            v_m = dr_pairing(ctx, phi=phi_m)
            molls.append(abs(v_m))
            diffs.append(abs(plain[phi.label] - v_m))
        diff_means.append(float(np.mean(diffs)))
        moll_means.append(float(np.mean(molls)))
    scale = float(np.mean(np.abs(ctx.energy))) * max(p.sup_norm() for p in phis)
    scale *= ctx.grid.volume * ctx.grid.duration
    trivial = max(diff_means) <= 1e-11 * max(scale, 1e-300)
    predicted = None
    if sigma is not None:
        base = 2.0 * sigma / (1.0 - sigma)
        predicted = (base, base - 1.0)
    if trivial:
        return DrRates(None, None, True, tuple(deltas), tuple(diff_means),
                       tuple(moll_means), predicted)
    return DrRates(fit_power_law(deltas, diff_means), fit_power_law(deltas, moll_means),
                   False, tuple(deltas), tuple(diff_means), tuple(moll_means), predicted)


@dataclass(frozen=True)
class DissipationSample:
    """Mollified dissipation density at smoothing scale ``delta``.

    The field is valid on the frame window ``valid_frames`` (inclusive);
    frames outside it are zero-filled.  ``pairings`` associates test
    function labels with the adjoint-evaluated values.
    """

    delta: float
    field: SpaceTimeField
    valid_frames: tuple[int, int]
    pairings: tuple[tuple[str, float], ...] = ()

    def sign_statistics(self) -> dict[str, float]:
        lo, hi = self.valid_frames
        data = self.field.samples[lo:hi + 1, 0]
        total = float(np.sum(np.abs(data)))
        neg = float(np.sum(np.abs(data[data < 0])))
        return {
            "negative_mass_fraction": neg / total if total else 0.0,
            "min": float(data.min()) if data.size else 0.0,
            "max": float(data.max()) if data.size else 0.0,
        }


def materialize_dissipation(u: SpaceTimeField, q: SpaceTimeField | None, nu: float,
                            delta: float, phis: Sequence[TestFunction] = ()) -> DissipationSample:
    """The dissipation defect convolved with the scale-``delta`` bump.

    Pointwise values come from pairing the movie fields with translated
    derivative kernels of the bump (time derivative sampled, spatial
    derivatives spectral), never from differentiating the movie in time.
    """
    ctx = build_pairing_context(u, q, nu)
    grid = ctx.grid
    mol = make_mollifier(grid, delta, ell_t=delta)
    hats = mol.pairing_kernel_hats()
    toffs = mol.time_offsets()
    lo, hi = mol.valid_frames(grid.nt)
    nt = grid.nt

    def conv_spacetime(movie: np.ndarray, khat: np.ndarray, sign: float) -> np.ndarray:
        """Circular-space, windowed-time convolution with a kernel family."""
        out = np.zeros((nt,) + grid.shape_space)
        fhat = np.fft.fftn(movie, axes=tuple(range(1, grid.d + 1)))
        for j, off in enumerate(toffs):
            src = np.arange(nt) - off
            valid = (src >= 0) & (src <= nt - 1)
            contrib = np.fft.ifftn(fhat[np.clip(src, 0, nt - 1)] * khat[j][None],
                                   axes=tuple(range(1, grid.d + 1))).real
            contrib[~valid] = 0.0
            out += sign * contrib
        return out

    # <D, rho(x - ., t - .)>: time and space derivatives flip sign through
    # the translation argument; the Laplacian keeps its sign.
    density = conv_spacetime(ctx.energy, hats["dt"], -1.0)
    if nu > 0:
        density += conv_spacetime(ctx.energy, hats["lap"], nu)
        density -= conv_spacetime(ctx.gradsq, hats["value"], nu)
    for a in range(grid.d):
        density += conv_spacetime(ctx.transport[:, a], hats[f"dx{a}"], -1.0)
    density[:lo] = 0.0
    density[hi + 1:] = 0.0
    fld = SpaceTimeField(grid, density[:, None], name=f"{u.name}:dissipation",
                         viscosity=nu, metadata={"delta": delta, "valid_frames": (lo, hi)})
    pairs = tuple((phi.label, dr_pairing(ctx, phi=mollify_test_function(phi, mol)))
                  for phi in phis)
    return DissipationSample(delta=delta, field=fld, valid_frames=(lo, hi), pairings=pairs)
