import numpy as np
import pytest

from disslab.fields import SpaceTimeField, make_grid, synth_field
from disslab.fitting import fit_power_law
from disslab.mollify import (
    commutator,
    make_mollifier,
    mollification_rate_report,
    mollify,
)


def test_multiplier_matches_direct_stencil_sum():
    # The Fourier multiplier at integer mode j must equal the plain cosine
    # sum over the truncated bump weights.
    g = make_grid(1, 256)
    ell = 12 * g.dx
    mol = make_mollifier(g, ell)
    rs = mol.space_radius_cells
    offs = np.arange(-rs, rs + 1) * g.dx
    w = np.clip(1 - (offs / ell) ** 2, 0, None) ** 4
    w /= w.sum()
    mult = mol.spatial_multiplier()
    for mode in (1, 3, 7):
        k = mode * 2 * np.pi / g.L
        direct = float(np.sum(w * np.cos(k * offs)))
        assert mult[mode] == pytest.approx(direct, abs=1e-13)


def test_apply_scales_single_modes_by_the_multiplier():
    g = make_grid(1, 256)
    mol = make_mollifier(g, 12 * g.dx)
    x = g.axis_coords()
    f = np.cos(3 * x)[None, None]
    out = mol.apply(f)
    np.testing.assert_allclose(out, mol.spatial_multiplier()[3] * f, atol=1e-13)


def test_low_mode_defect_is_quadratic_in_scale():
    # 1 - m(1; ell) should shrink like ell^2 for the compact bump.
    g = make_grid(1, 256)
    ells = np.array([8, 12, 16, 24, 32, 48]) * g.dx
    defect = [1.0 - make_mollifier(g, float(e)).spatial_multiplier()[1] for e in ells]
    fit = fit_power_law(ells, defect)
    assert fit.exponent == pytest.approx(2.0, abs=0.05)
    assert fit.r2 > 0.999


def test_mean_preservation_and_weight_normalization():
    rng = np.random.default_rng(0)
    g = make_grid(2, 64)
    samp = rng.standard_normal((1, 2, 64, 64))
    mol = make_mollifier(g, 9 * g.dx)
    assert mol.weights_sum() == pytest.approx(1.0, abs=1e-14)
    sm = mol.apply(samp)
    drift = np.abs(sm.mean(axis=(0, 2, 3)) - samp.mean(axis=(0, 2, 3))).max()
    assert drift < 1e-14


def test_identity_below_grid_resolution():
    g = make_grid(2, 64)
    samp = np.random.default_rng(1).standard_normal((1, 1, 64, 64))
    tiny = make_mollifier(g, 1.5 * g.dx)
    assert tiny.is_identity
    np.testing.assert_allclose(tiny.apply(samp), samp, atol=1e-13)


def test_mollify_and_commutator_wrappers():
    g = make_grid(2, 64)
    fld = synth_field(g, "taylor_green")
    ell = 6 * g.dx
    sm = mollify(fld, ell)
    assert isinstance(sm, SpaceTimeField)
    # smoothing removes variance but keeps the mean
    assert np.var(sm.samples) < np.var(fld.samples)
    assert sm.samples.mean() == pytest.approx(fld.samples.mean(), abs=1e-13)
    # symmetric-tensor commutator checked against its definition by hand
    com = commutator(fld, ell)
    assert com.samples.shape[1] == 3  # pairs (0,0), (0,1), (1,1)
    mol = make_mollifier(g, ell)
    prod01 = fld.samples[:, 0] * fld.samples[:, 1]
    byhand = (sm.samples[:, 0] * sm.samples[:, 1]
              - mol.apply(prod01[:, None])[:, 0])
    np.testing.assert_allclose(com.samples[:, 1], byhand, atol=1e-12)
    with pytest.raises(ValueError):
        commutator(synth_field(make_grid(1, 64), "fourier_mode"), 6 * g.dx)


def test_rate_report_recovers_target_regularity():
    g = make_grid(1, 4096)
    fld = synth_field(g, "weierstrass", {"sigma": 1 / 3}, seed=11)
    ells = [6 * g.dx * 2**j for j in range(6)]
    rep = mollification_rate_report(fld, p=2.0, ells=ells, sigma_target=1 / 3)
    # difference norm decays about like ell^sigma, commutator gradient like
    # ell^(2 sigma - 1); both predictions are recorded in the report
    assert rep["predicted"]["difference"] == pytest.approx(1 / 3)
    assert rep["difference"]["fit"].exponent == pytest.approx(1 / 3, abs=0.1)
    assert rep["commutator_gradient"]["fit"].exponent == pytest.approx(
        rep["predicted"]["commutator_gradient"], abs=0.15
    )
    assert rep["difference"]["fit"].r2 > 0.97


def test_rate_report_insensitive_to_bump_power():
    g = make_grid(1, 4096)
    fld = synth_field(g, "weierstrass", {"sigma": 1 / 3}, seed=11)
    ells = [6 * g.dx * 2**j for j in range(6)]
    rep4 = mollification_rate_report(fld, p=2.0, sigma_target=None, ells=ells)
    rep6 = mollification_rate_report(fld, p=2.0, sigma_target=None, ells=ells, power=6)
    for key in ("difference", "gradient", "commutator_gradient"):
        shift = abs(rep6[key]["fit"].exponent - rep4[key]["fit"].exponent)
        assert shift < 0.1, f"{key} exponent moved {shift} under a bump change"


def test_space_time_constant_movie_is_fixed():
    g = make_grid(1, 64, nt=40, dt=0.05)
    mov = np.full((40, 1, 64), 3.5)
    mol = make_mollifier(g, 8 * g.dx, ell_t=6 * g.dt)
    lo, hi = mol.valid_frames(40)
    out = mol.apply(mov)
    assert np.max(np.abs(out[lo:hi + 1] - 3.5)) < 1e-13


def test_space_time_matches_direct_dense_sum():
    g = make_grid(1, 64, nt=40, dt=0.05)
    sig = np.cos(np.arange(40)[:, None] * 0.13
                 + np.arange(64)[None, :] * 2 * np.pi / 64 * 3)
    mov = sig[:, None, :].copy()
    mol = make_mollifier(g, 8 * g.dx, ell_t=6 * g.dt)
    out = mol.apply(mov)
    w, _ = mol._stencil()
    toffs = mol.time_offsets()
    rs = mol.space_radius_cells
    frame = 20
    acc = np.zeros(64)
    for ji, j in enumerate(toffs):
        for oi, o in enumerate(range(-rs, rs + 1)):
            acc += w[ji, oi] * np.roll(mov[frame - j, 0], o)
    assert np.max(np.abs(acc - out[frame, 0])) < 1e-13


def test_time_radius_must_fit_the_movie():
    g = make_grid(1, 64, nt=17, dt=0.05)
    mol = make_mollifier(g, 6 * g.dx, ell_t=11 * g.dt)
    with pytest.raises(ValueError):
        mol.valid_frames(17)


def test_pairing_kernels_annihilate_constants():
    g = make_grid(1, 64, nt=33, dt=0.05)
    mol = make_mollifier(g, 6 * g.dx, ell_t=4 * g.dt)
    hats = mol.pairing_kernel_hats()
    # value kernel: total weight one (zero-frequency entries sum to 1 * n)
    total = sum(float(hats["value"][j].flat[0]) for j in range(hats["value"].shape[0]))
    assert total == pytest.approx(1.0, abs=1e-12)
    # time-derivative slices cancel pairwise: a time-constant field pairs to
    # zero at roundoff (the slices are negatives of their mirror images)
    dts = mol.time_derivative_stencil()
    assert np.max(np.abs(dts.sum(axis=0))) < 1e-14 * np.max(np.abs(dts))
    np.testing.assert_allclose(dts, -dts[::-1], atol=1e-16)
    # spatial kernels are spectral multiples of the value transform: exact
    # zeros at the zero frequency, so spatial constants die exactly
    assert np.max(np.abs(np.asarray(
        [hats["dx0"][j].flat[0] for j in range(hats["dx0"].shape[0])]))) == 0.0
    assert np.max(np.abs(np.asarray(
        [hats["lap"][j].flat[0] for j in range(hats["lap"].shape[0])]))) == 0.0


def test_pairing_kernel_spatial_derivatives_are_spectral():
    # Pairing cos(kx) with the dx kernel must reproduce -k m(k) sin(kx)
    # (derivative falling on the translate argument flips the sign).
    g = make_grid(1, 128, nt=9, dt=0.1)
    mol = make_mollifier(g, 6 * g.dx, ell_t=2 * g.dt)
    hats = mol.pairing_kernel_hats()
    x = g.axis_coords()
    f = np.cos(3 * x)
    f_hat = np.fft.fft(f)
    mid = hats["dx0"].shape[0] // 2
    out = sum(np.fft.ifft(f_hat * hats["dx0"][j]).real
              for j in range(hats["dx0"].shape[0]))
    m3 = mol.spatial_multiplier()[3]
    np.testing.assert_allclose(out, 3 * m3 * (-np.sin(3 * x)), atol=1e-12)
    lap = sum(np.fft.ifft(f_hat * hats["lap"][j]).real
              for j in range(hats["lap"].shape[0]))
    np.testing.assert_allclose(lap, -9 * m3 * np.cos(3 * x), atol=1e-12)
