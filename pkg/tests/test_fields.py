import math

import numpy as np
import pytest

from disslab.fields import (
    PeriodicGrid,
    SpaceTimeField,
    crossed_shear_velocity,
    lp_norm,
    make_grid,
    synth_field,
    taylor_green_movie,
    taylor_green_pressure_movie,
)
from disslab.spectral import spectral_divergence


def test_grid_geometry():
    g = make_grid(2, 64, L=4.0, nt=5, dt=0.25)
    assert g.dx == pytest.approx(4.0 / 64)
    assert g.shape_space == (64, 64)
    assert g.volume == pytest.approx(16.0)
    assert g.cell_volume == pytest.approx(g.dx**2)
    assert g.duration == pytest.approx(1.0)
    np.testing.assert_allclose(g.times(), np.arange(5) * 0.25)
    np.testing.assert_allclose(g.axis_coords(), np.arange(64) * g.dx)


def test_grid_validation():
    with pytest.raises(ValueError):
        make_grid(4, 64)
    with pytest.raises(ValueError):
        make_grid(1, 48)  # not a power of two
    with pytest.raises(ValueError):
        make_grid(1, 4)  # too small
    with pytest.raises(ValueError):
        make_grid(1, 64, L=-1.0)
    with pytest.raises(ValueError):
        make_grid(1, 64, nt=3, dt=0.0)


def test_grid_wavenumbers_integer_lattice():
    g = make_grid(1, 16)  # L = 2 pi, so angular wavenumbers are integers
    k = g.wavenumbers()[0]
    np.testing.assert_allclose(k, np.fft.fftfreq(16, d=1.0 / 16) * 1.0, atol=1e-12)
    g2 = make_grid(2, 8, L=1.0)
    kx = g2.wavenumbers()[0]
    assert kx.shape == (8, 1)
    assert kx[1, 0] == pytest.approx(2 * math.pi)
    assert g2.k_squared().shape == (8, 8)


def test_with_time_and_space_only():
    g = make_grid(1, 32)
    gt = g.with_time(9, 0.1)
    assert gt.nt == 9 and gt.dt == pytest.approx(0.1) and gt.n == g.n
    assert gt.space_only().nt == 1


def test_field_container_validation():
    g = make_grid(1, 16, nt=3, dt=0.1)
    with pytest.raises(ValueError):
        SpaceTimeField(g, np.zeros((2, 1, 16)), name="bad_nt")
    with pytest.raises(ValueError):
        SpaceTimeField(g, np.zeros((3, 1, 8)), name="bad_n")
    bad = np.zeros((3, 1, 16))
    bad[0, 0, 0] = np.nan
    with pytest.raises(ValueError):
        SpaceTimeField(g, bad, name="nonfinite")


def test_field_container_accessors():
    g = make_grid(1, 16, nt=3, dt=0.1)
    f = SpaceTimeField(g, np.arange(48.0).reshape(3, 1, 16), name="ramp")
    assert not f.is_static()
    np.testing.assert_array_equal(f.frame(1), f.samples[1])
    np.testing.assert_array_equal(f.component(0), f.samples[:, 0])
    g2 = f.with_samples(2.0 * f.samples, name="double")
    assert g2.name == "double" and g2.grid is g
    static = SpaceTimeField(g.space_only(), np.ones((1, 1, 16)), name="one")
    assert static.is_static()
    assert static.components == 1


def test_synth_constant_and_fourier_mode():
    g = make_grid(1, 32)
    c = synth_field(g, "constant", {"value": 2.5, "components": 3})
    assert c.samples.shape == (1, 3, 32)
    assert np.all(c.samples == 2.5)
    m = synth_field(g, "fourier_mode", {"j": 3, "amplitude": 0.7})
    x = g.axis_coords()
    np.testing.assert_allclose(m.samples[0, 0], 0.7 * np.cos(3 * x), atol=1e-14)
    with pytest.raises(ValueError):
        synth_field(g, "fourier_mode", {"j": 17})
    with pytest.raises(ValueError):
        synth_field(g, "no_such_kind")


def test_synth_taylor_green_matches_formula():
    g = make_grid(2, 32)
    f = synth_field(g, "taylor_green")
    x, y = g.meshgrid()
    np.testing.assert_allclose(f.samples[0, 0], np.sin(x) * np.cos(y), atol=1e-14)
    np.testing.assert_allclose(f.samples[0, 1], -np.cos(x) * np.sin(y), atol=1e-14)
    div = spectral_divergence(f.samples[0], g)
    assert np.max(np.abs(div)) < 1e-12


def test_synth_sawtooth_shape():
    g = make_grid(1, 64)
    s = synth_field(g, "sawtooth")
    u = s.samples[0, 0]
    assert u.min() == pytest.approx(-0.5)
    assert u.max() == pytest.approx(0.5)
    # one descending jump (at the periodic wrap), elsewhere a uniform ramp
    d = np.roll(u, -1) - u
    assert np.sum(d < 0) == 1
    np.testing.assert_allclose(d[d > 0], d[d > 0][0])
    # two shocks when requested
    s2 = synth_field(g, "sawtooth", {"nshocks": 2})
    d2 = np.roll(s2.samples[0, 0], -1) - s2.samples[0, 0]
    assert np.sum(d2 < 0) == 2


def test_synth_random_kinds_are_seeded():
    g = make_grid(1, 256)
    a = synth_field(g, "random_phase_besov", {"sigma": 0.4}, seed=11)
    b = synth_field(g, "random_phase_besov", {"sigma": 0.4}, seed=11)
    c = synth_field(g, "random_phase_besov", {"sigma": 0.4}, seed=12)
    np.testing.assert_array_equal(a.samples, b.samples)
    assert np.max(np.abs(a.samples - c.samples)) > 1e-3
    # unit rms by construction
    assert np.sqrt(np.mean(a.samples**2)) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        synth_field(g, "random_phase_besov", {"sigma": 1.5}, seed=0)


def test_synth_weierstrass_lacunary_modes():
    g = make_grid(1, 512)
    w = synth_field(g, "weierstrass", {"sigma": 0.5, "random_phases": False}, seed=0)
    x = g.axis_coords()
    jmax = int(math.log2(512 // 2)) - 1
    expect = sum(2.0 ** (-0.5 * j) * np.cos(2**j * x) for j in range(jmax + 1))
    np.testing.assert_allclose(w.samples[0, 0], expect, atol=1e-12)


def test_taylor_green_movie_decay():
    nu = 0.05
    g = make_grid(2, 32, nt=5, dt=0.2)
    mov = taylor_green_movie(g, nu)
    assert mov.samples.shape == (5, 2, 32, 32)
    np.testing.assert_allclose(
        mov.samples[4], mov.samples[0] * math.exp(-2 * nu * 0.8), atol=1e-12
    )
    q = taylor_green_pressure_movie(g, nu)
    x, y = g.meshgrid()
    expect = 0.25 * (np.cos(2 * x) + np.cos(2 * y)) * math.exp(-4 * nu * 0.8)
    np.testing.assert_allclose(q.samples[4, 0], expect, atol=1e-12)


def test_crossed_shear_velocity_divergence_free():
    g = make_grid(2, 64)
    v = crossed_shear_velocity(g, 1.0 / 3.0, seed=5)
    assert v.samples.shape[1] == 2
    div = spectral_divergence(v.samples[0], g)
    assert np.max(np.abs(div)) < 1e-10
    v2 = crossed_shear_velocity(g, 1.0 / 3.0, seed=5)
    np.testing.assert_array_equal(v.samples, v2.samples)


def test_lp_norm_closed_forms():
    g = make_grid(1, 64)
    const = np.full((1, 1, 64), 3.0)
    assert lp_norm(const, 2.0) == pytest.approx(3.0)
    assert lp_norm(const, math.inf) == pytest.approx(3.0)
    sine = np.sin(g.axis_coords())[None, None]
    assert lp_norm(sine, 2.0) == pytest.approx(math.sqrt(0.5), abs=1e-12)
    # physical normalization scales by volume^(1/p)
    assert lp_norm(const, 2.0, grid=g, physical=True) == pytest.approx(
        3.0 * math.sqrt(g.volume)
    )
    with pytest.raises(ValueError):
        lp_norm(const, -1.0)
