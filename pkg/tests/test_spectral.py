import numpy as np
import pytest

from disslab.fields import make_grid, synth_field
from disslab.spectral import (
    dealias_mask,
    fft_space,
    ifft_space,
    solve_poisson,
    spectral_divergence,
    spectral_gradient,
    spectral_laplacian,
)


def test_fft_round_trip():
    g = make_grid(2, 32, nt=3, dt=0.1)
    rng = np.random.default_rng(0)
    arr = rng.standard_normal((3, 2, 32, 32))
    back = ifft_space(fft_space(arr, g), g).real
    np.testing.assert_allclose(back, arr, atol=1e-13)


def test_gradient_of_plane_waves():
    g = make_grid(1, 64)
    x = g.axis_coords()
    grad = spectral_gradient(np.sin(3 * x), g)
    assert grad.shape == (1, 64)
    np.testing.assert_allclose(grad[0], 3 * np.cos(3 * x), atol=1e-11)

    g2 = make_grid(2, 32)
    xs, ys = g2.meshgrid()
    f = np.sin(xs) * np.cos(2 * ys) + np.zeros(g2.shape_space)
    grad2 = spectral_gradient(f, g2)
    assert grad2.shape == (2, 32, 32)
    np.testing.assert_allclose(grad2[0], np.cos(xs) * np.cos(2 * ys), atol=1e-11)
    np.testing.assert_allclose(grad2[1], -2 * np.sin(xs) * np.sin(2 * ys), atol=1e-11)


def test_laplacian_and_divergence_consistency():
    g = make_grid(2, 32)
    xs, ys = g.meshgrid()
    f = np.sin(xs) * np.sin(ys) + np.zeros(g.shape_space)
    lap = spectral_laplacian(f, g)
    np.testing.assert_allclose(lap, -2 * f, atol=1e-11)
    # div(grad f) == lap f
    div = spectral_divergence(spectral_gradient(f, g), g)
    np.testing.assert_allclose(div, lap, atol=1e-11)


def test_divergence_of_rotational_field_vanishes():
    g = make_grid(2, 64)
    tg = synth_field(g, "taylor_green").samples[0]
    assert np.max(np.abs(spectral_divergence(tg, g))) < 1e-12


def test_dealias_mask_two_thirds_rule():
    g = make_grid(1, 32)
    mask = dealias_mask(g)
    assert mask.shape == (32,)
    assert mask.dtype == bool or mask.dtype == np.float64
    lattice = np.abs(np.fft.fftfreq(32, d=1.0 / 32))
    kept = np.asarray(mask, dtype=bool)
    # all retained modes lie strictly below the two-thirds cut, all cut modes above
    cut = 32 / 3.0
    assert np.all(lattice[kept] < cut + 1e-9)
    assert np.all(lattice[~kept] > cut - 1.0)


def test_poisson_inverts_laplacian_mean_free():
    g = make_grid(2, 64)
    xs, ys = g.meshgrid()
    truth = np.cos(xs) * np.sin(2 * ys) + np.zeros(g.shape_space)
    rhs = -spectral_laplacian(truth, g)  # solver convention: -lap(q) = rhs
    sol = solve_poisson(rhs, g)
    np.testing.assert_allclose(sol, truth, atol=1e-11)
    assert abs(sol.mean()) < 1e-13
