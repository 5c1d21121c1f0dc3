import math

import numpy as np
import pytest

from disslab.fields import SpaceTimeField, make_grid, synth_field
from disslab.lp import (
    DegenerateBandsError,
    band_project,
    besov_norm,
    build_dyadic_family,
    fit_besov_exponent,
)


@pytest.mark.parametrize("n", [64, 256, 1024])
def test_multipliers_partition_unity(n):
    g = make_grid(1, n)
    fam = build_dyadic_family(g)
    total = fam.psi_hat().astype(float).copy()
    for k in range(1, fam.K + 1):
        total += fam.phi_hat(k)
    assert np.max(np.abs(total - 1.0)) < 1e-12


def test_partition_unity_2d_and_space_time():
    g = make_grid(2, 64)
    fam = build_dyadic_family(g)
    total = fam.psi_hat().copy()
    for k in range(1, fam.K + 1):
        total += fam.phi_hat(k)
    assert np.max(np.abs(total - 1.0)) < 1e-12

    gt = make_grid(1, 64, nt=16, dt=0.1)
    fam_t = build_dyadic_family(gt, space_time=True)
    total = fam_t.psi_hat().copy()
    for k in range(1, fam_t.K + 1):
        total += fam_t.phi_hat(k)
    assert total.shape == (16, 64)
    assert np.max(np.abs(total - 1.0)) < 1e-12


def test_band_reconstruction_matches_field():
    g = make_grid(1, 256)
    fld = synth_field(g, "random_phase_besov", {"sigma": 0.3}, seed=4)
    fam = build_dyadic_family(g)
    acc = np.zeros_like(fld.samples)
    for k in range(0, fam.K + 1):
        acc = acc + band_project(fld, fam, k).samples
    assert np.max(np.abs(acc - fld.samples)) < 1e-12


def test_single_mode_lands_in_its_annulus():
    # A mode at radius exactly 2^k sits where chi(1) = 1 meets chi(2) = 0,
    # so it belongs to band k alone.
    g = make_grid(1, 256)
    fld = synth_field(g, "fourier_mode", {"j": 8})
    fam = build_dyadic_family(g)
    norms = [float(np.abs(band_project(fld, fam, k).samples).max())
             for k in range(0, fam.K + 1)]
    assert norms[3] == pytest.approx(1.0, rel=1e-10)
    for k in range(0, fam.K + 1):
        if k != 3:
            assert norms[k] < 1e-12, f"band {k} should be empty for mode 8"
    # a mode inside the low-pass block stays there
    low = synth_field(g, "fourier_mode", {"j": 1})
    assert float(np.abs(band_project(low, fam, 0).samples - low.samples).max()) < 1e-12


def test_besov_norm_single_band_closed_form():
    g = make_grid(1, 256)
    fld = synth_field(g, "fourier_mode", {"j": 8})  # inside band 3 only
    fam = build_dyadic_family(g)
    alpha, p = 0.4, 2.0
    est = besov_norm(fld, alpha, p, fam)
    band3 = float(np.sqrt(np.mean(band_project(fld, fam, 3).samples ** 2)))
    assert band3 == pytest.approx(math.sqrt(0.5), rel=1e-10)
    expect = est.lowpass + 2.0 ** (3 * alpha) * band3
    assert est.norm == pytest.approx(expect, rel=1e-12)
    assert len(est.band_norms) == fam.K
    d = est.to_dict()
    assert d["alpha"] == alpha and len(d["bands"]) == fam.K


def test_fit_recovers_synthetic_regularity():
    g = make_grid(1, 4096)
    sigma = 0.4
    fld = synth_field(g, "random_phase_besov", {"sigma": sigma}, seed=11)
    fam = build_dyadic_family(g)
    fit = fit_besov_exponent(fld, 2.0, fam)
    assert fit.exponent == pytest.approx(sigma, abs=0.05)
    assert fit.r2 > 0.98


def test_degenerate_band_errors():
    g = make_grid(1, 256)
    const = SpaceTimeField(g, np.full((1, 1, 256), 2.0), name="const")
    fam = build_dyadic_family(g)
    with pytest.raises(DegenerateBandsError):
        fit_besov_exponent(const, 2.0, fam)
    # a pure low mode has empty high bands: fitting the default window fails too
    low = synth_field(g, "fourier_mode", {"j": 1})
    with pytest.raises(DegenerateBandsError):
        fit_besov_exponent(low, 2.0, fam)


def test_family_validation():
    with pytest.raises(ValueError):
        build_dyadic_family(make_grid(1, 8))
    fam = build_dyadic_family(make_grid(1, 64))
    with pytest.raises(ValueError):
        fam.phi_hat(0)
    with pytest.raises(ValueError):
        fam.phi_hat(fam.K + 1)
    with pytest.raises(ValueError):
        build_dyadic_family(make_grid(1, 64, nt=2, dt=0.1), space_time=True)


def test_infinity_norm_band_measurement():
    g = make_grid(1, 256)
    fld = synth_field(g, "fourier_mode", {"j": 8, "amplitude": 2.0})
    fam = build_dyadic_family(g)
    est = besov_norm(fld, 0.0, math.inf, fam)
    # band 3 holds the whole mode; its sup norm is the amplitude
    assert est.band_norms[2] == pytest.approx(2.0, rel=1e-10)
