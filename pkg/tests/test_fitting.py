import numpy as np
import pytest

from disslab.fitting import ScalingFit, fit_power_law


def test_exact_power_law_is_recovered():
    x = np.array([1.0, 2.0, 4.0, 8.0, 16.0])
    y = 3.5 * x**1.25
    fit = fit_power_law(x, y)
    assert fit.exponent == pytest.approx(1.25, abs=1e-12)
    assert np.exp(fit.intercept) == pytest.approx(3.5, rel=1e-12)
    assert fit.r2 == pytest.approx(1.0, abs=1e-12)
    assert fit.npoints == 5
    assert fit.window == (1.0, 16.0)


def test_window_restricts_the_fit():
    x = np.array([1.0, 2.0, 4.0, 8.0, 16.0])
    y = x**2.0
    y[-1] *= 100.0  # corrupt the last point, then exclude it
    fit = fit_power_law(x, y, window=(1.0, 8.0))
    assert fit.exponent == pytest.approx(2.0, abs=1e-12)
    assert fit.npoints == 4
    assert fit.window == (1.0, 8.0)
    # window endpoints are inclusive within the relative tolerance
    fit2 = fit_power_law(x, y, window=(2.0 * (1 + 1e-12), 8.0))
    assert fit2.npoints == 3


def test_few_points_and_nonpositive_data_raise():
    with pytest.raises(ValueError):
        fit_power_law([1.0, 2.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        fit_power_law([1.0, 2.0, 4.0], [1.0, -2.0, 4.0])
    with pytest.raises(ValueError):
        fit_power_law([0.0, 2.0, 4.0], [1.0, 2.0, 4.0])
    with pytest.raises(ValueError):
        fit_power_law([1.0, 2.0, 4.0, 8.0], [1.0, 2.0, 4.0, 8.0], window=(32.0, 64.0))


def test_r2_stays_in_unit_interval():
    rng = np.random.default_rng(1)
    x = np.array([1.0, 2.0, 4.0, 8.0, 16.0, 32.0])
    y = x**0.5 * np.exp(rng.standard_normal(6))
    fit = fit_power_law(x, y)
    assert 0.0 <= fit.r2 <= 1.0


def test_to_dict_round_trip():
    fit = ScalingFit(exponent=1.5, intercept=0.25, r2=0.99, window=(1.0, 8.0), npoints=4)
    d = fit.to_dict()
    assert d["exponent"] == 1.5
    assert d["npoints"] == 4
    assert tuple(d["window"]) == (1.0, 8.0)
