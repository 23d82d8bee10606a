import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from hvac_gbpi.comfort import (ComfortBand, NonConvergence, PmvInputs, comfort_excess, compute_pmv, is_comfortable,
                               mean_radiant_temp, pmv)
from reference import ISO_CASES, fanger_pmv


def test_operating_point_matches_oracle():
    got = compute_pmv(PmvInputs(1.0, 0.0, 25.0, 0.5, 27.0, 0.2, 1.0))
    assert got == pytest.approx(fanger_pmv(25.0, 27.0, 0.2, 0.5, 1.0, 1.0), abs=0.01)


@pytest.mark.parametrize("case", ISO_CASES)
def test_published_reference_cases(case):
    ta, tr, v, rh, met, clo, expected = case
    assert fanger_pmv(ta, tr, v, rh, met, clo) == pytest.approx(expected, abs=0.01)
    assert pmv(ta, rh, tr, v, met, clo) == pytest.approx(expected, abs=0.01)


@given(st.floats(18, 32), st.floats(0.3, 0.7), st.floats(0.05, 0.5), st.floats(1.0, 1.6), st.floats(0.5, 1.2))
def test_agrees_with_oracle(ta, rh, v, met, clo):
    want = fanger_pmv(ta, ta + 2, v, rh, met, clo)
    assume(abs(want) < 3.5)
    assert pmv(ta, rh, ta + 2, v, met, clo) == pytest.approx(want, abs=0.01)


def test_deterministic_and_vectorised():
    t = np.linspace(18, 32, 29)
    a = pmv(t, 0.5, t + 2)
    assert np.array_equal(a, pmv(t, 0.5, t + 2))
    assert a[5] == pmv(float(t[5]), 0.5, float(t[5]) + 2)


def test_monotone_in_air_and_radiant_temperature():
    t = np.arange(18.0, 32.01, 0.5)
    assert np.all(np.diff(pmv(t, 0.5, 27.0)) > 0)
    assert np.all(np.diff(pmv(25.0, 0.5, t)) > 0)
    assert pmv(30.0, 0.5, 32.0) > pmv(24.0, 0.5, 26.0)


def test_increasing_in_humidity_when_warm():
    rh = np.linspace(0.1, 0.9, 9)
    assert np.all(np.diff(pmv(27.0, rh, 29.0)) > 0)


def test_input_validation():
    with pytest.raises(ValueError):
        PmvInputs(t_air=45.0)
    with pytest.raises(ValueError):
        PmvInputs(rh=1.5)
    with pytest.raises(ValueError):
        PmvInputs(air_velocity=-0.1)
    with pytest.raises(ValueError):
        ComfortBand(0.5, -0.5)


def test_non_convergence_is_reported():
    with pytest.raises(NonConvergence):
        pmv(np.nan, 0.5, 25.0)


def test_mean_radiant_temperature():
    assert mean_radiant_temp(25) == 27
    assert mean_radiant_temp(0) == 2
    assert mean_radiant_temp(-2) == 0


def test_band_membership():
    band = ComfortBand()
    assert is_comfortable(0.0, band)
    assert is_comfortable(0.5, band)
    assert is_comfortable(-0.5, band)
    assert not is_comfortable(0.6, band)
    assert np.allclose(comfort_excess(np.array([-0.7, 0.0, 0.8]), band), [0.2, 0.0, 0.3], rtol=0, atol=1e-15)
