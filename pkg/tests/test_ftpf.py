import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bctrack import ftpf
from bctrack.errors import BoundaryViolation, InitialConditionViolation

P = ftpf.PerformanceProfile(1.05, 0.05, 4.0, 0.8)


def test_sigma_values():
    assert P.sigma(0) == 1.05
    assert P.sigma(0.8) == 0.05 and P.sigma(3.0) == 0.05
    assert P.sigma(0.4) == pytest.approx(math.exp(-4) + 0.05, abs=1e-15)


def test_sigma_dot_values():
    assert P.sigma_dot(0) == pytest.approx(-5.0)
    assert P.sigma_dot(0.8) == 0 and P.sigma_dot(5) == 0
    assert abs(P.sigma_dot(0.8 - 1e-3)) < 1e-100


def test_sigma_ddot_matches_finite_difference():
    for t in (0.05, 0.2, 0.4, 0.6):
        h = 1e-6
        fd = (P.sigma_dot(t + h) - P.sigma_dot(t - h)) / (2 * h)
        assert P.sigma_ddot(t) == pytest.approx(fd, rel=1e-6)


def test_underflow_clamp_near_settling_time():
    assert P.sigma(0.8 - 1e-9) == 0.05
    assert P.sigma_dot(0.8 - 1e-9) == 0.0


def test_profile_invariants():
    for args in [(1.05, 0.05, 0.5, 0.8), (0.05, 1.05, 4, 0.8), (1.05, 0, 4, 0.8), (1.05, 0.05, 4, 0)]:
        with pytest.raises(ValueError):
            ftpf.PerformanceProfile(*args)


def test_transform_examples():
    one = ftpf.PerformanceProfile(1.0, 0.5, 1.0, 1.0)
    assert ftpf.transform_error(one, 0.0, 0.0) == 0
    assert ftpf.transform_error(one, 0.0, 0.5) == pytest.approx(1.0)
    assert ftpf.transform_error(one, 0.0, 0.99) == pytest.approx(63.65674116287399, rel=1e-12)
    with pytest.raises(BoundaryViolation):
        ftpf.transform_error(one, 0.0, 1.0)
    with pytest.raises(BoundaryViolation):
        ftpf.transform_error(one, 0.0, -1.0)


def test_mu_xi_beta():
    assert ftpf.mu(0) == 0 and ftpf.mu(1) == pytest.approx(0.5)
    assert ftpf.mu(1e300) == pytest.approx(1.0)
    half_pi = ftpf.PerformanceProfile(math.pi / 2, 0.1, 1, 1)
    assert ftpf.xi(half_pi, 0, 0) == pytest.approx(1.0)
    unit = ftpf.PerformanceProfile(1.0, 0.1, 1, 1)
    assert ftpf.xi(unit, 0, 0) == pytest.approx(math.pi / 2)
    assert ftpf.xi(unit, 0, 1) == pytest.approx(math.pi)
    assert ftpf.beta(P, 1.0, 3.0) == 0
    assert ftpf.beta(P, 0.3, 0.0) == 0
    assert ftpf.beta(P, 0.0, 1.0) == pytest.approx(-2.5)


def test_validate_initial():
    ftpf.validate_initial(P, 0.1)
    for z0 in (0.0, 1.05, -2):
        with pytest.raises(InitialConditionViolation):
            ftpf.validate_initial(P, z0)


def test_monotone_and_bounded():
    ts = np.linspace(0, 2, 10_000)
    s = np.array([P.sigma(t) for t in ts])
    assert np.all(np.diff(s) <= 0)
    assert s.min() >= 0.05 and s.max() <= 1.05


@given(st.floats(0, 3), st.floats(-0.999, 0.999))
def test_round_trip(t, frac):
    z = frac * P.sigma(t)
    e = ftpf.transform_error(P, t, z)
    back = P.sigma(t) * ftpf.mu(e)
    assert back == pytest.approx(z, rel=1e-10, abs=1e-15)


@given(st.floats(0, 0.79), st.floats(-0.9, 0.9))
def test_xi_is_inverse_slope(t, frac):
    s = P.sigma(t)
    e = ftpf.transform_error(P, t, frac * s)
    h = 1e-6 * (1 + abs(e))
    dzde = (s * ftpf.mu(e + h) - s * ftpf.mu(e - h)) / (2 * h)
    assert ftpf.xi(P, t, e) == pytest.approx(1 / dzde, rel=1e-6)


def test_exponential_comparison_profile_is_looser():
    exp = ftpf.ExponentialProfile(1.05, 0.05, 4.0, 0.8)
    ts = np.linspace(0.3, 2.0, 50)
    assert all(P.sigma(t) <= exp.sigma(t) for t in ts)
    assert exp.sigma(5.0) > 0.05
