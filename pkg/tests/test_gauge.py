import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import erf

from gauge_dnls import (
    Coefficients,
    Field,
    GaugeOverflowError,
    SolverConfig,
    apply_gauge,
    gauge,
    gauge_identity_residual,
    gauge_phase,
    invert_gauge,
    l2_norm,
    make_grid,
    sobolev_norm,
    solve_regularized,
)
from gauge_dnls.gauge import GaugePair, cubic_coefficients, gauged_nonlinearity
from gauge_dnls.trajectory import Trajectory

from conftest import smooth_random


def test_coefficients_special_case_and_roundtrip():
    c = Coefficients(0.5j, 1j)
    assert c.special_case
    assert not Coefficients(1.0, 0.0).special_case
    assert Coefficients().is_zero
    d = c.to_dict()
    assert d == {"lam": [0.0, 0.5], "mu": [0.0, 1.0]}
    assert Coefficients.from_dict(d) == c
    assert Coefficients.from_dict({"lam": 2.0}) == Coefficients(2.0, 0.0)


def test_phase_derivative_matches_integrand(grid, rng):
    c = Coefficients(0.3 - 0.2j, 0.7 + 0.1j)
    for _ in range(10):
        # fast spectral decay: odd symbols drop the Nyquist mode, so data must be resolved
        u = smooth_random(grid, rng, decay=8.0)
        pair = GaugePair(u, gauge_phase(u, c), c)
        assert pair.derivative_residual() <= 1e-10 * (1 + sobolev_norm(u, 1))


def test_special_case_phase_is_imaginary_and_gauge_is_unitary(grid, rng, special):
    u = smooth_random(grid, rng)
    v, phase = gauge(u, special)
    assert np.abs(phase.physical().real).max() <= 1e-14
    np.testing.assert_allclose(np.abs(v.physical()), np.abs(u.physical()), atol=1e-14)


def test_gaussian_phase_against_erf(grid, gaussian):
    # lam = 1, mu = 0: Lambda = 2 * int_{-inf}^x 0.5 exp(-y^2) dy
    phase = gauge_phase(gaussian, Coefficients(1.0, 0.0)).physical()
    exact = 0.5 * math.sqrt(math.pi) * (1 + erf(grid.points))
    assert np.abs(phase - exact).max() <= 1e-12


def test_forward_inverse_roundtrip(grid, rng):
    c = Coefficients(0.4 + 0.3j, -0.2 + 0.5j)
    u = smooth_random(grid, rng)
    v, phase = gauge(u, c)
    back = apply_gauge(v, phase, "inverse")
    assert l2_norm(back - u) <= 1e-13 * max(1.0, l2_norm(u))
    with pytest.raises(ValueError):
        apply_gauge(u, phase, "sideways")


@pytest.mark.parametrize("c", [Coefficients(0.5j, 1j), Coefficients(1.0, 0.0), Coefficients(0.3 + 0.2j, -0.4 + 0.1j)])
def test_invert_gauge_recovers_field(grid, rng, c):
    u = smooth_random(grid, rng)
    v, phase = gauge(u, c)
    u2, phase2 = invert_gauge(v, c)
    assert l2_norm(u2 - u) <= 1e-11
    assert np.abs(phase2.physical() - phase.physical()).max() <= 1e-11


def test_zero_coefficients_give_identity(grid, rng):
    u = smooth_random(grid, rng)
    v, phase = gauge(u, Coefficients())
    assert l2_norm(phase) == 0
    assert l2_norm(v - u) == 0
    u2, _ = invert_gauge(u, Coefficients())
    assert l2_norm(u2 - u) == 0


def test_overflow_guard(grid):
    big = Field.from_function(grid, lambda x: 400.0 * np.exp(-(x**2)))
    with pytest.raises(GaugeOverflowError):
        gauge(big, Coefficients(1.0, 0.0))


def test_cubic_coefficients():
    # special case: the |u|^2 conj(u) term cancels exactly
    a3, a21, a12 = cubic_coefficients(Coefficients(0.5j, 1j), 0.0)
    assert a3 == 0 and a21 == pytest.approx(1.0) and abs(a12) <= 1e-15
    assert cubic_coefficients(Coefficients(1.0, 0.0), 0.0) == (0, 0, 0)
    a3, _, _ = cubic_coefficients(Coefficients(1.0, 0.0), 0.1)
    assert a3 == pytest.approx(-0.2j)


def test_gauged_nonlinearity_vanishes_for_mu_zero_at_eps_zero(grid, gaussian):
    out = gauged_nonlinearity(gaussian, Coefficients(1.0, 0.0), 0.0)
    assert l2_norm(out) == 0


def test_identity_residual_zero_trajectory_and_errors(grid, special):
    times = np.array([0.0, 0.1, 0.2])
    traj = Trajectory(grid, times, np.zeros((3, grid.n), complex))
    _, res = gauge_identity_residual(traj, special, 0.0)
    assert np.all(res == 0)
    with pytest.raises(ValueError):
        gauge_identity_residual(Trajectory(grid, times[:2], np.zeros((2, grid.n), complex)), special, 0.0)


def test_identity_residual_shrinks_with_dt(grid, gaussian, special):
    """The gauged equation holds along a regularized solution up to time-differencing error."""
    res = []
    for dt in (4e-3, 2e-3):
        cfg = SolverConfig(dt=dt, t_final=0.1, epsilon=0.1, dealias=False)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            traj = solve_regularized(gaussian, special, cfg)
        res.append(gauge_identity_residual(traj, special, 0.1)[1].max())
    assert res[1] < res[0] / 3


@settings(max_examples=25, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1))
def test_gauge_roundtrip_property(a, b, p, q):
    grid = make_grid(256, 40.0)
    u = Field.from_function(grid, lambda x: 0.5 * np.exp(-(x**2)) * (1 + 0.3j * x))
    c = Coefficients(complex(a, b), complex(p, q))
    v, phase = gauge(u, c)
    assert l2_norm(apply_gauge(v, phase, "inverse") - u) <= 1e-12
