import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gauge_dnls.fitting import loglog_slope
from gauge_dnls.semigroup import (
    PropagatorSpec,
    propagate,
    propagate_difference,
    propagation_gap,
    smoothing_bound,
    smoothing_ratio,
    strichartz_check,
    trapezoid_lq,
)
from gauge_dnls.spectral import Field, l2_norm, make_grid, sobolev_norm

from conftest import smooth_random


def tone(grid, eta):
    return Field.from_function(grid, lambda x: np.exp(1j * eta * x))


def test_spec_validation():
    with pytest.raises(ValueError):
        PropagatorSpec(1.5, 1.0)
    with pytest.raises(ValueError):
        PropagatorSpec(0.1, -1.0)
    PropagatorSpec(0.0, -1.0)  # free flow runs backwards


def test_unit_tone_phase():
    grid = make_grid(64, 2 * math.pi)
    f = tone(grid, 1.0)
    out = propagate(f, PropagatorSpec(0.0, 1.0)).physical()
    np.testing.assert_allclose(out, cmath.exp(-0.5j) * f.physical(), atol=1e-14)


def test_time_zero_is_identity(grid, rng):
    f = smooth_random(grid, rng)
    np.testing.assert_array_equal(propagate(f, PropagatorSpec(0.7, 0.0)).physical(), f.physical())


def test_free_flow_isometry_on_every_hs(grid, rng):
    f = smooth_random(grid, rng)
    g = propagate(f, PropagatorSpec(0.0, 3.0))
    for s in (0.0, 1.0, 2.5):
        assert sobolev_norm(g, s) == pytest.approx(sobolev_norm(f, s), rel=1e-12)


def test_group_law(grid, rng):
    f = smooth_random(grid, rng, decay=1.0)
    for eps in (0.0, 0.3):
        a = propagate(propagate(f, PropagatorSpec(eps, 0.4)), PropagatorSpec(eps, 0.7))
        b = propagate(f, PropagatorSpec(eps, 1.1))
        assert l2_norm(a - b) <= 1e-12


def test_dissipation_monotone(grid, rng):
    f = smooth_random(grid, rng, decay=0.5)
    norms = [l2_norm(propagate(f, PropagatorSpec(0.2, t))) for t in np.linspace(0, 2, 21)]
    assert all(b <= a for a, b in zip(norms, norms[1:]))


def test_smoothing_equal_exponents_at_most_one(grid, rng):
    f = smooth_random(grid, rng, decay=0.0)
    assert smoothing_ratio(f, PropagatorSpec(0.5, 0.5), 1.0, 1.0) <= 1.0


def test_smoothing_tone_at_maximiser():
    grid = make_grid(4096, 2 * math.pi * 64)
    eps, t, d = 0.01, 0.5, 2.0
    m = round(math.sqrt(d / (eps * t)) / grid.d_eta)
    eta = m * grid.d_eta
    y = eps * t * eta**2
    expected = y ** (d / 2) * math.exp(-y / 2)
    r = smoothing_ratio(tone(grid, eta), PropagatorSpec(eps, t), 0.5, 0.5 + d)
    assert r == pytest.approx(expected, rel=1e-12)
    assert r == pytest.approx(smoothing_bound(d), rel=1e-3)  # grid snap only


def test_smoothing_errors(grid, rng):
    f = smooth_random(grid, rng)
    with pytest.raises(ValueError):
        smoothing_ratio(f, PropagatorSpec(0.0, 1.0), 0, 1)
    with pytest.raises(ValueError):
        smoothing_ratio(f, PropagatorSpec(0.1, 1.0), 1, 0)
    with pytest.raises(ValueError):
        smoothing_ratio(Field.zeros(grid), PropagatorSpec(0.1, 1.0), 0, 1)


def test_smoothing_sweep_within_bound():
    grid = make_grid(256, 40.0)
    rng = np.random.default_rng(11)
    for _ in range(200):
        f = Field(grid, rng.standard_normal(grid.n) + 1j * rng.standard_normal(grid.n))
        s1, d = rng.uniform(0, 2), rng.uniform(0, 4)
        spec = PropagatorSpec(10 ** rng.uniform(-3, 0), 10 ** rng.uniform(-3, 0))
        assert smoothing_ratio(f, spec, s1, s1 + d) <= smoothing_bound(d) * (1 + 1e-12)


def test_difference_zero_for_equal_eps(grid, rng):
    f = smooth_random(grid, rng)
    assert propagate_difference(f, 1.0, 0.1, 0.1, 1.0) == 0.0


def test_difference_tone_oracle():
    grid = make_grid(128, 20.0)
    eta = grid.freqs[9]
    f = tone(grid, eta)
    t, e1, e2 = 0.8, 0.3, 0.05
    num = abs(math.exp(-e1 * t * eta**2 / 2) - math.exp(-e2 * t * eta**2 / 2)) * math.sqrt(grid.length)
    assert propagation_gap(f, t, e1, e2) == pytest.approx(num, rel=1e-12)
    denom = abs(e1 - e2) ** 0.5 * t**0.5 * sobolev_norm(f, 1.0)
    assert propagate_difference(f, t, e1, e2, 1.0) == pytest.approx(num / denom, rel=1e-12)


def test_difference_validation(grid, rng):
    f = smooth_random(grid, rng)
    with pytest.raises(ValueError):
        propagate_difference(f, 1.0, 0.1, 0.2, 2.0)
    with pytest.raises(ValueError):
        propagate_difference(f, 1.0, 1.0, 0.2, 1.0)
    with pytest.raises(ValueError):
        propagate_difference(f, -1.0, 0.1, 0.2, 1.0)


def test_difference_rate_slope(gaussian):
    eps = [1e-2, 1e-3, 1e-4]
    gaps = [propagation_gap(gaussian, 1.0, e, 0.0) for e in eps]
    assert loglog_slope(eps, gaps).slope >= 0.5 - 0.05


def test_strichartz_tone_l2_part_is_one():
    grid = make_grid(128, 20.0)
    f = tone(grid, grid.freqs[3])
    f = f * (1 / l2_norm(f))
    rep = strichartz_check(f, 1.0)
    assert rep.linf_l2 == pytest.approx(1.0, rel=1e-13)


def test_strichartz_gaussian_refinement(gaussian):
    coarse = strichartz_check(gaussian, 1.0, 64).ratio
    fine = strichartz_check(gaussian, 1.0, 640).ratio
    assert coarse == pytest.approx(fine, rel=1e-4)
    assert fine == pytest.approx(1.7704846827760927, rel=1e-9)


def test_strichartz_errors(grid, gaussian):
    with pytest.raises(ValueError):
        strichartz_check(gaussian, 0.0)
    with pytest.raises(ValueError):
        strichartz_check(gaussian, 1.0, n_t=4)
    with pytest.raises(ValueError):
        strichartz_check(Field.zeros(grid), 1.0)


def test_trapezoid_lq():
    t = np.linspace(0, 2, 5)
    assert trapezoid_lq(np.ones(5), t, 4) == pytest.approx(2 ** 0.25)
    assert trapezoid_lq(np.array([1.0, 3.0, 2.0]), np.array([0, 1, 2.0]), math.inf) == 3.0


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 1), st.floats(0, 2), st.floats(0, 2))
def test_group_law_property(eps, t, s):
    grid = make_grid(64, 20.0)
    f = Field.from_function(grid, lambda x: np.exp(-(x**2)) * (1 + 1j * x))
    a = propagate(propagate(f, PropagatorSpec(eps, t)), PropagatorSpec(eps, s))
    b = propagate(f, PropagatorSpec(eps, t + s))
    assert l2_norm(a - b) <= 1e-12
