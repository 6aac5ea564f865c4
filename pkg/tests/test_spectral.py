import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import erf

from gauge_dnls.spectral import (
    DecayWarning,
    Field,
    RepresentationError,
    decays,
    derivative,
    homogeneous_sobolev_norm,
    inner_product,
    l2_norm,
    lp_norm,
    make_grid,
    primitive,
    primitive_parts,
    sobolev_norm,
    spectral_l2_norm,
    sup_primitive,
    to_physical,
    to_spectral,
    xs_norm,
)

from conftest import smooth_random


def test_dual_grid_examples():
    g = make_grid(8, 2 * math.pi, -math.pi)
    assert g.dx == pytest.approx(math.pi / 4)
    np.testing.assert_allclose(g.freqs, [0, 1, 2, 3, -4, -3, -2, -1])
    g2 = make_grid(8, 4 * math.pi, 0.0)
    np.testing.assert_allclose(g2.freqs, [0, 0.5, 1, 1.5, -2, -1.5, -1, -0.5])
    np.testing.assert_allclose(g2.points, np.arange(8) * g2.dx)
    assert np.count_nonzero(g2.freqs == 0) == 1


@pytest.mark.parametrize("n,length", [(7, 1.0), (6, 1.0), (8, 0.0), (8, -2.0), (8, math.inf)])
def test_make_grid_rejects(n, length):
    with pytest.raises(ValueError):
        make_grid(n, length, 0.0)


def test_default_x_left_centres_box():
    assert make_grid(16, 10.0).x_left == -5.0


def test_constant_field_spectrum_is_zero_mode(grid):
    f = Field(grid, np.ones(grid.n))
    spec = to_spectral(f).spectral()
    assert abs(spec[0]) > 0
    assert np.abs(spec[1:]).max() < 1e-12 * abs(spec[0])


def test_tone_is_single_coefficient(grid):
    m = 5
    eta0 = grid.freqs[m]
    f = Field.from_function(grid, lambda x: np.exp(1j * eta0 * x))
    spec = np.abs(f.spectral())
    assert spec.argmax() == m
    spec[m] = 0
    assert spec.max() < 1e-12


def test_representation_mismatch(grid):
    f = Field(grid, np.zeros(grid.n))
    with pytest.raises(RepresentationError):
        to_physical(f)
    with pytest.raises(RepresentationError):
        to_spectral(to_spectral(f))


def test_field_values_are_read_only(grid):
    f = Field(grid, np.zeros(grid.n))
    with pytest.raises(ValueError):
        f.values[0] = 1.0


def test_field_shape_checked(grid):
    with pytest.raises(ValueError):
        Field(grid, np.zeros(grid.n + 1))


@pytest.mark.parametrize("s", [0.0, 1.0, 2.5, -0.25])
def test_sobolev_norm_of_tone(grid, s):
    eta0 = grid.freqs[7]
    f = Field.from_function(grid, lambda x: np.exp(1j * eta0 * x))
    assert sobolev_norm(f, s) == pytest.approx(math.sqrt(grid.length) * (1 + eta0**2) ** (s / 2), rel=1e-12)


def test_sobolev_zero_is_l2(grid, rng):
    f = smooth_random(grid, rng)
    assert sobolev_norm(f, 0.0) == pytest.approx(l2_norm(f), rel=1e-13)


def test_gaussian_h1_closed_form():
    # ||e^{-x^2}||_{H^1}^2 = sqrt(pi/2) + sqrt(pi/2)
    for n in (512, 5120):
        g = make_grid(n, 40.0)
        f = Field.from_function(g, lambda x: np.exp(-(x**2)))
        assert sobolev_norm(f, 1.0) ** 2 == pytest.approx(math.sqrt(2 * math.pi), rel=1e-6)


def test_homogeneous_norm_ignores_zero_mode(grid):
    f = Field(grid, np.full(grid.n, 2.0 + 0j))
    assert homogeneous_sobolev_norm(f, 1.0) == pytest.approx(0.0, abs=1e-12)


def test_lp_norms(grid):
    f = Field(grid, np.full(grid.n, 2.0 + 0j))
    assert lp_norm(f, math.inf) == pytest.approx(2.0)
    assert lp_norm(f, 4) == pytest.approx(2.0 * grid.length**0.25)
    with pytest.raises(ValueError):
        lp_norm(f, 0.5)


def test_derivative_of_tone(grid):
    eta0 = grid.freqs[9]
    f = Field.from_function(grid, lambda x: np.exp(1j * eta0 * x))
    np.testing.assert_allclose(derivative(f).physical(), 1j * eta0 * f.physical(), atol=1e-11)
    np.testing.assert_allclose(derivative(f, 2).physical(), -(eta0**2) * f.physical(), atol=1e-10)


def test_primitive_of_zero(grid):
    assert np.all(primitive(Field.zeros(grid)).physical() == 0)


def test_primitive_gaussian_matches_erf():
    g = make_grid(1024, 40.0)
    f = Field.from_function(g, lambda x: np.exp(-(x**2)))
    F = primitive(f).physical()
    exact = 0.5 * math.sqrt(math.pi) * (1 + erf(g.points))
    assert np.abs(F - exact).max() / math.sqrt(math.pi) < 1e-8
    assert sup_primitive(f) == pytest.approx(math.sqrt(math.pi), rel=1e-8)
    assert F[0] == 0


def test_primitive_inverts_derivative_of_compact_bump():
    g = make_grid(2048, 80.0)
    z = g.points / 10.0
    vals = np.where(np.abs(z) < 1, np.exp(-1.0 / np.maximum(1 - z**2, 1e-300)), 0.0)
    bump = Field(g, vals)
    np.testing.assert_allclose(primitive(derivative(bump)).physical(), vals, atol=1e-10)


def test_derivative_of_primitive(grid, rng):
    # the ramp mean * (x - x_left) is not periodic, so it is differentiated by hand
    # resolved data: the Nyquist mode (dropped by odd symbols) carries nothing
    amps = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    f = Field.from_function(grid, lambda x: np.exp(-((x / 3) ** 2)) * sum(a * np.exp(1j * k * x) for a, k in zip(amps, (-4, -1, 2, 5))))
    mean, periodic = primitive_parts(f)
    back = derivative(Field(grid, periodic)).physical() + mean
    assert np.abs(back - f.physical()).max() <= 1e-10 * np.abs(f.physical()).max()


def test_decay_warning_flags_result(grid):
    f = Field(grid, np.ones(grid.n))
    assert not decays(f)
    with pytest.warns(DecayWarning):
        F = primitive(f)
    assert "decay" in F.flags


def test_xs_norm_gaussian_closed_form():
    g = make_grid(1024, 40.0)
    f = Field.from_function(g, lambda x: np.exp(-(x**2)))
    assert xs_norm(f, 0.0) == pytest.approx((math.pi / 2) ** 0.25 + math.sqrt(math.pi), abs=1e-6)
    assert xs_norm(Field.zeros(g), 1.0) == 0.0


def test_xs_norm_high_tone_primitive_is_small():
    g = make_grid(2048, 80.0)
    f = Field.from_function(g, lambda x: np.exp(32j * x) * np.exp(-((x / 4) ** 2)))
    l2 = l2_norm(f)
    prim = sup_primitive(f)
    # |int e^{32ix} w| <= sup|w'| / 32 + ...: O(1/32) of the L2 size
    assert prim < l2 / 32


def test_inner_product_matches_norm(grid, rng):
    f = smooth_random(grid, rng)
    assert inner_product(f, f).real == pytest.approx(l2_norm(f) ** 2, rel=1e-13)


_grid = make_grid(128, 30.0)
complex_arrays = st.lists(st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False), min_size=128, max_size=128)


@settings(max_examples=60, deadline=None)
@given(complex_arrays)
def test_parseval_and_roundtrip_property(vals):
    f = Field(_grid, np.array(vals))
    n = l2_norm(f)
    assert abs(n - spectral_l2_norm(f)) <= 1e-12 * max(n, 1e-300)
    back = to_physical(to_spectral(f)).physical()
    assert np.abs(back - f.physical()).max() <= 1e-12 * max(np.abs(f.physical()).max(), 1e-300)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-3, 3).filter(lambda a: a == 0 or abs(a) > 1e-6), st.floats(0, 2), st.floats(0, 2))
def test_xs_norm_is_a_monotone_norm(seed, scale, s1, ds):
    rng = np.random.default_rng(seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DecayWarning)
        f = smooth_random(_grid, rng)
        g = smooth_random(_grid, rng)
        nf, ng = xs_norm(f, s1), xs_norm(g, s1)
        assert xs_norm(f * scale, s1) == pytest.approx(abs(scale) * nf, rel=1e-12, abs=1e-300)
        assert xs_norm(f + g, s1) <= (nf + ng) * (1 + 1e-12)
        assert nf <= xs_norm(f, s1 + ds) * (1 + 1e-12)
