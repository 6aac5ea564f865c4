import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from gauge_dnls import (
    Coefficients,
    Field,
    ProjectorSelector,
    PropagatorSpec,
    SolverConfig,
    bona_smith,
    build_envelope,
    gauge,
    make_grid,
    project,
    propagate,
    solve_gauged,
)
from gauge_dnls.estimators import (
    BonaSmithMollifier,
    DNLSSolver,
    FrequencyEnvelope,
    GaugeTransform,
    LittlewoodPaleyProjector,
    Propagator,
)

from conftest import smooth_random

GRID = make_grid(256, 40.0)


@pytest.fixture
def X():
    rng = np.random.default_rng(3)
    return np.array([smooth_random(GRID, rng, decay=6.0).physical() for _ in range(3)])


def rows(fn, X):
    return np.array([fn(Field(GRID, r)).physical() for r in X])


ALL = [
    LittlewoodPaleyProjector(kind="band", k=2, length=40.0),
    Propagator(epsilon=0.1, t=0.3, length=40.0),
    BonaSmithMollifier(eta=0.01, s=1.0, length=40.0),
    GaugeTransform(lam=0.5j, mu=1j, length=40.0),
    FrequencyEnvelope(s=1.0, delta=0.005, R=2.0, length=40.0),
    DNLSSolver(dt=1e-2, t_final=0.05, length=40.0),
]


@pytest.mark.parametrize("est", ALL, ids=lambda e: type(e).__name__)
def test_params_and_clone(est):
    params = est.get_params()
    twin = clone(est)
    assert twin.get_params() == params
    twin.set_params(length=30.0)
    assert twin.length == 30.0 and est.length == 40.0


@pytest.mark.parametrize("est", ALL, ids=lambda e: type(e).__name__)
def test_not_fitted_and_shape_mismatch(est, X):
    with pytest.raises(NotFittedError):
        clone(est).transform(X)
    fitted = clone(est).fit(X)
    assert fitted.n_features_in_ == GRID.n
    with pytest.raises(ValueError):
        fitted.transform(X[:, :128])


def test_projector_matches_function(X):
    out = LittlewoodPaleyProjector(kind="range", j=1, k=3, length=40.0).fit_transform(X)
    np.testing.assert_array_equal(out, rows(lambda f: project(f, ProjectorSelector.range(1, 3)), X))
    with pytest.raises(ValueError):
        LittlewoodPaleyProjector(kind="range", k=3, length=40.0).fit(X)
    with pytest.raises(ValueError):
        LittlewoodPaleyProjector(kind="nope", length=40.0).fit(X)


def test_propagator_and_inverse(X):
    est = Propagator(epsilon=0.0, t=0.4, length=40.0).fit(X)
    out = est.transform(X)
    np.testing.assert_array_equal(out, rows(lambda f: propagate(f, PropagatorSpec(0.0, 0.4)), X))
    np.testing.assert_allclose(est.inverse_transform(out), X, atol=1e-14)
    with pytest.raises(ValueError):
        Propagator(epsilon=0.1, t=0.4, length=40.0).fit(X).inverse_transform(X)


def test_mollifier_matches_function(X):
    out = BonaSmithMollifier(eta=0.02, s=1.5, length=40.0).fit_transform(X)
    np.testing.assert_array_equal(out, rows(lambda f: bona_smith(f, 0.02, 1.5), X))
    with pytest.raises(ValueError):
        BonaSmithMollifier(eta=2.0, length=40.0).fit(X)


def test_gauge_transform_roundtrip(X):
    c = Coefficients(0.3, 0.2j)
    est = GaugeTransform(lam=c.lam, mu=c.mu, length=40.0).fit(X)
    v = est.transform(X)
    np.testing.assert_allclose(v, rows(lambda f: gauge(f, c)[0], X), atol=0)
    np.testing.assert_allclose(est.inverse_transform(v), X, atol=1e-11)


def test_frequency_envelope(X):
    est = FrequencyEnvelope(s=1.0, R=2.0, length=40.0).fit(X)
    env = build_envelope(Field(GRID, X[0]), 1.0, 0.005, 2.0)
    np.testing.assert_array_equal(est.c_, env.c)
    shells = est.transform(X[:1])
    assert np.all(shells[0] <= est.c_ * (1 + 1e-14))
    # R defaults to the H^s norm of the first row
    assert FrequencyEnvelope(length=40.0).fit(X).R_ > 0


def test_solver_matches_function(X):
    est = DNLSSolver(dt=1e-2, t_final=0.05, length=40.0)
    out = est.fit_transform(X)
    traj = solve_gauged(Field(GRID, X[1]), Coefficients(0.5j, 1j), SolverConfig(dt=1e-2, t_final=0.05))
    np.testing.assert_array_equal(out[1], traj.final.physical())
    assert len(est.trajectories_) == 3
    np.testing.assert_array_equal(est.transform(X), out)
    with pytest.raises(ValueError):
        DNLSSolver(solver="magic", length=40.0).fit(X)


def test_pipeline_and_1d_input(X):
    pipe = make_pipeline(BonaSmithMollifier(eta=0.01, length=40.0), LittlewoodPaleyProjector(kind="leq", k=3, length=40.0))
    out = pipe.fit_transform(X)
    assert out.shape == X.shape
    single = BonaSmithMollifier(eta=0.01, length=40.0).fit(X).transform(X[0])
    assert single.shape == (1, GRID.n)


def test_rejects_nonfinite(X):
    bad = X.copy()
    bad[0, 0] = np.nan
    with pytest.raises(ValueError):
        BonaSmithMollifier(length=40.0).fit(bad)
