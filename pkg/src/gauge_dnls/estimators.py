"""scikit-learn style wrappers: rows of ``X`` are complex fields sampled on a uniform grid.

Every estimator takes the box ``length`` (and optional ``x_left``); the grid size
is read from ``X.shape[1]`` at fit time.
"""

from __future__ import annotations

import warnings

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_fields, check_n_features
from .envelope import bona_smith, build_envelope, shell_sobolev_norms
from .evolver import SolverConfig, StabilityWarning, solve_direct, solve_gauged, solve_regularized
from .gauge import Coefficients, gauge, invert_gauge
from .littlewood_paley import ProjectorSelector, project
from .semigroup import PropagatorSpec, propagate
from .spectral import DecayWarning, Field, sobolev_norm


class _FieldTransformer(TransformerMixin, BaseEstimator):
    """Shared fit/transform plumbing; subclasses implement ``_apply(field)``."""

    def fit(self, X, y=None):
        arr, grid = check_fields(X, self.length, self.x_left)
        self._validate_params()
        self.grid_ = grid
        self.n_features_in_ = arr.shape[1]
        return self

    def _validate_params(self):
        pass

    def _rows(self, X):
        check_is_fitted(self, "grid_")
        arr, _ = check_fields(X, self.length, self.x_left)
        check_n_features(self, arr)
        return arr

    def transform(self, X):
        arr = self._rows(X)
        return np.array([self._apply(Field(self.grid_, row)).physical() for row in arr])


class LittlewoodPaleyProjector(_FieldTransformer):
    """Smooth dyadic projector: ``kind`` is one of leq, band, range, geq."""

    def __init__(self, kind="band", k=0, j=None, length=80.0, x_left=None):
        self.kind = kind
        self.k = k
        self.j = j
        self.length = length
        self.x_left = x_left

    def _selector(self) -> ProjectorSelector:
        if self.kind == "leq":
            return ProjectorSelector.leq(self.k)
        if self.kind == "band":
            return ProjectorSelector.band(self.k)
        if self.kind == "geq":
            return ProjectorSelector.geq(self.k)
        if self.kind == "range":
            if self.j is None:
                raise ValueError("kind='range' needs j <= k")
            return ProjectorSelector.range(self.j, self.k)
        raise ValueError(f"unknown projector kind {self.kind!r}")

    def _validate_params(self):
        self.selector_ = self._selector()

    def _apply(self, f):
        return project(f, self.selector_)


class Propagator(_FieldTransformer):
    """``U_eps(t)``; ``inverse_transform`` runs the free flow backwards (eps = 0 only)."""

    def __init__(self, epsilon=0.0, t=0.0, length=80.0, x_left=None):
        self.epsilon = epsilon
        self.t = t
        self.length = length
        self.x_left = x_left

    def _validate_params(self):
        self.spec_ = PropagatorSpec(self.epsilon, self.t)

    def _apply(self, f):
        return propagate(f, self.spec_)

    def inverse_transform(self, X):
        if self.epsilon != 0:
            raise ValueError("the regularised semigroup is not invertible")
        arr = self._rows(X)
        back = PropagatorSpec(0.0, -self.t)
        return np.array([propagate(Field(self.grid_, row), back).physical() for row in arr])


class BonaSmithMollifier(_FieldTransformer):
    def __init__(self, eta=0.01, s=1.0, length=80.0, x_left=None):
        self.eta = eta
        self.s = s
        self.length = length
        self.x_left = x_left

    def _validate_params(self):
        if not 0 < self.eta <= 1 or self.s < 1:
            raise ValueError("need eta in (0, 1] and s >= 1")

    def _apply(self, f):
        return bona_smith(f, self.eta, self.s)


class GaugeTransform(_FieldTransformer):
    """``u -> exp(-Lambda) u``; ``inverse_transform`` solves for ``u`` given ``v``."""

    def __init__(self, lam=0.5j, mu=1j, length=80.0, x_left=None):
        self.lam = lam
        self.mu = mu
        self.length = length
        self.x_left = x_left

    def _validate_params(self):
        self.coefficients_ = Coefficients(self.lam, self.mu)

    def _apply(self, f):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DecayWarning)
            return gauge(f, self.coefficients_)[0]

    def inverse_transform(self, X):
        arr = self._rows(X)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DecayWarning)
            return np.array([invert_gauge(Field(self.grid_, row), self.coefficients_)[0].physical() for row in arr])


class FrequencyEnvelope(TransformerMixin, BaseEstimator):
    """Fit a minimal delta-envelope to the first row; ``transform`` returns shell ``H^s`` norms over ``R``."""

    def __init__(self, s=1.0, delta=0.005, R=None, length=80.0, x_left=None):
        self.s = s
        self.delta = delta
        self.R = R
        self.length = length
        self.x_left = x_left

    def fit(self, X, y=None):
        arr, grid = check_fields(X, self.length, self.x_left)
        phi = Field(grid, arr[0])
        R = sobolev_norm(phi, self.s) if self.R is None else self.R
        self.envelope_ = build_envelope(phi, self.s, self.delta, R)
        self.c_ = self.envelope_.c
        self.R_ = R
        self.grid_ = grid
        self.n_features_in_ = arr.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "envelope_")
        arr, _ = check_fields(X, self.length, self.x_left)
        check_n_features(self, arr)
        k_max = self.envelope_.k_max
        return np.array([shell_sobolev_norms(Field(self.grid_, row), self.s, k_max) for row in arr]) / self.R_


class DNLSSolver(TransformerMixin, BaseEstimator):
    """Evolve each row to ``t_final``; ``fit`` keeps the full trajectories in ``trajectories_``."""

    def __init__(self, solver="gauged", lam=0.5j, mu=1j, dt=1e-3, t_final=1.0, epsilon=0.0, output_stride=1, dealias=True, length=80.0, x_left=None):
        self.solver = solver
        self.lam = lam
        self.mu = mu
        self.dt = dt
        self.t_final = t_final
        self.epsilon = epsilon
        self.output_stride = output_stride
        self.dealias = dealias
        self.length = length
        self.x_left = x_left

    def _setup(self):
        fns = {"gauged": solve_gauged, "regularized": solve_regularized, "direct": solve_direct}
        if self.solver not in fns:
            raise ValueError(f"solver must be one of {sorted(fns)}")
        cfg = SolverConfig(dt=self.dt, t_final=self.t_final, epsilon=self.epsilon, output_stride=self.output_stride, dealias=self.dealias)
        return fns[self.solver], Coefficients(self.lam, self.mu), cfg

    def _solve_rows(self, arr, grid):
        fn, c, cfg = self._setup()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", StabilityWarning)
            warnings.simplefilter("ignore", DecayWarning)
            return [fn(Field(grid, row), c, cfg) for row in arr]

    def fit(self, X, y=None):
        arr, grid = check_fields(X, self.length, self.x_left)
        self.trajectories_ = self._solve_rows(arr, grid)
        self.grid_ = grid
        self.n_features_in_ = arr.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "grid_")
        arr, _ = check_fields(X, self.length, self.x_left)
        check_n_features(self, arr)
        return np.array([t.final.physical() for t in self._solve_rows(arr, self.grid_)])

    def fit_transform(self, X, y=None, **fit_params):
        self.fit(X)
        return np.array([t.final.physical() for t in self.trajectories_])
