"""Free and parabolically regularised Schrodinger propagators and their linear estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectral import Field, apply_multiplier, homogeneous_sobolev_norm, l2_norm, lp_norm, sobolev_norm


@dataclass(frozen=True)
class PropagatorSpec:
    epsilon: float = 0.0
    t: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if self.epsilon > 0 and self.t < 0:
            raise ValueError("backward time with epsilon > 0 is an unbounded multiplier")

    def symbol(self, freqs: np.ndarray) -> np.ndarray:
        return propagator_symbol(freqs, self.epsilon, self.t)


def propagator_symbol(freqs: np.ndarray, epsilon: float, t: float) -> np.ndarray:
    """``exp(-(i + epsilon) t eta^2 / 2)``."""
    return np.exp(-0.5 * (1j + epsilon) * t * freqs**2)


def propagate(f: Field, spec: PropagatorSpec) -> Field:
    if spec.t == 0:
        return Field(f.grid, f.physical(), "physical", f.flags)
    return apply_multiplier(f, spec.symbol(f.grid.freqs))


def smoothing_ratio(f: Field, spec: PropagatorSpec, s1: float, s2: float) -> float:
    """``(eps t)^{(s2-s1)/2} ||U_eps(t) f||_{Hdot^{s2}} / ||f||_{Hdot^{s1}}``.

    Never exceeds ``d^{d/2} e^{-d/2}`` with ``d = s2 - s1`` (the maximum of the
    multiplier ``(eps t eta^2)^{d/2} e^{-eps t eta^2 / 2}``), read as 1 at d = 0.
    """
    if s2 < s1:
        raise ValueError("need s2 >= s1")
    if spec.epsilon <= 0 or spec.t <= 0:
        raise ValueError("smoothing needs epsilon > 0 and t > 0")
    denom = homogeneous_sobolev_norm(f, s1)
    if denom == 0:
        raise ValueError("zero input")
    num = homogeneous_sobolev_norm(propagate(f, spec), s2)
    return (spec.epsilon * spec.t) ** ((s2 - s1) / 2.0) * num / denom


def smoothing_bound(d: float) -> float:
    return 1.0 if d == 0 else d ** (d / 2.0) * math.exp(-d / 2.0)


def propagate_difference(f: Field, t: float, eps1: float, eps2: float, a: float, s: float = 0.0) -> float:
    """``||(U_eps1(t) - U_eps2(t)) f||_{H^s} / (|eps1-eps2|^{a/2} t^{a/2} ||f||_{H^{s+a}})``."""
    if not 0 < a < 2:
        raise ValueError("a must lie in (0, 2)")
    for e in (eps1, eps2):
        if not 0 <= e < 1:
            raise ValueError("epsilons must lie in [0, 1)")
    if t < 0:
        raise ValueError("t must be nonnegative")
    if eps1 == eps2 or t == 0:
        return 0.0
    diff = propagation_gap(f, t, eps1, eps2, s)
    denom = abs(eps1 - eps2) ** (a / 2.0) * t ** (a / 2.0) * sobolev_norm(f, s + a)
    if denom == 0:
        raise ValueError("zero input")
    return diff / denom


def propagation_gap(f: Field, t: float, eps1: float, eps2: float, s: float = 0.0) -> float:
    """``||(U_eps1(t) - U_eps2(t)) f||_{H^s}``."""
    freqs = f.grid.freqs
    sym = propagator_symbol(freqs, eps1, t) - propagator_symbol(freqs, eps2, t)
    return sobolev_norm(apply_multiplier(f, sym), s)


def trapezoid_lq(values: np.ndarray, times: np.ndarray, q: float) -> float:
    """Discrete ``L^q`` norm in time by the composite trapezoid rule."""
    values = np.asarray(values, dtype=float)
    if math.isinf(q):
        return float(values.max(initial=0.0))
    return float(np.trapezoid(values**q, times) ** (1.0 / q))


@dataclass(frozen=True)
class StrichartzReport:
    linf_l2: float
    l4_linf: float
    data_norm: float

    @property
    def ratio(self) -> float:
        return (self.linf_l2 + self.l4_linf) / self.data_norm


def strichartz_check(phi: Field, T: float, n_t: int = 64) -> StrichartzReport:
    """Space-time norms of the free solution ``U(t) phi`` on ``n_t`` uniform times in [0, T]."""
    if T <= 0:
        raise ValueError("T must be positive")
    if n_t < 8:
        raise ValueError("need at least 8 time samples")
    data_norm = l2_norm(phi)
    if data_norm == 0:
        raise ValueError("zero initial datum")
    times = np.linspace(0.0, T, n_t)
    coeffs = phi.spectral()
    freqs = phi.grid.freqs
    l2s = np.empty(n_t)
    sups = np.empty(n_t)
    for i, t in enumerate(times):
        u = Field(phi.grid, propagator_symbol(freqs, 0.0, t) * coeffs, "spectral")
        l2s[i] = l2_norm(u)
        sups[i] = lp_norm(u, math.inf)
    return StrichartzReport(float(l2s.max()), trapezoid_lq(sups, times, 4), data_norm)
