"""Gauge phase, forward/inverse gauge maps and the gauged nonlinearities.

For ``i u_t + (1 - i eps) u_xx / 2 = d/dx(lam u^2 + mu |u|^2)`` the phase

    Lambda(x) = 2 lam * int_{-inf}^x u + mu * int_{-inf}^x conj(u)

turns ``v = exp(-Lambda) u`` into a solution of a derivative-free cubic
equation (plus an eps-sized derivative remainder).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .spectral import (
    DEFAULT_DECAY_TOL,
    DecayWarning,
    Field,
    _decay_flags,
    derivative,
    l2_norm,
    primitive,
)

OVERFLOW_GUARD = 700.0
SPECIAL_CASE_TOL = 1e-14


class GaugeOverflowError(FloatingPointError):
    pass


class GaugeInversionError(RuntimeError):
    pass


@dataclass(frozen=True)
class Coefficients:
    lam: complex = 0.0
    mu: complex = 0.0

    def __post_init__(self):
        object.__setattr__(self, "lam", complex(self.lam))
        object.__setattr__(self, "mu", complex(self.mu))

    @property
    def special_case(self) -> bool:
        """``2 lam + conj(mu) == 0``: the phase is purely imaginary."""
        return abs(2 * self.lam + self.mu.conjugate()) <= SPECIAL_CASE_TOL

    @property
    def is_zero(self) -> bool:
        return self.lam == 0 and self.mu == 0

    def to_dict(self) -> dict:
        return {"lam": [self.lam.real, self.lam.imag], "mu": [self.mu.real, self.mu.imag]}

    @classmethod
    def from_dict(cls, d) -> "Coefficients":
        def parse(v):
            if isinstance(v, (list, tuple)):
                return complex(v[0], v[1])
            return complex(v)

        return cls(parse(d.get("lam", 0.0)), parse(d.get("mu", 0.0)))


@dataclass(frozen=True)
class GaugePair:
    u: Field
    phase: Field
    coeffs: Coefficients

    def derivative_residual(self) -> float:
        """``||d/dx Lambda - (2 lam u + mu conj(u))||_2``.

        The phase is a periodic function plus ``slope * (x - x_left)``; the slope
        is the mean of the integrand and is differentiated analytically.
        """
        grid = self.u.grid
        uv = self.u.physical()
        target = 2 * self.coeffs.lam * uv + self.coeffs.mu * np.conj(uv)
        slope = target.mean()
        periodic = Field(grid, self.phase.physical() - slope * (grid.points - grid.x_left))
        dphase = derivative(periodic).physical() + slope
        return math.sqrt(grid.dx * float(np.sum(np.abs(dphase - target) ** 2)))

    def max_real_part(self) -> float:
        return float(np.abs(self.phase.physical().real).max())


def gauge_phase(u: Field, c: Coefficients, decay_tol: float = DEFAULT_DECAY_TOL) -> Field:
    """``Lambda = 2 lam primitive(u) + mu primitive(conj u)``, pinned to 0 at ``x_left``."""
    if c.is_zero:
        return Field.zeros(u.grid)
    flags = _decay_flags(u, decay_tol)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DecayWarning)
        P = primitive(u, decay_tol).physical()
    # primitive commutes with conjugation exactly (the Nyquist mode is dropped)
    return Field(u.grid, 2 * c.lam * P + c.mu * np.conj(P), "physical", flags)


def _check_overflow(re_part: np.ndarray):
    peak = float(np.abs(re_part).max(initial=0.0))
    if not math.isfinite(peak) or peak > OVERFLOW_GUARD:
        raise GaugeOverflowError(f"max |Re Lambda| = {peak:.3g} exceeds the overflow guard {OVERFLOW_GUARD}")


def apply_gauge(u: Field, phase: Field, direction: Literal["forward", "inverse"] = "forward") -> Field:
    """Forward: ``exp(-Lambda) u``; inverse: ``exp(+Lambda) u``."""
    lam = phase.physical()
    _check_overflow(lam.real)
    if direction == "forward":
        factor = np.exp(-lam)
    elif direction == "inverse":
        factor = np.exp(lam)
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return Field(u.grid, factor * u.physical(), "physical", u.flags)


def gauge(u: Field, c: Coefficients) -> tuple[Field, Field]:
    """Return ``(v, Lambda)`` with ``v = exp(-Lambda) u``."""
    phase = gauge_phase(u, c)
    return apply_gauge(u, phase, "forward"), phase


def cubic_coefficients(c: Coefficients, epsilon: float) -> tuple[complex, complex, complex]:
    """Coefficients of ``u^3``, ``|u|^2 u`` and ``|u|^2 conj(u)`` in N3_eps."""
    lam, mu = c.lam, c.mu
    return (
        -2j * lam**2 * epsilon,
        abs(mu) ** 2 - 2j * lam * mu * epsilon,
        mu * lam.conjugate() + 0.5 * (1 - 1j * epsilon) * mu**2,
    )


def cubic_nonlinearity(uv: np.ndarray, c: Coefficients, epsilon: float) -> np.ndarray:
    a3, a21, a12 = cubic_coefficients(c, epsilon)
    mod2 = np.abs(uv) ** 2
    out = mod2 * (a21 * uv + a12 * np.conj(uv))
    if a3 != 0:
        out = out + a3 * uv**3
    return out


def gauged_nonlinearity(u: Field, c: Coefficients, epsilon: float) -> Field:
    """``N3_eps(u) + eps * N2(u)`` with ``N2(u) = i (2 lam u + mu conj u) u_x``."""
    uv = u.physical()
    out = cubic_nonlinearity(uv, c, epsilon)
    if epsilon != 0:
        ux = derivative(u).physical()
        out = out + epsilon * 1j * (2 * c.lam * uv + c.mu * np.conj(uv)) * ux
    return Field(u.grid, out)


def _half_shift(v: np.ndarray, grid) -> np.ndarray:
    """Trigonometric interpolant of ``v`` at ``x_j + dx/2``."""
    coeffs = np.fft.fft(v)
    k = grid.odd_freqs()
    return np.fft.ifft(coeffs * np.exp(0.5j * k * grid.dx))


def _march_phase(vv: np.ndarray, c: Coefficients, grid) -> np.ndarray:
    vmid = _half_shift(vv, grid)
    vnext = np.roll(vv, -1)
    h = grid.dx
    lam2, mu = 2 * c.lam, c.mu

    def rhs(L, w):
        z = np.exp(L) * w
        return lam2 * z + mu * np.conj(z)

    out = np.empty(grid.n, dtype=np.complex128)
    L = 0.0 + 0.0j
    out[0] = L
    for j in range(grid.n - 1):
        k1 = rhs(L, vv[j])
        k2 = rhs(L + 0.5 * h * k1, vmid[j])
        k3 = rhs(L + 0.5 * h * k2, vmid[j])
        k4 = rhs(L + h * k3, vnext[j])
        L = L + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if abs(L.real) > OVERFLOW_GUARD or not math.isfinite(abs(L)):
            raise GaugeOverflowError(f"phase marching blew up at x = {grid.points[j + 1]:.4g}")
        out[j + 1] = L
    return out


def invert_gauge(
    v: Field,
    c: Coefficients,
    tol: float = 1e-13,
    max_iters: int = 100,
    decay_tol: float = DEFAULT_DECAY_TOL,
    initial_phase: np.ndarray | None = None,
) -> tuple[Field, Field]:
    """Recover ``(u, Lambda)`` from ``v = exp(-Lambda) u``.

    ``Lambda' = 2 lam e^Lambda v + mu conj(e^Lambda v)``, ``Lambda(x_left) = 0`` is
    marched across the box with classical RK4, then refined by the fixed point
    ``Lambda <- gauge_phase(e^Lambda v)`` so that the spectral primitive is
    reproduced to ``tol`` rather than to the O(dx^4) marching error.
    ``initial_phase`` replaces the marching guess (warm start inside time loops).
    """
    if c.is_zero:
        return Field(v.grid, v.physical(), "physical", v.flags), Field.zeros(v.grid)
    flags = _decay_flags(v, decay_tol)
    grid = v.grid
    vv = np.asarray(v.physical())
    if initial_phase is None:
        phase = _march_phase(vv, c, grid)
    else:
        phase = np.array(initial_phase, dtype=np.complex128)
    scale = 1.0 + float(np.abs(phase).max())
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DecayWarning)
        for _ in range(max_iters):
            _check_overflow(phase.real)
            u = np.exp(phase) * vv
            new = gauge_phase(Field(grid, u), c, decay_tol).physical()
            change = float(np.abs(new - phase).max())
            phase = new
            if change <= tol * scale:
                break
        else:
            raise GaugeInversionError(f"phase fixed point stalled at change {change:.3g}")
    _check_overflow(phase.real)
    u = Field(grid, np.exp(phase) * vv, "physical", flags)
    return u, Field(grid, phase, "physical", flags)


def gauge_identity_residual(traj, c: Coefficients, epsilon: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-interior-time L2 residual of the gauged equation along a stored trajectory.

    Evaluates ``i v_t + (1 - i eps) v_xx / 2 - exp(-Lambda) (N3_eps(u) + eps N2(u))``
    with ``v = exp(-Lambda) u``, centred differences in time and spectral
    derivatives in space.  Returns ``(times, residuals)``.
    """
    times = np.asarray(traj.times)
    if len(times) < 3:
        raise ValueError("need at least three time samples")
    grid = traj.grid
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DecayWarning)
        us = [Field(grid, row) for row in traj.values]
        gauged = [gauge(u, c) for u in us]
    vs = [g[0].physical() for g in gauged]
    res = np.empty(len(times) - 2)
    for n in range(1, len(times) - 1):
        vt = (vs[n + 1] - vs[n - 1]) / (times[n + 1] - times[n - 1])
        vxx = derivative(gauged[n][0], 2).physical()
        rhs = np.exp(-gauged[n][1].physical()) * gauged_nonlinearity(us[n], c, epsilon).physical()
        r = 1j * vt + 0.5 * (1 - 1j * epsilon) * vxx - rhs
        res[n - 1] = l2_norm(Field(grid, r))
    return times[1:-1], res

