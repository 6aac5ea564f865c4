"""Time integration of the regularised, gauged and direct equations.

All schemes work on raw ``numpy.fft`` coefficients on the periodic grid;
trajectories are stored in physical space every ``output_stride`` steps.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .gauge import (
    Coefficients,
    GaugeInversionError,
    GaugeOverflowError,
    cubic_coefficients,
    cubic_nonlinearity,
    gauge,
    gauge_phase,
    invert_gauge,
)
from .semigroup import propagator_symbol, trapezoid_lq
from .spectral import DecayWarning, Field, Grid, derivative, l2_norm, lp_norm, sobolev_norm, sup_primitive
from .trajectory import Trajectory

log = logging.getLogger(__name__)

SCHEMES = ("exponential_picard", "strang_split")


class PicardError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class StabilityWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SolverConfig:
    dt: float = 1e-3
    t_final: float = 1.0
    epsilon: float = 0.0
    scheme: str = "exponential_picard"
    picard_tol: float = 1e-10
    picard_max_iters: int = 50
    dealias: bool = True
    output_stride: int = 1
    diag_s: float = 2.0
    blowup_factor: float = 1e6

    def __post_init__(self):
        if not self.dt > 0 or not self.t_final > 0:
            raise ValueError("dt and t_final must be positive")
        if self.dt > self.t_final * (1 + 1e-12):
            raise ValueError("dt must not exceed t_final")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        if self.picard_tol <= 0 or self.picard_max_iters < 2:
            raise ValueError("need picard_tol > 0 and picard_max_iters >= 2")
        if self.output_stride < 1:
            raise ValueError("output_stride must be a positive integer")

    @property
    def n_steps(self) -> int:
        return max(1, round(self.t_final / self.dt))

    @property
    def step(self) -> float:
        """Step actually taken: ``t_final / n_steps``."""
        return self.t_final / self.n_steps

    def replace(self, **changes) -> "SolverConfig":
        d = asdict(self)
        d.update(changes)
        return SolverConfig(**d)


# -- nonlinear operators on raw FFT coefficients ------------------------------


class _Ops:
    def __init__(self, grid: Grid, c: Coefficients, dealias: bool):
        self.grid = grid
        self.c = c
        self.k = grid.odd_freqs()
        self.k2 = grid.freqs**2
        self.mask = grid.dealias_mask() if dealias else None

    def filt(self, uh):
        return uh * self.mask if self.mask is not None else uh

    def flux_derivative(self, uh):
        """FFT of d/dx(lam u^2 + mu |u|^2)."""
        c = self.c
        if c.is_zero:
            return np.zeros_like(uh)
        u = np.fft.ifft(self.filt(uh))
        flux = c.lam * u * u + c.mu * (u * np.conj(u))
        return self.filt(1j * self.k * np.fft.fft(flux))

    def linear(self, epsilon, t):
        return propagator_symbol(self.grid.freqs, epsilon, t)


def _norm(uh):
    return math.sqrt(float(np.sum(np.abs(uh) ** 2)))


def _picard_step(uh, ops: _Ops, cfg: SolverConfig, dt: float, nonlin) -> tuple[np.ndarray, int]:
    """Exponential trapezoid ``u1 = E u0 - i dt/2 (E N(u0) + N(u1))`` solved by fixed point.

    This is the Duhamel map with the time integral replaced by the trapezoid
    rule; the iteration is the contraction used to build mild solutions.
    """
    E = ops.linear(cfg.epsilon, dt)
    n0 = nonlin(uh)
    base = E * (uh - 0.5j * dt * n0)
    w = E * (uh - 1j * dt * n0)
    resid = math.inf
    for it in range(1, cfg.picard_max_iters + 1):
        w_new = base - 0.5j * dt * nonlin(w)
        if not np.all(np.isfinite(w_new)):
            raise PicardError("Picard iterate became non-finite", math.inf)
        resid = _norm(w_new - w) / max(_norm(w_new), 1e-300)
        w = w_new
        if resid <= cfg.picard_tol:
            return w, it
    raise PicardError(f"Picard iteration did not converge in {cfg.picard_max_iters} iterations", resid)


def _rk4(uh, f, dt):
    k1 = f(uh)
    k2 = f(uh + 0.5 * dt * k1)
    k3 = f(uh + 0.5 * dt * k2)
    k4 = f(uh + dt * k3)
    return uh + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def _strang_step(uh, ops: _Ops, epsilon: float, dt: float):
    half = ops.linear(epsilon, 0.5 * dt)
    uh = half * uh
    uh = _rk4(uh, lambda w: -1j * ops.flux_derivative(w), dt)
    return half * uh


def step_regularized(u: Field, c: Coefficients, cfg: SolverConfig, dt: float | None = None) -> Field:
    """Advance the regularised equation by one step of ``cfg.scheme``."""
    dt = cfg.step if dt is None else dt
    ops = _Ops(u.grid, c, cfg.dealias)
    uh, _ = _advance(np.fft.fft(u.physical()), ops, cfg, dt)
    return Field(u.grid, np.fft.ifft(uh))


def _advance(uh, ops: _Ops, cfg: SolverConfig, dt: float):
    if ops.c.is_zero:
        return ops.linear(cfg.epsilon, dt) * uh, 0
    if cfg.scheme == "strang_split":
        return _strang_step(uh, ops, cfg.epsilon, dt), 0
    return _picard_step(uh, ops, cfg, dt, ops.flux_derivative)


# -- diagnostics --------------------------------------------------------------


def diagnostics_for(u: Field, c: Coefficients, s: float) -> dict:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DecayWarning)
        out = {
            "mass": l2_norm(u) ** 2,
            "h1_norm": sobolev_norm(u, 1.0),
            "hs_norm": sobolev_norm(u, s),
            "sup_primitive": sup_primitive(u),
            "gauged_energy": math.nan,
        }
        try:
            v, _ = gauge(u, c)
            out["gauged_energy"] = gauged_energy(v, c)
        except GaugeOverflowError:
            pass
    return out


def gauged_energy(v: Field, c: Coefficients) -> float:
    """``||v_x||_2^2 + |mu|^2 ||v||_4^4``."""
    return l2_norm(derivative(v)) ** 2 + abs(c.mu) ** 2 * lp_norm(v, 4) ** 4


class _Recorder:
    def __init__(self, grid: Grid, c: Coefficients, cfg: SolverConfig, meta: dict):
        self.grid, self.c, self.cfg = grid, c, cfg
        self.times: list[float] = []
        self.values: list[np.ndarray] = []
        self.diag: dict[str, list] = {}
        self.meta = meta
        self.iters = 0

    def record(self, t: float, u: np.ndarray):
        self.times.append(t)
        self.values.append(np.array(u, dtype=np.complex128))
        d = diagnostics_for(Field(self.grid, u), self.c, self.cfg.diag_s)
        d["picard_iters"] = self.iters
        for key, val in d.items():
            self.diag.setdefault(key, []).append(val)
        self.iters = 0

    def build(self, status="ok", message="") -> Trajectory:
        diag = {k: np.asarray(v) for k, v in self.diag.items()}
        return Trajectory(self.grid, self.times, np.array(self.values), diag, status, message, self.meta)


def _meta(kind: str, c: Coefficients, cfg: SolverConfig) -> dict:
    return {"solver": kind, "coefficients": c.to_dict(), "config": asdict(cfg)}


def _blown_up(u: np.ndarray, ref: float, cfg: SolverConfig, dx: float) -> bool:
    if not np.all(np.isfinite(u)):
        return True
    return ref > 0 and math.sqrt(dx * float(np.sum(np.abs(u) ** 2))) > cfg.blowup_factor * ref


def solve_regularized(phi: Field, c: Coefficients, cfg: SolverConfig) -> Trajectory:
    """Integrate ``i u_t + (1 - i eps) u_xx / 2 = (lam u^2 + mu |u|^2)_x``.

    A failed step ends the run: the partial trajectory is returned with
    ``status == "failed"`` and the reason in ``message``.
    """
    if cfg.epsilon == 0 and not c.is_zero:
        warnings.warn("epsilon = 0 integrates the derivative nonlinearity without smoothing", StabilityWarning, stacklevel=2)
    return _integrate(phi, c, cfg, "regularized")


def solve_direct(phi: Field, c: Coefficients, cfg: SolverConfig) -> Trajectory:
    """Naive pseudo-spectral Strang splitting of the unregularised equation.

    May blow up; that is reported as ``status == "blowup"``, not raised.
    """
    if cfg.epsilon != 0:
        raise ValueError("the direct solver integrates the epsilon = 0 equation only")
    cfg = cfg.replace(dealias=True, scheme="strang_split")
    return _integrate(phi, c, cfg, "direct")


def _integrate(phi: Field, c: Coefficients, cfg: SolverConfig, kind: str) -> Trajectory:
    grid = phi.grid
    ops = _Ops(grid, c, cfg.dealias)
    rec = _Recorder(grid, c, cfg, _meta(kind, c, cfg))
    u0 = np.asarray(phi.physical())
    ref = l2_norm(phi)
    rec.record(0.0, u0)
    uh = np.fft.fft(u0)
    dt = cfg.step
    for n in range(1, cfg.n_steps + 1):
        try:
            uh, iters = _advance(uh, ops, cfg, dt)
        except PicardError as exc:
            log.warning("%s solve stopped at t=%.4g: %s", kind, (n - 1) * dt, exc)
            return rec.build("failed", f"{exc} (residual {exc.residual:.3g}) at step {n}")
        rec.iters = max(rec.iters, iters)
        u = np.fft.ifft(uh)
        if _blown_up(u, ref, cfg, grid.dx):
            rec.record(n * dt, u)
            return rec.build("blowup", f"blow-up detected at t={n * dt:.6g}")
        if n % cfg.output_stride == 0 or n == cfg.n_steps:
            rec.record(n * dt, u)
    return rec.build()


def solve_gauged(phi: Field, c: Coefficients, cfg: SolverConfig) -> Trajectory:
    """Solve through the gauge ``v = exp(-Lambda) u`` and map back at output times.

    Special case (``2 lam + conj(mu) = 0``): ``v`` solves the cubic NLS
    ``i v_t + v_xx / 2 = |mu|^2 |v|^2 v`` and is advanced by Strang splitting
    with the exact pointwise phase ``exp(-i |mu|^2 |v|^2 dt)``.  Otherwise ``v``
    is advanced by an exponential Heun step whose nonlinearity
    ``exp(-Lambda) N3_0(exp(Lambda) v)`` uses the phase recovered at each stage.
    """
    grid = phi.grid
    rec = _Recorder(grid, c, cfg, _meta("gauged", c, cfg))
    ref = l2_norm(phi)
    dt = cfg.step
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DecayWarning)
        phase0 = gauge_phase(phi, c)
        try:
            v0 = np.exp(-phase0.physical()) * phi.physical()
        except FloatingPointError as exc:  # pragma: no cover - guarded in apply_gauge
            raise GaugeOverflowError(str(exc)) from exc
    rec.record(0.0, phi.physical())
    a3, a21, a12 = cubic_coefficients(c, 0.0)
    free = a21 == 0 and a12 == 0
    half = propagator_symbol(grid.freqs, 0.0, 0.5 * dt)
    full = half * half
    vh = np.fft.fft(v0)
    phase = phase0.physical()
    for n in range(1, cfg.n_steps + 1):
        try:
            if free:
                vh = full * vh
            elif c.special_case:
                w = np.fft.ifft(half * vh)
                w = w * np.exp(-1j * a21.real * np.abs(w) ** 2 * dt)
                vh = half * np.fft.fft(w)
            else:
                vh, phase = _gauged_heun(vh, phase, c, grid, full, dt)
            need_output = n % cfg.output_stride == 0 or n == cfg.n_steps
            if need_output:
                v = Field(grid, np.fft.ifft(vh))
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", DecayWarning)
                    u, ph = invert_gauge(v, c, initial_phase=phase if not free else None)
                phase = ph.physical()
                uv = u.physical()
                if _blown_up(uv, ref, cfg, grid.dx):
                    rec.record(n * dt, uv)
                    return rec.build("blowup", f"blow-up detected at t={n * dt:.6g}")
                rec.record(n * dt, uv)
        except (GaugeOverflowError, GaugeInversionError) as exc:
            log.warning("gauged solve stopped at t=%.4g: %s", (n - 1) * dt, exc)
            return rec.build("failed", f"{exc} at step {n}")
    return rec.build()


def _gauged_rhs(vh, phase, c: Coefficients, grid: Grid):
    v = np.fft.ifft(vh)
    u = np.exp(phase) * v
    return np.fft.fft(np.exp(-phase) * cubic_nonlinearity(u, c, 0.0))


def _gauged_heun(vh, phase, c: Coefficients, grid: Grid, full, dt):
    g0 = _gauged_rhs(vh, phase, c, grid)
    pred = full * (vh - 1j * dt * g0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DecayWarning)
        _, ph1 = invert_gauge(Field(grid, np.fft.ifft(pred)), c, initial_phase=phase)
    phase1 = ph1.physical()
    g1 = _gauged_rhs(pred, phase1, c, grid)
    return full * (vh - 0.5j * dt * g0) - 0.5j * dt * g1, phase1


# -- reports ------------------------------------------------------------------


@dataclass
class ConservationReport:
    times: np.ndarray
    mass: np.ndarray
    energy: np.ndarray

    @property
    def mass_drift(self) -> np.ndarray:
        return _relative_drift(self.mass)

    @property
    def energy_drift(self) -> np.ndarray:
        return _relative_drift(self.energy)

    @property
    def max_mass_drift(self) -> float:
        return float(np.abs(self.mass_drift).max(initial=0.0))

    @property
    def max_energy_drift(self) -> float:
        return float(np.abs(self.energy_drift).max(initial=0.0))


def _relative_drift(q: np.ndarray) -> np.ndarray:
    if q[0] == 0:
        return np.zeros_like(q)
    return q / q[0] - 1.0


def conservation_report(traj: Trajectory, c: Coefficients) -> ConservationReport:
    """Mass ``||u||^2`` and gauged energy ``||v_x||^2 + |mu|^2 ||v||_4^4`` per sample."""
    if not c.special_case:
        raise ValueError("conservation laws hold only when 2 lam + conj(mu) = 0")
    mass, energy = [], []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DecayWarning)
        for u in traj.fields:
            v, _ = gauge(u, c)
            mass.append(l2_norm(u) ** 2)
            energy.append(gauged_energy(v, c))
    return ConservationReport(np.asarray(traj.times), np.asarray(mass), np.asarray(energy))


@dataclass
class DifferenceReport:
    times: np.ndarray
    lhs: np.ndarray  # ||u1(t) - u2(t)||_2^2
    gradient_integral: np.ndarray  # int_0^t ||u1_x||_inf + ||u2_x||_inf
    c_min: float
    majorant: np.ndarray = field(default=None)

    @property
    def ratio(self) -> np.ndarray:
        """``||u1(t) - u2(t)||_2 / ||phi1 - phi2||_2``."""
        if self.lhs[0] == 0:
            return np.zeros_like(self.lhs)
        return np.sqrt(self.lhs / self.lhs[0])


def l2_difference_check(traj1: Trajectory, traj2: Trajectory, c: Coefficients) -> DifferenceReport:
    """Smallest C with ``||u1-u2||^2 <= ||phi1-phi2||^2 exp(C int (||u1_x||_inf + ||u2_x||_inf))``."""
    if not c.special_case:
        raise ValueError("the L2 difference bound is stated for 2 lam + conj(mu) = 0")
    if traj1.grid != traj2.grid or len(traj1) != len(traj2) or not np.allclose(traj1.times, traj2.times, rtol=0, atol=1e-12):
        raise ValueError("trajectories are not aligned")
    times = np.asarray(traj1.times)
    diff = traj1.values - traj2.values
    lhs = traj1.grid.dx * np.sum(np.abs(diff) ** 2, axis=1)
    grads = np.array(
        [lp_norm(derivative(a), math.inf) + lp_norm(derivative(b), math.inf) for a, b in zip(traj1.fields, traj2.fields)]
    )
    integral = np.concatenate([[0.0], np.cumsum(0.5 * (grads[1:] + grads[:-1]) * np.diff(times))])
    c_min = 0.0
    if lhs[0] > 0:
        growth = np.log(np.maximum(lhs, 1e-300) / lhs[0])
        ok = integral > 0
        if np.any(ok):
            c_min = max(0.0, float(np.max(growth[ok] / integral[ok])))
    majorant = lhs[0] * np.exp(c_min * integral)
    return DifferenceReport(times, lhs, integral, c_min, majorant)


def time_norm(traj: Trajectory, norm, q: float = math.inf) -> float:
    """``L^q_T`` (trapezoid) of ``norm(u(t))`` over the stored samples."""
    vals = np.array([norm(u) for u in traj.fields])
    return trapezoid_lq(vals, traj.times, q)
