"""Bona-Smith mollifier and delta-frequency envelopes with their a priori diagnostics."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .fitting import SlopeFit, loglog_slope
from .littlewood_paley import ProjectorSelector, max_shell, project
from .semigroup import trapezoid_lq
from .spectral import Field, apply_multiplier, derivative, l2_norm, lp_norm, sobolev_norm


def bona_smith_symbol(freqs: np.ndarray, eta: float, s: float) -> np.ndarray:
    return np.exp(-eta * np.abs(freqs) ** s)


def bona_smith(f: Field, eta: float, s: float) -> Field:
    """``J_{eta,s} f = exp(-eta |D|^s) f``."""
    if not 0 < eta <= 1:
        raise ValueError(f"eta must lie in (0, 1], got {eta}")
    if s < 1:
        raise ValueError(f"s must be >= 1, got {s}")
    return apply_multiplier(f, bona_smith_symbol(f.grid.freqs, eta, s))


def bona_smith_rate(f: Field, s: float, j: float, etas) -> SlopeFit:
    """Log-log slope of ``||J_{eta,s} f||_{H^{s+j}}`` against ``eta``.

    The smoothing estimate allows growth like ``eta^{-j/s}`` as eta -> 0.
    """
    etas = np.asarray(sorted(etas, reverse=True), dtype=float)
    if len(etas) < 4 or math.log10(etas.max() / etas.min()) < 2 - 1e-9:
        raise ValueError("need at least four eta values spanning two decades")
    if j <= 0:
        raise ValueError("j must be positive")
    norms = [sobolev_norm(bona_smith(f, e, s), s + j) for e in etas]
    return loglog_slope(etas, norms)


def envelope_constant(delta: float, k_max: int) -> float:
    """``sum_{|m| <= k_max} 2^{-2 delta |m|}``; bounds ``sum c_k^2`` by ``||phi||_{H^s}^2 / R^2`` times this."""
    m = np.arange(-k_max, k_max + 1)
    return float(np.sum(2.0 ** (-2.0 * delta * np.abs(m))))


@dataclass
class Envelope:
    c: np.ndarray
    delta: float
    s: float
    R: float
    shell_norms: np.ndarray = field(default=None)

    @property
    def k_max(self) -> int:
        return len(self.c) - 1

    def summability_bound(self) -> float:
        return envelope_constant(self.delta, self.k_max)

    def check_summability(self) -> bool:
        return float(np.sum(self.c**2)) <= self.summability_bound() * (1 + 1e-12)

    def check_slow_variation(self) -> bool:
        """``c_j <= 2^{delta |j-k|} c_k`` over every pair of shells."""
        idx = np.arange(len(self.c))
        gap = np.abs(idx[:, None] - idx[None, :])
        rhs = 2.0 ** (self.delta * gap) * self.c[None, :]
        return bool(np.all(self.c[:, None] <= rhs * (1 + 1e-14)))

    def check_domination(self, phi: Field | None = None) -> bool:
        """``||P_k phi||_{H^s} <= R c_k`` for every shell."""
        a = self.shell_norms if phi is None else shell_sobolev_norms(phi, self.s, self.k_max)
        return bool(np.all(a <= self.R * self.c * (1 + 1e-14)))

    def tail(self, k: int) -> float:
        return math.sqrt(float(np.sum(self.c[max(k, 0):] ** 2)))

    def to_dict(self) -> dict:
        return {
            "s": self.s,
            "delta": self.delta,
            "R": self.R,
            "k_max": self.k_max,
            "shells": [{"k": k, "c_k": float(ck)} for k, ck in enumerate(self.c)],
        }

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), sort_keys=True, indent=1)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_json(cls, text: str) -> "Envelope":
        d = json.loads(text)
        c = np.array([row["c_k"] for row in sorted(d["shells"], key=lambda r: r["k"])])
        return cls(c, d["delta"], d["s"], d["R"])


def shell_sobolev_norms(phi: Field, s: float, k_max: int | None = None) -> np.ndarray:
    k_max = max_shell(phi.grid) if k_max is None else k_max
    return np.array([sobolev_norm(project(phi, ProjectorSelector.band(k)), s) for k in range(k_max + 1)])


def build_envelope(phi: Field, s: float, delta: float, R: float, k_max: int | None = None) -> Envelope:
    """Minimal envelope ``c_k = max_j 2^{-delta |j-k|} ||P_j phi||_{H^s} / R``."""
    if s <= 0:
        raise ValueError("s must be positive")
    if not 0 < delta < min(0.01, s / 2):
        raise ValueError(f"delta must lie in (0, min(1/100, s/2)), got {delta}")
    norm = sobolev_norm(phi, s)
    if R < norm:
        raise ValueError(f"R = {R} is below ||phi||_H^s = {norm}")
    a = shell_sobolev_norms(phi, s, k_max)
    idx = np.arange(len(a))
    weights = 2.0 ** (-delta * np.abs(idx[:, None] - idx[None, :]))
    c = (weights * a[None, :]).max(axis=1) / R if R > 0 else np.zeros_like(a)
    return Envelope(c, delta, s, R, a)


def _shell_space_time(values: np.ndarray, times: np.ndarray, grid, sel: ProjectorSelector):
    """Per-time ``||P v||_2`` and ``||P v||_inf`` for a stack of physical samples."""
    sym = sel.symbol(grid.freqs)
    pieces = np.fft.ifft(sym * np.fft.fft(values, axis=1), axis=1)
    l2 = np.sqrt(grid.dx * np.sum(np.abs(pieces) ** 2, axis=1))
    sup = np.abs(pieces).max(axis=1)
    return l2, sup


def _prefix_st_norms(l2, sup, times) -> np.ndarray:
    """``S_T`` norm (``L^inf L^2 + L^4 L^inf``) over every prefix ``[0, t_n]``."""
    run_max = np.maximum.accumulate(l2)
    seg = 0.5 * (sup[1:] ** 4 + sup[:-1] ** 4) * np.diff(times)
    l4 = np.concatenate([[0.0], np.cumsum(seg)]) ** 0.25
    return run_max + l4


@dataclass
class EnvelopeDiagnostic:
    times: np.ndarray
    M: np.ndarray  # M(t_n), n >= 0
    profile: np.ndarray  # 2^{sk} c_k^{-1} ||P_k v||_{S_T} at the final time
    flagged_shells: list

    @property
    def M_final(self) -> float:
        return float(self.M[-1])

    @property
    def M_initial(self) -> float:
        """``M(0+)``: the value over the first sampled interval."""
        return float(self.M[1] if len(self.M) > 1 else self.M[0])

    @property
    def growth(self) -> float:
        return self.M_final / self.M_initial if self.M_initial > 0 else 0.0


def envelope_diagnostic(traj_v, env: Envelope, s: float) -> EnvelopeDiagnostic:
    """``M(T) = sup_k 2^{sk} c_k^{-1} ||P_k v||_{S_T}`` for every sampled T."""
    times = np.asarray(traj_v.times)
    if len(times) == 0:
        raise ValueError("empty trajectory")
    values = np.asarray(traj_v.values)
    grid = traj_v.grid
    M = np.zeros(len(times))
    profile = np.zeros(env.k_max + 1)
    flagged = []
    for k in range(env.k_max + 1):
        l2, sup = _shell_space_time(values, times, grid, ProjectorSelector.band(k))
        st = _prefix_st_norms(l2, sup, times)
        if env.c[k] > 0:
            weighted = 2.0 ** (s * k) * st / env.c[k]
            M = np.maximum(M, weighted)
            profile[k] = weighted[-1]
        elif st[-1] > 0:
            flagged.append(k)
            profile[k] = math.inf
    return EnvelopeDiagnostic(times, M, profile, flagged)


@dataclass(frozen=True)
class TailReport:
    k: int
    lhs: float
    tail: float
    ratio: float
    violation: bool


def tail_bound_check(traj_v, env: Envelope, s: float, k: int, tiny: float = 1e-13) -> TailReport:
    """``||P_{>=k} v||_{L^inf H^s + L^4 W^{1,inf}} / (sum_{l>=k} c_l^2)^{1/2}``."""
    times = np.asarray(traj_v.times)
    hs, w1 = [], []
    for row in traj_v.values:
        piece = project(Field(traj_v.grid, row), ProjectorSelector.geq(k))
        hs.append(sobolev_norm(piece, s))
        w1.append(lp_norm(derivative(piece), math.inf))
    lhs = max(hs) + (trapezoid_lq(np.array(w1), times, 4) if len(times) > 1 else 0.0)
    tail = env.tail(k)
    if tail == 0:
        scale = max(1.0, max(l2_norm(Field(traj_v.grid, r)) for r in traj_v.values))
        if lhs <= tiny * scale:
            return TailReport(k, lhs, tail, 0.0, False)
        return TailReport(k, lhs, tail, math.inf, True)
    return TailReport(k, lhs, tail, lhs / tail, False)
