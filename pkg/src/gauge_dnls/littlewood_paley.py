"""Inhomogeneous Littlewood-Paley projectors and the estimates built on them."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .spectral import Field, Grid, apply_multiplier, derivative, l2_norm, lp_norm


def _transition(t):
    # e^{-1/t} for t > 0, else 0
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def bump(xi):
    """Even smooth cutoff: 1 on |xi| <= 1, 0 on |xi| >= 2, C^infinity in between.

    On 1 < |xi| < 2 the profile is ``h(2-|xi|) / (h(2-|xi|) + h(|xi|-1))`` with
    ``h(t) = exp(-1/t)``, so ``bump(1.5) == 0.5``.
    """
    a = np.abs(np.asarray(xi, dtype=float))
    up = _transition(2.0 - a)
    down = _transition(a - 1.0)
    out = np.where(a <= 1.0, 1.0, np.where(a >= 2.0, 0.0, up / np.where(up + down > 0, up + down, 1.0)))
    return out if out.ndim else float(out)


def leq_symbol(freqs: np.ndarray, k: int) -> np.ndarray:
    """Symbol of P_{<=k}; identically zero for k <= -1."""
    if k < 0:
        return np.zeros_like(freqs, dtype=float)
    return bump(freqs / 2.0**k)


@dataclass(frozen=True)
class ProjectorSelector:
    kind: Literal["leq", "band", "range", "geq"]
    k: int = 0
    j: int = 0

    def __post_init__(self):
        if self.kind not in ("leq", "band", "range", "geq"):
            raise ValueError(f"unknown projector kind {self.kind!r}")
        if self.kind == "range" and self.j > self.k:
            raise ValueError("range(j, k) needs j <= k")

    @classmethod
    def leq(cls, k: int) -> "ProjectorSelector":
        return cls("leq", k=k)

    @classmethod
    def band(cls, k: int) -> "ProjectorSelector":
        return cls("band", k=k)

    @classmethod
    def range(cls, j: int, k: int) -> "ProjectorSelector":
        return cls("range", k=k, j=j)

    @classmethod
    def geq(cls, j: int) -> "ProjectorSelector":
        return cls("geq", j=j)

    def symbol(self, freqs: np.ndarray) -> np.ndarray:
        if self.kind == "leq":
            return leq_symbol(freqs, self.k)
        if self.kind == "band":
            return leq_symbol(freqs, self.k) - leq_symbol(freqs, self.k - 1)
        if self.kind == "range":
            return leq_symbol(freqs, self.k) - leq_symbol(freqs, self.j - 1)
        return 1.0 - leq_symbol(freqs, self.j - 1)


def project(f: Field, sel: ProjectorSelector) -> Field:
    return apply_multiplier(f, sel.symbol(f.grid.freqs))


def max_shell(grid: Grid) -> int:
    """Largest shell index whose symbol can be nonzero on the grid."""
    return max(0, math.ceil(math.log2(grid.nyquist)))


def shells(f: Field, k_max: int | None = None) -> list[Field]:
    k_max = max_shell(f.grid) if k_max is None else k_max
    return [project(f, ProjectorSelector.band(k)) for k in range(k_max + 1)]


class DegenerateRatioError(ValueError):
    pass


def bernstein_ratio(f: Field, l: int) -> float:
    """``||P_l f||_inf / (2^{l/2} ||P_l f||_2)``."""
    piece = project(f, ProjectorSelector.band(l))
    denom = l2_norm(piece)
    if denom <= 1e-14 * l2_norm(f):
        raise DegenerateRatioError(f"band {l} of the field is empty (up to roundoff)")
    return lp_norm(piece, math.inf) / (2.0 ** (l / 2.0) * denom)


def bernstein_bound(grid: Grid, l: int) -> float:
    """Cauchy-Schwarz bound on the Bernstein ratio from the number of modes in the shell."""
    support = np.count_nonzero(ProjectorSelector.band(l).symbol(grid.freqs))
    return math.sqrt(support * grid.d_eta / (2.0 * math.pi)) / 2.0 ** (l / 2.0)


def commutator(f: Field, g: Field, sel: ProjectorSelector) -> Field:
    """``[P, f] g = P(f g) - f P(g)``."""
    fv = f.physical()
    if np.all(fv == fv[0]):
        return Field.zeros(f.grid)
    Pg = project(g, sel)
    Pfg = apply_multiplier(Field(f.grid, fv * g.physical()), sel.symbol(f.grid.freqs))
    return Field(f.grid, Pfg.physical() - fv * Pg.physical())


def sup_shifted_product(a: Field, b: Field, p: float) -> float:
    """``sup_y ||a(. + y) b||_{L^p}`` over all grid shifts y."""
    av, bv = np.abs(a.physical()), np.abs(b.physical())
    if math.isinf(p):
        return float(av.max(initial=0.0) * bv.max(initial=0.0))
    if p != 2:
        raise ValueError("only p in {2, inf} is supported")
    # circular correlation of |a|^2 and |b|^2 gives every shifted inner product at once
    corr = np.fft.ifft(np.fft.fft(av**2) * np.conj(np.fft.fft(bv**2))).real
    return math.sqrt(a.grid.dx * max(float(corr.max()), 0.0))


def commutator_ratio(f: Field, g: Field, k: int, p_exp: float = 2, refined: bool = False) -> float:
    """Ratio of ``||[P_k, f] g||_p`` to ``2^{-k} sup_y ||T_y(f') g||_p``.

    With ``refined=True`` the low-pass form is used: ``f`` is replaced by
    ``P_{<=k-3} f`` and ``g`` on the right by ``P_{[k-2,k+2]} g``.
    """
    if refined:
        f = project(f, ProjectorSelector.leq(k - 3))
    num = lp_norm(commutator(f, g, ProjectorSelector.band(k)), p_exp)
    g_right = project(g, ProjectorSelector.range(k - 2, k + 2)) if refined else g
    if num == 0.0:
        return 0.0
    denom = 2.0**-k * sup_shifted_product(derivative(f), g_right, p_exp)
    scale = 2.0**-k * lp_norm(f, math.inf) * lp_norm(g_right, p_exp)
    if denom <= 1e-12 * scale or denom == 0.0:
        raise DegenerateRatioError("commutator bound has a zero right-hand side")
    return num / denom


def kernel_moment(grid: Grid, k: int) -> float:
    """``2^k * sum |K_k(w)| |w| dx`` for the band-k kernel on the periodic grid.

    ``[P_k, f]g`` is an average of ``K_k(w) w f'(x - theta w) g(x - w)``, so this
    first moment bounds :func:`commutator_ratio` up to the shift discretisation.
    """
    sym = ProjectorSelector.band(k).symbol(grid.freqs)
    kern = np.fft.ifft(sym) / grid.dx
    w = grid.dx * np.fft.fftfreq(grid.n, d=1.0 / grid.n)
    return float(2.0**k * grid.dx * np.sum(np.abs(kern) * np.abs(w)))
