"""Periodic grids, unitary spectral transforms, Sobolev norms and the primitive.

The whole line is replaced by a periodic box ``[x_left, x_left + length)``.
Spectral coefficients approximate the unitary Fourier transform

    F(phi)(eta) = (2 pi)^{-1/2} \\int phi(x) e^{-i x eta} dx

so that ``sum |fhat|^2 * d_eta == sum |f|^2 * dx`` holds exactly (discrete
Parseval).  Coefficients are stored in FFT order.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

Representation = Literal["physical", "spectral"]

DEFAULT_DECAY_TOL = 1e-8
EDGE_FRACTION = 0.05


class DecayWarning(UserWarning):
    """Field does not decay at the box edges; line-to-box approximation is suspect."""


class RepresentationError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    n: int
    length: float
    x_left: float

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n % 2 or self.n < 8:
            raise ValueError(f"n must be an even integer >= 8, got {self.n!r}")
        if not (self.length > 0 and math.isfinite(self.length)):
            raise ValueError(f"length must be positive, got {self.length!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "length", float(self.length))
        object.__setattr__(self, "x_left", float(self.x_left))

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def d_eta(self) -> float:
        return 2.0 * math.pi / self.length

    @property
    def points(self) -> np.ndarray:
        return self.x_left + self.dx * np.arange(self.n)

    @property
    def freqs(self) -> np.ndarray:
        return 2.0 * math.pi * np.fft.fftfreq(self.n, d=self.dx)

    @property
    def nyquist(self) -> float:
        return math.pi / self.dx

    @property
    def nyquist_index(self) -> int:
        return self.n // 2

    def odd_freqs(self) -> np.ndarray:
        """Frequencies with the unpaired Nyquist mode zeroed (for odd-order symbols)."""
        k = self.freqs.copy()
        k[self.nyquist_index] = 0.0
        return k

    def dealias_mask(self) -> np.ndarray:
        """Two-thirds rule: keep modes with |m| < n/3."""
        m = np.fft.fftfreq(self.n, d=1.0 / self.n)
        return np.abs(m) < self.n / 3.0

    def _phase(self) -> np.ndarray:
        return np.exp(-1j * self.freqs * self.x_left)

    def to_dict(self) -> dict:
        return {"n": self.n, "length": self.length, "x_left": self.x_left}


def make_grid(n: int, length: float, x_left: float | None = None) -> Grid:
    """Build a periodic grid; ``x_left`` defaults to a box centred on 0."""
    if x_left is None:
        x_left = -0.5 * length
    return Grid(n, length, x_left)


@dataclass(frozen=True, eq=False)
class Field:
    grid: Grid
    values: np.ndarray
    representation: Representation = "physical"
    flags: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.representation not in ("physical", "spectral"):
            raise RepresentationError(f"unknown representation {self.representation!r}")
        vals = np.array(self.values, dtype=np.complex128, copy=True)
        if vals.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got shape {vals.shape}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "flags", frozenset(self.flags))

    @classmethod
    def from_function(cls, grid: Grid, func) -> "Field":
        return cls(grid, func(grid.points))

    @classmethod
    def zeros(cls, grid: Grid) -> "Field":
        return cls(grid, np.zeros(grid.n))

    def physical(self) -> np.ndarray:
        """Physical samples regardless of the stored representation."""
        if self.representation == "physical":
            return self.values
        return _ifft(self.grid, self.values)

    def spectral(self) -> np.ndarray:
        if self.representation == "spectral":
            return self.values
        return _fft(self.grid, self.values)

    def with_values(self, values, representation: Representation | None = None) -> "Field":
        return Field(self.grid, values, representation or self.representation, self.flags)

    def conj(self) -> "Field":
        return Field(self.grid, np.conj(self.physical()), "physical", self.flags)

    def __add__(self, other: "Field") -> "Field":
        _check_same_grid(self, other)
        return Field(self.grid, self.physical() + other.physical())

    def __sub__(self, other: "Field") -> "Field":
        _check_same_grid(self, other)
        return Field(self.grid, self.physical() - other.physical())

    def __mul__(self, scalar) -> "Field":
        return Field(self.grid, scalar * self.physical())

    __rmul__ = __mul__

    def __neg__(self) -> "Field":
        return Field(self.grid, -self.physical())


def _check_same_grid(a: Field, b: Field):
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")


def _fft(grid: Grid, values: np.ndarray) -> np.ndarray:
    return (grid.dx / math.sqrt(2.0 * math.pi)) * grid._phase() * np.fft.fft(values, axis=-1)


def _ifft(grid: Grid, coeffs: np.ndarray) -> np.ndarray:
    return (math.sqrt(2.0 * math.pi) / grid.dx) * np.fft.ifft(coeffs / grid._phase(), axis=-1)


def to_spectral(f: Field) -> Field:
    if f.representation != "physical":
        raise RepresentationError("to_spectral expects a physical field")
    return Field(f.grid, _fft(f.grid, f.values), "spectral", f.flags)


def to_physical(f: Field) -> Field:
    if f.representation != "spectral":
        raise RepresentationError("to_physical expects a spectral field")
    return Field(f.grid, _ifft(f.grid, f.values), "physical", f.flags)


def apply_multiplier(f: Field, symbol: np.ndarray) -> Field:
    """Multiply the spectrum by ``symbol``; result is returned in physical form."""
    return Field(f.grid, _ifft(f.grid, symbol * f.spectral()), "physical", f.flags)


def l2_norm(f: Field) -> float:
    return math.sqrt(f.grid.dx * float(np.sum(np.abs(f.physical()) ** 2)))


def spectral_l2_norm(f: Field) -> float:
    return math.sqrt(f.grid.d_eta * float(np.sum(np.abs(f.spectral()) ** 2)))


def lp_norm(f: Field, p: float) -> float:
    if not p >= 1:
        raise ValueError(f"need p >= 1, got {p}")
    vals = np.abs(f.physical())
    if math.isinf(p):
        return float(vals.max(initial=0.0))
    return float((f.grid.dx * np.sum(vals**p)) ** (1.0 / p))


def sobolev_norm(f: Field, s: float) -> float:
    """Inhomogeneous H^s norm ``(sum (1+eta^2)^s |fhat|^2 d_eta)^{1/2}``."""
    if s == 0:
        return spectral_l2_norm(f)
    weight = (1.0 + f.grid.freqs**2) ** s
    return math.sqrt(f.grid.d_eta * float(np.sum(weight * np.abs(f.spectral()) ** 2)))


def homogeneous_sobolev_norm(f: Field, s: float) -> float:
    eta = np.abs(f.grid.freqs)
    if s == 0:
        weight = np.ones_like(eta)
    else:
        with np.errstate(divide="ignore"):
            weight = np.where(eta > 0, eta ** (2.0 * s), 0.0)
    return math.sqrt(f.grid.d_eta * float(np.sum(weight * np.abs(f.spectral()) ** 2)))


def derivative(f: Field, order: int = 1) -> Field:
    """Spectral derivative; the Nyquist mode is dropped for odd orders."""
    k = f.grid.odd_freqs() if order % 2 else f.grid.freqs
    return apply_multiplier(f, (1j * k) ** order)


def decays(f: Field, decay_tol: float = DEFAULT_DECAY_TOL) -> bool:
    """True when the outer 5% of samples on each side sit below ``decay_tol * max|f|``."""
    vals = np.abs(f.physical())
    peak = vals.max(initial=0.0)
    if peak == 0.0:
        return True
    m = max(1, math.ceil(EDGE_FRACTION * f.grid.n))
    edge = max(vals[:m].max(), vals[-m:].max())
    return bool(edge <= decay_tol * peak)


def _decay_flags(f: Field, decay_tol: float, stacklevel: int = 3) -> frozenset:
    if decays(f, decay_tol):
        return frozenset()
    warnings.warn(
        "field does not decay at the box edges; primitive differs from the whole-line integral",
        DecayWarning,
        stacklevel=stacklevel,
    )
    return frozenset({"decay"})


def primitive_parts(f: Field) -> tuple[complex, np.ndarray]:
    """Split the primitive into ``mean * (x - x_left)`` plus a periodic part.

    Returns ``(mean, periodic)`` where ``periodic`` vanishes at ``x_left``.
    """
    grid = f.grid
    coeffs = f.spectral()
    mean = complex(coeffs[0]) * math.sqrt(2.0 * math.pi) / grid.length
    k = grid.odd_freqs()
    inv = np.zeros(grid.n, dtype=np.complex128)
    nz = k != 0
    inv[nz] = 1.0 / (1j * k[nz])
    periodic = _ifft(grid, inv * coeffs)
    return mean, periodic - periodic[0]


def primitive(f: Field, decay_tol: float = DEFAULT_DECAY_TOL) -> Field:
    """Antiderivative ``F`` with ``F(x_left) = 0`` standing in for the integral from -inf.

    Non-decaying input is still integrated, but a :class:`DecayWarning` is
    issued and the result carries the ``"decay"`` flag.
    """
    flags = _decay_flags(f, decay_tol)
    mean, periodic = primitive_parts(f)
    ramp = mean * (f.grid.points - f.grid.x_left)
    return Field(f.grid, ramp + periodic, "physical", flags)


def sup_primitive(f: Field, decay_tol: float = DEFAULT_DECAY_TOL) -> float:
    return float(np.abs(primitive(f, decay_tol).values).max())


def xs_norm(f: Field, s: float, decay_tol: float = DEFAULT_DECAY_TOL) -> float:
    """``||f||_{H^s} + sup_x |primitive(f)(x)|``."""
    F = primitive(f, decay_tol)
    return sobolev_norm(f, s) + float(np.abs(F.values).max())


def inner_product(f: Field, g: Field) -> complex:
    _check_same_grid(f, g)
    return complex(f.grid.dx * np.vdot(g.physical(), f.physical()))
