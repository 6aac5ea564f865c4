"""JSON experiment configuration: explicit defaults, strict keys, resolved echo."""

from __future__ import annotations

import copy
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from ..evolver import SolverConfig
from ..gauge import Coefficients
from ..spectral import Field, Grid, l2_norm, make_grid

KINDS = (
    "solve",
    "eps_convergence",
    "joint_limit",
    "bona_smith",
    "conservation",
    "lipschitz_flow",
    "gronwall",
    "envelope",
    "strichartz",
    "direct_vs_gauged",
)
SWEEP_KINDS = {"eps_convergence": "epsilons", "joint_limit": "etas", "bona_smith": "etas", "lipschitz_flow": "perturbations"}
RECIPES = ("gaussian", "soliton", "tone_sum", "random")


class ConfigError(ValueError):
    pass


@dataclass
class GridConfig:
    n: int = 512
    length: float = 80.0
    x_left: float | None = None

    def build(self) -> Grid:
        try:
            return make_grid(self.n, self.length, self.x_left)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


@dataclass
class InitialData:
    recipe: str = "gaussian"
    amplitude: float = 0.5
    width: float = 1.0
    center: float = 0.0
    phase: float = 0.0
    velocity: float = 0.0
    modes: list = field(default_factory=lambda: [[1.0, 1.0]])
    window: float = 2.0
    seed: int | None = None
    decay: float = 3.0
    l2_norm: float | None = None

    def build(self, grid: Grid, seed: int = 0) -> Field:
        x = grid.points - self.center
        if self.recipe == "gaussian":
            vals = self.amplitude * np.exp(-((x / self.width) ** 2)) * np.exp(1j * (self.phase + self.velocity * x))
        elif self.recipe == "soliton":
            a = self.amplitude
            vals = a / np.cosh(a * x / self.width) * np.exp(1j * (self.phase + self.velocity * x))
        elif self.recipe == "tone_sum":
            vals = sum(complex(amp) * np.exp(1j * float(k) * x) for k, amp in self.modes)
            vals = self.amplitude * vals * np.exp(-((x / self.window) ** 2))
        elif self.recipe == "random":
            rng = np.random.default_rng(self.seed if self.seed is not None else seed)
            eta = grid.freqs
            coeffs = (rng.standard_normal(grid.n) + 1j * rng.standard_normal(grid.n)) * (1 + eta**2) ** (-self.decay / 2)
            vals = np.fft.ifft(coeffs) * np.exp(-((x / self.window) ** 2))
            vals = self.amplitude * vals / max(np.abs(vals).max(), 1e-300)
        else:
            raise ConfigError(f"unknown initial-data recipe {self.recipe!r}")
        f = Field(grid, vals)
        if self.l2_norm is not None:
            f = f * (self.l2_norm / l2_norm(f))
        return f


@dataclass
class Sweep:
    epsilons: list = field(default_factory=lambda: [1e-2, 3e-3, 1e-3, 3e-4])
    etas: list = field(default_factory=lambda: [1e-1, 3e-2, 1e-2, 3e-3, 1e-3])
    perturbations: list = field(default_factory=lambda: [1e-2, 1e-3, 1e-4])
    ks: list = field(default_factory=lambda: [0, 1, 2, 3, 4, 5, 6, 7, 8])
    n_pairs: int = 20
    n_samples: int = 100


DEFAULT_PARAMS = {
    "eps_convergence": {"s": 2.0, "reference": "zero", "min_slope": 0.4},
    "joint_limit": {"s": 2.0, "mollifier_s": 1.0, "epsilons": [1e-2, 1e-3, 1e-4]},
    "bona_smith": {"s": 1.0, "j": 1.0, "kappa": 0.02, "rate_etas": [1e-1, 3e-2, 1e-2, 3e-3, 1e-3], "fine_n": 65536, "fine_length": 16 * math.pi, "slope_tol": 0.1},
    "conservation": {"mass_tol": 1e-6, "energy_tol": 1e-4},
    "lipschitz_flow": {"s": 1.0, "max_spread": 2.0},
    "gronwall": {"perturbation": 1e-3, "max_spread": 3.0},
    "envelope": {"s": 1.0, "delta": 0.005, "R": 0.5, "max_growth": 3.0},
    "strichartz": {"T": 1.0, "n_t": 64, "refine": 10, "bound": 2.5},
    "direct_vs_gauged": {"agree_tol": 1e-3, "eps_small": 1e-4, "oracle_tol": 5e-3},
    "solve": {"solver": "gauged"},
}


@dataclass
class ExperimentConfig:
    kind: str = "conservation"
    grid: GridConfig = field(default_factory=GridConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    coefficients: Coefficients = field(default_factory=lambda: Coefficients(0.5j, 1j))
    initial: InitialData = field(default_factory=InitialData)
    sweep: Sweep = field(default_factory=Sweep)
    params: dict = field(default_factory=dict)
    seed: int = 0
    output: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}; expected one of {KINDS}")
        merged = copy.deepcopy(DEFAULT_PARAMS.get(self.kind, {}))
        unknown = set(self.params) - set(merged)
        if unknown:
            raise ConfigError(f"unknown params for {self.kind}: {sorted(unknown)}")
        merged.update(self.params)
        self.params = merged
        self.grid.build()  # fail early on an invalid grid
        sweep_key = SWEEP_KINDS.get(self.kind)
        if sweep_key and not getattr(self.sweep, sweep_key):
            raise ConfigError(f"sweep.{sweep_key} must be nonempty for {self.kind}")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "grid": asdict(self.grid),
            "solver": asdict(self.solver),
            "coefficients": self.coefficients.to_dict(),
            "initial": asdict(self.initial),
            "sweep": asdict(self.sweep),
            "params": self.params,
            "seed": self.seed,
            "output": self.output,
        }

    @classmethod
    def from_dict(cls, d: dict, kind: str | None = None) -> "ExperimentConfig":
        d = dict(d)
        allowed = {f.name for f in fields(cls)}
        unknown = set(d) - allowed
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if kind is not None:
            d.setdefault("kind", kind)
        try:
            return cls(
                kind=d.get("kind", "conservation"),
                grid=_section(GridConfig, d.get("grid", {}), "grid"),
                solver=_section(SolverConfig, d.get("solver", {}), "solver"),
                coefficients=Coefficients.from_dict(d.get("coefficients", {"lam": [0, 0.5], "mu": [0, 1]})),
                initial=_section(InitialData, d.get("initial", {}), "initial"),
                sweep=_section(Sweep, d.get("sweep", {}), "sweep"),
                params=dict(d.get("params", {})),
                seed=int(d.get("seed", 0)),
                output=d.get("output"),
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc

    def build_grid(self) -> Grid:
        return self.grid.build()

    def build_initial(self) -> Field:
        return self.initial.build(self.build_grid(), self.seed)


def _section(klass, data: dict, name: str):
    if not isinstance(data, dict):
        raise ConfigError(f"section {name!r} must be an object")
    allowed = {f.name for f in fields(klass)}
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {name}: {sorted(unknown)}")
    try:
        return klass(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {name}: {exc}") from exc


def load_config(path, kind: str | None = None) -> ExperimentConfig:
    p = Path(path)
    try:
        data = json.loads(p.read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {p}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    if kind is not None and data.get("kind", kind) != kind:
        raise ConfigError(f"config kind {data.get('kind')!r} does not match subcommand ({kind!r})")
    return ExperimentConfig.from_dict(data, kind)
