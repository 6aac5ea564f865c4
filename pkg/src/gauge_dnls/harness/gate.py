"""The acceptance gate: thirteen criteria, each a function returning a CriterionResult."""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf

from ..envelope import bona_smith, build_envelope
from ..evolver import SolverConfig, StabilityWarning, solve_gauged, solve_regularized
from ..fitting import loglog_slope
from ..gauge import Coefficients, apply_gauge, gauge, gauge_identity_residual, gauge_phase, invert_gauge
from ..littlewood_paley import (
    DegenerateRatioError,
    ProjectorSelector,
    commutator,
    commutator_ratio,
    max_shell,
    project,
)
from ..semigroup import PropagatorSpec, propagate, propagation_gap, smoothing_bound, smoothing_ratio
from ..spectral import (
    DecayWarning,
    Field,
    derivative,
    l2_norm,
    make_grid,
    primitive,
    sobolev_norm,
    spectral_l2_norm,
    to_physical,
    to_spectral,
)
from .config import ExperimentConfig, InitialData
from .experiments import run_bona_smith, run_conservation, run_direct_vs_gauged, run_envelope, run_eps_convergence, run_gronwall, run_strichartz
from .report import clean

# regression constants pinned by randomized sweeps (see the decisions ledger)
C_COMM = 2.0
STRICHARTZ_BOUND = 2.5
TAIL_BOUND = 1.0

SPECIAL = {"lam": [0.0, 0.5], "mu": [0.0, 1.0]}
BASE_GRID = {"n": 512, "length": 80.0}


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number:2d} {self.name}"

    def to_dict(self) -> dict:
        return clean({"number": self.number, "name": self.name, "passed": self.passed, "details": self.details})


def _grid():
    return make_grid(BASE_GRID["n"], BASE_GRID["length"])


def _random_fields(grid, count, seed):
    rng = np.random.default_rng(seed)
    return [Field(grid, rng.standard_normal(grid.n) + 1j * rng.standard_normal(grid.n)) for _ in range(count)]


def _smooth_fields(grid, count, seed):
    return [InitialData(recipe="random", seed=seed + i, decay=3.0, window=2.0, amplitude=0.5).build(grid) for i in range(count)]


def _cfg(kind, seed, **sections) -> ExperimentConfig:
    d = {"kind": kind, "seed": seed, "grid": dict(BASE_GRID), "coefficients": SPECIAL}
    d.update(sections)
    return ExperimentConfig.from_dict(d)


# -- 1 ---------------------------------------------------------------------------


def criterion_spectral(seed: int = 0) -> CriterionResult:
    grid = _grid()
    K = max_shell(grid)
    worst = {"parseval": 0.0, "roundtrip": 0.0, "projector_algebra": 0.0, "commutation": 0.0}
    for f in _random_fields(grid, 100, seed):
        n = l2_norm(f)
        worst["parseval"] = max(worst["parseval"], abs(n - spectral_l2_norm(f)) / n)
        back = to_physical(to_spectral(f)).physical()
        worst["roundtrip"] = max(worst["roundtrip"], float(np.abs(back - f.physical()).max()) / float(np.abs(f.physical()).max()))
        for k in range(K + 1):
            band = project(f, ProjectorSelector.band(k))
            diff = project(f, ProjectorSelector.leq(k)) - project(f, ProjectorSelector.leq(k - 1))
            worst["projector_algebra"] = max(worst["projector_algebra"], l2_norm(band - diff) / n)
        spec = PropagatorSpec(0.3, 0.7)
        for k in (0, 2, 4, K):
            sel = ProjectorSelector.band(k)
            a = project(propagate(f, spec), sel)
            b = propagate(project(f, sel), spec)
            c1 = project(bona_smith(f, 0.01, 1.0), sel)
            c2 = bona_smith(project(f, sel), 0.01, 1.0)
            worst["commutation"] = max(worst["commutation"], l2_norm(a - b) / n, l2_norm(c1 - c2) / n)
    passed = all(v <= 1e-12 for v in worst.values())
    return CriterionResult(1, "spectral foundations", passed, {"worst_relative_error": worst, "tolerance": 1e-12})


# -- 2 ---------------------------------------------------------------------------


def _compact_bump(x, center, radius):
    z = (x - center) / radius
    out = np.zeros_like(x)
    inside = np.abs(z) < 1
    out[inside] = np.exp(-1.0 / (1.0 - z[inside] ** 2))
    return out


def criterion_primitive(seed: int = 0) -> CriterionResult:
    grid = make_grid(2048, 80.0)
    x = grid.points
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(10):
        g = sum(complex(*rng.standard_normal(2)) * _compact_bump(x, rng.uniform(-15, 15), rng.uniform(6, 15)) for _ in range(3))
        G = Field(grid, g)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DecayWarning)
            rec = primitive(derivative(G)).physical()
        worst = max(worst, float(np.abs(rec - g).max()))
    gauss = Field.from_function(grid, lambda y: np.exp(-(y**2)))
    exact = 0.5 * math.sqrt(math.pi) * (1 + erf(x))
    erf_err = float(np.abs(primitive(gauss).physical() - exact).max())
    passed = worst <= 1e-10 and erf_err <= 1e-8
    return CriterionResult(2, "primitive correctness", passed, {"derivative_roundtrip": worst, "erf_error": erf_err, "tolerances": [1e-10, 1e-8]})


# -- 3 ---------------------------------------------------------------------------


def criterion_gauge(seed: int = 0) -> CriterionResult:
    grid = _grid()
    special = Coefficients.from_dict(SPECIAL)
    general = Coefficients(0.3 + 0.2j, 0.5 - 0.1j)
    fields = _smooth_fields(grid, 10, seed) + [InitialData().build(grid)]
    roundtrip = unimod = inversion = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DecayWarning)
        for u in fields:
            for c in (special, general):
                phase = gauge_phase(u, c)
                back = apply_gauge(apply_gauge(u, phase, "forward"), phase, "inverse")
                roundtrip = max(roundtrip, float(np.abs(back.physical() - u.physical()).max()))
                v, _ = gauge(u, c)
                u2, _ = invert_gauge(v, c)
                v2, _ = gauge(u2, c)
                inversion = max(inversion, l2_norm(v2 - v), l2_norm(u2 - u))
            lam = gauge_phase(u, special).physical()
            unimod = max(unimod, float(np.abs(lam.real).max()) / (1 + l2_norm(u)))
    passed = roundtrip <= 1e-13 and unimod <= 1e-10 and inversion <= 1e-8
    return CriterionResult(3, "gauge exactness", passed, {"roundtrip": roundtrip, "special_case_real_part": unimod, "inversion_residual": inversion})


# -- 4 ---------------------------------------------------------------------------


def criterion_conservation(seed: int = 0, reports=None) -> CriterionResult:
    rep, _ = run_conservation(_cfg("conservation", seed, solver={"dt": 1e-3, "t_final": 1.0, "output_stride": 10}))
    _keep(reports, "conservation", rep)
    return CriterionResult(4, "conservation (special case)", rep.passed, {c.name: c.value for c in rep.contracts})


# -- 5 ---------------------------------------------------------------------------


def criterion_eps_rate(seed: int = 0, reports=None) -> CriterionResult:
    rep = run_eps_convergence(_cfg("eps_convergence", seed, solver={"dt": 1e-3, "t_final": 1.0, "output_stride": 1000}))
    _keep(reports, "eps_convergence", rep)
    return CriterionResult(5, "epsilon convergence rate", rep.passed, {"slope": rep.fits.get("slope"), "threshold": 0.4, "failures": rep.failures})


# -- 6 ---------------------------------------------------------------------------


def criterion_bona_smith(seed: int = 0, reports=None) -> CriterionResult:
    rep = run_bona_smith(_cfg("bona_smith", seed, sweep={"etas": [1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 1e-4]}))
    _keep(reports, "bona_smith", rep)
    return CriterionResult(6, "Bona-Smith rates", rep.passed, {"slope": rep.fits["rate"]["slope"], **{c.name: c.value for c in rep.contracts}})


# -- 7 ---------------------------------------------------------------------------


def criterion_semigroup(seed: int = 0, reports=None) -> CriterionResult:
    grid = _grid()
    rng = np.random.default_rng(seed)
    fields = _random_fields(grid, 50, seed)
    worst_excess = 0.0
    worst_ratio = 0.0
    for i in range(1000):
        f = fields[i % len(fields)]
        s1 = float(rng.uniform(0, 2))
        d = float(rng.uniform(0, 4))
        spec = PropagatorSpec(float(10 ** rng.uniform(-3, 0)), float(10 ** rng.uniform(-3, 0)))
        r = smoothing_ratio(f, spec, s1, s1 + d)
        worst_ratio = max(worst_ratio, r)
        worst_excess = max(worst_excess, r / smoothing_bound(d))
    smooth = InitialData().build(grid)
    eps = [1e-2, 1e-3, 1e-4]
    gaps = [propagation_gap(smooth, 1.0, e, 0.0, 0.0) for e in eps]
    slope = loglog_slope(eps, gaps).slope
    rep = run_strichartz(_cfg("strichartz", seed, params={"bound": STRICHARTZ_BOUND}))
    _keep(reports, "strichartz", rep)
    passed = worst_excess <= 1 + 1e-12 and slope >= 0.5 - 0.05 and rep.passed
    return CriterionResult(
        7,
        "semigroup estimates",
        passed,
        {
            "smoothing_max_ratio_over_bound": worst_excess,
            "smoothing_max_ratio": worst_ratio,
            "difference_slope": slope,
            "strichartz_max": rep.fits["ensemble_max"],
            "strichartz_bound": STRICHARTZ_BOUND,
        },
    )


# -- 8 ---------------------------------------------------------------------------


def _residual_ladder(solver, c, cfg, phi, epsilon, dts):
    out = []
    for dt in dts:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", StabilityWarning)
            traj = solver(phi, c, cfg.replace(dt=dt))
        _, res = gauge_identity_residual(traj, c, epsilon)
        out.append(float(res.max()))
    return out


def criterion_gauge_residual(seed: int = 0) -> CriterionResult:
    grid = _grid()
    c = Coefficients.from_dict(SPECIAL)
    phi = InitialData().build(grid)
    dts = [4e-3, 2e-3, 1e-3]
    base = SolverConfig(t_final=0.2)
    gauged = _residual_ladder(solve_gauged, c, base, phi, 0.0, dts)
    reg = _residual_ladder(solve_regularized, c, base.replace(epsilon=0.1, dealias=False), phi, 0.1, dts)
    ratios = {
        "gauged": [a / b for a, b in zip(gauged, gauged[1:])],
        "regularized_eps0.1": [a / b for a, b in zip(reg, reg[1:])],
    }
    passed = all(r >= 3.5 for rs in ratios.values() for r in rs)
    return CriterionResult(8, "gauge identity residual ladder", passed, {"dts": dts, "residuals": {"gauged": gauged, "regularized_eps0.1": reg}, "ratios": ratios})


# -- 9 ---------------------------------------------------------------------------


def criterion_gronwall(seed: int = 0, reports=None) -> CriterionResult:
    rep = run_gronwall(_cfg("gronwall", seed, solver={"output_stride": 10}))
    _keep(reports, "gronwall", rep)
    return CriterionResult(9, "Gronwall constant stability", rep.passed, {"c_min": rep.fits.get("c_min"), "max_spread": 3.0})


# -- 10 --------------------------------------------------------------------------


def criterion_envelope(seed: int = 0, reports=None) -> CriterionResult:
    rep, _ = run_envelope(_cfg("envelope", seed, solver={"output_stride": 5}))
    _keep(reports, "envelope", rep)
    grid = _grid()
    exhaustive = True
    for f in _smooth_fields(grid, 10, seed + 100):
        env = build_envelope(f, 1.0, 0.005, sobolev_norm(f, 1.0))
        exhaustive &= env.check_summability() and env.check_slow_variation() and env.check_domination(f)
    tail = rep.fits.get("max_tail_ratio", math.inf)
    passed = rep.passed and exhaustive and tail <= TAIL_BOUND
    return CriterionResult(10, "frequency envelope suite", passed, {"M": rep.fits.get("M"), "max_tail_ratio": tail, "tail_bound": TAIL_BOUND, "random_envelopes_ok": exhaustive})


# -- 11 --------------------------------------------------------------------------


def criterion_commutator(seed: int = 0) -> CriterionResult:
    grid = _grid()
    rng = np.random.default_rng(seed)
    worst = {"plain": 0.0, "refined": 0.0}
    skipped = 0
    for i in range(100):
        f = InitialData(recipe="random", seed=seed + 2 * i, decay=float(rng.uniform(1.5, 3)), window=float(rng.uniform(1, 4))).build(grid)
        g = InitialData(recipe="random", seed=seed + 2 * i + 1, decay=float(rng.uniform(0.5, 2)), window=float(rng.uniform(1, 4))).build(grid)
        k = int(rng.integers(2, 7))
        for refined, key in ((False, "plain"), (True, "refined")):
            for p in (2, math.inf):
                try:
                    worst[key] = max(worst[key], commutator_ratio(f, g, k, p, refined))
                except DegenerateRatioError:
                    skipped += 1
    const = Field(grid, np.full(grid.n, 1.7 - 0.3j))
    g = _random_fields(grid, 1, seed)[0]
    zero = max(float(np.abs(commutator(const, g, ProjectorSelector.band(k)).physical()).max()) for k in range(max_shell(grid) + 1))
    passed = max(worst.values()) <= C_COMM and zero == 0.0
    return CriterionResult(11, "commutator estimates", passed, {"max_ratio": worst, "bound": C_COMM, "constant_f_commutator": zero, "degenerate_skipped": skipped})


# -- 12 --------------------------------------------------------------------------


def criterion_cross_solver(seed: int = 0, reports=None) -> CriterionResult:
    gaps = []
    for n, dt in ((512, 1e-3), (1024, 5e-4)):
        cfg = ExperimentConfig.from_dict(
            {
                "kind": "direct_vs_gauged",
                "seed": seed,
                "grid": {"n": n, "length": 80.0},
                "coefficients": {"lam": [1.0, 0.0], "mu": [0.0, 0.0]},
                "solver": {"dt": dt, "t_final": 0.5, "output_stride": 10},
            }
        )
        rep = run_direct_vs_gauged(cfg)
        if n == 512:
            _keep(reports, "direct_vs_gauged", rep)
        gaps.append(rep.fits.get("oracle_l2", math.inf))
    passed = gaps[0] <= 5e-3 and gaps[1] < gaps[0]
    return CriterionResult(12, "cross-solver oracle (mu = 0)", passed, {"l2_gap": gaps, "levels": [[512, 1e-3], [1024, 5e-4]], "tolerance": 5e-3})


# -- 13 --------------------------------------------------------------------------


def criterion_determinism(seed: int = 0, reports=None) -> CriterionResult:
    """Re-run every experiment report this gate emitted and compare bytes."""
    if reports is None or set(reports) != set(REPORT_KEYS):
        reports = {}
        for fn in REPORTING:
            fn(seed, reports)
    again = {}
    for fn in REPORTING:
        fn(seed, again)
    mismatched = sorted(k for k in reports if reports[k] != again.get(k))
    passed = not mismatched and set(reports) == set(again)
    return CriterionResult(13, "determinism", passed, {"reports": sorted(reports), "mismatched": mismatched})


def _keep(reports, name, rep):
    if reports is not None:
        reports[name] = rep.to_json()


REPORT_KEYS = ("conservation", "eps_convergence", "bona_smith", "strichartz", "gronwall", "envelope", "direct_vs_gauged")
REPORTING = (criterion_conservation, criterion_eps_rate, criterion_bona_smith, criterion_semigroup, criterion_gronwall, criterion_envelope, criterion_cross_solver)

CRITERIA = {
    1: criterion_spectral,
    2: criterion_primitive,
    3: criterion_gauge,
    4: criterion_conservation,
    5: criterion_eps_rate,
    6: criterion_bona_smith,
    7: criterion_semigroup,
    8: criterion_gauge_residual,
    9: criterion_gronwall,
    10: criterion_envelope,
    11: criterion_commutator,
    12: criterion_cross_solver,
    13: criterion_determinism,
}


def run_gate(seed: int = 0, only=None, emit=print) -> tuple[list[CriterionResult], dict]:
    """Run the criteria in order; returns results and the experiment reports (JSON text)."""
    reports: dict = {}
    results = []
    for number in sorted(CRITERIA if only is None else only):
        fn = CRITERIA[number]
        res = fn(seed, reports) if fn in REPORTING or fn is criterion_determinism else fn(seed)
        results.append(res)
        if emit is not None:
            emit(res.line())
    return results, reports


def gate_json(results, seed: int) -> str:
    body = {"seed": seed, "passed": all(r.passed for r in results), "criteria": [r.to_dict() for r in results]}
    return json.dumps(body, sort_keys=True, indent=1) + "\n"
