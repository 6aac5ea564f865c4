"""Experiment runners: one per config kind, each returning a deterministic Report."""

from __future__ import annotations

import math
import warnings

import numpy as np

from ..envelope import bona_smith, bona_smith_rate, build_envelope, envelope_diagnostic, tail_bound_check
from ..evolver import (
    StabilityWarning,
    conservation_report,
    l2_difference_check,
    solve_direct,
    solve_gauged,
    solve_regularized,
)
from ..fitting import DegenerateFitError, loglog_slope
from ..gauge import gauge
from ..littlewood_paley import max_shell
from ..semigroup import strichartz_check
from ..spectral import DecayWarning, Field, l2_norm, make_grid, sobolev_norm, xs_norm
from ..trajectory import Trajectory
from .config import ExperimentConfig, InitialData
from .report import Contract, Report, Timer, run_points


def _quiet(fn, *args):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", StabilityWarning)
        warnings.simplefilter("ignore", DecayWarning)
        return fn(*args)


def _solve(kind: str, phi: Field, cfg: ExperimentConfig, **changes):
    solver = cfg.solver.replace(**changes) if changes else cfg.solver
    fn = {"regularized": solve_regularized, "gauged": solve_gauged, "direct": solve_direct}[kind]
    if kind == "direct":
        solver = solver.replace(epsilon=0.0)
    return _quiet(fn, phi, cfg.coefficients, solver)


def _xs(f: Field, s: float) -> float:
    return _quiet(xs_norm, f, s)


def _final_diff(a: Trajectory, b: Trajectory, s: float) -> float:
    return _xs(a.final - b.final, s)


def _failure(label, traj: Trajectory) -> dict:
    return {"point": label, "status": traj.status, "message": traj.message}


def _new_report(cfg: ExperimentConfig) -> Report:
    return Report(cfg.kind, cfg.to_dict())


def gauged_trajectory(traj: Trajectory, c) -> Trajectory:
    """Stack of ``v = exp(-Lambda) u`` samples for a stored ``u`` trajectory."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DecayWarning)
        vs = np.array([gauge(u, c)[0].physical() for u in traj.fields])
    return Trajectory(traj.grid, traj.times, vs, {}, traj.status, traj.message, dict(traj.meta))


def random_direction(grid, seed: int, s: float, decay: float = 3.0) -> Field:
    """Smooth, decaying random field normalised to unit ``X^s`` norm."""
    psi = InitialData(recipe="random", seed=seed, decay=decay, window=2.0).build(grid)
    return psi * (1.0 / _xs(psi, s))


# -- solve ---------------------------------------------------------------------


def run_solve(cfg: ExperimentConfig) -> tuple[Report, Trajectory]:
    rep = _new_report(cfg)
    phi = cfg.build_initial()
    with Timer(rep.timings, "solve"):
        traj = _solve(cfg.params["solver"], phi, cfg)
    final = {k: float(v[-1]) for k, v in sorted(traj.diagnostics.items())}
    rep.measurements.append({"t": float(traj.times[-1]), "status": traj.status, **final})
    if not traj.ok:
        rep.failures.append(_failure(cfg.params["solver"], traj))
    rep.contracts.append(Contract.holds("solve_completed", traj.ok))
    return rep, traj


# -- epsilon convergence -------------------------------------------------------


def run_eps_convergence(cfg: ExperimentConfig) -> Report:
    rep = _new_report(cfg)
    p = cfg.params
    s = p["s"]
    phi = cfg.build_initial()
    epsilons = sorted(cfg.sweep.epsilons, reverse=True)
    if len(epsilons) < 4:
        raise ValueError("eps convergence needs at least four epsilon values")
    ref_kind = p["reference"]
    with Timer(rep.timings, "reference"):
        if ref_kind == "zero":
            ref = _solve("regularized", phi, cfg, epsilon=0.0)
        elif ref_kind == "gauged":
            ref = _solve("gauged", phi, cfg)
        elif ref_kind == "smallest":
            ref = _solve("regularized", phi, cfg, epsilon=epsilons[-1])
            epsilons = epsilons[:-1]
        else:
            raise ValueError(f"unknown reference {ref_kind!r}")
    if not ref.ok:
        rep.failures.append(_failure("reference", ref))
        return rep

    def point(eps):
        return _solve("regularized", phi, cfg, epsilon=eps)

    with Timer(rep.timings, "sweep"):
        trajs = run_points(point, epsilons)
    xs, ys = [], []
    for eps, traj in zip(epsilons, trajs):
        row = {"epsilon": eps, "status": traj.status}
        if traj.ok:
            row["diff_xs"] = _final_diff(traj, ref, s)
            row["diff_l2"] = l2_norm(traj.final - ref.final)
            xs.append(eps)
            ys.append(row["diff_xs"])
        else:
            rep.failures.append(_failure({"epsilon": eps}, traj))
        rep.measurements.append(row)
    try:
        fit = loglog_slope(xs, ys)
        rep.fits["slope"] = fit.to_dict()
        rep.contracts.append(Contract.at_least("eps_rate_slope", fit.slope, p["min_slope"]))
    except DegenerateFitError as exc:
        rep.failures.append({"point": "fit", "status": "degenerate", "message": str(exc)})
    return rep


# -- joint (epsilon, eta) limit ------------------------------------------------


def _nonincreasing(values, rtol=1e-9) -> bool:
    return all(b <= a * (1 + rtol) + 1e-15 for a, b in zip(values, values[1:]))


def run_joint_limit(cfg: ExperimentConfig) -> Report:
    rep = _new_report(cfg)
    p = cfg.params
    s, ms = p["s"], p["mollifier_s"]
    phi = cfg.build_initial()
    etas = sorted(cfg.sweep.etas, reverse=True)
    epsilons = sorted(p["epsilons"], reverse=True)
    with Timer(rep.timings, "reference"):
        ref = _solve("regularized", phi, cfg, epsilon=0.0)
    if not ref.ok:
        rep.failures.append(_failure("reference", ref))
        return rep
    points = [(e, h, "grid") for h in etas for e in epsilons]
    points += [(0.0, h, "sequential") for h in etas]
    points += [(h**3, h, "diagonal") for h in etas]

    def point(pt):
        eps, eta, _ = pt
        return _solve("regularized", bona_smith(phi, eta, ms), cfg, epsilon=eps)

    with Timer(rep.timings, "sweep"):
        trajs = run_points(point, points)
    table, finals = {}, {}
    for (eps, eta, path), traj in zip(points, trajs):
        row = {"epsilon": eps, "eta": eta, "path": path, "status": traj.status}
        if traj.ok:
            row["diff_xs"] = _final_diff(traj, ref, s)
            table[(path, eps, eta)] = row["diff_xs"]
            finals[(path, eta)] = traj
        else:
            rep.failures.append(_failure({"epsilon": eps, "eta": eta}, traj))
        rep.measurements.append(row)
    if rep.failures:
        return rep
    for eta in etas:
        along = [table[("grid", e, eta)] for e in epsilons] + [table[("sequential", 0.0, eta)]]
        rep.contracts.append(Contract.holds(f"monotone_eps_at_eta={eta:g}", _nonincreasing(along)))
    for eps in epsilons:
        along = [table[("grid", eps, h)] for h in etas]
        rep.contracts.append(Contract.holds(f"monotone_eta_at_eps={eps:g}", _nonincreasing(along)))
    diag = [table[("diagonal", h**3, h)] for h in etas]
    seq = [table[("sequential", 0.0, h)] for h in etas]
    rep.contracts.append(Contract.holds("monotone_diagonal", _nonincreasing(diag)))
    rep.contracts.append(Contract.holds("monotone_sequential", _nonincreasing(seq)))
    finest = etas[-1]
    gap = _final_diff(finals[("diagonal", finest)], finals[("sequential", finest)], s)
    rep.fits["diagonal_vs_sequential"] = {"eta": finest, "gap": gap, "diagonal": diag[-1], "sequential": seq[-1]}
    rep.contracts.append(Contract.at_most("diagonal_matches_sequential", gap, 2 * max(diag[-1], seq[-1])))
    return rep


# -- Bona-Smith ----------------------------------------------------------------


def full_band_field(n: int, length: float, s: float, kappa: float) -> Field:
    """``|f^| = (1 + xi^2)^{-(2s + 1 + 2 kappa)/4}``: in ``H^s`` only barely."""
    grid = make_grid(n, length)
    coeffs = (1 + grid.freqs**2) ** (-(2 * s + 1 + 2 * kappa) / 4)
    return Field(grid, coeffs.astype(np.complex128) * np.exp(-1j * grid.freqs * grid.x_left), "spectral")


def run_bona_smith(cfg: ExperimentConfig) -> Report:
    rep = _new_report(cfg)
    p = cfg.params
    s, j = p["s"], p["j"]
    etas = sorted(cfg.sweep.etas, reverse=True)
    with Timer(rep.timings, "rate"):
        f_band = full_band_field(p["fine_n"], p["fine_length"], s, p["kappa"])
        fit = bona_smith_rate(f_band, s, j, p["rate_etas"])
    rep.fits["rate"] = fit.to_dict()
    rep.contracts.append(Contract.at_most("rate_matches_exponent", abs(fit.slope + j / s), p["slope_tol"]))
    rep.contracts.append(Contract.at_least("rate_not_worse_than_exponent", fit.slope, -j / s - p["slope_tol"]))
    phi = cfg.build_initial()
    base = _xs(phi, s)
    gaps, ratios = [], []
    with Timer(rep.timings, "convergence"):
        for eta in etas:
            J = bona_smith(phi, eta, s)
            gaps.append(_xs(J - phi, s))
            ratios.append(_xs(J, s) / base)
            rep.measurements.append(
                {"eta": eta, "gap_xs": gaps[-1], "bound_ratio": ratios[-1], "hsj_norm_full_band": sobolev_norm(bona_smith(f_band, eta, s), s + j)}
            )
    rep.fits["max_bound_ratio"] = max(ratios)
    rep.contracts.append(Contract.holds("gap_monotone_to_zero", _nonincreasing(gaps, 0.0)))
    return rep


# -- conservation --------------------------------------------------------------


def run_conservation(cfg: ExperimentConfig) -> tuple[Report, Trajectory]:
    rep = _new_report(cfg)
    p = cfg.params
    phi = cfg.build_initial()
    with Timer(rep.timings, "solve"):
        traj = _solve("gauged", phi, cfg)
    if not traj.ok:
        rep.failures.append(_failure("gauged", traj))
    cons = conservation_report(traj, cfg.coefficients)
    stride = max(1, len(traj) // 20)
    for i in list(range(0, len(traj), stride)) + ([len(traj) - 1] if (len(traj) - 1) % stride else []):
        rep.measurements.append(
            {"t": float(cons.times[i]), "mass": cons.mass[i], "energy": cons.energy[i], "mass_drift": cons.mass_drift[i], "energy_drift": cons.energy_drift[i]}
        )
    rep.contracts.append(Contract.at_most("mass_drift", cons.max_mass_drift, p["mass_tol"]))
    rep.contracts.append(Contract.at_most("energy_drift", cons.max_energy_drift, p["energy_tol"]))
    return rep, traj


# -- Lipschitz flow and Gronwall constant ----------------------------------------


def _flow_solver(cfg: ExperimentConfig) -> str:
    return "gauged" if cfg.coefficients.special_case else "regularized"


def run_lipschitz_flow(cfg: ExperimentConfig) -> Report:
    rep = _new_report(cfg)
    p = cfg.params
    s = p["s"]
    phi = cfg.build_initial()
    psi = random_direction(phi.grid, cfg.seed, s)
    kind = _flow_solver(cfg)
    with Timer(rep.timings, "base"):
        base = _solve(kind, phi, cfg)
    if not base.ok:
        rep.failures.append(_failure("base", base))
        return rep
    sizes = [d for d in sorted(cfg.sweep.perturbations, reverse=True)]

    def point(delta):
        return _solve(kind, phi + psi * delta, cfg)

    with Timer(rep.timings, "sweep"):
        trajs = run_points(point, [d for d in sizes if d != 0])
    ratios = []
    it = iter(trajs)
    for delta in sizes:
        if delta == 0:
            rep.measurements.append({"delta": 0.0, "ratio": "n/a"})
            continue
        traj = next(it)
        if not traj.ok:
            rep.failures.append(_failure({"delta": delta}, traj))
            continue
        data_gap = _xs(psi * delta, s)
        sup_gap = max(_xs(a - b, s) for a, b in zip(traj.fields, base.fields))
        ratios.append(sup_gap / data_gap)
        rep.measurements.append({"delta": delta, "data_gap": data_gap, "sup_gap": sup_gap, "ratio": ratios[-1]})
    if ratios:
        spread = max(ratios) / min(ratios) if min(ratios) > 0 else math.inf
        rep.fits["ratio_spread"] = spread
        rep.contracts.append(Contract.at_most("lipschitz_ratio_spread", spread, p["max_spread"]))
    return rep


def run_gronwall(cfg: ExperimentConfig) -> Report:
    """Minimal Gronwall constant over ``n_pairs`` random perturbation pairs."""
    rep = _new_report(cfg)
    p = cfg.params
    c = cfg.coefficients
    if not c.special_case:
        raise ValueError("the Gronwall difference bound needs 2 lam + conj(mu) = 0")
    phi = cfg.build_initial()
    with Timer(rep.timings, "base"):
        base = _solve("gauged", phi, cfg)
    if not base.ok:
        rep.failures.append(_failure("base", base))
        return rep
    seeds = [cfg.seed + 1 + i for i in range(cfg.sweep.n_pairs)]

    def point(seed):
        psi = random_direction(phi.grid, seed, 0.0)
        psi = psi * (p["perturbation"] / l2_norm(psi))
        return _solve("gauged", phi + psi, cfg)

    with Timer(rep.timings, "sweep"):
        trajs = run_points(point, seeds)
    cs = []
    for seed, traj in zip(seeds, trajs):
        if not traj.ok:
            rep.failures.append(_failure({"seed": seed}, traj))
            continue
        d = l2_difference_check(base, traj, c)
        cs.append(d.c_min)
        rep.measurements.append({"seed": seed, "c_min": d.c_min, "final_ratio": float(d.ratio[-1]), "gradient_integral": float(d.gradient_integral[-1])})
    if cs:
        lo, hi = min(cs), max(cs)
        spread = hi / lo if lo > 0 else math.inf
        rep.fits["c_min"] = {"min": lo, "max": hi, "spread": spread}
        rep.contracts.append(Contract.holds("c_min_finite", all(math.isfinite(x) for x in cs)))
        rep.contracts.append(Contract.at_most("c_min_spread", spread, p["max_spread"]))
    return rep


# -- envelope ------------------------------------------------------------------


def run_envelope(cfg: ExperimentConfig) -> tuple[Report, object]:
    rep = _new_report(cfg)
    p = cfg.params
    s, delta, R = p["s"], p["delta"], p["R"]
    phi = cfg.build_initial()
    phi = phi * (R / sobolev_norm(phi, s))
    env = build_envelope(phi, s, delta, R)
    rep.contracts.append(Contract.holds("summability", env.check_summability()))
    rep.contracts.append(Contract.holds("slow_variation", env.check_slow_variation()))
    rep.contracts.append(Contract.holds("domination", env.check_domination(phi)))
    with Timer(rep.timings, "solve"):
        traj = _solve("gauged", phi, cfg)
    if not traj.ok:
        rep.failures.append(_failure("gauged", traj))
        return rep, env
    vtraj = gauged_trajectory(traj, cfg.coefficients)
    with Timer(rep.timings, "diagnostic"):
        diag = envelope_diagnostic(vtraj, env, s)
    rep.fits["M"] = {"initial": diag.M_initial, "final": diag.M_final, "growth": diag.growth, "bound_shape": R + R ** (2 * s + 2)}
    rep.fits["flagged_shells"] = diag.flagged_shells
    rep.contracts.append(Contract.at_most("M_growth", diag.growth, p["max_growth"]))
    rep.contracts.append(Contract.holds("M_nondecreasing", bool(np.all(np.diff(diag.M) >= 0))))
    ks = [k for k in cfg.sweep.ks if 0 <= k <= env.k_max]
    tails = []
    with Timer(rep.timings, "tails"):
        for k in ks:
            t = tail_bound_check(vtraj, env, s, k)
            tails.append(t)
            rep.measurements.append({"k": k, "c_k": float(env.c[k]), "tail_lhs": t.lhs, "tail_envelope": t.tail, "tail_ratio": t.ratio, "violation": t.violation})
    rep.fits["max_tail_ratio"] = max((t.ratio for t in tails), default=0.0)
    rep.contracts.append(Contract.holds("tail_no_violation", not any(t.violation for t in tails)))
    rep.contracts.append(Contract.holds("tail_ratios_finite", all(math.isfinite(t.ratio) for t in tails)))
    return rep, env


# -- Strichartz ----------------------------------------------------------------


def run_strichartz(cfg: ExperimentConfig) -> Report:
    rep = _new_report(cfg)
    p = cfg.params
    grid = cfg.build_grid()
    seeds = [cfg.seed + i for i in range(cfg.sweep.n_samples)]

    def point(seed):
        f = InitialData(recipe="random", seed=seed, decay=1.0 + (seed % 4), window=1.0 + 2.0 * (seed % 3), l2_norm=1.0).build(grid)
        return strichartz_check(f, p["T"], p["n_t"]).ratio

    with Timer(rep.timings, "ensemble"):
        ratios = run_points(point, seeds)
    for seed, r in zip(seeds, ratios):
        rep.measurements.append({"seed": seed, "ratio": r})
    phi = cfg.build_initial()
    coarse = strichartz_check(phi, p["T"], p["n_t"]).ratio
    fine = strichartz_check(phi, p["T"], p["n_t"] * p["refine"]).ratio
    rep.fits["ensemble_max"] = max(ratios)
    rep.fits["ensemble_min"] = min(ratios)
    rep.fits["initial_refinement"] = {"coarse": coarse, "fine": fine}
    rep.contracts.append(Contract.at_most("strichartz_ratio", max(ratios), p["bound"]))
    return rep


# -- direct vs gauged ------------------------------------------------------------


def run_direct_vs_gauged(cfg: ExperimentConfig) -> Report:
    rep = _new_report(cfg)
    p = cfg.params
    phi = cfg.build_initial()
    with Timer(rep.timings, "gauged"):
        g = _solve("gauged", phi, cfg)
    with Timer(rep.timings, "direct"):
        d = _solve("direct", phi, cfg)
    with Timer(rep.timings, "regularized"):
        r = _solve("regularized", phi, cfg, epsilon=p["eps_small"])
    for label, traj in (("gauged", g), ("regularized", r)):
        if not traj.ok:
            rep.failures.append(_failure(label, traj))
    if rep.failures:
        return rep
    n = min(len(g), len(d))
    diffs = np.sqrt(g.grid.dx * np.sum(np.abs(g.values[:n] - d.values[:n]) ** 2, axis=1))
    above = np.nonzero(diffs > p["agree_tol"])[0]
    window = float(g.times[above[0] - 1]) if len(above) else float(g.times[n - 1])
    divergence = float(g.times[above[0]]) if len(above) else None
    stride = max(1, n // 20)
    for i in range(0, n, stride):
        rep.measurements.append({"t": float(g.times[i]), "l2_direct_vs_gauged": float(diffs[i])})
    oracle = l2_norm(g.final - r.final)
    rep.fits["direct"] = {"status": d.status, "message": d.message, "agreement_window": window, "divergence_time": divergence}
    rep.fits["oracle_l2"] = oracle
    rep.contracts.append(Contract.at_most("initial_agreement", float(diffs[min(1, n - 1)]), p["agree_tol"]))
    rep.contracts.append(Contract.at_most("gauged_vs_regularized", oracle, p["oracle_tol"]))
    return rep


RUNNERS = {
    "eps_convergence": run_eps_convergence,
    "joint_limit": run_joint_limit,
    "bona_smith": run_bona_smith,
    "conservation": run_conservation,
    "lipschitz_flow": run_lipschitz_flow,
    "gronwall": run_gronwall,
    "envelope": run_envelope,
    "strichartz": run_strichartz,
    "direct_vs_gauged": run_direct_vs_gauged,
    "solve": run_solve,
}


def run(cfg: ExperimentConfig):
    """Dispatch on ``cfg.kind``; returns ``(report, extra)`` where extra may be None."""
    out = RUNNERS[cfg.kind](cfg)
    return out if isinstance(out, tuple) else (out, None)
