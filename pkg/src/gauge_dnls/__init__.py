"""Pseudo-spectral workbench for quadratic derivative NLS and its gauge transformation."""

from .envelope import Envelope, bona_smith, bona_smith_rate, build_envelope, envelope_diagnostic, tail_bound_check
from .evolver import (
    PicardError,
    SolverConfig,
    StabilityWarning,
    conservation_report,
    l2_difference_check,
    solve_direct,
    solve_gauged,
    solve_regularized,
    step_regularized,
)
from .fitting import SlopeFit, loglog_slope
from .gauge import (
    Coefficients,
    GaugeInversionError,
    GaugeOverflowError,
    apply_gauge,
    gauge,
    gauge_identity_residual,
    gauge_phase,
    invert_gauge,
)
from .littlewood_paley import ProjectorSelector, bernstein_ratio, commutator, commutator_ratio, project
from .semigroup import PropagatorSpec, propagate, propagate_difference, smoothing_ratio, strichartz_check
from .spectral import (
    DecayWarning,
    Field,
    Grid,
    derivative,
    l2_norm,
    make_grid,
    primitive,
    sobolev_norm,
    sup_primitive,
    xs_norm,
)
from .trajectory import Trajectory, dump_trajectory, load_trajectory

__version__ = "0.1.0"

__all__ = [
    "Coefficients",
    "DecayWarning",
    "Envelope",
    "Field",
    "GaugeInversionError",
    "GaugeOverflowError",
    "Grid",
    "PicardError",
    "ProjectorSelector",
    "PropagatorSpec",
    "SlopeFit",
    "SolverConfig",
    "StabilityWarning",
    "Trajectory",
    "apply_gauge",
    "bernstein_ratio",
    "bona_smith",
    "bona_smith_rate",
    "build_envelope",
    "commutator",
    "commutator_ratio",
    "conservation_report",
    "derivative",
    "dump_trajectory",
    "envelope_diagnostic",
    "gauge",
    "gauge_identity_residual",
    "gauge_phase",
    "invert_gauge",
    "l2_difference_check",
    "l2_norm",
    "load_trajectory",
    "loglog_slope",
    "make_grid",
    "primitive",
    "project",
    "propagate",
    "propagate_difference",
    "smoothing_ratio",
    "sobolev_norm",
    "solve_direct",
    "solve_gauged",
    "solve_regularized",
    "step_regularized",
    "strichartz_check",
    "sup_primitive",
    "tail_bound_check",
    "xs_norm",
]
