"""Pseudospectral 2D Oldroyd-B / MHD solver with Littlewood-Paley diagnostics."""

from .config import ConfigError, SimulationConfig, load_config, parse_config
from .grid import (
    Grid,
    ScalarField,
    SymTensorField,
    Tensor2Field,
    VectorField,
    divergence,
    gradient,
    leray_project,
    lp_norm,
    make_grid,
)
from .lp import (
    DyadicPartition,
    bernstein_window,
    besov_b0_inf_inf,
    block_sup_norms,
    bmo_norm,
    build_partition,
    check_bernstein,
    check_heat_decay,
    check_log_interpolation,
    check_log_interpolation_time,
    decompose,
    delta_q,
    holder_norm,
    partition_unity_error,
    s_q,
)
from .mhd import MhdState, check_tensor_transport, evolve_with_tensor, h_tensor, mhd_energy, rhs_mhd, step_mhd
from .monitor import (
    CriterionSample,
    a_priori_check,
    assemble_report,
    besov_criterion,
    chemin_lerner_norm,
    cm_criterion,
    energy_law_residual,
    holder_trackers,
    improved_criterion,
    planchon_tail,
    sample,
)
from .oldroyd import (
    ConformationDiagnostics,
    OldroydParams,
    OldroydState,
    conformation_diagnostics,
    energy_functional,
    ns_forced_step,
    recover_pressure,
    rhs_stress,
    rhs_velocity,
    step,
)
from .stepping import BlowupDetected, CflViolation, StepControls

__version__ = "0.1.0"

__all__ = [
    "BlowupDetected",
    "CflViolation",
    "ConfigError",
    "ConformationDiagnostics",
    "CriterionSample",
    "DyadicPartition",
    "Grid",
    "MhdState",
    "OldroydParams",
    "OldroydState",
    "ScalarField",
    "SimulationConfig",
    "StepControls",
    "SymTensorField",
    "Tensor2Field",
    "VectorField",
    "a_priori_check",
    "assemble_report",
    "bernstein_window",
    "besov_b0_inf_inf",
    "besov_criterion",
    "block_sup_norms",
    "bmo_norm",
    "build_partition",
    "check_bernstein",
    "check_heat_decay",
    "check_log_interpolation",
    "check_log_interpolation_time",
    "check_tensor_transport",
    "chemin_lerner_norm",
    "cm_criterion",
    "conformation_diagnostics",
    "decompose",
    "delta_q",
    "divergence",
    "energy_functional",
    "energy_law_residual",
    "evolve_with_tensor",
    "gradient",
    "h_tensor",
    "holder_norm",
    "holder_trackers",
    "improved_criterion",
    "leray_project",
    "load_config",
    "lp_norm",
    "make_grid",
    "mhd_energy",
    "ns_forced_step",
    "parse_config",
    "partition_unity_error",
    "planchon_tail",
    "recover_pressure",
    "rhs_mhd",
    "rhs_stress",
    "rhs_velocity",
    "s_q",
    "sample",
    "step",
    "step_mhd",
]
