"""Bound-state spectral toolkit for 1D confining potentials.

Solves the eigenproblem on a grid (or samples exact oracle spectra), builds
the at-eigenenergy kernel over the states, and numerically verifies the
node, extremum, integral, and walled-partner trace identities that any such
spectrum must satisfy, emitting machine-readable verification reports.
"""

from .eigensolver import (
    BoundState,
    DomainKind,
    Grid,
    PotentialKind,
    PotentialSpec,
    Spectrum,
    StateSource,
    analytic_box_spectrum,
    analytic_sho_spectrum,
    build_grid,
    default_grid,
    export_spectrum,
    orthonormality_matrix,
    solve_numeric,
)
from .errors import (
    CoincidentPoints,
    ConfigError,
    ConvergenceFailure,
    DegenerateEnergies,
    DomainMismatch,
    InsufficientStates,
    InvalidDomain,
    NodeCountMismatch,
    NodeInPath,
    NonFinite,
    NotANode,
    NotAnExtremum,
    OutOfDomain,
    SingularAtWall,
    ToolkitError,
)
from .greenfn import (
    box_g_closed,
    g_kernel,
    g_kernel_dense,
    g_ode_residual,
    integrated_relation,
    s_relation,
)
from .sumrules import (
    AbelSchedule,
    SumRuleReport,
    abel_sum,
    combined_rule,
    extremum_rule_linear,
    extremum_rule_quadratic,
    groundstate_rule,
    node_rule_linear,
    node_rule_quadratic,
    overlap_matrix,
    pair_integral_rule,
    write_report_json,
    write_trace_csv,
)
from .susy import (
    PartnerProblem,
    build_partner_problem,
    partner_green_trace,
    partner_potential,
    partner_solutions,
    trace_identity,
    walled_spectrum,
)
from .waveanalysis import (
    CriticalKind,
    CriticalPoint,
    IntegrationScheme,
    find_extrema,
    find_nodes,
    integrate,
    integrate_fn,
    interpolate_state,
    last_node,
    overlap_partial,
    second_solution,
    second_solution_with_derivative,
    wronskian,
    wronskian_at,
)

__version__ = "0.1.0"
