"""Finite-difference advection schemes on bounded domains.

Explicit stencil schemes for ``u_t + a u_x = 0`` on an interval, with
inverse Lax-Wendroff inflow ghost cells, extrapolation outflow ghost
cells, root-based scheme analysis and a convergence harness.
"""

from .scheme_core import (
    AmplificationReport,
    CFLWarning,
    MomentReport,
    SchemeCoefficients,
    apply_interior,
    build_lax_wendroff,
    build_o3,
    build_upwind,
    check_amplification,
    check_consistency,
)
from .oracles import DataOracle, OracleError, make_oracle
from .boundary import (
    InflowSpec,
    OutflowSpec,
    check_compatibility,
    fill_inflow_ghosts,
    fill_outflow_ghosts,
    ilw_alpha,
)
from .grid_solver import (
    ErrorReport,
    ExactProjection,
    GridConfig,
    InstabilityError,
    ProblemSpec,
    SolutionState,
    exact_cell_average,
    observed_order,
    project_initial,
    run,
    step,
)
from .spectral import (
    AssumptionViolation,
    CharPoly,
    CorrectorSystem,
    RootSet,
    SteadyStateBasis,
    build_corrector_system,
    char_poly,
    check_root_assumption,
    corrector_l2_scaling,
    count_unstable,
    find_roots,
    solve_corrector,
    steady_state_basis,
    verify_steady_state,
)

__version__ = "0.1.0"
