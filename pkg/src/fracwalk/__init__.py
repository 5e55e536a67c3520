"""fracwalk: semi-Markov CTRWs with state-dependent holding-time laws.

Simulation, Laplace-domain solutions, time-domain fractional/Volterra solvers,
and the variable-order fractional heat scaling limit of heterogeneous
continuous-time random walks.
"""

from .mlf import MlParams, mittag_leffler, ml_density, ml_survival, ml_tail_asymptote
from .process import (
    Exponential,
    GeneralSubordinated,
    Generator,
    MittagLeffler,
    PathSample,
    Provenance,
    SemiMarkovModel,
    TransitionGrid,
    birth_chain,
    build_generator,
    exponential_model,
    holding_survival,
    load_model,
    ml_model,
    model_from_dict,
    model_to_dict,
    save_model,
    stable_subordinated,
    tempered_stable_subordinated,
    validate_model,
)
from .laplace import (
    InversionConfig,
    InversionMethod,
    fpp_state_dependent_laplace,
    invert_laplace_matrix,
    invert_laplace_scalar,
    laplace_matrix_general,
    laplace_matrix_heterogeneous,
    laplace_matrix_homogeneous,
    model_laplace_fn,
    solve_laplace,
)
from .montecarlo import (
    KERNEL_BACKEND,
    RngSpec,
    empirical_transition,
    occupation_at,
    sample_ml_waiting,
    sample_stable_subordinator,
    simulate_ctrw,
    simulate_paths,
    simulate_time_changed,
)
from .solvers import (
    DiscretizationConfig,
    FluxGrid,
    outgoing_flux,
    renewal_density,
    solve_backward_caputo,
    solve_backward_volterra,
    solve_forward_rl,
    solve_forward_volterra,
    solve_renewal,
)
from .diffusion import (
    Boundary,
    ConvergenceReport,
    DensityGrid,
    LatticeSpec,
    aggregation_diagnostic,
    lattice_model,
    scaling_limit_experiment,
    solve_vo_heat_backward,
    solve_vo_heat_forward,
)

__version__ = "0.1.0"
