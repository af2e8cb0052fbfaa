"""Off-grid DoA estimation by linearly constrained group-sparse covariance fitting.

Hot per-group kernels use numba when available; set ``OFFGRID_DOA_NUMBA=0``
to force the pure-numpy path.
"""
from ._backend import BACKEND
from .array_model import (
    AngularGrid,
    ArrayGeometry,
    Dictionary,
    build_dictionary,
    constraint_matrix,
    is_feasible,
    steering_derivative,
    steering_matrix,
    steering_vector,
)
from .config import ConfigError, ExperimentConfig, desk_config, load_config, parse_config
from .experiment import read_trace, run_experiment, spectrum_export, trace_export
from .metrics import DoAEstimate, music_spectrum, reconstruction_error, recover_doas, rmse
from .prox import (
    SmoothedPenalty,
    group_norms,
    group_soft_threshold,
    l2_shrink,
    l21_norm,
    operator_norm,
    project_feasible,
    project_feasible_capped,
)
from .signal_sim import Measurement, Scenario, derive_seed, measure, simulate_snapshots
from .solvers import (
    AspgConfig,
    CadmmConfig,
    EgtConfig,
    SdcoConfig,
    SolverError,
    SolverResult,
    solve_aspg,
    solve_cadmm,
    solve_egt,
    solve_sdco,
    solve_sdco_continuation,
)

__version__ = "0.1.0"
