from ._common import TRACE_COLUMNS, SolverError, SolverResult
from .aspg import AspgConfig, smoothing_envelope, smoothing_iteration_bound, solve_aspg
from .cadmm import CadmmConfig, solve_cadmm
from .egt import BOX, CAP, EgtConfig, EgtProblem, default_bound, solve_egt
from .sdco import (
    PROX_EXACT,
    STRICT_PAPER,
    SdcoConfig,
    SdcoProblem,
    SdcoState,
    continuation_mus,
    eps_for,
    sdco_step,
    solve_sdco,
    solve_sdco_continuation,
)

__all__ = [
    "TRACE_COLUMNS", "SolverError", "SolverResult",
    "AspgConfig", "smoothing_envelope", "smoothing_iteration_bound", "solve_aspg",
    "CadmmConfig", "solve_cadmm",
    "BOX", "CAP", "EgtConfig", "EgtProblem", "default_bound", "solve_egt",
    "PROX_EXACT", "STRICT_PAPER", "SdcoConfig", "SdcoProblem", "SdcoState", "continuation_mus", "eps_for", "sdco_step",
    "solve_sdco", "solve_sdco_continuation",
]
