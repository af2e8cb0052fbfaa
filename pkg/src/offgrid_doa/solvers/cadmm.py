"""Consensus ADMM for ``0.5||y - Gx||^2 + eta||x||_{2,1} + indicator_X(x)``.

Three local copies ``z_i`` (least squares, group penalty, feasible set) are
tied to a consensus variable ``x``; each ``z_i`` update is closed form.
"""
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from ..array_model import is_feasible
from ..prox import group_soft_threshold, project_feasible
from ._common import RealModel, SolverError, SolverResult, _Recorder, check_finite


@dataclass(frozen=True)
class CadmmConfig:
    eta: float = 0.1
    rho: float = 1.0
    max_iters: int = 5000
    tol_primal: float = 1e-6
    tol_dual: float = 1e-6

    def __post_init__(self):
        if self.rho <= 0:
            raise ValueError("rho must be positive")
        if self.eta < 0:
            raise ValueError("eta must be non-negative")
        if self.tol_primal <= 0 or self.tol_dual <= 0:
            raise ValueError("tolerances must be positive")


def solve_cadmm(measurement, dictionary, config=CadmmConfig(), callback=None, check_feasible=False):
    """Run consensus ADMM from zero.

    Returns the consensus iterate ``x``. Traces: ``objective`` (unconstrained
    part of the objective at ``x``), ``residual_primal``
    (``sqrt(sum_i ||z_i - x||^2)``) and ``residual_dual`` (``rho ||x+ - x||``).
    ``callback(k, x)`` is called after every iteration.
    """
    model = RealModel(dictionary, measurement.y)
    rho, eta, r = config.rho, config.eta, dictionary.r
    n = 2 * model.N

    # z1 normal equations: (Re(G^H G) + rho I) z1 = Re(G^H y) + rho x - u1,
    # solved through the Woodbury identity with the small (2 M^2) factor
    Gr = model.Gr
    factor = cho_factor(Gr @ Gr.T + rho * np.eye(Gr.shape[0]))
    b = Gr.T @ model.yr

    def ridge_solve(rhs):
        return (rhs - Gr.T @ cho_solve(factor, Gr @ rhs)) / rho

    x = np.zeros(n)
    u = np.zeros((3, n))
    rec = _Recorder()
    converged = False
    k = 0
    for k in range(1, config.max_iters + 1):
        z1 = ridge_solve(b + rho * x - u[0])
        z2 = group_soft_threshold(x - u[1] / rho, eta / rho)
        z3 = project_feasible(x - u[2] / rho, r)
        if check_feasible and not is_feasible(z3, r):
            raise SolverError(f"cadmm: z3 infeasible at iteration {k}")
        z = np.stack((z1, z2, z3))
        x_old = x
        x = np.mean(z + u / rho, axis=0)
        u += rho * (z - x)
        check_finite("cadmm", k, x, u)

        primal = float(np.sqrt(np.sum((z - x) ** 2)))
        dual = rho * float(np.linalg.norm(x - x_old))
        rec.add(objective=model.objective(x, eta), residual_primal=primal, residual_dual=dual)
        if callback is not None:
            callback(k, x)
        if primal <= config.tol_primal and dual <= config.tol_dual:
            converged = True
            break

    return SolverResult(
        x_hat=x, iterations=k, converged=converged, traces=rec.arrays(),
        info={"solver": "cadmm", "eta": eta, "rho": rho, "z3": z3},
    )
