"""Accelerated smoothing proximal gradient.

Minimises ``0.5||y - Gx||^2 + h_mu(x)`` over the feasible cone, where
``h_mu`` is the smoothed group penalty (``l1`` or ``l2`` variant). The
proximal step is the projection onto the cone; the step size is found by
backtracking and never increases.
"""
from dataclasses import dataclass

import numpy as np

from ..prox import L1, L2, SmoothedPenalty, l21_norm, project_feasible
from ._common import RealModel, SolverError, SolverResult, _Recorder, check_finite

ALPHA_MIN = 1e-16


@dataclass(frozen=True)
class AspgConfig:
    variant: str = L1
    eta: float = 0.1
    mu: float = 1e-8
    gamma: float = 0.5
    alpha0: float = 1.0
    max_iters: int = 2000
    tol: float = 1e-8

    def __post_init__(self):
        if not 0 < self.gamma < 1:
            raise ValueError("gamma must lie in (0, 1)")
        if self.mu <= 0 or self.alpha0 <= 0:
            raise ValueError("mu and alpha0 must be positive")
        if self.variant not in (L1, L2):
            raise ValueError(f"unknown variant {self.variant!r}")


def smoothing_envelope(k, eps, D, L_f, dist0, sigma=1.0):
    """Bound on ``F(x^k) - F*`` when ``mu = eps / (2 D)``."""
    return eps / 2.0 + 2.0 * (L_f + 2.0 * D / (eps * sigma)) * dist0**2 / (k + 1) ** 2


def smoothing_iteration_bound(eps, D, L_f, dist0, sigma=1.0):
    """Iteration count after which the envelope is below ``eps``."""
    return np.sqrt(4.0 * dist0**2 / eps * (L_f + 2.0 * D / (eps * sigma))) - 1.0


def solve_aspg(measurement, dictionary, config=AspgConfig(), callback=None, x_init=None):
    """Run the accelerated smoothing proximal gradient method.

    Traces: ``objective`` is the unsmoothed ``0.5||y-Gx||^2 + eta||x||_{2,1}``
    at the accepted iterate, ``smoothed`` the smoothed objective, ``step``
    the accepted step size. The backtracking test uses
    ``SmoothedPenalty.surrogate_value_grad`` (identical to the smoothed
    objective for the ``l2`` variant).
    """
    model = RealModel(dictionary, measurement.y)
    pen = SmoothedPenalty(config.eta, config.mu, config.variant)
    r = dictionary.r
    n = 2 * model.N

    x = np.zeros(n) if x_init is None else project_feasible(x_init, r)
    x_prev = x.copy()
    alpha = config.alpha0
    rec = _Recorder()
    converged = False
    k = 0
    for k in range(1, config.max_iters + 1):
        w = x + (k / (k + 3.0)) * (x - x_prev)
        res_w = model.residual(w)
        h_w, grad_h = pen.surrogate_value_grad(w)
        H_w = 0.5 * float(res_w @ res_w) + h_w
        grad = model.Gr.T @ res_w + grad_h
        slack = 1e-12 * max(1.0, abs(H_w))
        while True:
            z = project_feasible(w - alpha * grad, r)
            d = z - w
            res_z = model.residual(z)
            H_z = 0.5 * float(res_z @ res_z) + pen.surrogate_value_grad(z)[0]
            if not np.isfinite(H_z):
                raise SolverError(f"aspg: non-finite objective at iteration {k}")
            if H_z <= H_w + float(grad @ d) + float(d @ d) / (2.0 * alpha) + slack:
                break
            alpha *= config.gamma
            if alpha < ALPHA_MIN:
                raise SolverError(f"aspg: step size underflow at iteration {k}")
        x_prev, x = x, z
        check_finite("aspg", k, x)

        f = 0.5 * float(res_z @ res_z)
        rec.add(objective=f + config.eta * l21_norm(x), smoothed=f + pen.value_grad(x)[0],
                step=alpha)
        if callback is not None:
            callback(k, x)
        if np.linalg.norm(x - x_prev) <= config.tol * max(1.0, np.linalg.norm(x_prev)):
            converged = True
            break

    return SolverResult(
        x_hat=x, iterations=k, converged=converged, traces=rec.arrays(),
        info={"solver": f"aspg-{config.variant}", "eta": config.eta, "mu": config.mu},
    )
