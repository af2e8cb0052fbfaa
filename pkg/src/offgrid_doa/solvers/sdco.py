"""Smoothed dual conic solver for ``min ||x||_{2,1}`` s.t. ``||y - Gx|| <= eps``, ``Cx <= 0``.

The primal objective gets the prox term ``mu/2 ||x - x0||^2``; the smoothed
dual in ``(z, w)`` (``z`` for the norm cone, ``w >= 0`` for ``Cx <= 0``) is
then maximised by an accelerated proximal gradient method with backtracking
on the Lipschitz estimate. Continuation repeats the solve with ``mu`` halved
and the prox-centre moved to the last primal estimate.
"""
from dataclasses import dataclass, replace

import numpy as np

from ..array_model import constraint_matrix
from ..prox import group_soft_threshold, l21_norm, l2_shrink
from ._common import RealModel, SolverError, SolverResult, _Recorder, check_finite

STRICT_PAPER = "strict_paper"
PROX_EXACT = "prox_exact"
L_MAX = 1e16


@dataclass(frozen=True)
class SdcoConfig:
    eps: float = None
    mu: float = 1.0
    L0: float = 1.0
    gamma: float = 0.5
    max_iters: int = 2000
    tol: float = 1e-10
    shrink: str = PROX_EXACT
    rounds: int = 8
    alpha: float = 0.5

    def __post_init__(self):
        if self.mu <= 0 or self.L0 <= 0:
            raise ValueError("mu and L0 must be positive")
        if not 0 < self.gamma < 1 or not 0 < self.alpha < 1:
            raise ValueError("gamma and alpha must lie in (0, 1)")
        if self.shrink not in (STRICT_PAPER, PROX_EXACT):
            raise ValueError(f"unknown shrink mode {self.shrink!r}")
        if self.rounds < 1:
            raise ValueError("need at least one continuation round")
        if self.eps is not None and self.eps < 0:
            raise ValueError("eps must be non-negative")


@dataclass
class SdcoState:
    """Dual iterate of the accelerated scheme.

    ``z, w``: the proximal sequence; ``z_avg, w_avg``: the averaged sequence
    whose primal image is reported; ``c``: acceleration weight; ``L``: local
    Lipschitz estimate.
    """

    z: np.ndarray
    w: np.ndarray
    z_avg: np.ndarray
    w_avg: np.ndarray
    c: float
    L: float
    mu: float
    x0: np.ndarray
    eps: float

    @classmethod
    def zeros(cls, model, mu, eps, L0=1.0):
        m, n = model.yr.shape[0], model.N
        return cls(np.zeros(m), np.zeros(3 * n), np.zeros(m), np.zeros(3 * n),
                   1.0, L0, mu, np.zeros(2 * n), eps)


def eps_for(measurement, snapshots):
    """Finite-sample covariance error scale ``trace(R) / sqrt(T)``."""
    return float(np.real(np.trace(measurement.sample_cov))) / np.sqrt(snapshots)


class SdcoProblem:
    def __init__(self, model):
        self.model = model
        self.C = constraint_matrix(model.N, model.r)
        self.CT = self.C.T.tocsr()

    def inner_x(self, z, w, mu, x0):
        """Minimiser of the smoothed Lagrangian: ``GST(x0 - (Re(G^H z) + C^T w)/mu, 1/mu)``."""
        v = x0 - (self.model.Gr.T @ z + self.CT @ w) / mu
        return group_soft_threshold(v, 1.0 / mu)

    def g_sm(self, z, w, mu, x0):
        """Smooth part of the negated dual, its gradient and the inner minimiser."""
        x = self.inner_x(z, w, mu, x0)
        res = self.model.yr - self.model.Gr @ x
        cx = self.C @ x
        d = x - x0
        value = -l21_norm(x) - 0.5 * mu * (d @ d) + z @ res - w @ cx
        return float(value), res, -cx, x

    def dual_value(self, z, w, mu, x0, eps):
        """Smoothed dual objective ``g_mu(z, w)`` (to be maximised)."""
        return -(self.g_sm(z, w, mu, x0)[0] + eps * np.linalg.norm(z))

    def primal_value(self, x, mu, x0):
        d = x - x0
        return l21_norm(x) + 0.5 * mu * (d @ d)


def sdco_step(state, problem, shrink=PROX_EXACT, gamma=0.5):
    """One accelerated step; returns ``(new_state, x_avg, g_sm(avg))``.

    The prox step uses step ``1 / (c L)`` from the proximal sequence and the
    gradient at the interpolated point; ``L`` doubles until the quadratic
    upper bound holds between the interpolated and the new averaged point.
    """
    c, L, mu, x0, eps = state.c, state.L, state.mu, state.x0, state.eps
    yz = (1 - c) * state.z_avg + c * state.z
    yw = (1 - c) * state.w_avg + c * state.w
    g_y, gz, gw, _ = problem.g_sm(yz, yw, mu, x0)
    factor = 2.0 if shrink == STRICT_PAPER else 1.0
    slack = 1e-12 * max(1.0, abs(g_y))
    while True:
        t = 1.0 / (c * L)
        z_new = l2_shrink(state.z - t * gz, factor * eps * t)
        w_new = np.maximum(0.0, state.w - t * gw)
        za = (1 - c) * state.z_avg + c * z_new
        wa = (1 - c) * state.w_avg + c * w_new
        g_a, _, _, x_a = problem.g_sm(za, wa, mu, x0)
        dz, dw = za - yz, wa - yw
        bound = g_y + gz @ dz + gw @ dw + 0.5 * L * (dz @ dz + dw @ dw)
        if g_a <= bound + slack:
            break
        L /= gamma
        if L > L_MAX:
            raise SolverError("sdco: Lipschitz estimate overflow")
    c_next = 2.0 / (1.0 + np.sqrt(1.0 + 4.0 / c**2))
    new = SdcoState(z_new, w_new, za, wa, c_next, L, mu, x0, eps)
    return new, x_a, g_a


def _run(problem, state, config, rec, callback, k0, shrink):
    model = problem.model
    prev = None
    converged = False
    x = problem.inner_x(state.z_avg, state.w_avg, state.mu, state.x0)
    k = 0
    for k in range(1, config.max_iters + 1):
        state, x, g_a = sdco_step(state, problem, shrink, config.gamma)
        check_finite("sdco", k0 + k, x, state.z, state.w)
        dual = -(g_a + state.eps * np.linalg.norm(state.z_avg))
        primal = problem.primal_value(x, state.mu, state.x0)
        infeas = max(float(np.linalg.norm(model.yr - model.Gr @ x)) - state.eps, 0.0)
        rec.add(objective=l21_norm(x), residual_primal=infeas,
                residual_dual=float(np.max(problem.C @ x, initial=0.0)),
                gap=primal - dual, mu1=state.mu, step=1.0 / state.L, dual_objective=dual)
        if callback is not None:
            callback(k0 + k, x)
        if prev is not None and abs(dual - prev) <= config.tol * max(1.0, abs(dual)):
            converged = True
            break
        prev = dual
    return state, x, k, converged


def _setup(measurement, dictionary, config):
    if config.eps is None:
        raise ValueError("SdcoConfig.eps must be set (see eps_for)")
    model = RealModel(dictionary, measurement.y)
    return SdcoProblem(model)


def solve_sdco(measurement, dictionary, config, callback=None, state=None):
    """Fixed-``mu`` smoothed dual conic solve.

    Traces: ``objective`` ``||x||_{2,1}``, ``residual_primal``
    ``max(||y - Gx|| - eps, 0)``, ``residual_dual`` ``max(Cx, 0)``, ``gap``
    smoothed primal minus smoothed dual, ``mu1`` the smoothing parameter,
    ``step`` ``1/L``, and ``dual_objective``.
    """
    problem = _setup(measurement, dictionary, config)
    if state is None:
        state = SdcoState.zeros(problem.model, config.mu, config.eps, config.L0)
    rec = _Recorder()
    state, x, k, converged = _run(problem, state, config, rec, callback, 0, config.shrink)
    return SolverResult(
        x_hat=x, iterations=k, converged=converged, traces=rec.arrays(),
        info={"solver": "sdco", "eps": config.eps, "mu": state.mu, "state": state},
    )


def continuation_mus(mu0, alpha, rounds):
    return [mu0 * alpha**j for j in range(rounds)]


def solve_sdco_continuation(measurement, dictionary, config, callback=None):
    """Continuation: ``config.rounds`` solves with ``mu`` multiplied by ``alpha``.

    Each round warm-starts the dual pair, restarts the acceleration weight and
    moves the prox-centre to the previous round's estimate.
    """
    problem = _setup(measurement, dictionary, config)
    state = SdcoState.zeros(problem.model, config.mu, config.eps, config.L0)
    rec = _Recorder()
    total = 0
    converged = False
    x = state.x0
    mus = continuation_mus(config.mu, config.alpha, config.rounds)
    for j, mu in enumerate(mus):
        if j > 0:
            state = replace(state, mu=mu, x0=x, c=1.0)
        state, x, k, converged = _run(problem, state, config, rec, callback, total, config.shrink)
        total += k
    return SolverResult(
        x_hat=x, iterations=total, converged=converged, traces=rec.arrays(),
        info={"solver": "sdco-ct", "eps": config.eps, "mus": mus, "state": state},
    )
