"""Excessive-gap primal-dual method for ``||y - Gx|| + eta||x||_{2,1}`` over X.

Both the residual norm and the group penalty are written as maxima over
unit balls (``u1`` in the l2 ball of the residual space, ``u2`` in the
product of group-l2 balls). The primal is smoothed with ``mu2 ||u||^2/2``,
the dual with ``mu1 ||x||^2/2``; alternate steps shrink one of the two
parameters while keeping ``F_mu2(x) <= Phi_mu1(u)``.

The cone ``|p| <= r s`` is unbounded, so it is truncated to make the primal
diameter ``D1`` finite: either by a per-atom box ``s <= bound``
(``domain="box"``, the default) or by a cap on the total power
``sum(s) <= bound`` (``domain="cap"``). The box has ``D1 = N bound^2 (1 + r^2)``,
which makes the initial ``mu2`` so large that the dual variables stay
strictly inside their balls and the smoothed primal degenerates into a
ridge regression; the cap has ``D1 = bound^2 (1 + r^2)``.
"""
from dataclasses import dataclass

import numpy as np

from ..prox import l21_norm, proj_group_l2_ball, proj_l2_ball, project_feasible
from ..prox import project_feasible_capped
from ..prox import operator_norm
from ._common import RealModel, SolverError, SolverResult, _Recorder, check_finite

EGC_SLACK = 1e-9
BOX = "box"
CAP = "cap"


@dataclass(frozen=True)
class EgtConfig:
    """``bound`` defaults to ``trace(R)`` for the box and ``trace(R) / M`` for the cap."""

    eta: float = 0.1
    max_iters: int = 1000
    domain: str = BOX
    bound: float = None
    mu1_scale: float = 2.0

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.mu1_scale < 1:
            raise ValueError("mu1_scale below 1 breaks the starting-point condition")
        if self.domain not in (BOX, CAP):
            raise ValueError(f"unknown domain {self.domain!r}")
        if self.bound is not None and self.bound <= 0:
            raise ValueError("bound must be positive")


class EgtProblem:
    """Smoothed primal/dual pieces for one measurement."""

    def __init__(self, model, eta, bound, domain=BOX):
        self.model = model
        self.eta = eta
        self.r = model.r
        self.bound = float(bound)
        self.domain = domain
        N = model.N
        self.D1 = self.bound**2 * (1.0 + self.r**2) * (N if domain == BOX else 1)
        self.D2 = 1.0
        self.D3 = float(N)
        self.norm = np.sqrt(operator_norm(model.Gr) ** 2 + eta**2)

    # primal side
    def u_of_x(self, x, mu2):
        u1 = proj_l2_ball(self.model.residual(x) / mu2)
        u2 = proj_group_l2_ball(self.eta * x / mu2)
        return u1, u2

    def primal_smoothed(self, x, mu2):
        """``(F_mu2(x), grad)``."""
        res = self.model.residual(x)
        u1 = proj_l2_ball(res / mu2)
        u2 = proj_group_l2_ball(self.eta * x / mu2)
        value = res @ u1 + self.eta * (x @ u2) - 0.5 * mu2 * (u1 @ u1 + u2 @ u2)
        grad = self.model.Gr.T @ u1 + self.eta * u2
        return float(value), grad

    def primal(self, x):
        return float(np.linalg.norm(self.model.residual(x))) + self.eta * l21_norm(x)

    def project_x(self, v):
        if self.domain == BOX:
            return project_feasible(v, self.r, self.bound)
        return project_feasible_capped(v, self.r, self.bound)

    def grad_map_primal(self, x, mu2):
        L1 = self.norm**2 / mu2
        return self.project_x(x - self.primal_smoothed(x, mu2)[1] / L1)

    # dual side
    def _c(self, u1, u2):
        return self.model.Gr.T @ u1 + self.eta * u2

    def x_of_u(self, u1, u2, mu1):
        return self.project_x(-self._c(u1, u2) / mu1)

    def dual_smoothed(self, u1, u2, mu1):
        """``(Phi_mu1(u), (grad_u1, grad_u2))``."""
        x = self.x_of_u(u1, u2, mu1)
        value = -(self.model.yr @ u1) + x @ self._c(u1, u2) + 0.5 * mu1 * (x @ x)
        return float(value), (self.model.residual(x), self.eta * x)

    def dual(self, u1, u2):
        """Unsmoothed dual: the inner minimum over the truncated cone is closed form."""
        c = self._c(u1, u2)
        n = self.model.N
        per_group = np.minimum(0.0, c[:n] - self.r * np.abs(c[n:]))
        inner = per_group.sum() if self.domain == BOX else per_group.min()
        return float(-(self.model.yr @ u1) + self.bound * inner)

    def project_u(self, u1, u2):
        return proj_l2_ball(u1), proj_group_l2_ball(u2)

    def grad_map_dual(self, u1, u2, mu1):
        L2 = self.norm**2 / mu1
        g1, g2 = self.dual_smoothed(u1, u2, mu1)[1]
        return self.project_u(u1 + g1 / L2, u2 + g2 / L2)


def default_bound(measurement, domain=CAP):
    """``trace(R)`` bounds any single source power; divided by ``M`` it bounds their sum."""
    R = measurement.sample_cov
    total = float(np.real(np.trace(R)))
    return total if domain == BOX else total / R.shape[0]


def initial_mus(problem, mu1_scale=2.0):
    root = np.sqrt((problem.D2 + problem.D3) / problem.D1)
    return mu1_scale * problem.norm * root, problem.norm / root


def solve_egt(measurement, dictionary, config=EgtConfig(), callback=None):
    """Run the excessive-gap method from ``x0 = 0``.

    Traces per iteration ``k >= 1`` (the starting pair is in
    ``info["initial"]``): ``objective``
    ``F(x_k)``, ``gap`` ``F(x_k) - Phi(u_k)``, ``mu1``, ``mu2`` and
    ``egc`` ``Phi_mu1(u_k) - F_mu2(x_k)`` (non-negative while the
    excessive-gap condition holds).
    """
    model = RealModel(dictionary, measurement.y)
    bound = default_bound(measurement, config.domain) if config.bound is None else config.bound
    pb = EgtProblem(model, config.eta, bound, config.domain)
    mu1, mu2 = initial_mus(pb, config.mu1_scale)

    x0 = np.zeros(2 * model.N)
    x_bar = pb.grad_map_primal(x0, mu2)
    u1, u2 = pb.u_of_x(x0, mu2)

    rec = _Recorder()
    initial = {}

    def record(k):
        Fs = pb.primal_smoothed(x_bar, mu2)[0]
        Ps = pb.dual_smoothed(u1, u2, mu1)[0]
        egc = Ps - Fs
        if egc < -EGC_SLACK * max(1.0, abs(Fs)):
            raise SolverError(f"egt: excessive gap condition violated at iteration {k} (by {-egc:.3e})")
        F = pb.primal(x_bar)
        row = dict(objective=F, gap=F - pb.dual(u1, u2), mu1=mu1, mu2=mu2, egc=egc)
        if k == 0:
            initial.update(row)
        else:
            rec.add(**row)

    record(0)
    k = 0
    for k in range(config.max_iters):
        tau = 2.0 / (k + 3.0)
        if k % 2 == 0:
            x_hat = (1 - tau) * x_bar + tau * pb.x_of_u(u1, u2, mu1)
            v1, v2 = pb.u_of_x(x_hat, mu2)
            u1 = (1 - tau) * u1 + tau * v1
            u2 = (1 - tau) * u2 + tau * v2
            x_bar = pb.grad_map_primal(x_hat, mu2)
            mu1 *= 1 - tau
        else:
            v1, v2 = pb.u_of_x(x_bar, mu2)
            h1 = (1 - tau) * u1 + tau * v1
            h2 = (1 - tau) * u2 + tau * v2
            x_bar = (1 - tau) * x_bar + tau * pb.x_of_u(h1, h2, mu1)
            u1, u2 = pb.grad_map_dual(h1, h2, mu1)
            mu2 *= 1 - tau
        check_finite("egt", k + 1, x_bar, u1, u2)
        record(k + 1)
        if callback is not None:
            callback(k + 1, x_bar)

    traces = rec.arrays()
    return SolverResult(
        x_hat=x_bar, iterations=k + 1, converged=True, traces=traces,
        info={"solver": "egt", "eta": config.eta, "domain": config.domain, "bound": bound, "D1": pb.D1,
              "norm": pb.norm, "u1": u1, "u2": u2, "initial": initial},
    )
