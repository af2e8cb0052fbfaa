"""Projections, proximal operators and smoothed group penalties.

The real unknown ``x = (s, p)`` has length ``2N``; group ``i`` collects the
indices ``{i, i + N}``. All functions here take and return plain float64
arrays laid out that way.
"""
import warnings
from dataclasses import dataclass

import numpy as np

from . import _backend

_k = _backend.kernels()

L1 = "l1"
L2 = "l2"


def _real(x):
    return np.ascontiguousarray(x, dtype=np.float64)


def _check_even(x):
    if x.ndim != 1 or x.shape[0] % 2:
        raise ValueError(f"grouped vector must be 1-D with even length, got shape {x.shape}")


def split(x):
    """Views ``(s, p)`` of a grouped vector."""
    n = x.shape[0] // 2
    return x[:n], x[n:]


def group_norms(x):
    x = _real(x)
    _check_even(x)
    return _k.group_norms(x)


def l21_norm(x):
    """Sum of group l2 norms, ``||x||_{2,1}``."""
    return float(np.sum(group_norms(x)))


def project_feasible(v, r, s_max=None):
    """Euclidean projection onto ``{s >= 0, |p| <= r s}`` (optionally ``s <= s_max``).

    Each group is projected onto the 2-D cone ``|p| <= r s``; when ``s_max``
    is given the cone is truncated to the triangle with apex at the origin.
    """
    if r <= 0:
        raise ValueError("r must be positive")
    v = _real(v)
    _check_even(v)
    cap = np.inf if s_max is None else float(s_max)
    return _k.project_feasible(v, float(r), cap)


def project_feasible_capped(v, r, total):
    """Projection onto ``{s >= 0, |p| <= r s, sum(s) <= total}``.

    KKT: the answer is the cone projection of ``(v_s - lam, v_p)`` for the
    smallest ``lam >= 0`` meeting the cap. ``sum(s)`` is piecewise linear in
    ``lam`` with two breakpoints per group, so ``lam`` is found exactly by
    sorting them.
    """
    if r <= 0 or total <= 0:
        raise ValueError("r and total must be positive")
    v = _real(v)
    _check_even(v)
    x = _k.project_feasible(v, float(r), np.inf)
    n = v.shape[0] // 2
    if np.sum(x[:n]) <= total:
        return x
    vs, avp = v[:n], np.abs(v[n:])
    k = 1.0 + r * r
    b = np.concatenate((vs - avp / r, vs + r * avp))
    d = np.concatenate((np.full(n, r * r / k), np.full(n, 1.0 / k)))
    order = np.argsort(b, kind="stable")
    b, d = b[order], d[order]
    # slope of sum(s) just right of each breakpoint, and its value there
    slope = -n + np.cumsum(d)
    w = vs - b[0]
    f0 = float(np.sum(np.where(w >= avp / r, w, np.maximum((w + r * avp) / k, 0.0))))
    f = f0 + np.concatenate(([0.0], np.cumsum(slope[:-1] * np.diff(b))))
    j = int(np.argmax(f <= total))
    if j == 0:
        lam = b[0] + (f0 - total) / n
    else:
        lam = b[j - 1] + (total - f[j - 1]) / slope[j - 1]
    lam = max(lam, 0.0)
    out = _k.project_feasible(np.concatenate((vs - lam, v[n:])), float(r), np.inf)
    return out


def proj_group_l2_ball(a):
    """Scale every group onto the unit l2 ball (groups inside are untouched)."""
    a = _real(a)
    _check_even(a)
    return _k.proj_group_l2_ball(a)


def proj_linf_ball(a):
    return np.clip(_real(a), -1.0, 1.0)


def proj_l2_ball(v, radius=1.0):
    """Projection of a (possibly complex) vector onto the l2 ball."""
    nrm = np.linalg.norm(v)
    if nrm <= radius:
        return np.array(v, copy=True)
    return v * (radius / nrm)


def group_soft_threshold(x, t):
    """Group soft-thresholding, the prox of ``t * ||.||_{2,1}``."""
    if t < 0:
        raise ValueError("threshold must be non-negative")
    x = _real(x)
    _check_even(x)
    if t == 0:
        return x.copy()
    return _k.group_soft_threshold(x, float(t))


def l2_shrink(x, t):
    """``max(1 - t/||x||, 0) * x``: the prox of ``t * ||.||_2``."""
    if t < 0:
        raise ValueError("threshold must be non-negative")
    nrm = np.linalg.norm(x)
    if nrm <= t:
        return np.zeros_like(x)
    return (1.0 - t / nrm) * x


@dataclass(frozen=True)
class SmoothedPenalty:
    """Nesterov-smoothed ``eta * ||x||_{2,1}`` with prox-function ``||u||^2 / 2``.

    ``variant="l2"`` smooths every group norm through the group-l2 dual ball;
    ``variant="l1"`` smooths the outer l1 norm of the group-norm vector
    through the l-infinity ball, and its gradient is returned with the
    ``p`` half set to zero.
    """

    eta: float
    mu: float
    variant: str = L2

    def __post_init__(self):
        if self.mu <= 0:
            raise ValueError("mu must be positive")
        if self.eta < 0:
            raise ValueError("eta must be non-negative")
        if self.variant not in (L1, L2):
            raise ValueError(f"unknown variant {self.variant!r}")

    def value_grad(self, x):
        return smoothed_penalty_value_grad(x, self)

    def surrogate_value_grad(self, x):
        """A value whose exact gradient is the one ``value_grad`` returns.

        For ``l2`` this is ``value_grad`` itself. The zero-padded ``l1``
        gradient is the gradient of the smoothed ``eta * sum(s)``, which
        agrees with the group-norm version when ``p = 0``; a backtracking
        line search needs the two to be consistent.
        """
        if self.variant == L2:
            return self.value_grad(x)
        x = _real(x)
        _check_even(x)
        n = x.shape[0] // 2
        value, g = smoothed_l1_nu(x[:n], self.eta, self.mu)
        return value, np.concatenate((g, np.zeros(n)))

    def bias_bound(self, n_groups):
        """``mu * D``: the largest gap between the penalty and its smoothing."""
        return self.mu * 0.5 * n_groups


def smoothed_penalty_value_grad(x, pen):
    x = _real(x)
    _check_even(x)
    if pen.variant == L2:
        value, grad = _k.smoothed_l2(x, float(pen.eta), float(pen.mu))
    else:
        value, grad = _k.smoothed_l1(x, float(pen.eta), float(pen.mu))
    return float(value), grad


def smoothed_l1_nu(nu, eta, mu):
    """Smoothed ``eta * ||nu||_1`` and its gradient with respect to ``nu``."""
    if mu <= 0:
        raise ValueError("mu must be positive")
    nu = _real(nu)
    u = proj_linf_ball((eta / mu) * nu)
    return float(eta * nu @ u - 0.5 * mu * u @ u), eta * u


def operator_norm(A, max_iters=500, tol=1e-13, seed=0):
    """Spectral norm of ``A`` by power iteration on ``A^H A``.

    ``A`` may be a dense/sparse matrix or anything exposing ``matvec``,
    ``rmatvec`` and ``shape`` (e.g. a scipy ``LinearOperator``). Issues a
    ``RuntimeWarning`` when the Rayleigh quotient has not settled to ``tol``
    within ``max_iters`` iterations.
    """
    if hasattr(A, "matvec") and not hasattr(A, "toarray"):
        mv, rmv = A.matvec, A.rmatvec
    else:
        mv = lambda v: A @ v  # noqa: E731
        rmv = lambda v: A.conj().T @ v  # noqa: E731
    n = A.shape[1]
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    if np.issubdtype(np.dtype(getattr(A, "dtype", np.float64)), np.complexfloating):
        v = v + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iters):
        w = rmv(mv(v))
        lam_new = np.linalg.norm(w)
        if lam_new == 0.0:
            raise ValueError("operator_norm of a zero operator")
        v = w / lam_new
        if abs(lam_new - lam) <= tol * lam_new:
            return float(np.sqrt(lam_new))
        lam = lam_new
    warnings.warn(f"power iteration did not converge in {max_iters} iterations", RuntimeWarning)
    return float(np.sqrt(lam))
