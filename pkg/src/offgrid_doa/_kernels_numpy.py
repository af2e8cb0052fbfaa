"""Vectorised numpy implementations of the per-group kernels.

Vectors are real, of length ``2N``; group ``i`` is the pair ``(x[i], x[i+N])``.
"""
import numpy as np


def group_norms(x):
    n = x.shape[0] // 2
    return np.hypot(x[:n], x[n:])


def project_feasible(v, r, s_max):
    n = v.shape[0] // 2
    vs, vp = v[:n], v[n:]
    avp = np.abs(vp)
    t = np.maximum((vs + r * avp) / (1.0 + r * r), 0.0)
    inside = (vs >= 0.0) & (avp <= r * vs)
    s = np.where(inside, vs, t)
    p = np.where(inside, vp, r * np.sign(vp) * t)
    over = s > s_max
    if np.any(over):
        lim = r * s_max
        s = np.where(over, s_max, s)
        p = np.where(over, np.clip(vp, -lim, lim), p)
    return np.concatenate((s, p))


def proj_group_l2_ball(a):
    n = a.shape[0] // 2
    nrm = np.hypot(a[:n], a[n:])
    scale = 1.0 / np.maximum(nrm, 1.0)
    return a * np.concatenate((scale, scale))


def group_soft_threshold(x, t):
    n = x.shape[0] // 2
    nrm = np.hypot(x[:n], x[n:])
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(nrm > t, 1.0 - t / nrm, 0.0)
    return x * np.concatenate((scale, scale))


def smoothed_l2(x, eta, mu):
    u = proj_group_l2_ball((eta / mu) * x)
    value = eta * np.dot(x, u) - 0.5 * mu * np.dot(u, u)
    return value, eta * u


def smoothed_l1(x, eta, mu):
    n = x.shape[0] // 2
    nu = np.hypot(x[:n], x[n:])
    u = np.clip((eta / mu) * nu, -1.0, 1.0)
    value = eta * np.dot(nu, u) - 0.5 * mu * np.dot(u, u)
    grad = np.zeros_like(x)
    grad[:n] = eta * u
    return value, grad
