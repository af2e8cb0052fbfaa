"""Loop kernels compiled with numba; same contracts as ``_kernels_numpy``."""
import math

import numpy as np
from numba import njit


@njit(cache=True)
def group_norms(x):
    n = x.shape[0] // 2
    out = np.empty(n)
    for i in range(n):
        out[i] = math.hypot(x[i], x[i + n])
    return out


@njit(cache=True)
def project_feasible(v, r, s_max):
    n = v.shape[0] // 2
    out = np.empty_like(v)
    denom = 1.0 + r * r
    for i in range(n):
        vs = v[i]
        vp = v[i + n]
        avp = abs(vp)
        if vs >= 0.0 and avp <= r * vs:
            s = vs
            p = vp
        else:
            s = (vs + r * avp) / denom
            if s <= 0.0:
                s = 0.0
                p = 0.0
            else:
                p = r * s if vp > 0.0 else (-r * s if vp < 0.0 else 0.0)
        if s > s_max:
            lim = r * s_max
            s = s_max
            p = min(max(vp, -lim), lim)
        out[i] = s
        out[i + n] = p
    return out


@njit(cache=True)
def proj_group_l2_ball(a):
    n = a.shape[0] // 2
    out = np.empty_like(a)
    for i in range(n):
        nrm = math.hypot(a[i], a[i + n])
        if nrm > 1.0:
            out[i] = a[i] / nrm
            out[i + n] = a[i + n] / nrm
        else:
            out[i] = a[i]
            out[i + n] = a[i + n]
    return out


@njit(cache=True)
def group_soft_threshold(x, t):
    n = x.shape[0] // 2
    out = np.empty_like(x)
    for i in range(n):
        nrm = math.hypot(x[i], x[i + n])
        if nrm > t:
            c = 1.0 - t / nrm
            out[i] = c * x[i]
            out[i + n] = c * x[i + n]
        else:
            out[i] = 0.0
            out[i + n] = 0.0
    return out


@njit(cache=True)
def smoothed_l2(x, eta, mu):
    n = x.shape[0] // 2
    grad = np.empty_like(x)
    k = eta / mu
    value = 0.0
    for i in range(n):
        a = k * x[i]
        b = k * x[i + n]
        nrm = math.hypot(a, b)
        if nrm > 1.0:
            a /= nrm
            b /= nrm
        value += eta * (x[i] * a + x[i + n] * b) - 0.5 * mu * (a * a + b * b)
        grad[i] = eta * a
        grad[i + n] = eta * b
    return value, grad


@njit(cache=True)
def smoothed_l1(x, eta, mu):
    n = x.shape[0] // 2
    grad = np.zeros_like(x)
    k = eta / mu
    value = 0.0
    for i in range(n):
        nu = math.hypot(x[i], x[i + n])
        u = min(k * nu, 1.0)
        value += eta * nu * u - 0.5 * mu * u * u
        grad[i] = eta * u
    return value, grad
