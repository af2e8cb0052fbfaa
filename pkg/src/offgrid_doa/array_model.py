"""Array geometry, angular grid and the off-grid covariance dictionary.

Angles are in degrees throughout. The derivative columns of ``B`` are taken
per degree, so an offset recovered as ``p_i / s_i`` is directly in degrees
and comparable with the grid half-spacing ``r``.
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

DEG = np.pi / 180.0

B_LITERAL = "literal"
B_PRODUCT = "product"


@dataclass(frozen=True, eq=False)
class ArrayGeometry:
    """Sensor positions along a line, in wavelengths."""

    sensor_positions: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.sensor_positions, dtype=float).ravel()
        if pos.size < 2:
            raise ValueError("need at least two sensors")
        if np.any(np.diff(pos) <= 0):
            raise ValueError("sensor positions must be strictly increasing")
        pos.setflags(write=False)
        object.__setattr__(self, "sensor_positions", pos)

    def __eq__(self, other):
        if not isinstance(other, ArrayGeometry):
            return NotImplemented
        return np.array_equal(self.sensor_positions, other.sensor_positions)

    def __hash__(self):
        return hash(self.sensor_positions.tobytes())

    @property
    def M(self):
        return self.sensor_positions.size

    @classmethod
    def ula(cls, M, spacing=0.5):
        return cls(np.arange(M) * spacing)


@dataclass(frozen=True)
class AngularGrid:
    """Uniform grid ``phi_i = start + i * spacing`` for ``i < N``; ``r = spacing / 2``."""

    start: float
    spacing: float
    N: int
    phi: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.spacing <= 0:
            raise ValueError("grid spacing must be positive")
        if self.N < 2:
            raise ValueError("grid needs at least two atoms")
        phi = self.start + self.spacing * np.arange(self.N)
        phi.setflags(write=False)
        object.__setattr__(self, "phi", phi)

    @property
    def r(self):
        return self.spacing / 2.0

    @classmethod
    def default(cls):
        """[-90, 90) in 0.5 degree steps: N = 360, r = 0.25."""
        return cls(-90.0, 0.5, 360)

    def nearest(self, theta):
        """Index of the grid atom closest to ``theta``."""
        i = int(np.rint((theta - self.start) / self.spacing))
        return min(max(i, 0), self.N - 1)


def steering_vector(geometry, theta):
    """``a(theta)_m = exp(-j 2 pi d_m sin(theta))``."""
    if not np.isfinite(theta):
        raise ValueError("theta must be finite")
    return np.exp(-2j * np.pi * geometry.sensor_positions * np.sin(theta * DEG))


def steering_matrix(geometry, thetas):
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    return np.exp(-2j * np.pi * np.outer(geometry.sensor_positions, np.sin(thetas * DEG)))


def steering_derivative(geometry, thetas):
    """Per-degree derivative of the steering vectors, one column per angle."""
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    a = steering_matrix(geometry, thetas)
    k = -2j * np.pi * DEG * np.outer(geometry.sensor_positions, np.cos(thetas * DEG))
    return k * a


def _kron_columns(u, v):
    # column i -> kron(u[:, i], v[:, i])
    m = u.shape[0]
    return (u[:, None, :] * v[None, :, :]).reshape(m * v.shape[0], u.shape[1])


def vectorize_covariance(R):
    """Column-major ``vec``: entry ``i + M*j`` is ``R[i, j]``."""
    R = np.asarray(R)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {R.shape}")
    return R.reshape(-1, order="F").copy()


@dataclass(frozen=True)
class Dictionary:
    """``G = [A, B]`` with ``A_i = conj(a_i) kron a_i`` and derivative columns ``B``."""

    A: np.ndarray
    B: np.ndarray
    grid: AngularGrid
    geometry: ArrayGeometry
    b_mode: str = B_PRODUCT
    G: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        G = np.hstack((self.A, self.B))
        G.setflags(write=False)
        object.__setattr__(self, "G", G)

    @property
    def N(self):
        return self.grid.N

    @property
    def r(self):
        return self.grid.r

    def matvec(self, x):
        """``G x`` for a real grouped vector ``x``."""
        return self.G @ x

    def rmatvec_real(self, v):
        """``Re(G^H v)``: adjoint of ``matvec`` for a real unknown."""
        return np.real(self.G.conj().T @ v)


def build_dictionary(geometry, grid, b_mode=B_PRODUCT):
    """Off-grid covariance dictionary.

    ``b_mode="literal"`` builds ``B_i = a'_i kron a'_i`` literally;
    ``b_mode="product"`` builds the first-order derivative of ``A_i``,
    ``conj(a'_i) kron a_i + conj(a_i) kron a'_i``.
    """
    a = steering_matrix(geometry, grid.phi)
    da = steering_derivative(geometry, grid.phi)
    A = _kron_columns(a.conj(), a)
    if b_mode == B_LITERAL:
        B = _kron_columns(da, da)
    elif b_mode == B_PRODUCT:
        B = _kron_columns(da.conj(), a) + _kron_columns(a.conj(), da)
    else:
        raise ValueError(f"unknown b_mode {b_mode!r}")
    A.setflags(write=False)
    B.setflags(write=False)
    return Dictionary(A, B, grid, geometry, b_mode)


def constraint_matrix(N, r):
    """Sparse ``C`` (3N x 2N) with ``C x <= 0`` iff ``s >= 0`` and ``|p| <= r s``.

    Row blocks: ``-s``, ``p - r s``, ``-p - r s``.
    """
    if N < 1 or r <= 0:
        raise ValueError("need N >= 1 and r > 0")
    eye = sp.identity(N, format="csr")
    zero = sp.csr_matrix((N, N))
    return sp.vstack(
        [sp.hstack([-eye, zero]), sp.hstack([-r * eye, eye]), sp.hstack([-r * eye, -eye])],
        format="csr",
    )


def is_feasible(x, r, atol=0.0):
    n = x.shape[0] // 2
    s, p = x[:n], x[n:]
    return bool(np.all(s >= -atol) and np.all(np.abs(p) <= r * s + atol))
