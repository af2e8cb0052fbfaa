"""Snapshot simulation, sample covariance and the measurement vector ``y``."""
from dataclasses import dataclass

import numpy as np

from .array_model import steering_matrix, vectorize_covariance


@dataclass(frozen=True)
class Scenario:
    true_thetas: tuple
    source_variances: tuple
    noise_variance: float = 1.0
    snapshots: int = 100
    seed: int = 0

    def __post_init__(self):
        th = tuple(float(t) for t in np.atleast_1d(self.true_thetas))
        var = tuple(float(v) for v in np.atleast_1d(self.source_variances))
        if len(th) < 1 or len(th) != len(var):
            raise ValueError("need K >= 1 angles with one variance each")
        if self.noise_variance < 0 or any(v < 0 for v in var):
            raise ValueError("variances must be non-negative")
        if self.snapshots < 1:
            raise ValueError("need at least one snapshot")
        object.__setattr__(self, "true_thetas", th)
        object.__setattr__(self, "source_variances", var)

    @property
    def K(self):
        return len(self.true_thetas)

    @classmethod
    def from_snr(cls, thetas, snr_db, snapshots=100, seed=0, noise_variance=1.0):
        """Equal-power sources, each at ``snr_db`` relative to the noise."""
        thetas = tuple(np.atleast_1d(thetas))
        power = noise_variance * 10.0 ** (snr_db / 10.0)
        return cls(thetas, (power,) * len(thetas), noise_variance, snapshots, seed)


@dataclass(frozen=True)
class Measurement:
    y: np.ndarray
    noise_floor: float
    sample_cov: np.ndarray


def derive_seed(base_seed, *indices):
    """Independent 64-bit seed for the cell ``indices`` of a sweep."""
    ss = np.random.SeedSequence([int(base_seed) & (2**64 - 1), *map(int, indices)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _circular_gaussian(rng, shape, variance):
    scale = np.sqrt(np.asarray(variance, dtype=float) / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def simulate_snapshots(scenario, geometry):
    """``M x T`` snapshots ``v(t) = sum_k s_k(t) a(theta_k) + n(t)``.

    Sources and noise are independent circular complex Gaussians.
    """
    rng = np.random.default_rng(scenario.seed)
    K, T, M = scenario.K, scenario.snapshots, geometry.M
    var = np.asarray(scenario.source_variances)[:, None]
    sources = _circular_gaussian(rng, (K, T), var)
    noise = _circular_gaussian(rng, (M, T), scenario.noise_variance)
    return steering_matrix(geometry, scenario.true_thetas) @ sources + noise


def exact_covariance(scenario, geometry):
    a = steering_matrix(geometry, scenario.true_thetas)
    R = (a * np.asarray(scenario.source_variances)) @ a.conj().T
    return R + scenario.noise_variance * np.eye(geometry.M)


def sample_covariance(snapshots):
    V = np.asarray(snapshots)
    if V.ndim != 2 or V.shape[1] == 0:
        raise ValueError("need a non-empty M x T snapshot matrix")
    R = V @ V.conj().T / V.shape[1]
    return 0.5 * (R + R.conj().T)


def assemble_measurement(R, rtol=1e-10):
    """Subtract the smallest-eigenvalue noise floor and vectorise."""
    R = np.asarray(R, dtype=complex)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise ValueError("covariance must be square")
    scale = max(np.max(np.abs(R)), 1.0)
    if np.max(np.abs(R - R.conj().T)) > rtol * scale:
        raise ValueError("covariance is not Hermitian")
    floor = max(float(np.linalg.eigvalsh(R)[0]), 0.0)
    y = vectorize_covariance(R)
    y[:: R.shape[0] + 1] -= floor
    return Measurement(y=y, noise_floor=floor, sample_cov=R)


def measure(scenario, geometry):
    """Simulate, estimate the covariance and assemble ``y`` in one call."""
    return assemble_measurement(sample_covariance(simulate_snapshots(scenario, geometry)))


def write_snapshots(path, snapshots):
    """Column-major dump, interleaved real/imag little-endian float64."""
    np.asarray(snapshots, dtype="<c16").ravel(order="F").tofile(path)


def read_snapshots(path, M):
    flat = np.fromfile(path, dtype="<c16")
    if flat.size % M:
        raise ValueError(f"file holds {flat.size} samples, not a multiple of M={M}")
    return flat.reshape((M, -1), order="F")
