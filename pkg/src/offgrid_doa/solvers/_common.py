from dataclasses import dataclass, field

import numpy as np

from ..prox import l21_norm

TRACE_COLUMNS = ("objective", "residual_primal", "residual_dual", "gap", "mu1", "mu2", "step")


class SolverError(RuntimeError):
    """A solver aborted; the message carries the diagnostic."""


@dataclass
class SolverResult:
    """Final iterate plus per-iteration traces.

    ``traces`` maps column names (see ``TRACE_COLUMNS``, plus solver-specific
    extras) to arrays of length ``iterations``. Columns a solver does not
    produce are absent.
    """

    x_hat: np.ndarray
    iterations: int
    converged: bool
    traces: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)

    @property
    def objective_trace(self):
        return self.traces.get("objective")

    @property
    def residual_trace(self):
        return self.traces.get("residual_primal"), self.traces.get("residual_dual")

    @property
    def gap_trace(self):
        return self.traces.get("gap")


class _Recorder:
    def __init__(self):
        self._rows = {}

    def add(self, **values):
        for key, val in values.items():
            self._rows.setdefault(key, []).append(float(val))

    def arrays(self):
        return {k: np.asarray(v) for k, v in self._rows.items()}


class RealModel:
    """Real-stacked view of ``y ~ G x`` for a real unknown ``x``.

    ``Gr = [Re G; Im G]`` and ``yr = [Re y; Im y]`` so that
    ``||y - G x|| = ||yr - Gr x||`` and ``Re(G^H v) = Gr^T vr``.
    """

    def __init__(self, dictionary, y):
        G = dictionary.G
        self.Gr = np.ascontiguousarray(np.vstack((G.real, G.imag)))
        y = np.asarray(y)
        self.yr = np.concatenate((y.real, y.imag))
        self.N = dictionary.N
        self.r = dictionary.r
        self.dictionary = dictionary

    def residual(self, x):
        return self.Gr @ x - self.yr

    def f(self, x):
        res = self.residual(x)
        return 0.5 * float(res @ res)

    def objective(self, x, eta):
        """``0.5 ||y - Gx||^2 + eta ||x||_{2,1}`` (indicator not included)."""
        return self.f(x) + eta * l21_norm(x)

    def grad_f(self, x):
        return self.Gr.T @ self.residual(x)


def check_finite(name, k, *values):
    for v in values:
        if not np.all(np.isfinite(v)):
            raise SolverError(f"{name}: non-finite iterate at iteration {k}")
