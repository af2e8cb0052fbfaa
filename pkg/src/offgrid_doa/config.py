"""Experiment configuration: INI files with one section per solver.

Example::

    [experiment]
    thetas = 13.2220, 28.6022
    snr_db = 0, 2, 4
    trials = 20
    solvers = cadmm, aspg-l1, music

    [cadmm]
    rho = 1.0

    [aspg-l1]
    max_iters = 2000

    [music]

``[array]`` and ``[grid]`` are optional; every name in ``solvers`` must
have its own section (possibly empty). Solver keys are the fields of the
matching ``*Config`` dataclass, plus ``eta_scale`` / ``eps_scale`` which
scale the data-driven defaults of ``eta`` and ``eps``.
"""
import configparser
import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .array_model import B_LITERAL, B_PRODUCT, AngularGrid, ArrayGeometry
from .solvers import AspgConfig, CadmmConfig, EgtConfig, SdcoConfig


class ConfigError(ValueError):
    """The configuration text is malformed or inconsistent."""


# solver name -> (config class, fixed overrides, data-driven parameter)
SOLVERS = {
    "cadmm": (CadmmConfig, {}, "eta"),
    "aspg-l1": (AspgConfig, {"variant": "l1"}, "eta"),
    "aspg-l2": (AspgConfig, {"variant": "l2"}, "eta"),
    "egt": (EgtConfig, {}, "eta"),
    "sdco": (SdcoConfig, {}, "eps"),
    "sdco-ct": (SdcoConfig, {}, "eps"),
    "music": (None, {}, None),
}

DEFAULT_SOLVERS = ("cadmm", "aspg-l1", "aspg-l2", "egt", "sdco-ct", "music")

# Iteration budgets for the desk sweep (the dataclass defaults are per-call
# defaults; a sweep needs a fixed, affordable budget per run).
DESK_SOLVER_DEFAULTS = {
    "cadmm": {"max_iters": 5000},
    "aspg-l1": {"max_iters": 2000},
    "aspg-l2": {"max_iters": 2000},
    "egt": {"max_iters": 1000},
    "sdco": {"max_iters": 4000},
    "sdco-ct": {"max_iters": 500},
    "music": {},
}


@dataclass(frozen=True)
class SolverSpec:
    """One enabled solver: its name, fixed parameters and default scales.

    ``params`` holds everything except the data-driven ``eta`` / ``eps``,
    which are filled in per measurement unless fixed explicitly.
    """

    name: str
    params: dict = field(default_factory=dict)
    scale: float = 1.0

    @property
    def config_class(self):
        return SOLVERS[self.name][0]

    @property
    def data_param(self):
        return SOLVERS[self.name][2]

    def build(self, eta=None, eps=None):
        """Instantiate the solver's config dataclass for one measurement."""
        cls, fixed, data = SOLVERS[self.name]
        if cls is None:
            return None
        kw = dict(self.params)
        kw.update(fixed)
        if data == "eta" and "eta" not in kw:
            kw["eta"] = self.scale * eta
        if data == "eps" and "eps" not in kw:
            kw["eps"] = self.scale * eps
        return cls(**kw)


@dataclass(frozen=True)
class ExperimentConfig:
    thetas: tuple = (13.2220, 28.6022)
    snr_list: tuple = (-2.0, 0.0, 2.0, 4.0, 6.0)
    trials: int = 20
    full_trials: int = 100
    snapshots: int = 100
    noise_variance: float = 1.0
    base_seed: int = 0
    output_dir: str = "results"
    workers: int = 1
    trace_trials: int = 1
    geometry: ArrayGeometry = field(default_factory=lambda: ArrayGeometry.ula(8))
    grid: AngularGrid = field(default_factory=AngularGrid.default)
    b_mode: str = B_PRODUCT
    solvers: tuple = ()

    def __post_init__(self):
        if self.trials < 1 or self.full_trials < 1:
            raise ConfigError("trials must be at least 1")
        if not self.snr_list:
            raise ConfigError("snr_db must list at least one value")
        if not self.solvers:
            raise ConfigError("no solvers enabled")
        if self.snapshots < 1:
            raise ConfigError("snapshots must be at least 1")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.trace_trials < 0:
            raise ConfigError("trace_trials must be non-negative")
        if not 0 <= self.base_seed < 2**64:
            raise ConfigError("base_seed must be an unsigned 64-bit integer")
        if self.b_mode not in (B_LITERAL, B_PRODUCT):
            raise ConfigError(f"unknown b_mode {self.b_mode!r}")
        names = [s.name for s in self.solvers]
        if len(set(names)) != len(names):
            raise ConfigError("solver listed twice")

    @property
    def K(self):
        return len(self.thetas)

    def solver(self, name):
        for s in self.solvers:
            if s.name == name:
                return s
        raise KeyError(name)

    def with_overrides(self, **kw):
        try:
            return dataclasses.replace(self, **kw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc


def _floats(text, key):
    try:
        vals = tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"{key}: expected a comma-separated list of numbers") from None
    if not vals:
        raise ConfigError(f"{key}: empty list")
    return vals


def _convert(cls, key, text):
    """Parse ``text`` with the type implied by the dataclass default."""
    fields = {f.name: f for f in dataclasses.fields(cls)}
    default = fields[key].default
    text = text.strip()
    if text.lower() in ("none", ""):
        return None
    if isinstance(default, bool):
        if text.lower() in ("1", "true", "yes", "on"):
            return True
        if text.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {text!r}")
    if isinstance(default, int):
        try:
            return int(text)
        except ValueError:
            raise ConfigError(f"{key}: expected an integer, got {text!r}") from None
    if isinstance(default, str):
        return text
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {text!r}") from None


def _solver_spec(name, section):
    if name not in SOLVERS:
        raise ConfigError(f"unknown solver {name!r} (known: {', '.join(SOLVERS)})")
    cls, fixed, data = SOLVERS[name]
    params = dict(DESK_SOLVER_DEFAULTS[name])
    scale = 1.0
    for key, text in section.items():
        if data is not None and key == f"{data}_scale":
            try:
                scale = float(text)
            except ValueError:
                raise ConfigError(f"[{name}] {key}: expected a number") from None
            if scale <= 0:
                raise ConfigError(f"[{name}] {key} must be positive")
            continue
        if cls is None or key in fixed or key not in {f.name for f in dataclasses.fields(cls)}:
            raise ConfigError(f"[{name}] unknown key {key!r}")
        params[key] = _convert(cls, key, text)
    spec = SolverSpec(name, params, scale)
    try:  # validate with placeholder data-driven values
        spec.build(eta=1.0, eps=1.0)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{name}] {exc}") from None
    return spec


def parse_config(text):
    """Parse INI text into an ``ExperimentConfig``; raises ``ConfigError``."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"unparseable config: {exc}") from None
    if not cp.has_section("experiment"):
        raise ConfigError("missing [experiment] section")
    ex = cp["experiment"]
    known = {"thetas", "snr_db", "trials", "full_trials", "snapshots", "noise_variance",
             "base_seed", "output_dir", "workers", "trace_trials", "solvers"}
    extra = set(ex) - known
    if extra:
        raise ConfigError(f"[experiment] unknown keys: {', '.join(sorted(extra))}")

    def get(key, conv, default):
        if key not in ex:
            return default
        try:
            return conv(ex[key])
        except ValueError:
            raise ConfigError(f"[experiment] {key}: bad value {ex[key]!r}") from None

    kw = {}
    if "thetas" in ex:
        kw["thetas"] = _floats(ex["thetas"], "thetas")
    if "snr_db" in ex:
        kw["snr_list"] = _floats(ex["snr_db"], "snr_db")
    for key, conv in (("trials", int), ("full_trials", int), ("snapshots", int),
                      ("noise_variance", float), ("base_seed", int), ("workers", int),
                      ("trace_trials", int), ("output_dir", str)):
        if key in ex:
            kw[key] = get(key, conv, None)

    if cp.has_section("array"):
        arr = cp["array"]
        if set(arr) - {"sensors", "spacing"}:
            raise ConfigError("[array] accepts only sensors and spacing")
        try:
            kw["geometry"] = ArrayGeometry.ula(int(arr.get("sensors", "8")),
                                               float(arr.get("spacing", "0.5")))
        except ValueError as exc:
            raise ConfigError(f"[array] {exc}") from None
    if cp.has_section("grid"):
        g = cp["grid"]
        if set(g) - {"start", "spacing", "size", "b_mode"}:
            raise ConfigError("[grid] accepts only start, spacing, size and b_mode")
        try:
            kw["grid"] = AngularGrid(float(g.get("start", "-90")), float(g.get("spacing", "0.5")),
                                     int(g.get("size", "360")))
        except ValueError as exc:
            raise ConfigError(f"[grid] {exc}") from None
        if "b_mode" in g:
            kw["b_mode"] = g["b_mode"].strip()

    names = [n.strip() for n in ex.get("solvers", ",".join(DEFAULT_SOLVERS)).split(",") if n.strip()]
    solvers = []
    for name in names:
        if not cp.has_section(name):
            raise ConfigError(f"solver {name!r} has no [{name}] section")
        solvers.append(_solver_spec(name, cp[name]))
    orphans = set(cp.sections()) - {"experiment", "array", "grid"} - set(names)
    if orphans:
        raise ConfigError(f"sections for solvers not listed in 'solvers': {', '.join(sorted(orphans))}")
    kw["solvers"] = tuple(solvers)
    try:
        cfg = ExperimentConfig(**kw)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    if np.any(np.abs(cfg.thetas) >= 90):
        raise ConfigError("thetas must lie strictly inside (-90, 90)")
    return cfg


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except UnicodeDecodeError:
        raise ConfigError(f"config {path} is not valid UTF-8") from None
    return parse_config(text)


DESK_CONFIG = """\
# Desk-scale reproduction: M = 8 half-wavelength ULA, two off-grid sources,
# 0.5 degree grid over [-90, 90), T = 100 snapshots.
[experiment]
thetas = 13.2220, 28.6022
snr_db = -2, 0, 2, 4, 6
trials = 20
full_trials = 100
snapshots = 100
noise_variance = 1.0
base_seed = 0
output_dir = results
workers = 1
trace_trials = 1
solvers = cadmm, aspg-l1, aspg-l2, egt, sdco-ct, music

[array]
sensors = 8
spacing = 0.5

[grid]
start = -90
spacing = 0.5
size = 360
b_mode = product

[cadmm]
rho = 1.0
max_iters = 5000

[aspg-l1]
mu = 1e-8
max_iters = 2000

[aspg-l2]
mu = 1e-8
max_iters = 2000

[egt]
domain = box
max_iters = 1000

[sdco-ct]
shrink = prox_exact
rounds = 8
alpha = 0.5
max_iters = 500

[music]
"""


def desk_config():
    return parse_config(DESK_CONFIG)
