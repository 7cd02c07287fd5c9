"""Run configuration: a TOML file validated into the library's dataclasses.

Grammar (version 1)::

    config_version = 1
    method = "scattering"          # scattering | pfa | ema | lifshitz

    [geometry]                      # required; lengths in nm
    p = 350.0
    w = 130.0
    h = 400.0

    [material]                      # optional; eV
    plasma_frequency = 8.39
    dissipation_rate = 0.0434
    kind = "drude"                  # drude | plasma

    [environment]
    temperature = 300.0             # K

    [probe]
    R = 151.7                       # um

    [numerics]                      # any NumericsConfig field, N = truncation order
    N = 10
    adaptive = true                 # raise N until the N -> N+2 step is < 0.5%

    [distances]                     # nm
    start = 200.0
    stop = 1000.0
    count = 9
    spacing = "linear"              # linear | log

    [analysis]                      # used by the smooth subcommand
    n_short = 10
    n_long = 35
    d_breakpoint = 300.0
    d_max = 1000.0
    distance_offset = 0.0
    error_mode = "linear"           # linear | quadrature

Unknown keys and missing required keys raise :class:`ConfigError` naming the
dotted field, e.g. ``geometry.h``.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .analysis import BinSchedule
from .materials import Environment, MaterialKind, MaterialModel
from .modal import GratingGeometry
from .numerics import DerivativeScheme, NumericsConfig
from .pfa import SphereProbe

CONFIG_VERSION = 1
METHODS = ("scattering", "pfa", "ema", "lifshitz")


class ConfigError(ValueError):
    """Invalid configuration; ``field`` is the dotted name of the culprit."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class DistanceGrid:
    start: float = 200.0
    stop: float = 1000.0
    count: int = 9
    spacing: str = "linear"

    def __post_init__(self):
        if not self.start > 0:
            raise ConfigError("distances.start", "must be > 0")
        if not self.stop >= self.start:
            raise ConfigError("distances.stop", "must be >= start")
        if self.count < 1 or (self.count == 1 and self.stop != self.start):
            raise ConfigError("distances.count", "must be >= 1 (and 1 only when start == stop)")
        if self.spacing not in ("linear", "log"):
            raise ConfigError("distances.spacing", "must be 'linear' or 'log'")

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([float(self.start)])
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class AnalysisConfig:
    schedule: BinSchedule = BinSchedule()
    distance_offset: float = 0.0
    error_mode: str = "linear"


@dataclass(frozen=True)
class RunConfig:
    geometry: GratingGeometry = GratingGeometry()
    material: MaterialModel = MaterialModel()
    environment: Environment = Environment()
    probe: SphereProbe = SphereProbe()
    numerics: NumericsConfig = NumericsConfig()
    distances: DistanceGrid = DistanceGrid()
    method: str = "scattering"
    adaptive: bool = True
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)

    def to_dict(self) -> dict:
        """Plain, JSON-serialisable view (used for hashing and manifests)."""
        def conv(obj):
            if dataclasses.is_dataclass(obj):
                return {f.name: conv(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
            if hasattr(obj, "value") and isinstance(obj, (MaterialKind, DerivativeScheme)):
                return obj.value
            return obj
        return conv(self)

    def digest(self) -> str:
        """SHA-256 of the resolved configuration, ignoring the thread count."""
        d = self.to_dict()
        d["numerics"].pop("threads", None)
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()


_NUMERIC_ALIASES = {"N": "truncation_N"}
_SECTIONS = {
    "config_version": None,
    "method": None,
    "geometry": ("p", "w", "h"),
    "material": ("plasma_frequency", "dissipation_rate", "kind"),
    "environment": ("temperature",),
    "probe": ("R",),
    "numerics": None,
    "distances": ("start", "stop", "count", "spacing"),
    "analysis": ("n_short", "n_long", "d_breakpoint", "d_max", "distance_offset", "error_mode"),
}


def _take(section: dict, prefix: str, allowed, required=()):
    for key in section:
        if key not in allowed:
            raise ConfigError(f"{prefix}.{key}", "unknown field")
    for key in required:
        if key not in section:
            raise ConfigError(f"{prefix}.{key}", "missing required field")
    return section


def _build(name: str, factory, **kwargs):
    try:
        return factory(**kwargs)
    except (ValueError, TypeError) as exc:
        msg = str(exc)
        key = next((k for k in kwargs if k in msg), None)
        raise ConfigError(f"{name}.{key}" if key else name, msg) from None


def _get(section: dict, prefix: str, key: str, default, kind=float):
    """Typed field lookup; booleans are never accepted as numbers."""
    if key not in section:
        return default
    val = section[key]
    if kind is str:
        if not isinstance(val, str):
            raise ConfigError(f"{prefix}.{key}", "must be a string")
        return val
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{prefix}.{key}", "must be a number")
    if kind is int and val != int(val):
        raise ConfigError(f"{prefix}.{key}", "must be an integer")
    return kind(val)


def from_dict(data: dict, threads: int | None = None) -> RunConfig:
    """Validate a parsed TOML mapping into a :class:`RunConfig`."""
    for key in data:
        if key not in _SECTIONS:
            raise ConfigError(key, "unknown field")
    for key in _SECTIONS:
        if key in data and key not in ("config_version", "method") and not isinstance(data[key], dict):
            raise ConfigError(key, "must be a table")
    version = data.get("config_version", CONFIG_VERSION)
    if version != CONFIG_VERSION:
        raise ConfigError("config_version", f"unsupported version {version}")
    method = data.get("method", "scattering")
    if method not in METHODS:
        raise ConfigError("method", f"must be one of {', '.join(METHODS)}")

    if "geometry" not in data:
        raise ConfigError("geometry", "missing required section")
    geo = _take(data["geometry"], "geometry", _SECTIONS["geometry"], required=("p", "w", "h"))
    p, w, h = (_get(geo, "geometry", k, None) for k in ("p", "w", "h"))
    try:
        geometry = GratingGeometry(p, w, h)
    except ValueError as exc:
        msg = str(exc)
        raise ConfigError(msg.split()[0], msg.split(" ", 1)[1]) from None

    mat = _take(data.get("material", {}), "material", _SECTIONS["material"])
    kind = _get(mat, "material", "kind", "drude", str)
    if kind not in ("drude", "plasma"):
        raise ConfigError("material.kind", "must be 'drude' or 'plasma'")
    default_gamma = 0.0 if kind == "plasma" else MaterialModel().dissipation_rate
    material = _build("material", MaterialModel,
                      plasma_frequency=_get(mat, "material", "plasma_frequency", 8.39),
                      dissipation_rate=_get(mat, "material", "dissipation_rate", default_gamma),
                      kind=kind)

    envd = _take(data.get("environment", {}), "environment", _SECTIONS["environment"])
    environment = _build("environment", Environment,
                         temperature=_get(envd, "environment", "temperature", 300.0))

    prb = _take(data.get("probe", {}), "probe", _SECTIONS["probe"])
    try:
        probe = SphereProbe(_get(prb, "probe", "R", 151.7))
    except ValueError as exc:
        raise ConfigError("probe.R", str(exc)) from None

    numd = dict(data.get("numerics", {}))
    adaptive = numd.pop("adaptive", True)
    if not isinstance(adaptive, bool):
        raise ConfigError("numerics.adaptive", "must be true or false")
    num_fields = {f.name for f in dataclasses.fields(NumericsConfig)}
    kwargs = {}
    for key, val in numd.items():
        name = _NUMERIC_ALIASES.get(key, key)
        if name not in num_fields or name == "threads":
            raise ConfigError(f"numerics.{key}", "unknown field")
        kwargs[name] = val
    if threads is not None:
        kwargs["threads"] = threads
    try:
        numerics = NumericsConfig(**kwargs)
    except (ValueError, TypeError) as exc:
        msg = str(exc)
        bad = next((k for k in numd if _NUMERIC_ALIASES.get(k, k) in msg), None)
        raise ConfigError(f"numerics.{bad}" if bad else "numerics", msg) from None

    dist = _take(data.get("distances", {}), "distances", _SECTIONS["distances"])
    distances = DistanceGrid(_get(dist, "distances", "start", 200.0), _get(dist, "distances", "stop", 1000.0),
                             _get(dist, "distances", "count", 9, int),
                             _get(dist, "distances", "spacing", "linear", str))

    an = _take(data.get("analysis", {}), "analysis", _SECTIONS["analysis"])
    sched = _build("analysis", BinSchedule, n_short=_get(an, "analysis", "n_short", 10, int),
                   n_long=_get(an, "analysis", "n_long", 35, int),
                   d_breakpoint=_get(an, "analysis", "d_breakpoint", 300.0),
                   d_max=_get(an, "analysis", "d_max", 1000.0))
    mode = _get(an, "analysis", "error_mode", "linear", str)
    if mode not in ("linear", "quadrature"):
        raise ConfigError("analysis.error_mode", "must be 'linear' or 'quadrature'")
    analysis = AnalysisConfig(sched, _get(an, "analysis", "distance_offset", 0.0), mode)

    return RunConfig(geometry, material, environment, probe, numerics, distances, method,
                     adaptive, analysis)


def load_config(path, threads: int | None = None) -> RunConfig:
    """Read and validate a TOML configuration file."""
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("config", f"invalid TOML in {path}: {exc}") from None
    return from_dict(data, threads)


def default_config(threads: int | None = None) -> RunConfig:
    return from_dict({"geometry": {"p": 350.0, "w": 130.0, "h": 400.0}}, threads)
