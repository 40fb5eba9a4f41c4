"""Flat ``key = value`` experiment configs; repeated keys build lists."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields

from .errors import ConfigurationError

EXPERIMENTS = ("nodal", "rellich", "bochner", "psido", "all")


@dataclass
class ExperimentConfig:
    surface: str = "torus"
    experiment: str = "all"
    selectors: list = field(default_factory=lambda: [325])
    parity: str = "even"
    seeds: list = field(default_factory=lambda: list(range(20)))
    m_values: list = field(default_factory=lambda: [1, 2, 3])
    window_center: float = 0.5
    window_width: float = 0.8
    resolutions: list = field(default_factory=lambda: [1024])
    # nodal
    nodal_kmax: int = 5
    sphere_lmax: int = 10
    euler_count: int = 100
    growth_levels: list = field(default_factory=lambda: [25, 85, 325, 1105, 5525])
    # odd-case level and moments
    odd_selector: int = 5525
    odd_m_values: list = field(default_factory=lambda: [0, 1, 2])
    # detector
    bump_traces: int = 50
    psd_tol: float = 1e-3
    detector_min_hits: int = 19
    # psido
    quasimode_levels: list = field(default_factory=lambda: [85, 325, 1105, 5525])
    # tolerances
    tol_limit: float = 0.15
    tol_control: float = 0.30
    mass_floor: float = 0.85
    psido_deviation: float = 0.1
    reduction_exponent: float = -0.7
    exact_reduction: float = 1e-12
    growth_slack: float = 0.1
    output: str = "runs/latest"

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigurationError(f"experiment must be one of {EXPERIMENTS}, got {self.experiment!r}")
        if self.surface not in ("torus", "sphere"):
            raise ConfigurationError(f"unsupported surface {self.surface!r}")
        if self.parity not in ("even", "odd", "none"):
            raise ConfigurationError(f"unsupported parity {self.parity!r}")


def _field_types():
    out = {}
    defaults = ExperimentConfig()
    for f in fields(ExperimentConfig):
        v = getattr(defaults, f.name)
        if isinstance(v, list):
            out[f.name] = (list, type(v[0]) if v else int)
        else:
            out[f.name] = (type(v), None)
    return out


def _convert(kind, text, key):
    try:
        if kind is bool:
            return text.lower() in ("1", "true", "yes")
        return kind(text)
    except ValueError:
        raise ConfigurationError(f"bad value {text!r} for {key}") from None


def parse_config(text: str) -> ExperimentConfig:
    types = _field_types()
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected 'key = value'")
        key, value = (p.strip() for p in line.split("=", 1))
        value = value.strip("\"'")
        if key not in types:
            raise ConfigurationError(f"line {lineno}: unknown key {key!r}")
        kind, item = types[key]
        if kind is list:
            values.setdefault(key, []).append(_convert(item, value, key))
        elif key in values:
            raise ConfigurationError(f"line {lineno}: scalar key {key!r} repeated")
        else:
            values[key] = _convert(kind, value, key)
    return ExperimentConfig(**values)


def render_config(cfg: ExperimentConfig) -> str:
    lines = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if isinstance(v, list):
            lines += [f"{f.name} = {item!r}" for item in v]
        elif isinstance(v, str):
            lines.append(f'{f.name} = "{v}"')
        else:
            lines.append(f"{f.name} = {v!r}")
    return "\n".join(lines) + "\n"


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None


def replace(cfg, **changes):
    return dataclasses.replace(cfg, **changes)
