"""Flat ``key = value`` configuration shared by every CLI subcommand.

Lines starting with ``#`` (and anything after a ``#``) are comments. All keys
are optional; unspecified keys keep the defaults below.
"""
from dataclasses import dataclass, field, fields
import math
import typing
from pathlib import Path

from .errors import InputError

_FLOAT_LIST = "float_list"


@dataclass
class ToolConfig:
    # wind pressure
    rho: float = 1.29
    cp: float = 2.0
    # S-N curve
    sigma_ult: float = 1548.0
    sn_a: float = 1.816
    sn_b: float = 8.097
    sn_m: float = 1.0
    # damage law; damage_A overrides A = p*B + q when set
    damage_B: float = 0.1
    damage_p: float = 0.67
    damage_q: float = 0.44
    damage_A: typing.Optional[float] = None
    # stress calibration; v_ref defaults to the record's maximum speed
    v_ref: typing.Optional[float] = None
    sigma_ref: float = 718.0
    rotor_rpm: float = 12.1
    n_bins: int = 50
    # time axis
    horizon_years: float = 25.0
    grid_step_years: float = 0.25
    # gamma process; u overrides cov_ref when set
    d_cr_list: tuple = field(default=(0.7, 0.8, 0.9, 0.95), metadata={"kind": _FLOAT_LIST})
    cov_ref: float = 0.05
    u: typing.Optional[float] = None
    t_ref: typing.Optional[float] = None
    # Monte Carlo
    seed: int = 2024
    n_paths: int = 10000
    workers: int = 1
    # synthetic wind
    wind_shape: float = 2.0
    wind_scale: float = 9.0
    wind_samples: int = 8640

    def __post_init__(self):
        self.validate()

    @property
    def steps_per_year(self):
        return int(round(1.0 / self.grid_step_years))

    def validate(self):
        positive = ["rho", "cp", "sigma_ult", "sn_a", "sn_b", "sn_m", "damage_B",
                    "sigma_ref", "rotor_rpm", "horizon_years", "grid_step_years",
                    "cov_ref", "wind_shape", "wind_scale"]
        for name in positive:
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InputError(f"config: {name} must be positive, got {value}")
        for name in ("damage_A", "v_ref", "u", "t_ref"):
            value = getattr(self, name)
            if value is not None and not (math.isfinite(value) and value > 0):
                raise InputError(f"config: {name} must be positive, got {value}")
        for name in ("n_bins", "n_paths", "workers", "wind_samples"):
            if getattr(self, name) < 1:
                raise InputError(f"config: {name} must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise InputError("config: seed must be a 64-bit unsigned integer")
        if not self.d_cr_list:
            raise InputError("config: d_cr_list must not be empty")
        for d in self.d_cr_list:
            if not 0 < d <= 1:
                raise InputError(f"config: d_cr_list values must lie in (0, 1], got {d}")
        spy = 1.0 / self.grid_step_years
        if abs(spy - round(spy)) > 1e-9 or round(spy) < 1:
            raise InputError(
                "config: grid_step_years must divide one year evenly (e.g. 1, 0.5, 0.25)")


def _convert(f, text):
    kind = f.metadata.get("kind")
    if kind == _FLOAT_LIST:
        return tuple(float(p) for p in text.split(",") if p.strip())
    typ = f.type
    if typ in (int, "int"):
        value = float(text)
        if not value.is_integer():
            raise ValueError(f"expected an integer, got {text!r}")
        return int(value)
    if text.lower() in ("none", ""):
        if typing.get_origin(typ) is typing.Union:
            return None
    return float(text)


def parse_config(text):
    """Build a ToolConfig from ``key = value`` text."""
    by_name = {f.name: f for f in fields(ToolConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in by_name:
            raise InputError(f"config line {lineno}: unknown key {key!r}")
        try:
            values[key] = _convert(by_name[key], value)
        except ValueError as exc:
            raise InputError(f"config line {lineno}: {key}: {exc}") from None
    return ToolConfig(**values)


def load_config(path):
    if path is None:
        return ToolConfig()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc.strerror or exc}") from None
    return parse_config(text)
