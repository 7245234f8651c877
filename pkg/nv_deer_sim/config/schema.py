"""Configuration schema and loader.

The config is a JSON key tree. Every key is optional; missing keys take
the defaults below, unknown keys are rejected. Errors name the dotted key
and, when it can be located, the line it appears on.

Comments on physical defaults tag where the value comes from: [measured]
on the reference device, [lit] literature, [fit] fit parameter, [derived]
computed from other keys when left null.
"""

import json
import math
import os
from dataclasses import dataclass, field as dataclass_field, fields, is_dataclass
from typing import Any, Dict, Mapping, Optional, Tuple, get_type_hints

from ..errors import ConfigError
from ..utils.logging import log_debug

DEFAULTS_PATH = os.path.join(os.path.dirname(__file__), "..", "..", "configs", "defaults.json")


def _spec(*, minimum: Optional[float] = None, above: Optional[float] = None,
          maximum: Optional[float] = None, below: Optional[float] = None,
          choices: Tuple[str, ...] = ()):
    return {"minimum": minimum, "above": above, "maximum": maximum, "below": below, "choices": choices}


@dataclass(frozen=True)
class FieldSection:
    magnitude_gauss: float = dataclass_field(default=78.6, metadata=_spec(minimum=0.0))  # [measured] ODMR calibration
    direction: Tuple[float, float, float] = (1.0, 1.0, 1.0)  # [measured] along [111]


@dataclass(frozen=True)
class NvSection:
    g: float = dataclass_field(default=2.0028, metadata=_spec(above=0.0))  # [lit]
    d_mhz: float = 2870.0  # [lit] zero-field splitting


@dataclass(frozen=True)
class P1Section:
    g: float = dataclass_field(default=2.0024, metadata=_spec(above=0.0))  # [lit]
    a_par_mhz: float = 114.0  # [lit]
    a_perp_mhz: float = 81.0  # [lit]
    q_perp_mhz: float = -3.97  # [lit]
    nuclear_g: float = 0.40376  # [lit] 14N


@dataclass(frozen=True)
class NvhSection:
    g: float = dataclass_field(default=2.0024, metadata=_spec(above=0.0))  # [lit]
    a_h_par_mhz: float = 13.69  # [lit]
    a_h_perp_mhz: float = -9.05  # [lit]
    a_n_par_mhz: float = 2.94  # [lit]
    a_n_perp_mhz: float = 3.1  # [lit]


@dataclass(frozen=True)
class SpeciesSection:
    nv: NvSection = dataclass_field(default_factory=NvSection)
    p1: P1Section = dataclass_field(default_factory=P1Section)
    nvh: NvhSection = dataclass_field(default_factory=NvhSection)


@dataclass(frozen=True)
class PulsesSection:
    tpi_mw_ns: float = dataclass_field(default=150.0, metadata=_spec(above=0.0))  # [measured] NV pi pulse
    omega_mw_mhz: Optional[float] = dataclass_field(default=None, metadata=_spec(above=0.0))  # [derived] null: 1/(2 tpi_mw)
    tpi_rf_ns: float = dataclass_field(default=60.0, metadata=_spec(above=0.0))  # [measured] P1 pi pulse
    tpi_rf_nvh_ns: float = dataclass_field(default=48.0, metadata=_spec(above=0.0))  # [measured] NVH pi pulse
    omega_rf_mhz: Optional[float] = dataclass_field(default=None, metadata=_spec(minimum=0.0))  # [derived] null: 1/(2 tpi_rf)
    tau_ns: float = dataclass_field(default=1400.0, metadata=_spec(minimum=0.0))  # [measured] echo delay
    trf_ns: Optional[float] = dataclass_field(default=None, metadata=_spec(minimum=0.0))  # [derived] null: the bath pi time
    frf_mhz: Optional[float] = dataclass_field(default=None, metadata=_spec(above=0.0))  # [derived] null: group II center


@dataclass(frozen=True)
class PairSection:
    coupling_mhz: float = 0.25  # [fit]
    bath: str = dataclass_field(default="p1", metadata=_spec(choices=("p1", "nvh", "bare")))


@dataclass(frozen=True)
class EnsembleSection:
    delta_mhz: float = dataclass_field(default=0.05, metadata=_spec(minimum=0.0))  # [fit]
    lineshape: str = dataclass_field(default="lorentzian", metadata=_spec(choices=("lorentzian", "gaussian")))  # [fit]
    fwhm_mhz: float = dataclass_field(default=10.0, metadata=_spec(above=0.0))  # [fit]
    threshold: float = dataclass_field(default=0.05, metadata=_spec(above=0.0, below=1.0))


@dataclass(frozen=True)
class ReadoutSection:
    channel: str = dataclass_field(default="pc", metadata=_spec(choices=("pc", "pl")))
    contrast: Optional[float] = dataclass_field(default=None, metadata=_spec(minimum=0.0, maximum=1.0))  # [measured] null: pc 3.8 %, pl 5 %
    baseline: float = 1.0


@dataclass(frozen=True)
class SweepSection:
    min: float = 100.0  # P1 lines fall in 100-400 MHz
    max: float = 400.0
    points: int = dataclass_field(default=600, metadata=_spec(minimum=2))


@dataclass(frozen=True)
class TimeSection:
    tmax_ns: float = dataclass_field(default=600.0, metadata=_spec(above=0.0))
    points: int = dataclass_field(default=601, metadata=_spec(minimum=2))


@dataclass(frozen=True)
class SimConfig:
    field: FieldSection = dataclass_field(default_factory=FieldSection)
    species: SpeciesSection = dataclass_field(default_factory=SpeciesSection)
    frequencies: Dict[str, float] = dataclass_field(default_factory=dict)
    pulses: PulsesSection = dataclass_field(default_factory=PulsesSection)
    pair: PairSection = dataclass_field(default_factory=PairSection)
    ensemble: EnsembleSection = dataclass_field(default_factory=EnsembleSection)
    readout: ReadoutSection = dataclass_field(default_factory=ReadoutSection)
    sweep: SweepSection = dataclass_field(default_factory=SweepSection)
    time: TimeSection = dataclass_field(default_factory=TimeSection)

    def __post_init__(self):
        if self.sweep.max <= self.sweep.min:
            raise ConfigError("sweep.max", f"must exceed sweep.min ({self.sweep.min})")

    def with_values(self, **dotted: Any) -> "SimConfig":
        """Copy with dotted-key overrides, e.g. ``with_values(**{"pulses.tau_ns": 800})``."""
        data = to_dict(self)
        for key, value in dotted.items():
            node = data
            *parents, leaf = key.split(".")
            for part in parents:
                node = node.setdefault(part, {})
            node[leaf] = _plain(value)
        return from_dict(data)


# ---------------------------------------------------------------------------
# Conversion
# ---------------------------------------------------------------------------

def _plain(value: Any) -> Any:
    if is_dataclass(value):
        return {f.name: _plain(getattr(value, f.name)) for f in fields(value)}
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in sorted(value.items())}
    return value


def to_dict(config: SimConfig) -> Dict[str, Any]:
    """Nested plain dict; JSON-serializable and accepted by ``from_dict``."""
    return _plain(config)


def _key_line(text: Optional[str], dotted: str) -> Optional[int]:
    """1-based line of ``dotted``'s leaf key, searching below its parents."""
    if not text:
        return None
    lines = text.splitlines()
    start = 0
    for part in dotted.split("."):
        needle = json.dumps(part)
        for index in range(start, len(lines)):
            if needle in lines[index]:
                start = index
                break
        else:
            return None
    return start + 1


def _number(value: Any, key: str, text: Optional[str], integer: bool = False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        kind = "an integer" if integer else "a number"
        raise ConfigError(key, f"expected {kind}, got {json.dumps(value)}", _key_line(text, key))
    if integer and not float(value).is_integer():
        raise ConfigError(key, f"expected an integer, got {value}", _key_line(text, key))
    if not math.isfinite(value):
        raise ConfigError(key, "must be finite", _key_line(text, key))
    return int(value) if integer else float(value)


def _check_range(value: Any, meta: Mapping[str, Any], key: str, text: Optional[str]) -> None:
    line = _key_line(text, key)
    if meta.get("choices") and value not in meta["choices"]:
        raise ConfigError(key, f"must be one of {', '.join(meta['choices'])}, got {json.dumps(value)}", line)
    if isinstance(value, str) or value is None:
        return
    if meta.get("minimum") is not None and value < meta["minimum"]:
        raise ConfigError(key, f"must be >= {meta['minimum']:g}, got {value:g}", line)
    if meta.get("above") is not None and value <= meta["above"]:
        raise ConfigError(key, f"must be > {meta['above']:g}, got {value:g}", line)
    if meta.get("maximum") is not None and value > meta["maximum"]:
        raise ConfigError(key, f"must be <= {meta['maximum']:g}, got {value:g}", line)
    if meta.get("below") is not None and value >= meta["below"]:
        raise ConfigError(key, f"must be < {meta['below']:g}, got {value:g}", line)


def _convert(hint: Any, value: Any, key: str, text: Optional[str]) -> Any:
    if is_dataclass(hint):
        return _build(hint, value, key, text)
    if hint is float:
        return _number(value, key, text)
    if hint is int:
        return _number(value, key, text, integer=True)
    if hint is str:
        if not isinstance(value, str):
            raise ConfigError(key, f"expected a string, got {json.dumps(value)}", _key_line(text, key))
        return value
    if hint == Optional[float]:
        return None if value is None else _number(value, key, text)
    if hint == Tuple[float, float, float]:
        if not isinstance(value, list) or len(value) != 3:
            raise ConfigError(key, f"expected a list of 3 numbers, got {json.dumps(value)}", _key_line(text, key))
        vector = tuple(_number(v, key, text) for v in value)
        if not any(vector):
            raise ConfigError(key, "must not be the zero vector", _key_line(text, key))
        return vector
    if hint == Dict[str, float]:
        if not isinstance(value, dict):
            raise ConfigError(key, "expected an object of name -> MHz", _key_line(text, key))
        return {str(name): _number(v, f"{key}.{name}", text) for name, v in value.items()}
    raise ConfigError(key, f"unsupported type {hint}")


def _build(cls: type, data: Any, prefix: str, text: Optional[str]):
    if not isinstance(data, dict):
        raise ConfigError(prefix or "<root>", "expected an object", _key_line(text, prefix) if prefix else 1)
    hints = get_type_hints(cls)
    known = {f.name: f for f in fields(cls)}
    for key in data:
        if key not in known:
            dotted = f"{prefix}.{key}" if prefix else key
            raise ConfigError(dotted, "unknown key", _key_line(text, dotted))
    values = {}
    for name, value in data.items():
        dotted = f"{prefix}.{name}" if prefix else name
        converted = _convert(hints[name], value, dotted, text)
        _check_range(converted, known[name].metadata, dotted, text)
        values[name] = converted
    return cls(**values)


def from_dict(data: Mapping[str, Any], text: Optional[str] = None) -> SimConfig:
    return _build(SimConfig, dict(data), "", text)


def parse_config(text: str) -> SimConfig:
    """Parse config text; empty text gives the defaults."""
    if not text.strip():
        return SimConfig()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<document>", f"invalid JSON: {exc.msg}", exc.lineno) from None
    return from_dict(data, text)


def load_config(path: str) -> SimConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read '{path}': {exc.strerror}") from None
    log_debug(f"loaded config {path}")
    return parse_config(text)


def load_defaults() -> SimConfig:
    """Defaults from configs/defaults.json, or the built-in ones when it is missing."""
    try:
        with open(DEFAULTS_PATH, "r", encoding="utf-8") as fh:
            text = fh.read()
    except FileNotFoundError:
        return SimConfig()
    log_debug(f"defaults from {os.path.normpath(DEFAULTS_PATH)}")
    return parse_config(text)


def merged(base: SimConfig, overrides: Mapping[str, Any]) -> SimConfig:
    """Apply dotted-key overrides, skipping None values."""
    present = {k: v for k, v in overrides.items() if v is not None}
    return base.with_values(**present) if present else base
