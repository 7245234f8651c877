"""Run results and their CSV/JSON serialization.

Output is deterministic: numbers carry 12 significant digits, negative
zero is printed as 0, lines end in LF and JSON keys are sorted.
"""

import json
import sys
from dataclasses import dataclass, field as dataclass_field
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from . import __version__
from .errors import OutputError, ValidationError
from .spectrum import Spectrum

FORMATS = ("csv", "json")
DIGITS = 12


@dataclass(frozen=True)
class RunResult:
    """Everything one CLI run produced, plus the config and options that reproduce it.

    Output paths, formats and verbosity are not recorded: they never change
    the result bytes.
    """
    command: str
    config: Dict[str, Any]
    options: Dict[str, Any] = dataclass_field(default_factory=dict)
    spectra: Tuple[Spectrum, ...] = ()
    scalars: Dict[str, float] = dataclass_field(default_factory=dict)
    sticks: Tuple[Dict[str, Any], ...] = ()
    version: str = __version__


def format_number(value: float) -> str:
    value = float(value)
    if value == 0.0:
        value = 0.0
    return format(value, f".{DIGITS}g")


def _round(value: Any) -> Any:
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, (float, np.floating)):
        return float(format_number(value))
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, dict):
        return {str(k): _round(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round(v) for v in value]
    return value


def _csv(result: RunResult) -> str:
    if result.spectra:
        spectrum = result.spectra[0]
        rows = [f"{spectrum.axis_name},{spectrum.channel}"]
        rows += [f"{format_number(a)},{format_number(s)}" for a, s in zip(spectrum.axis, spectrum.signal)]
    else:
        rows = ["name,value"]
        rows += [f"{name},{format_number(value)}" for name, value in sorted(result.scalars.items())]
    return "\n".join(rows) + "\n"


def _spectrum_dict(spectrum: Spectrum) -> Dict[str, Any]:
    return {
        "axis_name": spectrum.axis_name,
        "channel": spectrum.channel,
        "axis": _round(spectrum.axis.tolist()),
        "signal": _round(spectrum.signal.tolist()),
    }


def to_json_dict(result: RunResult) -> Dict[str, Any]:
    return {
        "command": result.command,
        "options": result.options,
        "version": result.version,
        "config": result.config,
        "scalars": _round(result.scalars),
        "spectra": [_spectrum_dict(s) for s in result.spectra],
        "sticks": _round(list(result.sticks)),
    }


def write_output(result: RunResult, fmt: str = "csv") -> bytes:
    """Serialize ``result`` as CSV (first spectrum, else scalars) or JSON."""
    if fmt == "csv":
        text = _csv(result)
    elif fmt == "json":
        text = json.dumps(to_json_dict(result), sort_keys=True, indent=2, allow_nan=False) + "\n"
    else:
        raise ValidationError(f"output format must be one of {', '.join(FORMATS)}, got '{fmt}'")
    return text.encode("utf-8")


def emit(data: bytes, path: Optional[str] = None) -> None:
    """Write to ``path``, or to stdout when no path is given."""
    if path is None or path == "-":
        sys.stdout.write(data.decode("utf-8"))
        sys.stdout.flush()
        return
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise OutputError(path, exc.strerror or str(exc)) from None


def read_result(data: Union[bytes, str]) -> RunResult:
    """Inverse of the JSON writer."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        raw = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"not a result document: {exc.msg} (line {exc.lineno})") from None
    spectra: List[Spectrum] = [
        Spectrum(np.array(s["axis"], dtype=float), np.array(s["signal"], dtype=float), s["axis_name"], s["channel"])
        for s in raw.get("spectra", [])
    ]
    return RunResult(
        command=raw["command"],
        config=raw["config"],
        options=dict(raw.get("options", {})),
        spectra=tuple(spectra),
        scalars=dict(raw.get("scalars", {})),
        sticks=tuple(raw.get("sticks", [])),
        version=raw.get("version", __version__),
    )
