"""NV DEER Simulator - Command Line Interface

Entry point for the nv-deer-sim CLI command and python3 -m nv_deer_sim.
Every command resolves a config (defaults, --config file, then flags),
runs one simulation and writes CSV or JSON to stdout or --out.
"""

import argparse
import sys
import traceback
from dataclasses import replace
from typing import Any, Dict, Optional, Sequence

import numpy as np

from nv_deer_sim import __version__
from nv_deer_sim.config import resolve
from nv_deer_sim.config.schema import SimConfig, load_config, load_defaults, merged, to_dict
from nv_deer_sim.config.templates import load_template, template_names
from nv_deer_sim.ensemble.spectra import broaden, deer_spectrum, find_dips, odmr_spectrum
from nv_deer_sim.ensemble.readout import readout_map
from nv_deer_sim.errors import ContractViolation, SimulationError, ValidationError
from nv_deer_sim.output import FORMATS, RunResult, emit, write_output
from nv_deer_sim.pulses.engine import run_sequence
from nv_deer_sim.pulses.parser import parse_sequence
from nv_deer_sim.pulses.protocols import deer_rabi_trace, echo_from_population, rabi_trace
from nv_deer_sim.pulses.sequence import RfPulse
from nv_deer_sim.spectrum import Spectrum
from nv_deer_sim.spin.hamiltonians import SPECIES_NAMES, calibrate_field
from nv_deer_sim.spin.transitions import group_centers
from nv_deer_sim.utils.logging import (
    log_debug,
    log_error,
    log_info,
    log_step,
    log_success,
    set_verbosity,
)


# ---------------------------------------------------------------------------
# Command identifiers
# ---------------------------------------------------------------------------

COMMAND_SPECTRUM = "spectrum"
COMMAND_ODMR = "odmr"
COMMAND_RABI = "rabi"
COMMAND_DEER = "deer"
COMMAND_DEER_RABI = "deer-rabi"
COMMAND_CALIBRATE = "calibrate"
COMMAND_SEQUENCE = "sequence"

COMMANDS = (
    COMMAND_SPECTRUM, COMMAND_ODMR, COMMAND_RABI, COMMAND_DEER,
    COMMAND_DEER_RABI, COMMAND_CALIBRATE, COMMAND_SEQUENCE,
)

BATH_NAMES = ("p1", "nvh", "bare")

# cw ODMR sweep when --fmin/--fmax are not given (MHz)
ODMR_SWEEP = (2500.0, 3250.0)

# Flag -> dotted config key. Time-axis commands map --points to time.points.
_FLAG_KEYS = {
    "field": "field.magnitude_gauss",
    "tau": "pulses.tau_ns",
    "frf": "pulses.frf_mhz",
    "trf": "pulses.trf_ns",
    "fmin": "sweep.min",
    "fmax": "sweep.max",
    "tmax": "time.tmax_ns",
    "channel": "readout.channel",
}


class _ArgumentParser(argparse.ArgumentParser):
    """argparse that reports usage problems as validation errors (exit 1)."""

    def error(self, message):
        raise ValidationError(f"{self.prog}: {message}")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _spectrum(config: SimConfig, species: str) -> RunResult:
    log_step(f"Stick spectrum: {species} at {config.field.magnitude_gauss:g} G")
    sticks = resolve.sticks(config, species)
    for missing in sticks.incomplete:
        log_debug(f"incomplete: {missing}")
    broadened = broaden(sticks, resolve.lineshape(config), resolve.frequency_sweep(config))
    scalars = {f"center_{group}": value for group, value in group_centers(sticks).items()}
    scalars["lines"] = float(len(sticks.lines))
    log_info(f"{len(sticks.lines)} lines, {len(sticks.nuclear_lines)} nuclear lines")
    return RunResult(
        COMMAND_SPECTRUM, to_dict(config), spectra=(broadened,), scalars=scalars,
        sticks=tuple(line.to_dict() for line in sticks.lines),
    )


def _odmr(config: SimConfig) -> RunResult:
    log_step(f"cw ODMR ({config.readout.channel.upper()} readout)")
    nv = config.species.nv
    spectrum = odmr_spectrum(
        resolve.field_config(config), resolve.frequency_sweep(config),
        resolve.lineshape(config), resolve.readout(config), d_mhz=nv.d_mhz, g=nv.g,
    )
    return RunResult(COMMAND_ODMR, to_dict(config), spectra=(spectrum,), scalars=_dip_scalars(spectrum))


def _rabi(config: SimConfig) -> RunResult:
    system = resolve.pair_system(config)
    omega = resolve.omega_mw(config)
    times = resolve.time_sweep(config)
    log_step(f"NV Rabi trace at {system.f_nv_mhz:.3f} MHz, {omega:.4f} MHz drive")
    population = rabi_trace(system, omega, system.f_nv_mhz, times.stop, times.points)
    readout = resolve.readout(config)
    signal = population.with_signal(readout_map(population.signal, readout, kind="population"), readout.column)
    first_min = _first_minimum(population)
    log_info(f"first population minimum at {first_min:g} ns")
    return RunResult(
        COMMAND_RABI, to_dict(config), spectra=(signal, population), scalars={"t_min_ns": first_min}
    )


def _deer(config: SimConfig) -> RunResult:
    bath = config.pair.bath
    if bath == "bare":
        raise ValidationError("the ensemble DEER spectrum needs a p1 or nvh bath")
    model = resolve.ensemble_model(config, bath)
    log_step(
        f"DEER spectrum: {bath} bath, tau {model.tau_ns:g} ns, "
        f"RF pi {model.t_rf_ns:g} ns at {model.omega_rf_mhz:.4f} MHz"
    )
    spectrum = deer_spectrum(model, resolve.sticks(config, bath), resolve.frequency_sweep(config))
    scalars = _dip_scalars(spectrum)
    log_info(f"{int(scalars['dips'])} dips")
    return RunResult(COMMAND_DEER, to_dict(config), spectra=(spectrum,), scalars=scalars)


def _deer_rabi(config: SimConfig) -> RunResult:
    bath = config.pair.bath
    f_rf = resolve.f_rf(config, bath)
    system = resolve.pair_system(config, f_rf)
    omega = resolve.omega_rf(config, bath)
    log_step(f"DEER Rabi trace: {bath} bath at {f_rf:.3f} MHz, {omega:.4f} MHz drive")
    times = resolve.time_sweep(config)
    echo = deer_rabi_trace(system, f_rf, omega, times.stop, config.pulses.tau_ns, times.points)
    readout = resolve.readout(config)
    signal = echo.with_signal(readout_map(echo.signal, readout), readout.column)
    return RunResult(
        COMMAND_DEER_RABI, to_dict(config), spectra=(signal, echo), scalars={"frf_mhz": f_rf}
    )


def _calibrate(config: SimConfig, f_plus: float, f_minus: float) -> RunResult:
    field = calibrate_field(f_plus, f_minus, g=config.species.nv.g)
    log_success(f"field along the aligned NV axis: {field:.4f} G")
    return RunResult(
        COMMAND_CALIBRATE, to_dict(config),
        scalars={"f1_mhz": f_plus, "f2_mhz": f_minus, "field_gauss": field},
    )


def _sequence(config: SimConfig, text: str) -> RunResult:
    bath = config.pair.bath
    seq = parse_sequence(
        text, resolve.named_frequencies(config),
        omega_mw_mhz=resolve.omega_mw(config), omega_rf_mhz=resolve.omega_rf(config, bath),
    )
    carriers = seq.carriers(RfPulse)
    system = resolve.pair_system(config, carriers[0] if carriers else None)
    log_step(f"Running {len(seq.blocks)} blocks ({seq.total_duration_ns:g} ns) on the {bath} pair")
    population = run_sequence(seq, system).nv_population
    log_info(f"NV |0> population {population:.6f}")
    return RunResult(
        COMMAND_SEQUENCE, to_dict(config),
        scalars={
            "nv_population": population,
            "echo": echo_from_population(population),
            "duration_ns": seq.total_duration_ns,
        },
    )


def _first_minimum(trace: Spectrum) -> float:
    """Earliest local minimum; the global one when the trace has none inside."""
    dips = find_dips(trace)
    if dips.size:
        return float(dips[0])
    log_debug("no interior minimum, using the lowest sample")
    return float(trace.axis[int(np.argmin(trace.signal))])


def _dip_scalars(spectrum: Spectrum) -> Dict[str, float]:
    dips = find_dips(spectrum)
    scalars = {"dips": float(len(dips))}
    for index, position in enumerate(dips, start=1):
        scalars[f"dip_{index}"] = float(position)
    return scalars


def run_command(cmd: str, config: SimConfig, **options: Any) -> RunResult:
    """Dispatch a single command by its identifier; ``options`` are echoed in the result."""
    result = _dispatch(cmd, config, options)
    return replace(result, options={k: v for k, v in sorted(options.items()) if v is not None})


def _dispatch(cmd: str, config: SimConfig, options: Dict[str, Any]) -> RunResult:
    if cmd == COMMAND_SPECTRUM:
        return _spectrum(config, options.get("species") or "p1")
    elif cmd == COMMAND_ODMR:
        return _odmr(config)
    elif cmd == COMMAND_RABI:
        return _rabi(config)
    elif cmd == COMMAND_DEER:
        return _deer(config)
    elif cmd == COMMAND_DEER_RABI:
        return _deer_rabi(config)
    elif cmd == COMMAND_CALIBRATE:
        return _calibrate(config, options["f1"], options["f2"])
    elif cmd == COMMAND_SEQUENCE:
        return _sequence(config, options["text"])
    raise ValidationError(f"unknown command '{cmd}' (expected one of {', '.join(COMMANDS)})")


# ---------------------------------------------------------------------------
# Argument handling
# ---------------------------------------------------------------------------

def _common_parser() -> argparse.ArgumentParser:
    common = _ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE", help="JSON config file")
    common.add_argument("--out", metavar="FILE", help="output path (default: stdout)")
    common.add_argument("--format", choices=FORMATS, default="csv", help="output format")
    common.add_argument("--field", type=float, metavar="GAUSS", help="field magnitude along field.direction")
    common.add_argument("--quiet", action="store_true", help="only warnings and errors on stderr")
    common.add_argument("--verbose", action="store_true", help="debug output on stderr")
    return common


def _add_sweep(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--fmin", type=float, metavar="MHZ")
    parser.add_argument("--fmax", type=float, metavar="MHZ")
    parser.add_argument("--points", type=int)


def _add_time(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--tmax", type=float, metavar="NS")
    parser.add_argument("--points", type=int)


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = _ArgumentParser(prog="nv-deer-sim", description="NV center DEER and ODMR simulator")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_ArgumentParser)
    sub.required = True

    p = sub.add_parser(COMMAND_SPECTRUM, parents=[common], help="stick and broadened ESR spectrum")
    p.add_argument("--species", choices=SPECIES_NAMES, default="p1")
    _add_sweep(p)

    p = sub.add_parser(COMMAND_ODMR, parents=[common], help="cw ODMR/PDMR spectrum of the NV ensemble")
    p.add_argument("--channel", choices=("pc", "pl"))
    _add_sweep(p)

    p = sub.add_parser(COMMAND_RABI, parents=[common], help="NV Rabi oscillation")
    p.add_argument("--channel", choices=("pc", "pl"))
    _add_time(p)

    p = sub.add_parser(COMMAND_DEER, parents=[common], help="ensemble DEER spectrum over an RF sweep")
    p.add_argument("--species", choices=BATH_NAMES)
    p.add_argument("--tau", type=float, metavar="NS")
    p.add_argument("--trf", type=float, metavar="NS")
    p.add_argument("--channel", choices=("pc", "pl"))
    _add_sweep(p)

    p = sub.add_parser(COMMAND_DEER_RABI, parents=[common], help="DEER echo against RF pulse length")
    p.add_argument("--species", choices=BATH_NAMES)
    p.add_argument("--tau", type=float, metavar="NS")
    p.add_argument("--frf", type=float, metavar="MHZ")
    p.add_argument("--channel", choices=("pc", "pl"))
    _add_time(p)

    p = sub.add_parser(COMMAND_CALIBRATE, parents=[common], help="field from the two aligned NV lines")
    p.add_argument("--f1", type=float, required=True, metavar="MHZ", help="upper NV transition")
    p.add_argument("--f2", type=float, required=True, metavar="MHZ", help="lower NV transition")

    p = sub.add_parser(COMMAND_SEQUENCE, parents=[common], help="run a pulse sequence on the pair model")
    p.add_argument("--species", choices=BATH_NAMES)
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--sequence", metavar="FILE", help="sequence text file")
    source.add_argument("--template", metavar="NAME", help=f"built-in sequence ({', '.join(template_names())})")
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    values = {key: getattr(args, flag, None) for flag, key in _FLAG_KEYS.items()}
    points = getattr(args, "points", None)
    if hasattr(args, "tmax"):
        values["time.points"] = points
    else:
        values["sweep.points"] = points
    if args.command != COMMAND_SPECTRUM:
        values["pair.bath"] = getattr(args, "species", None)
    return values


def _resolve_config(args: argparse.Namespace) -> SimConfig:
    base = load_config(args.config) if args.config else load_defaults()
    overrides = _overrides(args)
    if args.command == COMMAND_ODMR:
        if args.fmin is None and args.fmax is None:
            overrides["sweep.min"], overrides["sweep.max"] = ODMR_SWEEP
        elif args.fmin is None or args.fmax is None:
            raise ValidationError("odmr: give both --fmin and --fmax, or neither")
    return merged(base, overrides)


def _read_sequence_text(args: argparse.Namespace) -> str:
    if args.template:
        return load_template(args.template)
    try:
        with open(args.sequence, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ValidationError(f"cannot read sequence '{args.sequence}': {exc.strerror}") from None


def _options(args: argparse.Namespace) -> Dict[str, Any]:
    if args.command == COMMAND_SPECTRUM:
        return {"species": args.species}
    if args.command == COMMAND_CALIBRATE:
        return {"f1": args.f1, "f2": args.f2}
    if args.command == COMMAND_SEQUENCE:
        return {"text": _read_sequence_text(args)}
    return {}


# ---------------------------------------------------------------------------
# Main
# ---------------------------------------------------------------------------

def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command; returns the process exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        if args.quiet and args.verbose:
            raise ValidationError("--quiet and --verbose cannot be combined")
        set_verbosity(0 if args.quiet else 2 if args.verbose else 1)

        config = _resolve_config(args)
        result = run_command(args.command, config, **_options(args))
        emit(write_output(result, args.format), args.out)
        if args.out:
            log_success(f"Wrote {args.out}")
        return 0

    except KeyboardInterrupt:
        print(file=sys.stderr)
        log_info("Cancelled.")
        return 1
    except ContractViolation as e:
        log_error(f"Internal check failed: {e}")
        return e.exit_code
    except SimulationError as e:
        log_error(str(e))
        return e.exit_code
    except Exception as e:
        log_error(f"Simulation failed: {e}")
        log_debug(f"Traceback: {traceback.format_exc()}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
