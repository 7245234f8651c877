"""Standard NV pulse protocols built on the pair engine."""

import math
from dataclasses import replace
from typing import List, Optional, Tuple

import numpy as np

from ..errors import InvalidArgumentError, ValidationError
from ..spectrum import AXIS_TIME, Spectrum, sweep_axis
from ..spin.hamiltonians import FieldConfig, SpinSpecies
from ..spin.transitions import (
    DEFAULT_THRESHOLD,
    OrientationClass,
    TransitionLine,
    orientation_classes,
)
from ..utils.logging import log_debug
from .engine import PairSystem, run_sequence
from .sequence import Delay, MwPulse, PulseBlock, PulseSequence, Readout, RfPulse, pulse_duration

DEFAULT_TAU_NS = 1400.0


def rabi_sequence(f_mw_mhz: float, omega_mhz: float, duration_ns: float, phase: float = 0.0) -> PulseSequence:
    return PulseSequence.of([MwPulse(f_mw_mhz, omega_mhz, duration_ns, phase), Readout()])


def _mw_pair(f_mw_mhz: float, omega_mw_mhz: float) -> Tuple[MwPulse, MwPulse]:
    half = MwPulse(f_mw_mhz, omega_mw_mhz, pulse_duration(math.pi / 2, omega_mw_mhz))
    full = MwPulse(f_mw_mhz, omega_mw_mhz, pulse_duration(math.pi, omega_mw_mhz))
    return half, full


def hahn_echo_sequence(f_mw_mhz: float, omega_mw_mhz: float, tau_ns: float) -> PulseSequence:
    """pi/2 - tau - pi - tau - pi/2 - read."""
    half, full = _mw_pair(f_mw_mhz, omega_mw_mhz)
    return PulseSequence.of([half, Delay(tau_ns), full, Delay(tau_ns), half, Readout()])


def deer_sequence(
    f_mw_mhz: float,
    omega_mw_mhz: float,
    tau_ns: float,
    f_rf_mhz: float,
    omega_rf_mhz: float,
    t_rf_ns: float,
    rf_offset_ns: float = 0.0,
) -> PulseSequence:
    """Hahn echo with a bath pulse in its second free evolution.

    pi/2 - tau - pi - [a] - RF(t_rf) - (tau - a) - pi/2 - read. The RF block
    is left out when its amplitude or duration is zero.
    """
    if t_rf_ns > 2 * tau_ns:
        raise ValidationError(f"RF pulse ({t_rf_ns} ns) does not fit in 2*tau ({2 * tau_ns} ns)")
    if not 0.0 <= rf_offset_ns <= tau_ns:
        raise InvalidArgumentError(f"RF offset must lie in [0, tau], got {rf_offset_ns} ns")
    half, full = _mw_pair(f_mw_mhz, omega_mw_mhz)
    blocks: List[PulseBlock] = [half, Delay(tau_ns), full]
    if omega_rf_mhz > 0 and t_rf_ns > 0:
        if rf_offset_ns:
            blocks.append(Delay(rf_offset_ns))
        blocks.append(RfPulse(f_rf_mhz, omega_rf_mhz, t_rf_ns))
        blocks.append(Delay(tau_ns - rf_offset_ns))
    else:
        blocks.append(Delay(tau_ns))
    blocks += [half, Readout()]
    return PulseSequence.of(blocks)


def rabi_trace(
    system: PairSystem,
    omega_mhz: float,
    f_drive_mhz: float,
    t_max_ns: float,
    n_points: int,
) -> Spectrum:
    """NV |0> population after a single MW pulse of increasing length."""
    times = sweep_axis(0.0, t_max_ns, n_points)
    populations = np.array(
        [run_sequence(rabi_sequence(f_drive_mhz, omega_mhz, t), system).nv_population for t in times]
    )
    return Spectrum(times, populations, axis_name=AXIS_TIME, channel="population")


def echo_from_population(population: float) -> float:
    return 2.0 * population - 1.0


def deer_point(
    system: PairSystem,
    f_rf_mhz: float,
    t_rf_ns: float,
    omega_rf_mhz: float,
    tau_ns: float = DEFAULT_TAU_NS,
    rf_offset_ns: float = 0.0,
) -> float:
    """Echo amplitude in [-1, 1] of one DEER shot."""
    seq = deer_sequence(
        system.f_nv_mhz, system.omega_mw_mhz, tau_ns, f_rf_mhz, omega_rf_mhz, t_rf_ns, rf_offset_ns
    )
    return echo_from_population(run_sequence(seq, system).nv_population)


def deer_rabi_trace(
    system: PairSystem,
    f_rf_mhz: float,
    omega_rf_mhz: float,
    t_max_ns: float,
    tau_ns: float = DEFAULT_TAU_NS,
    n_points: int = 101,
) -> Spectrum:
    """DEER echo against RF pulse length; oscillates at the bath Rabi frequency."""
    times = sweep_axis(0.0, t_max_ns, n_points)
    echoes = np.array([deer_point(system, f_rf_mhz, t, omega_rf_mhz, tau_ns) for t in times])
    log_debug(f"deer-rabi: {n_points} points up to {t_max_ns} ns at {f_rf_mhz} MHz")
    return Spectrum(times, echoes, axis_name=AXIS_TIME, channel="echo")


def nearest_orientation(
    species: SpinSpecies,
    field: FieldConfig,
    f_rf_mhz: float,
    threshold: float = DEFAULT_THRESHOLD,
) -> Tuple[OrientationClass, TransitionLine]:
    """Orientation class owning the strongest-weighted line closest to ``f_rf_mhz``."""
    best: Optional[Tuple[float, float, OrientationClass, TransitionLine]] = None
    for cls in orientation_classes(species, field, threshold):
        for line in cls.lines:
            key = (abs(line.frequency_mhz - f_rf_mhz), -line.weight)
            if best is None or key < best[:2]:
                best = (key[0], key[1], cls, line)
    if best is None:
        raise ValidationError(f"{species.name} has no allowed transition at this field")
    return best[2], best[3]


def pair_for_frequency(system: PairSystem, f_rf_mhz: float) -> PairSystem:
    """Copy of ``system`` with the bath axis set to the orientation resonant near ``f_rf_mhz``."""
    cls, line = nearest_orientation(system.species, system.field, f_rf_mhz)
    log_debug(f"bath orientation {cls.indices} for {f_rf_mhz} MHz (line at {line.frequency_mhz:.4f} MHz)")
    return replace(system, bath_axis=tuple(float(c) for c in cls.axis))
