"""Pulse-sequence data model.

A sequence is an ordered tuple of blocks ending in exactly one Readout.
Durations are in ns, frequencies and Rabi amplitudes in MHz, phases in rad.
"""

import math
from dataclasses import dataclass
from typing import Iterable, Tuple, Union

from ..errors import InvalidArgumentError, ValidationError
from ..spin.constants import NS_PER_US


def _check_duration(duration_ns: float) -> None:
    if not math.isfinite(duration_ns) or duration_ns < 0:
        raise InvalidArgumentError(f"duration must be finite and >= 0 ns, got {duration_ns}")


@dataclass(frozen=True)
class MwPulse:
    """Rectangular microwave pulse on the NV transition."""
    frequency_mhz: float
    omega_mhz: float
    duration_ns: float
    phase: float = 0.0

    def __post_init__(self):
        _check_duration(self.duration_ns)
        if not math.isfinite(self.omega_mhz) or self.omega_mhz < 0:
            raise InvalidArgumentError(f"Rabi amplitude must be >= 0 MHz, got {self.omega_mhz}")

    @property
    def angle(self) -> float:
        """Nominal on-resonance rotation angle in radians."""
        return 2 * math.pi * self.omega_mhz * self.duration_ns / NS_PER_US


@dataclass(frozen=True)
class RfPulse:
    """Rectangular RF pulse on the bath electron spin."""
    frequency_mhz: float
    omega_mhz: float
    duration_ns: float
    phase: float = 0.0

    def __post_init__(self):
        _check_duration(self.duration_ns)
        if not math.isfinite(self.omega_mhz) or self.omega_mhz < 0:
            raise InvalidArgumentError(f"Rabi amplitude must be >= 0 MHz, got {self.omega_mhz}")

    @property
    def angle(self) -> float:
        return 2 * math.pi * self.omega_mhz * self.duration_ns / NS_PER_US


@dataclass(frozen=True)
class Delay:
    duration_ns: float

    def __post_init__(self):
        _check_duration(self.duration_ns)


@dataclass(frozen=True)
class Readout:
    """Terminal projective readout of the NV population."""

    duration_ns = 0.0


PulseBlock = Union[MwPulse, RfPulse, Delay, Readout]


def pulse_duration(angle_rad: float, omega_mhz: float) -> float:
    """Duration (ns) of an on-resonance rotation by ``angle_rad`` at Rabi amplitude ``omega_mhz``."""
    if omega_mhz <= 0:
        raise InvalidArgumentError(f"cannot build a {angle_rad:.4g} rad pulse with Rabi amplitude {omega_mhz} MHz")
    return angle_rad / (2 * math.pi * omega_mhz) * NS_PER_US


@dataclass(frozen=True)
class PulseSequence:
    blocks: Tuple[PulseBlock, ...]

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        self.validate()

    def validate(self) -> None:
        readouts = [i for i, b in enumerate(self.blocks) if isinstance(b, Readout)]
        if not readouts:
            raise ValidationError("pulse sequence has no terminal 'read'")
        if len(readouts) > 1 or readouts[0] != len(self.blocks) - 1:
            raise ValidationError("pulse sequence must contain exactly one 'read', as its last block")
        for block in self.blocks:
            if not isinstance(block, (MwPulse, RfPulse, Delay, Readout)):
                raise ValidationError(f"unsupported block {block!r}")

    @property
    def total_duration_ns(self) -> float:
        return float(sum(b.duration_ns for b in self.blocks))

    def carriers(self, kind: type) -> Tuple[float, ...]:
        """Distinct carrier frequencies used by blocks of ``kind``."""
        seen = []
        for block in self.blocks:
            if isinstance(block, kind) and block.frequency_mhz not in seen:
                seen.append(block.frequency_mhz)
        return tuple(seen)

    @classmethod
    def of(cls, blocks: Iterable[PulseBlock]) -> "PulseSequence":
        return cls(tuple(blocks))
