"""Sampled series shared by the pulse protocols and the ensemble spectra."""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import numpy.typing as npt

from .errors import ContractViolation, InvalidArgumentError

AXIS_FREQUENCY = "frequency_mhz"
AXIS_TIME = "time_ns"


@dataclass(frozen=True)
class Spectrum:
    """(axis, signal) samples; ``channel`` names the signal column."""
    axis: npt.NDArray[np.float64]
    signal: npt.NDArray[np.float64]
    axis_name: str = AXIS_FREQUENCY
    channel: str = "signal"

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float)
        signal = np.asarray(self.signal, dtype=float)
        if axis.ndim != 1 or axis.shape != signal.shape:
            raise ContractViolation(
                f"spectrum axis and signal must be 1-D of equal length, got {axis.shape} and {signal.shape}"
            )
        if axis.size > 1 and not np.all(np.diff(axis) > 0):
            raise ContractViolation("spectrum axis must be strictly increasing")
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "signal", signal)

    def __len__(self) -> int:
        return int(self.axis.size)

    def with_signal(self, signal: npt.ArrayLike, channel: str) -> "Spectrum":
        return Spectrum(self.axis, np.asarray(signal, dtype=float), self.axis_name, channel)


def sweep_axis(start: float, stop: float, points: int) -> npt.NDArray[np.float64]:
    """Evenly spaced samples including both ends."""
    if points < 2:
        raise InvalidArgumentError(f"a sweep needs at least 2 points, got {points}")
    if not stop > start:
        raise InvalidArgumentError(f"sweep end ({stop}) must exceed its start ({start})")
    return np.linspace(start, stop, int(points))


class Sweep(NamedTuple):
    """Closed sweep range with ``points`` samples."""
    start: float
    stop: float
    points: int

    def axis(self) -> npt.NDArray[np.float64]:
        return sweep_axis(self.start, self.stop, self.points)
