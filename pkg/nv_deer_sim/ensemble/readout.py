"""Map NV echo or population onto a photoluminescence or photocurrent signal."""

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
import numpy.typing as npt

from ..errors import InvalidArgumentError, ValidationError

CHANNELS = ("pc", "pl")

# Readout contrast between |0> and |-1>: photocurrent 3.8 %, fluorescence 5 %
DEFAULT_CONTRAST = {"pc": 0.038, "pl": 0.05}

_RANGE_TOL = 1e-12


@dataclass(frozen=True)
class ReadoutModel:
    """Readout channel with its contrast and signal baseline (a.u.).

    ``contrast=None`` picks the channel default.
    """
    channel: str = "pc"
    contrast: Optional[float] = None
    baseline: float = 1.0

    def __post_init__(self):
        if self.channel not in CHANNELS:
            raise InvalidArgumentError(f"readout channel must be 'pc' or 'pl', got '{self.channel}'")
        if self.contrast is None:
            object.__setattr__(self, "contrast", DEFAULT_CONTRAST[self.channel])
        if not math.isfinite(self.contrast) or not 0.0 <= self.contrast <= 1.0:
            raise InvalidArgumentError(f"contrast must lie in [0, 1], got {self.contrast}")
        if not math.isfinite(self.baseline):
            raise InvalidArgumentError(f"baseline must be finite, got {self.baseline}")

    @property
    def column(self) -> str:
        return f"signal_{self.channel}"


def readout_map(
    x: Union[float, npt.ArrayLike],
    model: ReadoutModel,
    kind: str = "echo",
) -> Union[float, npt.NDArray[np.float64]]:
    """signal = baseline * (1 - C (1 - x) / 2) for an echo x in [-1, 1].

    With ``kind="population"`` the input is the |0> population in [0, 1]
    and is converted to x = 2p - 1 first.
    """
    values = np.asarray(x, dtype=float)
    if kind == "echo":
        low, high = -1.0, 1.0
    elif kind == "population":
        low, high = 0.0, 1.0
    else:
        raise InvalidArgumentError(f"readout input kind must be 'echo' or 'population', got '{kind}'")
    if not np.all(np.isfinite(values)) or np.any(values < low - _RANGE_TOL) or np.any(values > high + _RANGE_TOL):
        raise ValidationError(f"{kind} values must lie in [{low:g}, {high:g}]")
    if kind == "population":
        values = 2.0 * values - 1.0
    signal = model.baseline * (1.0 - model.contrast * (1.0 - values) / 2.0)
    return float(signal) if signal.ndim == 0 else signal
