"""Unit-area inhomogeneous lineshapes."""

import math
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from ..errors import InvalidArgumentError

LINESHAPES = ("lorentzian", "gaussian")

# Gaussian convolution is cut off at this many standard deviations
GAUSS_CUTOFF_SIGMA = 8.0


@dataclass(frozen=True)
class LineshapeConfig:
    kind: str = "lorentzian"
    fwhm_mhz: float = 10.0

    def __post_init__(self):
        if self.kind not in LINESHAPES:
            raise InvalidArgumentError(
                f"lineshape must be one of {', '.join(LINESHAPES)}, got '{self.kind}'"
            )
        if not math.isfinite(self.fwhm_mhz) or self.fwhm_mhz <= 0:
            raise InvalidArgumentError(f"fwhm must be > 0 MHz, got {self.fwhm_mhz}")

    @property
    def half_width(self) -> float:
        return self.fwhm_mhz / 2.0

    @property
    def sigma(self) -> float:
        return self.fwhm_mhz / (2.0 * math.sqrt(2.0 * math.log(2.0)))

    def __call__(self, x: npt.ArrayLike) -> npt.NDArray[np.float64]:
        if self.kind == "lorentzian":
            return lorentzian(x, self.fwhm_mhz)
        return gaussian(x, self.fwhm_mhz)


def lorentzian(x: npt.ArrayLike, fwhm_mhz: float) -> npt.NDArray[np.float64]:
    gamma = fwhm_mhz / 2.0
    x = np.asarray(x, dtype=float)
    return gamma / (np.pi * (x * x + gamma * gamma))


def gaussian(x: npt.ArrayLike, fwhm_mhz: float) -> npt.NDArray[np.float64]:
    sigma = fwhm_mhz / (2.0 * math.sqrt(2.0 * math.log(2.0)))
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * (x / sigma) ** 2) / (sigma * math.sqrt(2.0 * math.pi))
