"""Ensemble DEER and ODMR spectra built from stick spectra.

Bath spins are treated independently: every stick contributes its
generalized-Rabi flip probability, averaged over the inhomogeneous
lineshape, and the NV echo decays with the total flipped fraction.
"""

import math
from dataclasses import dataclass, field as dataclass_field
from typing import Callable, Optional, Sequence, Union

import numpy as np
import numpy.typing as npt
from scipy.integrate import quad_vec
from scipy.signal import find_peaks

from ..errors import InvalidArgumentError
from ..spectrum import Spectrum, Sweep
from ..spin.constants import NS_PER_US
from ..spin.hamiltonians import FieldConfig
from ..spin.transitions import StickSpectrum, TransitionLine, nv_lines
from ..utils.logging import log_debug
from .lineshapes import GAUSS_CUTOFF_SIGMA, LineshapeConfig
from .readout import ReadoutModel, readout_map

QUAD_EPSREL = 1e-8
DIP_PROMINENCE = 0.01

Array = npt.NDArray[np.float64]


def _rabi_flip(detuning: Array, omega_mhz: float, t_rf_ns: float) -> Array:
    """Omega^2/(Omega^2+d^2) sin^2(pi t sqrt(Omega^2+d^2)), t in us."""
    if omega_mhz == 0.0 or t_rf_ns == 0.0:
        return np.zeros_like(detuning)
    generalized = np.hypot(omega_mhz, detuning)
    return (omega_mhz / generalized) ** 2 * np.sin(np.pi * generalized * t_rf_ns / NS_PER_US) ** 2


def _convolve(fn: Callable[[float], Array], lineshape: LineshapeConfig) -> Array:
    """Average fn(x) over the lineshape offset x."""
    if lineshape.kind == "lorentzian":
        half = lineshape.half_width
        # x = (fwhm/2) tan(theta) maps the Lorentzian onto a flat density 1/pi
        result, _err = quad_vec(
            lambda theta: fn(half * math.tan(theta)) / math.pi,
            -math.pi / 2, math.pi / 2, epsrel=QUAD_EPSREL, norm="max",
        )
        return result
    sigma = lineshape.sigma
    cut = GAUSS_CUTOFF_SIGMA * sigma
    norm = 1.0 / (sigma * math.sqrt(2.0 * math.pi))
    result, _err = quad_vec(
        lambda x: fn(x) * norm * math.exp(-0.5 * (x / sigma) ** 2),
        -cut, cut, epsrel=QUAD_EPSREL, norm="max",
    )
    return result


def _check_pulse(omega_rf_mhz: float, t_rf_ns: float) -> None:
    if not math.isfinite(omega_rf_mhz) or omega_rf_mhz < 0:
        raise InvalidArgumentError(f"RF amplitude must be >= 0 MHz, got {omega_rf_mhz}")
    if not math.isfinite(t_rf_ns) or t_rf_ns < 0:
        raise InvalidArgumentError(f"RF duration must be >= 0 ns, got {t_rf_ns}")


def flip_probability(
    f_rf_mhz: Union[float, npt.ArrayLike],
    line: Union[TransitionLine, float],
    omega_rf_mhz: float,
    t_rf_ns: float,
    lineshape: Optional[LineshapeConfig] = None,
) -> Union[float, Array]:
    """Probability that a rectangular RF pulse inverts a bath spin on ``line``.

    Without a lineshape the bare generalized-Rabi formula is returned.
    """
    _check_pulse(omega_rf_mhz, t_rf_ns)
    center = line.frequency_mhz if isinstance(line, TransitionLine) else float(line)
    detuning = np.asarray(f_rf_mhz, dtype=float) - center
    flat = np.atleast_1d(detuning)
    if lineshape is None:
        p = _rabi_flip(flat, omega_rf_mhz, t_rf_ns)
    else:
        p = _convolve(lambda x: _rabi_flip(flat - x, omega_rf_mhz, t_rf_ns), lineshape)
    p = np.clip(p, 0.0, 1.0)
    return float(p[0]) if detuning.ndim == 0 else p.reshape(detuning.shape)


@dataclass(frozen=True)
class EnsembleModel:
    """Mean-field bath model for the DEER echo.

    ``delta_mhz`` is the mean NV-bath dipolar rate; the echo decays as
    exp(-2 delta (2 tau) P) with P the flipped bath fraction.
    """
    delta_mhz: float = 0.05
    tau_ns: float = 1400.0
    omega_rf_mhz: float = 25.0 / 3.0
    t_rf_ns: float = 60.0
    lineshape: Optional[LineshapeConfig] = dataclass_field(default_factory=LineshapeConfig)
    readout: ReadoutModel = dataclass_field(default_factory=ReadoutModel)

    def __post_init__(self):
        if not math.isfinite(self.delta_mhz) or self.delta_mhz < 0:
            raise InvalidArgumentError(f"mean coupling must be >= 0 MHz, got {self.delta_mhz}")
        if not math.isfinite(self.tau_ns) or self.tau_ns < 0:
            raise InvalidArgumentError(f"tau must be >= 0 ns, got {self.tau_ns}")
        _check_pulse(self.omega_rf_mhz, self.t_rf_ns)

    def echo(self, flipped: npt.ArrayLike) -> Array:
        return np.exp(-2.0 * self.delta_mhz * (2.0 * self.tau_ns / NS_PER_US) * np.asarray(flipped, dtype=float))


def _normalized_weights(lines: Sequence[TransitionLine]) -> Array:
    weights = np.array([line.weight for line in lines], dtype=float)
    total = float(np.sum(weights))
    return weights / total if total > 0 else weights


def flipped_fraction(model: EnsembleModel, sticks: StickSpectrum, frequencies: Array) -> Array:
    """P(f) = sum_k w_k p_k(f) with normalized multiplicity-weighted intensities."""
    lines = sticks.lines
    if not lines or model.omega_rf_mhz == 0.0 or model.t_rf_ns == 0.0:
        return np.zeros_like(frequencies)
    centers = np.array([line.frequency_mhz for line in lines])
    weights = _normalized_weights(lines)
    detunings = frequencies[:, None] - centers[None, :]

    def total(x: float) -> Array:
        return _rabi_flip(detunings - x, model.omega_rf_mhz, model.t_rf_ns) @ weights

    flipped = total(0.0) if model.lineshape is None else _convolve(total, model.lineshape)
    return np.clip(flipped, 0.0, 1.0)


def deer_spectrum(model: EnsembleModel, sticks: StickSpectrum, sweep: Sweep) -> Spectrum:
    """Readout signal against RF frequency."""
    freqs = sweep.axis()
    flipped = flipped_fraction(model, sticks, freqs)
    echo = model.echo(flipped)
    log_debug(
        f"deer spectrum: {len(sticks.lines)} lines, max flipped fraction {float(np.max(flipped)):.4g}"
    )
    return Spectrum(freqs, readout_map(echo, model.readout), channel=model.readout.column)


def broaden(sticks: StickSpectrum, shape: LineshapeConfig, sweep: Sweep) -> Spectrum:
    """Sum of unit-area lineshapes scaled by each stick's weight."""
    freqs = sweep.axis()
    signal = np.zeros_like(freqs)
    for line in sticks.lines:
        signal += line.weight * shape(freqs - line.frequency_mhz)
    return Spectrum(freqs, signal, channel="intensity")


def odmr_spectrum(
    field: FieldConfig,
    sweep: Sweep,
    shape: LineshapeConfig,
    readout: ReadoutModel,
    d_mhz: float = 2870.0,
    g: float = 2.0028,
) -> Spectrum:
    """cw ODMR/PDMR: broadened NV sticks, deepest point at full contrast."""
    sticks = nv_lines(field, d_mhz=d_mhz, g=g)
    absorbed = broaden(sticks, shape, sweep).signal
    peak = float(np.max(absorbed))
    x = 1.0 - 2.0 * absorbed / peak if peak > 0 else np.ones_like(absorbed)
    return Spectrum(sweep.axis(), readout_map(np.clip(x, -1.0, 1.0), readout), channel=readout.column)


def find_dips(spectrum: Spectrum, prominence: Optional[float] = None) -> Array:
    """Axis positions of the local minima.

    The default prominence floor is 1 % of the spectrum's total depth.
    """
    signal = spectrum.signal
    depth = float(np.max(signal) - np.min(signal))
    if depth <= 0.0:
        return np.array([], dtype=float)
    if prominence is None:
        prominence = DIP_PROMINENCE * depth
    indices, _props = find_peaks(-signal, prominence=prominence)
    return spectrum.axis[indices]
