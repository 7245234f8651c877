"""Turn a SimConfig into the physics objects a command needs."""

from typing import Dict, Optional

from ..ensemble.lineshapes import LineshapeConfig
from ..ensemble.readout import ReadoutModel
from ..ensemble.spectra import EnsembleModel
from ..errors import ValidationError
from ..pulses.engine import PairSystem
from ..pulses.protocols import pair_for_frequency
from ..spectrum import Sweep
from ..spin.constants import NS_PER_US
from ..spin.hamiltonians import (
    FieldConfig,
    SpinSpecies,
    bare_species,
    nv_species,
    nvh_species,
    p1_species,
)
from ..spin.transitions import (
    StickSpectrum,
    aligned_nv_frequencies,
    group_centers,
    stick_spectrum,
)
from ..utils.logging import log_debug
from .schema import SimConfig

# Computed frequency names and the groups they come from
_GROUP_NAMES = {"I": "I", "II": "II", "III": "III", "IV": "IV", "V": "V",
                "nvh_low": "NVH-low", "nvh_high": "NVH-high"}

_DEFAULT_RF_NAME = {"p1": "II", "nvh": "nvh_low"}


def field_config(config: SimConfig) -> FieldConfig:
    return FieldConfig(config.field.magnitude_gauss, config.field.direction)


def species(config: SimConfig, name: str) -> SpinSpecies:
    """Species with its parameters taken from the config."""
    section = config.species
    if name == "nv":
        return nv_species(g=section.nv.g, d_mhz=section.nv.d_mhz)
    if name == "p1":
        p1 = section.p1
        return p1_species(p1.g, p1.a_par_mhz, p1.a_perp_mhz, p1.q_perp_mhz, p1.nuclear_g)
    if name == "nvh":
        nvh = section.nvh
        return nvh_species(nvh.g, nvh.a_h_par_mhz, nvh.a_h_perp_mhz, nvh.a_n_par_mhz, nvh.a_n_perp_mhz)
    if name == "bare":
        return bare_species()
    raise ValidationError(f"unknown species '{name}' (expected nv, p1, nvh or bare)")


def sticks(config: SimConfig, name: str) -> StickSpectrum:
    return stick_spectrum(species(config, name), field_config(config), config.ensemble.threshold)


def named_frequencies(config: SimConfig) -> Dict[str, float]:
    """f1/f2 of the aligned NV, P1 and NVH group centers, then user names on top."""
    field = field_config(config)
    nv = config.species.nv
    f1, f2 = aligned_nv_frequencies(field, d_mhz=nv.d_mhz, g=nv.g)
    names = {"f1": f1, "f2": f2}
    if field.magnitude_gauss > 0:
        centers = {**group_centers(sticks(config, "p1")), **group_centers(sticks(config, "nvh"))}
        for name, group in _GROUP_NAMES.items():
            if group in centers:
                names[name] = centers[group]
    names.update(config.frequencies)
    log_debug("named frequencies: " + ", ".join(f"{k}={v:.4f}" for k, v in names.items()))
    return names


def omega_mw(config: SimConfig) -> float:
    pulses = config.pulses
    return pulses.omega_mw_mhz if pulses.omega_mw_mhz is not None else NS_PER_US / (2.0 * pulses.tpi_mw_ns)


def rf_pi_time(config: SimConfig, bath: str) -> float:
    return config.pulses.tpi_rf_nvh_ns if bath == "nvh" else config.pulses.tpi_rf_ns


def omega_rf(config: SimConfig, bath: str) -> float:
    pulses = config.pulses
    if pulses.omega_rf_mhz is not None:
        return pulses.omega_rf_mhz
    return NS_PER_US / (2.0 * rf_pi_time(config, bath))


def t_rf(config: SimConfig, bath: str) -> float:
    return config.pulses.trf_ns if config.pulses.trf_ns is not None else rf_pi_time(config, bath)


def f_rf(config: SimConfig, bath: str) -> float:
    """RF carrier: explicit value, else the bath's default group center."""
    if config.pulses.frf_mhz is not None:
        return config.pulses.frf_mhz
    names = named_frequencies(config)
    name = _DEFAULT_RF_NAME.get(bath)
    if name in names:
        return names[name]
    lines = sticks(config, bath).lines
    if not lines:
        raise ValidationError(f"no {bath} transition to place the RF carrier on; set pulses.frf_mhz")
    return max(lines, key=lambda line: line.weight).frequency_mhz


def lineshape(config: SimConfig) -> LineshapeConfig:
    return LineshapeConfig(config.ensemble.lineshape, config.ensemble.fwhm_mhz)


def readout(config: SimConfig) -> ReadoutModel:
    section = config.readout
    return ReadoutModel(section.channel, section.contrast, section.baseline)


def ensemble_model(config: SimConfig, bath: str) -> EnsembleModel:
    return EnsembleModel(
        delta_mhz=config.ensemble.delta_mhz,
        tau_ns=config.pulses.tau_ns,
        omega_rf_mhz=omega_rf(config, bath),
        t_rf_ns=t_rf(config, bath),
        lineshape=lineshape(config),
        readout=readout(config),
    )


def frequency_sweep(config: SimConfig) -> Sweep:
    return Sweep(config.sweep.min, config.sweep.max, config.sweep.points)


def time_sweep(config: SimConfig) -> Sweep:
    return Sweep(0.0, config.time.tmax_ns, config.time.points)


def pair_system(config: SimConfig, rf_carrier: Optional[float] = None) -> PairSystem:
    """NV |0>-|-1> pair with the configured bath, oriented for ``rf_carrier``."""
    bath = config.pair.bath
    nv = config.species.nv
    _f1, f2 = aligned_nv_frequencies(field_config(config), d_mhz=nv.d_mhz, g=nv.g)
    system = PairSystem(
        f_nv_mhz=f2,
        bath=bath,
        coupling_mhz=config.pair.coupling_mhz,
        field=field_config(config),
        omega_mw_mhz=omega_mw(config),
        bath_species=species(config, bath),
    )
    if rf_carrier is None:
        return system
    return pair_for_frequency(system, rf_carrier)
