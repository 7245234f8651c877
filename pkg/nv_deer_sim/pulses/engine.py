"""Rotating-frame density-matrix engine for an NV two-level system coupled
to one bath spin.

The NV is reduced to its |mS=0> <-> |mS=-1> transition (basis order |0>,
|-1>). The bath is kept in its own eigenbasis; every eigenstate belongs to
the electron-down (k=0) or electron-up (k=1) sector, and the RF frame
rotates the k=1 sector at the RF carrier. Counter-rotating and
sector-crossing terms are dropped.
"""

from dataclasses import dataclass, field as dataclass_field
from functools import cached_property
from typing import NamedTuple, Optional

import numpy as np

from ..errors import InvalidArgumentError, ValidationError
from ..spin.core import (
    DensityMatrix,
    Operator,
    check_density_matrix,
    eigh,
    kron,
    maximally_mixed,
    partial_trace_keep_first,
    propagate,
)
from ..spin.hamiltonians import (
    FieldConfig,
    SpinSpecies,
    aligned_axis,
    build_hamiltonian,
    default_species,
    electron_operators,
    field_frame,
)
from ..utils.logging import log_debug
from .sequence import MwPulse, PulseBlock, PulseSequence, Readout, RfPulse

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
NV_DIM = 2

_SECTOR_TOL = 1e-6
_DRIVE_TOL = 1e-6


class BathModel(NamedTuple):
    """Bath spin in its eigenbasis."""
    energies: np.ndarray
    sector: np.ndarray
    sx: Operator
    sz_secular: Operator

    @property
    def dim(self) -> int:
        return int(self.energies.shape[0])

    def addressed_element(self, rf_mhz: float) -> complex:
        """Sx element of the sector-crossing line closest to ``rf_mhz``; the strongest wins a tie."""
        best = None
        for i in np.flatnonzero(self.sector == 0):
            for j in np.flatnonzero(self.sector == 1):
                element = self.sx[j, i]
                if abs(element) <= _DRIVE_TOL:
                    continue
                key = (round(abs(self.energies[j] - self.energies[i] - rf_mhz), 9), -abs(element))
                if best is None or key < best[0]:
                    best = (key, element)
        if best is None:
            raise ValidationError("bath has no RF-driven transition")
        return complex(best[1])


@dataclass(frozen=True)
class Frame:
    """Carrier frequencies (MHz) of the NV and bath rotating frames."""
    mw_mhz: float
    rf_mhz: float = 0.0


@dataclass(frozen=True)
class PairSystem:
    """NV two-level transition plus one bath spin with secular coupling.

    ``coupling_mhz`` is the shift of the NV transition between the bath
    electron's up and down manifolds.
    """
    f_nv_mhz: float
    bath: str = "bare"
    coupling_mhz: float = 0.0
    field: FieldConfig = dataclass_field(default_factory=lambda: FieldConfig(78.6))
    omega_mw_mhz: float = 10.0 / 3.0
    bath_axis: Optional[tuple] = None
    bath_species: Optional[SpinSpecies] = None

    def __post_init__(self):
        if self.bath not in ("p1", "nvh", "bare"):
            raise InvalidArgumentError(f"bath must be 'p1', 'nvh' or 'bare', got '{self.bath}'")
        if not np.isfinite(self.coupling_mhz):
            raise InvalidArgumentError("coupling must be finite")

    @property
    def species(self) -> SpinSpecies:
        return self.bath_species or default_species(self.bath)

    @cached_property
    def bath_model(self) -> BathModel:
        if self.field.magnitude_gauss == 0.0:
            raise ValidationError("the pair engine needs a non-zero field to define bath sectors")
        species = self.species
        axis = self.bath_axis if self.bath_axis is not None else aligned_axis(self.field)
        b, n = field_frame(self.field, axis)
        eig = eigh(build_hamiltonian(species, b, n))
        ops = electron_operators(species)
        v = eig.states
        sx = v.conj().T @ ops.x @ v
        sz = v.conj().T @ ops.z @ v
        sz_diag = np.real(np.diag(sz))
        if np.any(np.abs(sz_diag) < _SECTOR_TOL):
            raise ValidationError("bath eigenstates have no electron-spin direction; sectors undefined")
        sector = (sz_diag > 0).astype(int)
        same = sector[:, None] == sector[None, :]
        log_debug(f"bath {species.name}: sectors {sector.tolist()}")
        return BathModel(eig.energies, sector, sx, np.where(same, sz, 0.0))

    @property
    def bath_dim(self) -> int:
        return self.bath_model.dim

    @property
    def dim(self) -> int:
        return NV_DIM * self.bath_dim

    def bath_lines(self) -> np.ndarray:
        """Sector-crossing transition frequencies with non-zero drive."""
        model = self.bath_model
        lines = []
        for i in range(model.dim):
            for j in range(model.dim):
                if model.sector[i] == 0 and model.sector[j] == 1 and abs(model.sx[j, i]) > _DRIVE_TOL:
                    lines.append(model.energies[j] - model.energies[i])
        return np.array(sorted(lines))


def initial_state(system: PairSystem) -> DensityMatrix:
    """NV in |0> and the bath maximally mixed."""
    nv = np.zeros((NV_DIM, NV_DIM), dtype=complex)
    nv[0, 0] = 1.0
    return kron(nv, maximally_mixed(system.bath_dim))


def _bath_frame_diagonal(model: BathModel, rf_mhz: float) -> np.ndarray:
    diag = model.energies - model.sector * rf_mhz
    return diag - np.mean(diag)


def rotating_frame_hamiltonian(system: PairSystem, block: PulseBlock, frame: Optional[Frame] = None) -> Operator:
    """Block Hamiltonian (MHz) in the doubly rotating frame."""
    if isinstance(block, Readout):
        raise InvalidArgumentError("readout has no Hamiltonian")
    if frame is None:
        frame = Frame(
            mw_mhz=block.frequency_mhz if isinstance(block, MwPulse) else system.f_nv_mhz,
            rf_mhz=block.frequency_mhz if isinstance(block, RfPulse) else 0.0,
        )
    model = system.bath_model
    bath_eye = np.eye(model.dim, dtype=complex)

    detuning = system.f_nv_mhz - frame.mw_mhz
    h = kron(-detuning / 2 * SIGMA_Z, bath_eye)
    h = h + kron(np.eye(NV_DIM), np.diag(_bath_frame_diagonal(model, frame.rf_mhz)).astype(complex))
    h = h + kron(system.coupling_mhz / 2 * SIGMA_Z, model.sz_secular)

    if isinstance(block, MwPulse) and block.omega_mhz:
        drive = block.omega_mhz / 2 * (np.cos(block.phase) * SIGMA_X + np.sin(block.phase) * SIGMA_Y)
        h = h + kron(drive, bath_eye)
    elif isinstance(block, RfPulse) and block.omega_mhz:
        up = model.sector[:, None] == 1
        down = model.sector[None, :] == 0
        # omega is the nutation rate of the addressed line, not of a bare spin-1/2
        scale = block.omega_mhz / (2.0 * abs(model.addressed_element(frame.rf_mhz)))
        lower = np.where(up & down, scale * model.sx * np.exp(1j * block.phase), 0.0)
        h = h + kron(np.eye(NV_DIM), lower + lower.conj().T)
    return h


class SequenceResult(NamedTuple):
    rho: DensityMatrix
    nv_population: float


def sequence_frame(seq: PulseSequence, system: PairSystem) -> Frame:
    """One carrier per channel; the NV frame defaults to the NV transition."""
    mw = seq.carriers(MwPulse)
    rf = seq.carriers(RfPulse)
    if len(mw) > 1 or len(rf) > 1:
        raise ValidationError(
            f"each channel must use a single carrier (mw {list(mw)}, rf {list(rf)})"
        )
    return Frame(mw_mhz=mw[0] if mw else system.f_nv_mhz, rf_mhz=rf[0] if rf else 0.0)


def nv_population(rho: DensityMatrix) -> float:
    """Probability of the bright NV state |0>, traced over the bath."""
    reduced = partial_trace_keep_first(rho, NV_DIM)
    return float(np.clip(np.real(reduced[0, 0]), 0.0, 1.0))


def run_sequence(
    seq: PulseSequence,
    system: PairSystem,
    rho0: Optional[DensityMatrix] = None,
    substeps: int = 1,
    check: bool = True,
) -> SequenceResult:
    """Propagate ``rho0`` block by block up to the terminal Readout."""
    seq.validate()
    if substeps < 1:
        raise InvalidArgumentError(f"substeps must be >= 1, got {substeps}")
    rho = initial_state(system) if rho0 is None else np.array(rho0, dtype=complex)
    if rho.shape != (system.dim, system.dim):
        raise InvalidArgumentError(f"initial state must be {system.dim}x{system.dim}, got {rho.shape}")
    frame = sequence_frame(seq, system)

    for block in seq.blocks:
        if isinstance(block, Readout):
            break
        if block.duration_ns == 0:
            continue
        h = rotating_frame_hamiltonian(system, block, frame)
        step = block.duration_ns / substeps
        for _ in range(substeps):
            rho = propagate(h, step, rho)

    if check:
        check_density_matrix(rho)
    return SequenceResult(rho, nv_population(rho))
