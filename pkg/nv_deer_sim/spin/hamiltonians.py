"""Spin Hamiltonians of the NV ground state, the P1 center and the NVH center.

All Hamiltonians are H/h in MHz, built from a lab-frame field vector (gauss)
and the defect's own symmetry axis. Hyperfine and quadrupole tensors are
axially symmetric about that axis.
"""

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
import numpy.typing as npt

from ..errors import InvalidArgumentError, InvalidOrderingError
from .constants import G_N14, MU_N_MHZ_PER_G, zeeman_mhz_per_gauss
from .core import Operator, SpinMatrices, embed, multiplicity, spin_operators

Vector = npt.NDArray[np.float64]

SPECIES_NAMES = ("nv", "p1", "nvh", "bare")

# <111> directions, deterministic order
_AXES = np.array(
    [
        [1.0, 1.0, 1.0],
        [1.0, -1.0, -1.0],
        [-1.0, 1.0, -1.0],
        [-1.0, -1.0, 1.0],
    ]
) / np.sqrt(3.0)

_AXIAL_TOL = 1e-9


def _unit(vector: npt.ArrayLike, what: str = "vector") -> Vector:
    v = np.asarray(vector, dtype=float).reshape(3)
    norm = float(np.linalg.norm(v))
    if not np.isfinite(norm) or norm == 0.0:
        raise InvalidArgumentError(f"{what} must be a non-zero finite 3-vector, got {list(v)}")
    return v / norm


@dataclass(frozen=True)
class FieldConfig:
    """Static magnetic field: magnitude in gauss, lab-frame unit direction."""
    magnitude_gauss: float
    direction: tuple = (1.0, 1.0, 1.0)

    def __post_init__(self):
        if not np.isfinite(self.magnitude_gauss) or self.magnitude_gauss < 0:
            raise InvalidArgumentError(
                f"field magnitude must be finite and >= 0, got {self.magnitude_gauss}"
            )
        object.__setattr__(self, "direction", tuple(float(c) for c in _unit(self.direction, "field direction")))

    @property
    def vector(self) -> Vector:
        return self.magnitude_gauss * np.asarray(self.direction)


@dataclass(frozen=True)
class Nucleus:
    """Nuclear spin with an axial hyperfine tensor (MHz)."""
    label: str
    spin: float
    a_par_mhz: float
    a_perp_mhz: float
    nuclear_g: float = 0.0


@dataclass(frozen=True)
class SpinSpecies:
    """Parameters of one paramagnetic defect."""
    name: str
    electron_spin: float
    g: float
    nuclei: tuple = ()
    q_perp_mhz: float = 0.0
    d_mhz: float = 0.0
    nuclear_zeeman: bool = False

    @property
    def dims(self) -> tuple:
        return (multiplicity(self.electron_spin),) + tuple(multiplicity(n.spin) for n in self.nuclei)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def with_overrides(self, **changes) -> "SpinSpecies":
        return replace(self, **changes)


def nv_species(g: float = 2.0028, d_mhz: float = 2870.0) -> SpinSpecies:
    return SpinSpecies(name="nv", electron_spin=1, g=g, d_mhz=d_mhz)


def p1_species(
    g: float = 2.0024,
    a_par_mhz: float = 114.0,
    a_perp_mhz: float = 81.0,
    q_perp_mhz: float = -3.97,
    nuclear_g: float = G_N14,
) -> SpinSpecies:
    return SpinSpecies(
        name="p1",
        electron_spin=0.5,
        g=g,
        nuclei=(Nucleus("N", 1, a_par_mhz, a_perp_mhz, nuclear_g),),
        q_perp_mhz=q_perp_mhz,
        nuclear_zeeman=True,
    )


def nvh_species(
    g: float = 2.0024,
    a_h_par_mhz: float = 13.69,
    a_h_perp_mhz: float = -9.05,
    a_n_par_mhz: float = 2.94,
    a_n_perp_mhz: float = 3.1,
) -> SpinSpecies:
    return SpinSpecies(
        name="nvh",
        electron_spin=0.5,
        g=g,
        nuclei=(
            Nucleus("H", 0.5, a_h_par_mhz, a_h_perp_mhz),
            Nucleus("N", 1, a_n_par_mhz, a_n_perp_mhz),
        ),
    )


def bare_species(g: float = 2.0023) -> SpinSpecies:
    """Free electron spin 1/2 without nuclei."""
    return SpinSpecies(name="bare", electron_spin=0.5, g=g)


def default_species(name: str) -> SpinSpecies:
    factories = {"nv": nv_species, "p1": p1_species, "nvh": nvh_species, "bare": bare_species}
    try:
        return factories[name]()
    except KeyError:
        raise InvalidArgumentError(
            f"unknown species '{name}' (expected one of {', '.join(SPECIES_NAMES)})"
        ) from None


# ---------------------------------------------------------------------------
# Geometry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OrientationSet:
    """The four <111> axes and which of them are axial to the field."""
    axes: npt.NDArray[np.float64]
    axial: tuple = ()

    def projections(self, direction: npt.ArrayLike) -> npt.NDArray[np.float64]:
        return self.axes @ _unit(direction, "field direction")


def orientation_axes(field: Optional[FieldConfig] = None) -> OrientationSet:
    """Four <111> unit vectors; tagged axial when |projection| = 1."""
    axes = _AXES.copy()
    if field is None:
        return OrientationSet(axes, tuple(False for _ in axes))
    proj = axes @ np.asarray(field.direction)
    return OrientationSet(axes, tuple(bool(abs(abs(p) - 1.0) < _AXIAL_TOL) for p in proj))


def aligned_axis(field: FieldConfig) -> Vector:
    """The <111> axis with the largest |projection| on the field."""
    proj = _AXES @ np.asarray(field.direction)
    return _AXES[int(np.argmax(np.abs(proj)))].copy()


def rotation_to_z(direction: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """Rotation matrix taking ``direction`` onto +z (Rodrigues)."""
    d = _unit(direction, "direction")
    z = np.array([0.0, 0.0, 1.0])
    c = float(d @ z)
    if c > 1.0 - 1e-15:
        return np.eye(3)
    if c < -1.0 + 1e-15:
        return np.diag([1.0, -1.0, -1.0])
    k = np.cross(d, z)
    s = float(np.linalg.norm(k))
    k = k / s
    kx = np.array([[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]])
    return np.eye(3) + s * kx + (1.0 - c) * (kx @ kx)


def field_frame(field: FieldConfig, axis: npt.ArrayLike) -> tuple:
    """Rotate field and defect axis together so the field points along +z.

    Returns (field_vector_gauss, axis). With zero field nothing is rotated.
    """
    b = field.vector
    n = _unit(axis, "axis")
    if field.magnitude_gauss == 0.0:
        return b, n
    rot = rotation_to_z(field.direction)
    return rot @ b, rot @ n


# ---------------------------------------------------------------------------
# Hamiltonian terms
# ---------------------------------------------------------------------------

def axial_tensor(par: float, perp: float, axis: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """perp * 1 + (par - perp) n n^T."""
    n = _unit(axis, "axis")
    return perp * np.eye(3) + (par - perp) * np.outer(n, n)


def _full_ops(spin: float, position: int, dims: Sequence[int]) -> SpinMatrices:
    single = spin_operators(spin)
    return SpinMatrices(*(embed(op, position, dims) for op in single))


def _dot(vector: npt.ArrayLike, ops: SpinMatrices) -> Operator:
    v = np.asarray(vector, dtype=float)
    return v[0] * ops.x + v[1] * ops.y + v[2] * ops.z


def _coupling(tensor: npt.NDArray[np.float64], left: SpinMatrices, right: SpinMatrices) -> Operator:
    out = np.zeros_like(left.x)
    for i in range(3):
        for j in range(3):
            if tensor[i, j] != 0.0:
                out = out + tensor[i, j] * (left[i] @ right[j])
    return out


def electron_operators(species: SpinSpecies) -> SpinMatrices:
    """Electron spin operators embedded in the species' full space."""
    return _full_ops(species.electron_spin, 0, species.dims)


def build_hamiltonian(species: SpinSpecies, field_vector: npt.ArrayLike, axis: npt.ArrayLike) -> Operator:
    """Generic spin Hamiltonian for ``species``.

    H = D (n.S)^2 + g muB B.S + sum_k [S.A_k.I_k - g_k muN B.I_k] + Q ((n.I)^2 - I(I+1)/3)
    with the quadrupole acting on the first nucleus.
    """
    dims = species.dims
    b = np.asarray(field_vector, dtype=float).reshape(3)
    n = _unit(axis, "axis")
    s_ops = electron_operators(species)

    h = zeeman_mhz_per_gauss(species.g) * _dot(b, s_ops)
    if species.d_mhz:
        s_axial = _dot(n, s_ops)
        h = h + species.d_mhz * (s_axial @ s_axial)

    for k, nucleus in enumerate(species.nuclei, start=1):
        i_ops = _full_ops(nucleus.spin, k, dims)
        h = h + _coupling(axial_tensor(nucleus.a_par_mhz, nucleus.a_perp_mhz, n), s_ops, i_ops)
        if species.nuclear_zeeman and nucleus.nuclear_g:
            h = h - nucleus.nuclear_g * MU_N_MHZ_PER_G * _dot(b, i_ops)
        if k == 1 and species.q_perp_mhz:
            i_axial = _dot(n, i_ops)
            spin = nucleus.spin
            h = h + species.q_perp_mhz * (i_axial @ i_axial - spin * (spin + 1) / 3.0 * np.eye(h.shape[0]))
    return h


def build_nv_gs(field: FieldConfig, axis: npt.ArrayLike, d_mhz: float = 2870.0, g: float = 2.0028) -> Operator:
    """NV ground state (S=1): D Sz'^2 + g muB/h B.S, 3x3."""
    return build_hamiltonian(nv_species(g=g, d_mhz=d_mhz), field.vector, axis)


def build_p1(field: FieldConfig, axis: npt.ArrayLike, species: Optional[SpinSpecies] = None) -> Operator:
    """P1 center (S=1/2 (x) 14N I=1), 6x6."""
    return build_hamiltonian(species or p1_species(), field.vector, axis)


def build_nvh(field: FieldConfig, axis: npt.ArrayLike, species: Optional[SpinSpecies] = None) -> Operator:
    """NVH center (S=1/2 (x) H I=1/2 (x) 14N I=1), 12x12."""
    return build_hamiltonian(species or nvh_species(), field.vector, axis)


def calibrate_field(f_plus: float, f_minus: float, g: float = 2.0028) -> float:
    """Field (G) along the aligned NV axis from its two ODMR transitions (MHz)."""
    if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
        raise InvalidArgumentError("transition frequencies must be finite")
    if f_minus <= 0:
        raise InvalidArgumentError(f"f_minus must be positive, got {f_minus} MHz")
    if f_plus < f_minus:
        raise InvalidOrderingError(
            f"f_plus ({f_plus} MHz) must not be below f_minus ({f_minus} MHz)"
        )
    return (f_plus - f_minus) / (2.0 * zeeman_mhz_per_gauss(g))
