"""Allowed ESR transitions, intensities and the P1/NVH line groups.

Selection uses drive-operator matrix elements, not quantum-number rules:
at fields of a few tens of gauss the P1 hyperfine coupling is comparable to
the electron Zeeman energy and the product-basis labels are only approximate.
"""

from dataclasses import dataclass, field as dataclass_field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import InvalidArgumentError
from ..utils.logging import log_debug, log_warn
from .constants import zeeman_mhz_per_gauss
from .core import EigenSystem, Operator, eigh, m_values
from .hamiltonians import (
    FieldConfig,
    SpinSpecies,
    aligned_axis,
    build_hamiltonian,
    electron_operators,
    field_frame,
    nv_species,
    orientation_axes,
)

GROUPS = ("I", "II", "III", "IV", "V", "NVH-low", "NVH-high", "ungrouped")

DEFAULT_THRESHOLD = 0.05

# Lines whose electron <Sz> changes by more than this are electron-flip (ESR) lines
ESR_SPIN_FLIP = 0.5

_LABEL_TIE = 1e-9
_DEGENERATE_MHZ = 1e-9
_EIGEN_MATCH = 1e-9

# (orientation class, mI) -> group
_P1_GROUP_KEYS = {
    ("axial", -1): "I",
    ("nonaxial", -1): "II",
    ("axial", 0): "III",
    ("nonaxial", 0): "III",
    ("nonaxial", 1): "IV",
    ("axial", 1): "V",
}


@dataclass(frozen=True)
class TransitionLine:
    """One stick: frequency (MHz), relative intensity and endpoint labels."""
    frequency_mhz: float
    intensity: float
    lower_label: tuple
    upper_label: tuple
    multiplicity: int = 1
    group: str = "ungrouped"
    ambiguous: bool = False
    spin_flip: Optional[float] = None

    def with_group(self, group: str) -> "TransitionLine":
        return TransitionLine(
            self.frequency_mhz, self.intensity, self.lower_label, self.upper_label,
            self.multiplicity, group, self.ambiguous, self.spin_flip,
        )

    def with_multiplicity(self, multiplicity: int) -> "TransitionLine":
        return TransitionLine(
            self.frequency_mhz, self.intensity, self.lower_label, self.upper_label,
            multiplicity, self.group, self.ambiguous, self.spin_flip,
        )

    def scaled(self, factor: float) -> "TransitionLine":
        return TransitionLine(
            self.frequency_mhz, self.intensity * factor, self.lower_label, self.upper_label,
            self.multiplicity, self.group, self.ambiguous, self.spin_flip,
        )

    @property
    def weight(self) -> float:
        return self.multiplicity * self.intensity

    def to_dict(self) -> dict:
        return {
            "frequency_mhz": self.frequency_mhz,
            "intensity": self.intensity,
            "lower_label": list(self.lower_label),
            "upper_label": list(self.upper_label),
            "multiplicity": self.multiplicity,
            "group": self.group,
            "ambiguous": self.ambiguous,
        }


@dataclass(frozen=True)
class StickSpectrum:
    """ESR lines of one species at one field, sorted by frequency."""
    species: str
    field: FieldConfig
    lines: tuple
    nuclear_lines: tuple = ()
    incomplete: tuple = ()
    group_offsets: Dict[str, float] = dataclass_field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "lines", tuple(sorted(self.lines, key=_sort_key)))
        object.__setattr__(self, "nuclear_lines", tuple(sorted(self.nuclear_lines, key=_sort_key)))

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([line.frequency_mhz for line in self.lines])

    def in_group(self, group: str) -> List[TransitionLine]:
        return [line for line in self.lines if line.group == group]


def _sort_key(line: TransitionLine):
    return (line.frequency_mhz, line.lower_label, line.upper_label)


# ---------------------------------------------------------------------------
# Lines from an eigensystem
# ---------------------------------------------------------------------------

def _labels(states: Operator, dims: Optional[Sequence[int]]) -> List[Tuple[tuple, bool]]:
    weights = np.abs(states) ** 2
    out = []
    if dims is not None:
        grids = np.meshgrid(*[m_values((d - 1) / 2) for d in dims], indexing="ij")
        flat = [g.reshape(-1) for g in grids]
    for k in range(states.shape[1]):
        column = weights[:, k]
        order = np.argsort(column)[::-1]
        best = int(order[0])
        ambiguous = len(order) > 1 and column[best] - column[int(order[1])] < _LABEL_TIE
        if dims is None:
            label = (best,)
        else:
            label = tuple(float(f[best]) for f in flat)
        out.append((label, bool(ambiguous)))
    return out


def _drive_elements(eig: EigenSystem, drive: Operator) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    v = eig.states
    elements = np.abs(v.conj().T @ np.asarray(drive) @ v) ** 2
    gaps = eig.energies[None, :] - eig.energies[:, None]
    return elements, gaps, gaps > _DEGENERATE_MHZ


def drive_strength(eig: EigenSystem, drive: Operator) -> float:
    """Largest |<f|drive|i>|^2 over non-degenerate pairs; the reference for relative intensities."""
    elements, _gaps, allowed = _drive_elements(eig, drive)
    return float(np.max(elements[allowed])) if np.any(allowed) else 0.0


def transition_lines(
    eig: EigenSystem,
    drive: Operator,
    threshold: float = DEFAULT_THRESHOLD,
    dims: Optional[Sequence[int]] = None,
    sz: Optional[Operator] = None,
) -> List[TransitionLine]:
    """Lines between eigenstate pairs with |<f|drive|i>|^2 above ``threshold``
    (relative to the strongest pair).

    ``dims`` gives the factor multiplicities used to label each eigenstate by
    its dominant product-basis state; ``sz`` (electron Sz in the same basis)
    enables the ``spin_flip`` character of each line.
    """
    if not 0.0 < threshold < 1.0:
        raise InvalidArgumentError(f"threshold must lie in (0, 1), got {threshold}")
    v = eig.states
    elements, gaps, allowed = _drive_elements(eig, drive)
    strongest = float(np.max(elements[allowed])) if np.any(allowed) else 0.0
    if strongest == 0.0:
        return []

    labels = _labels(v, dims)
    sz_diag = None
    if sz is not None:
        sz_diag = np.real(np.einsum("ik,ij,jk->k", v.conj(), np.asarray(sz), v))

    lines = []
    for i in range(eig.dim):
        for f in range(i + 1, eig.dim):
            if not allowed[i, f]:
                continue
            rel = elements[f, i] / strongest
            if rel < threshold:
                continue
            flip = None if sz_diag is None else float(abs(sz_diag[f] - sz_diag[i]))
            lines.append(
                TransitionLine(
                    frequency_mhz=float(gaps[i, f]),
                    intensity=float(min(rel, 1.0)),
                    lower_label=labels[i][0],
                    upper_label=labels[f][0],
                    ambiguous=labels[i][1] or labels[f][1],
                    spin_flip=flip,
                )
            )
    return sorted(lines, key=_sort_key)


# ---------------------------------------------------------------------------
# Orientation handling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OrientationClass:
    """Orientations sharing one eigenvalue set at the given field."""
    indices: tuple
    axis: np.ndarray
    axial: bool
    eig: EigenSystem
    lines: tuple

    @property
    def multiplicity(self) -> int:
        return len(self.indices)


def orientation_lines(
    species: SpinSpecies, field: FieldConfig, axis, threshold: float = DEFAULT_THRESHOLD
) -> Tuple[EigenSystem, List[TransitionLine]]:
    """All lines of one defect orientation, computed in the field frame."""
    b, n = field_frame(field, axis)
    h = build_hamiltonian(species, b, n)
    eig = eigh(h)
    ops = electron_operators(species)
    return eig, transition_lines(eig, ops.x, threshold, dims=species.dims, sz=ops.z)


def orientation_classes(
    species: SpinSpecies, field: FieldConfig, threshold: float = DEFAULT_THRESHOLD
) -> List[OrientationClass]:
    """Group the four <111> orientations by identical spectra.

    Intensities are rescaled so the strongest line of the species, over all
    classes, is 1.
    """
    orientations = orientation_axes(field)
    computed = [orientation_lines(species, field, axis, threshold) for axis in orientations.axes]
    drive = electron_operators(species).x
    strengths = [drive_strength(eig, drive) for eig, _lines in computed]
    peak = max(strengths)

    classes: List[List[int]] = []
    for idx, (eig, _lines) in enumerate(computed):
        for members in classes:
            ref = computed[members[0]][0].energies
            scale = 1.0 + float(np.max(np.abs(ref)))
            if np.max(np.abs(ref - eig.energies)) < _EIGEN_MATCH * scale:
                members.append(idx)
                break
        else:
            classes.append([idx])

    out = []
    for members in classes:
        first = members[0]
        eig, lines = computed[first]
        out.append(
            OrientationClass(
                indices=tuple(members),
                axis=orientations.axes[first],
                axial=any(orientations.axial[m] for m in members),
                eig=eig,
                lines=tuple(
                    line.with_multiplicity(len(members)).scaled(strengths[first] / peak if peak > 0 else 1.0)
                    for line in lines
                ),
            )
        )
    log_debug(f"{species.name}: orientation classes {[c.indices for c in out]}")
    return out


def _is_esr(line: TransitionLine) -> bool:
    return line.spin_flip is None or line.spin_flip > ESR_SPIN_FLIP


# ---------------------------------------------------------------------------
# Grouping
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class P1Grouping:
    lines: tuple
    incomplete: tuple
    group_offsets: Dict[str, float]


def _nuclear_m(line: TransitionLine) -> Optional[int]:
    if len(line.lower_label) < 2 or line.lower_label[1:] != line.upper_label[1:]:
        return None
    return int(round(line.lower_label[1]))


def p1_groups(lines_axial: Sequence[TransitionLine], lines_nonaxial: Sequence[TransitionLine]) -> P1Grouping:
    """Assign the P1 groups I-V from one axial and one non-axial orientation.

    Groups follow (mI, orientation class); the two central mI=0 lines merge
    into group III and their residual separation is kept in ``group_offsets``.
    """
    grouped: List[TransitionLine] = []
    found: Dict[Tuple[str, int], List[TransitionLine]] = {}
    for cls, lines in (("axial", lines_axial), ("nonaxial", lines_nonaxial)):
        for line in lines:
            m_i = _nuclear_m(line)
            group = _P1_GROUP_KEYS.get((cls, m_i)) if m_i is not None else None
            if group is None:
                grouped.append(line.with_group("ungrouped"))
                continue
            found.setdefault((cls, m_i), []).append(line)
            grouped.append(line.with_group(group))

    missing = []
    for key, group in _P1_GROUP_KEYS.items():
        if key not in found:
            missing.append(f"{group} ({key[0]} mI={key[1]:+d})")
    if missing:
        log_warn(f"P1 groups incomplete, no line above threshold for: {', '.join(missing)}")

    offsets = {}
    if ("axial", 0) in found and ("nonaxial", 0) in found:
        offsets["III"] = abs(
            _weighted_center(found[("axial", 0)]) - _weighted_center(found[("nonaxial", 0)])
        )
    return P1Grouping(tuple(grouped), tuple(missing), offsets)


def _weighted_center(lines: Sequence[TransitionLine]) -> float:
    weights = np.array([line.weight for line in lines])
    freqs = np.array([line.frequency_mhz for line in lines])
    return float(np.sum(weights * freqs) / np.sum(weights))


def group_centers(sticks: StickSpectrum) -> Dict[str, float]:
    """Weighted center frequency (MHz) of every populated group."""
    centers = {}
    for group in GROUPS:
        if group == "ungrouped":
            continue
        members = sticks.in_group(group)
        if members:
            centers[group] = _weighted_center(members)
    return centers


def stick_spectrum(
    species: SpinSpecies, field: FieldConfig, threshold: float = DEFAULT_THRESHOLD
) -> StickSpectrum:
    """ESR sticks over all four orientations, weighted by multiplicity and grouped."""
    classes = orientation_classes(species, field, threshold)
    esr = {id(c): [line for line in c.lines if _is_esr(line)] for c in classes}
    nuclear = [line for c in classes for line in c.lines if not _is_esr(line)]

    incomplete: tuple = ()
    offsets: Dict[str, float] = {}
    if species.name == "p1":
        sizes = sorted(c.multiplicity for c in classes)
        axial = [c for c in classes if c.axial]
        nonaxial = [c for c in classes if not c.axial]
        if sizes == [1, 3] and len(axial) == 1 and len(nonaxial) == 1:
            grouping = p1_groups(esr[id(axial[0])], esr[id(nonaxial[0])])
            lines = list(grouping.lines)
            incomplete, offsets = grouping.incomplete, grouping.group_offsets
        else:
            lines = [line for c in classes for line in esr[id(c)]]
            incomplete = ("field not along a <111> axis: orientation classes "
                          f"{sorted(c.multiplicity for c in classes)}",)
            log_warn(f"P1 groups unavailable, {incomplete[0]}")
    elif species.name == "nvh":
        bare = zeeman_mhz_per_gauss(species.g) * field.magnitude_gauss
        lines = [
            line.with_group("NVH-low" if line.frequency_mhz < bare else "NVH-high")
            for c in classes
            for line in esr[id(c)]
        ]
    else:
        lines = [line for c in classes for line in esr[id(c)]]

    return StickSpectrum(
        species=species.name,
        field=field,
        lines=tuple(lines),
        nuclear_lines=tuple(nuclear),
        incomplete=incomplete,
        group_offsets=offsets,
    )


# ---------------------------------------------------------------------------
# NV helpers
# ---------------------------------------------------------------------------

def aligned_nv_frequencies(field: FieldConfig, d_mhz: float = 2870.0, g: float = 2.0028) -> Tuple[float, float]:
    """(f1, f2): upper and lower ODMR transitions of the best-aligned NV."""
    species = nv_species(g=g, d_mhz=d_mhz)
    b, n = field_frame(field, aligned_axis(field))
    eig = eigh(build_hamiltonian(species, b, n))
    zero = int(np.argmax(np.abs(eig.states[1, :]) ** 2))
    others = [k for k in range(3) if k != zero]
    freqs = sorted(abs(float(eig.energies[k] - eig.energies[zero])) for k in others)
    return freqs[1], freqs[0]


def nv_lines(
    field: FieldConfig, d_mhz: float = 2870.0, g: float = 2.0028, threshold: float = DEFAULT_THRESHOLD
) -> StickSpectrum:
    """ODMR sticks of all four NV orientations."""
    return stick_spectrum(nv_species(g=g, d_mhz=d_mhz), field, threshold)
