"""Spin operator algebra, tensor products, Hermitian eigensystems and
unitary propagation.

Operators are plain dense ``complex128`` numpy arrays. Basis states of a
single spin are ordered m = s, s-1, ..., -s; composite spaces are ordered
electron (x) first nucleus (x) second nucleus.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import NamedTuple, Sequence, Union

import numpy as np
import numpy.typing as npt
import scipy.linalg

from ..errors import ContractViolation, InvalidArgumentError, InvalidSpinError
from .constants import NS_PER_US

Operator = npt.NDArray[np.complex128]
DensityMatrix = npt.NDArray[np.complex128]

SpinValue = Union[float, int, Fraction]

# Relative tolerance for the Hermiticity precondition of eigh/propagate
HERMITIAN_RTOL = 1e-10


class SpinMatrices(NamedTuple):
    """Cartesian angular-momentum matrices of one spin."""
    x: Operator
    y: Operator
    z: Operator


@dataclass(frozen=True)
class EigenSystem:
    """Ascending eigenvalues (MHz) and the matching orthonormal columns."""
    energies: npt.NDArray[np.float64]
    states: Operator

    @property
    def dim(self) -> int:
        return int(self.energies.shape[0])

    def reconstruct(self) -> Operator:
        return (self.states * self.energies) @ self.states.conj().T


def _two_s(s: SpinValue) -> int:
    try:
        doubled = 2 * float(s)
    except (TypeError, ValueError) as exc:
        raise InvalidSpinError(f"spin must be numeric, got {s!r}") from exc
    n = int(round(doubled))
    if n < 0 or abs(doubled - n) > 1e-12:
        raise InvalidSpinError(f"spin must be a non-negative half-integer, got {s!r}")
    return n


def multiplicity(s: SpinValue) -> int:
    """2s+1."""
    return _two_s(s) + 1


def m_values(s: SpinValue) -> npt.NDArray[np.float64]:
    """Magnetic quantum numbers in basis order (descending)."""
    n = _two_s(s)
    return n / 2.0 - np.arange(n + 1, dtype=float)


def spin_operators(s: SpinValue) -> SpinMatrices:
    """Standard Sx, Sy, Sz for spin ``s`` in the descending |s, m> basis."""
    m = m_values(s)
    spin = _two_s(s) / 2.0
    dim = m.shape[0]
    # <m+1|S+|m> sits one row above the diagonal in descending order
    raise_elements = np.sqrt(spin * (spin + 1) - m[1:] * (m[1:] + 1))
    s_plus = np.zeros((dim, dim), dtype=complex)
    s_plus[np.arange(dim - 1), np.arange(1, dim)] = raise_elements
    s_minus = s_plus.conj().T
    sx = (s_plus + s_minus) / 2
    sy = (s_plus - s_minus) / 2j
    sz = np.diag(m).astype(complex)
    return SpinMatrices(sx, sy, sz)


def identity(dim: int) -> Operator:
    return np.eye(dim, dtype=complex)


def kron(a: Operator, b: Operator) -> Operator:
    """Tensor product a (x) b."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def embed(op: Operator, position: int, dims: Sequence[int]) -> Operator:
    """Place a single-spin operator at ``position`` of a composite space."""
    factors = [identity(d) for d in dims]
    factors[position] = np.asarray(op, dtype=complex)
    return reduce(kron, factors)


def hermiticity_error(h: Operator) -> float:
    """max |H - H^dagger| relative to max |H| (0 for the zero matrix)."""
    h = np.asarray(h)
    scale = float(np.max(np.abs(h))) if h.size else 0.0
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(h - h.conj().T))) / scale


def check_hermitian(h: Operator, what: str = "operator") -> None:
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ContractViolation(f"{what} must be square, got shape {h.shape}")
    err = hermiticity_error(h)
    if err > HERMITIAN_RTOL:
        raise ContractViolation(f"{what} is not Hermitian (relative asymmetry {err:.3e})")


def eigh(h: Operator) -> EigenSystem:
    """Eigendecomposition of a Hermitian operator (LAPACK via scipy)."""
    check_hermitian(h, "eigh input")
    h = np.asarray(h, dtype=complex)
    # Symmetrize so the solver sees an exactly Hermitian matrix
    energies, states = scipy.linalg.eigh((h + h.conj().T) / 2)
    return EigenSystem(np.asarray(energies, dtype=float), np.asarray(states, dtype=complex))


def unitary(h: Operator, t_ns: float) -> Operator:
    """U = exp(-i 2 pi H t) with H in MHz and t in ns."""
    if t_ns < 0:
        raise InvalidArgumentError(f"duration must be non-negative, got {t_ns} ns")
    eig = eigh(h)
    phases = np.exp(-2j * np.pi * eig.energies * (t_ns / NS_PER_US))
    return (eig.states * phases) @ eig.states.conj().T


def propagate(h: Operator, t_ns: float, rho: DensityMatrix) -> DensityMatrix:
    """rho' = U rho U^dagger for the block Hamiltonian ``h`` held for ``t_ns``."""
    if t_ns < 0:
        raise InvalidArgumentError(f"duration must be non-negative, got {t_ns} ns")
    if t_ns == 0:
        return np.array(rho, dtype=complex, copy=True)
    u = unitary(h, t_ns)
    return u @ rho @ u.conj().T


def pure_state(vector: npt.ArrayLike) -> DensityMatrix:
    v = np.asarray(vector, dtype=complex).reshape(-1)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def maximally_mixed(dim: int) -> DensityMatrix:
    return identity(dim) / dim


def check_density_matrix(rho: DensityMatrix, tol: float = 1e-10) -> None:
    """Raise ContractViolation unless rho is Hermitian, unit-trace and positive."""
    check_hermitian(rho, "density matrix")
    trace = complex(np.trace(rho))
    if abs(trace - 1.0) > tol:
        raise ContractViolation(f"density matrix trace drifted to {trace:.12g}")
    lowest = float(np.min(np.linalg.eigvalsh((rho + rho.conj().T) / 2)))
    if lowest < -tol:
        raise ContractViolation(f"density matrix has negative eigenvalue {lowest:.3e}")


def partial_trace_keep_first(rho: DensityMatrix, dim_first: int) -> DensityMatrix:
    """Trace out everything after the first ``dim_first``-dimensional factor."""
    dim_rest = rho.shape[0] // dim_first
    return np.trace(rho.reshape(dim_first, dim_rest, dim_first, dim_rest), axis1=1, axis2=3)
