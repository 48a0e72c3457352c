"""Dense complex operators and quantum states.

Conventions used throughout the package: basis index 0 is |0> = (1, 0, ...),
sigma_z = diag(+1, -1), hbar = 1 (Hamiltonian entries are angular
frequencies in rad/s). Operators are plain complex numpy arrays, validated
and frozen (read-only) at the boundaries by :func:`as_operator`.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DimensionError, KindError, ValidationError

#: Max-abs tolerance for construction-time checks (norm, trace, Hermiticity).
CONSTRUCTION_TOL = 1e-9


def as_operator(m, dim: int | None = None) -> np.ndarray:
    """Validate ``m`` as a dense square complex operator.

    Returns a read-only complex128 copy. Raises ValidationError for
    non-square or non-finite input, DimensionError when ``dim`` is given
    and does not match.
    """
    arr = np.array(m, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise ValidationError(f"operator must be square, got shape {arr.shape}")
    if not np.all(np.isfinite(arr.view(np.float64))):
        raise ValidationError("operator has non-finite entries")
    if dim is not None and arr.shape[0] != dim:
        raise DimensionError(f"operator is {arr.shape[0]}-dimensional, expected {dim}")
    arr.setflags(write=False)
    return arr


def require_hermitian(m: np.ndarray, tol: float = CONSTRUCTION_TOL, what: str = "operator") -> None:
    """Raise ValidationError unless ``m`` is Hermitian to ``tol`` (max-abs)."""
    defect = np.max(np.abs(m - m.conj().T))
    if defect > tol:
        raise ValidationError(f"{what} is not Hermitian (max-abs defect {defect:.3e})")


def dagger(m) -> np.ndarray:
    """Conjugate transpose."""
    return np.asarray(m, dtype=np.complex128).conj().T.copy()


class StateKind(Enum):
    KET = "ket"
    DENSITY = "density"


@dataclass(frozen=True, eq=False)
class QuantumState:
    """A ket vector or a density matrix.

    Use :func:`ket` / :func:`density` to construct validated states; this
    constructor itself performs no checks (evolution results carry O(rtol)
    numerical error, which the 1e-9 construction tolerances would reject).
    """

    kind: StateKind
    data: np.ndarray

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def __eq__(self, other):
        if not isinstance(other, QuantumState):
            return NotImplemented
        return self.kind is other.kind and np.array_equal(self.data, other.data)


def ket(vec) -> QuantumState:
    """Validated ket: 1-D complex vector with unit Euclidean norm."""
    arr = np.array(vec, dtype=np.complex128).ravel()
    if arr.size < 1:
        raise ValidationError("ket must have at least one component")
    if not np.all(np.isfinite(arr.view(np.float64))):
        raise ValidationError("ket has non-finite entries")
    norm = np.linalg.norm(arr)
    if abs(norm - 1.0) > CONSTRUCTION_TOL:
        raise ValidationError(f"ket norm {norm!r} is not 1 within {CONSTRUCTION_TOL}")
    arr.setflags(write=False)
    return QuantumState(StateKind.KET, arr)


def density(mat) -> QuantumState:
    """Validated density matrix: Hermitian, unit trace, finite entries."""
    arr = as_operator(mat)
    require_hermitian(arr, what="density matrix")
    tr = np.trace(arr)
    if abs(tr - 1.0) > CONSTRUCTION_TOL:
        raise ValidationError(f"density matrix trace {tr!r} is not 1 within {CONSTRUCTION_TOL}")
    return QuantumState(StateKind.DENSITY, arr)


def expect(op, state: QuantumState) -> complex:
    """Expectation value <psi|op|psi> or trace(op @ rho)."""
    op = np.asarray(op, dtype=np.complex128)
    if op.shape[0] != state.dim:
        raise DimensionError(f"operator dim {op.shape[0]} != state dim {state.dim}")
    if state.kind is StateKind.KET:
        return complex(np.vdot(state.data, op @ state.data))
    return complex(np.trace(op @ state.data))


def to_density(state: QuantumState) -> QuantumState:
    """Promote a ket to the projector |psi><psi|."""
    if state.kind is not StateKind.KET:
        raise KindError("to_density expects a ket, got a density matrix")
    rho = np.outer(state.data, state.data.conj())
    rho.setflags(write=False)
    return QuantumState(StateKind.DENSITY, rho)


# --- two-level builtins (file-format names in parentheses) -----------------

def sigma_x() -> np.ndarray:  # "sx"
    return as_operator([[0, 1], [1, 0]])


def sigma_y() -> np.ndarray:  # "sy"
    return as_operator([[0, -1j], [1j, 0]])


def sigma_z() -> np.ndarray:  # "sz"
    return as_operator([[1, 0], [0, -1]])


def sigma_minus() -> np.ndarray:
    """Lowers the sigma_z eigenvalue: |0> (sz=+1) -> |1> (sz=-1). ("sm")"""
    return as_operator([[0, 0], [1, 0]])


def sigma_plus() -> np.ndarray:  # "sp"
    return as_operator([[0, 1], [0, 0]])


def identity(dim: int = 2) -> np.ndarray:  # "id"
    return as_operator(np.eye(dim))


BUILTIN_OPERATORS = {
    "sx": sigma_x(),
    "sy": sigma_y(),
    "sz": sigma_z(),
    "sm": sigma_minus(),
    "sp": sigma_plus(),
    "id": identity(2),
}
