"""Dense linear algebra on small, labelled Hilbert spaces.

States and operators carry a :class:`BasisRegistry` so that subspace blocks
(``"01"``, ``"0X"``, ...) are addressed by name rather than by position.
In a two-character label the first character is dot A and the second dot B;
``0``/``1`` are the resident-electron spin states and ``X`` a trion.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .exceptions import DimensionError, ImpossibleBranchError

HERMITIAN_ATOL = 1e-12
TRACE_ATOL = 1e-10
POSITIVITY_ATOL = 1e-10
TRACE_FLOOR = 1e-300


def _frozen(a, dtype=complex) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class BasisRegistry:
    """Ordered set of basis-state names."""

    labels: tuple[str, ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        labels = tuple(self.labels)
        if not labels:
            raise DimensionError("a basis needs at least one label")
        if len(set(labels)) != len(labels):
            raise DimensionError(f"duplicate basis labels in {labels}")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "_index", {lab: i for i, lab in enumerate(labels)})

    @property
    def dim(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise DimensionError(f"label {label!r} not in basis {self.labels}") from None

    def indices(self, labels: Iterable[str]) -> list[int]:
        return [self.index(lab) for lab in labels]

    def __contains__(self, label) -> bool:
        return label in self._index

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)


COMPUTATIONAL = BasisRegistry(("00", "01", "10", "11"))
FULL = BasisRegistry(("00", "01", "0X", "10", "X0", "11", "1X", "X1", "XX"))


def _check_square(basis: BasisRegistry, m: np.ndarray, what: str):
    if m.ndim != 2 or m.shape != (basis.dim, basis.dim):
        raise DimensionError(f"{what} has shape {m.shape}, basis has dim {basis.dim}")


def _same_basis(a: BasisRegistry, b: BasisRegistry):
    if a.labels != b.labels:
        raise DimensionError(f"basis mismatch: {a.labels} vs {b.labels}")


@dataclass(frozen=True)
class PureState:
    basis: BasisRegistry
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = _frozen(self.amplitudes)
        if amp.shape != (self.basis.dim,):
            raise DimensionError(f"{amp.shape[0] if amp.ndim else 0} amplitudes for a {self.basis.dim}-dim basis")
        object.__setattr__(self, "amplitudes", amp)

    @classmethod
    def from_labels(cls, basis: BasisRegistry, coeffs: dict[str, complex]) -> PureState:
        amp = np.zeros(basis.dim, dtype=complex)
        for lab, c in coeffs.items():
            amp[basis.index(lab)] = c
        return cls(basis, amp)

    @property
    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def is_normalized(self, atol: float = 1e-12) -> bool:
        return abs(self.norm_squared - 1.0) < atol

    def normalized(self) -> PureState:
        n = np.sqrt(self.norm_squared)
        if n <= TRACE_FLOOR:
            raise ImpossibleBranchError("cannot normalise a zero state")
        return PureState(self.basis, self.amplitudes / n)

    def amplitude(self, label: str) -> complex:
        return complex(self.amplitudes[self.basis.index(label)])


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian matrix on a labelled basis.

    Both normalised states and the unnormalised no-detection operator are
    represented by this class; :meth:`check` validates either variant.
    """

    basis: BasisRegistry
    elements: np.ndarray

    def __post_init__(self):
        m = _frozen(self.elements)
        _check_square(self.basis, m, "density matrix")
        scale = max(1.0, float(np.max(np.abs(m))) if m.size else 1.0)
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_ATOL * scale:
            raise DimensionError("density matrix is not Hermitian")
        object.__setattr__(self, "elements", m)

    @property
    def trace(self) -> float:
        return float(np.trace(self.elements).real)

    def element(self, row: str, col: str) -> complex:
        return complex(self.elements[self.basis.index(row), self.basis.index(col)])

    def population(self, label: str) -> float:
        return self.element(label, label).real

    def populations(self, labels: Iterable[str]) -> float:
        return float(sum(self.population(lab) for lab in labels))

    def is_positive(self, atol: float = POSITIVITY_ATOL) -> bool:
        return bool(np.linalg.eigvalsh(self.elements).min() > -atol)

    def check(self, normalized: bool = True):
        """Raise unless the trace (and positivity) constraints hold."""
        tr = self.trace
        if normalized and abs(tr - 1.0) >= TRACE_ATOL:
            raise ValueError(f"trace {tr!r} is not 1")
        if not normalized and not (0.0 < tr <= 1.0 + TRACE_ATOL):
            raise ValueError(f"unnormalised trace {tr!r} outside (0, 1]")
        if not self.is_positive():
            raise ValueError("density matrix is not positive semidefinite")

    def purity(self) -> float:
        return float(np.trace(self.elements @ self.elements).real)


@dataclass(frozen=True)
class Operator:
    basis: BasisRegistry
    elements: np.ndarray

    def __post_init__(self):
        m = _frozen(self.elements)
        _check_square(self.basis, m, "operator")
        object.__setattr__(self, "elements", m)

    @property
    def dag(self) -> Operator:
        return Operator(self.basis, self.elements.conj().T)

    def is_hermitian(self, atol: float = HERMITIAN_ATOL) -> bool:
        return bool(np.max(np.abs(self.elements - self.elements.conj().T)) <= atol)

    def __matmul__(self, other: Operator) -> Operator:
        _same_basis(self.basis, other.basis)
        return Operator(self.basis, self.elements @ other.elements)

    def __add__(self, other: Operator) -> Operator:
        _same_basis(self.basis, other.basis)
        return Operator(self.basis, self.elements + other.elements)

    def __mul__(self, scalar) -> Operator:
        return Operator(self.basis, scalar * self.elements)

    __rmul__ = __mul__


# -- constructors ------------------------------------------------------------

def identity(basis: BasisRegistry) -> Operator:
    return Operator(basis, np.eye(basis.dim))


def transition(basis: BasisRegistry, to: str, frm: str) -> Operator:
    """The operator |to><frm|."""
    m = np.zeros((basis.dim, basis.dim), dtype=complex)
    m[basis.index(to), basis.index(frm)] = 1.0
    return Operator(basis, m)


def projector(basis: BasisRegistry, labels: Iterable[str]) -> Operator:
    m = np.zeros((basis.dim, basis.dim), dtype=complex)
    for i in basis.indices(labels):
        m[i, i] = 1.0
    return Operator(basis, m)


def maximally_mixed(basis: BasisRegistry) -> DensityMatrix:
    return DensityMatrix(basis, np.eye(basis.dim) / basis.dim)


_PAULI = {
    "I": np.eye(2),
    "X": np.array([[0, 1], [1, 0]]),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.array([[1, 0], [0, -1]]),
}
HADAMARD = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


def two_qubit_operator(matrix: np.ndarray, basis: BasisRegistry = COMPUTATIONAL) -> Operator:
    """Embed a 4x4 matrix given in the 00,01,10,11 order into `basis`.

    Rows/columns of non-computational labels are left zero.
    """
    matrix = np.asarray(matrix)
    if matrix.shape != (4, 4):
        raise DimensionError("two-qubit operator must be 4x4")
    idx = basis.indices(COMPUTATIONAL.labels)
    m = np.zeros((basis.dim, basis.dim), dtype=complex)
    m[np.ix_(idx, idx)] = matrix
    return Operator(basis, m)


def pauli_string(name: str, basis: BasisRegistry = COMPUTATIONAL) -> Operator:
    """Two-qubit Pauli product such as ``"ZZ"`` or ``"XI"`` (first letter acts on dot A)."""
    if len(name) != 2 or any(c not in _PAULI for c in name):
        raise ValueError(f"bad Pauli string {name!r}")
    return two_qubit_operator(np.kron(_PAULI[name[0]], _PAULI[name[1]]), basis)


def global_hadamard_operator(basis: BasisRegistry = COMPUTATIONAL) -> Operator:
    return two_qubit_operator(np.kron(HADAMARD, HADAMARD), basis)


# -- operations --------------------------------------------------------------

def density_from_pure(psi: PureState) -> DensityMatrix:
    a = psi.amplitudes
    return DensityMatrix(psi.basis, np.outer(a, a.conj()))


def expectation(rho: DensityMatrix, obs: Operator) -> float:
    """Tr(rho obs) for a Hermitian observable."""
    _same_basis(rho.basis, obs.basis)
    if not obs.is_hermitian():
        raise ValueError("observable is not Hermitian")
    val = np.trace(rho.elements @ obs.elements)
    if abs(val.imag) >= 1e-10:
        raise ValueError(f"expectation has imaginary part {val.imag!r}")
    return float(val.real)


def apply_operator(rho: DensityMatrix, k: Operator) -> DensityMatrix:
    """K rho K^dagger."""
    _same_basis(rho.basis, k.basis)
    m = k.elements @ rho.elements @ k.elements.conj().T
    return DensityMatrix(rho.basis, 0.5 * (m + m.conj().T))


def normalize(rho: DensityMatrix) -> tuple[DensityMatrix, float]:
    """Return ``(rho / Tr rho, Tr rho)``."""
    tr = rho.trace
    if tr <= TRACE_FLOOR:
        raise ImpossibleBranchError(f"trace {tr!r} too small to condition on")
    return DensityMatrix(rho.basis, rho.elements / tr), tr


def embed(state, basis: BasisRegistry):
    """Copy a state or operator into a larger basis, matching labels by name."""
    idx = basis.indices(state.basis.labels)
    if isinstance(state, PureState):
        amp = np.zeros(basis.dim, dtype=complex)
        amp[idx] = state.amplitudes
        return PureState(basis, amp)
    m = np.zeros((basis.dim, basis.dim), dtype=complex)
    m[np.ix_(idx, idx)] = state.elements
    return type(state)(basis, m)


def restrict(rho: DensityMatrix, labels: Sequence[str]) -> DensityMatrix:
    """The sub-block of `rho` on `labels` (not renormalised)."""
    sub = BasisRegistry(tuple(labels))
    idx = rho.basis.indices(labels)
    return DensityMatrix(sub, rho.elements[np.ix_(idx, idx)])


def fidelity_to_pure(rho: DensityMatrix, psi: PureState) -> float:
    _same_basis(rho.basis, psi.basis)
    a = psi.amplitudes
    return float(np.vdot(a, rho.elements @ a).real)
