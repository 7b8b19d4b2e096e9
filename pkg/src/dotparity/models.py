"""Rotating-frame Hamiltonians of the coupled-dot system.

All matrices are written in the frame rotating at the laser frequency with
the rotating-wave approximation, so a laser of strength ``rabi`` appears as
``rabi / 2`` off-diagonal couplings and each trion costs its detuning from
the laser.  Energies are meV, hbar = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .qcore import FULL, BasisRegistry, Operator

FRAME = "rotating_at_laser"
PAULI_BLOCKING_THRESHOLD = 10.0


@dataclass(frozen=True)
class CqdParams:
    """Physical parameters of the ideal coupled-dot model (meV)."""

    omega0: float = 2000.0
    omega_l: float = 2000.0
    rabi: float = 0.1
    v_f: float = 0.85
    v_xx: float = 5.0
    gamma_x: float = 0.004

    def __post_init__(self):
        if self.rabi < 0:
            raise ValueError("rabi must be >= 0")
        if not self.gamma_x > 0:
            raise ValueError("gamma_x must be > 0")

    @classmethod
    def canonical(cls) -> CqdParams:
        # Gamma_X = 4 ueV is kept even though tau_X = 1 ns would give ~0.66 ueV.
        return cls(omega0=2000.0, omega_l=2000.0, rabi=0.1, v_f=0.85, v_xx=5.0, gamma_x=0.004)

    @property
    def detuning(self) -> float:
        """Exciton detuning from the laser, omega0 - omega_l."""
        return self.omega0 - self.omega_l

    @property
    def pi_pulse_time(self) -> float:
        if self.rabi == 0:
            raise ValueError("no pi pulse without a laser (rabi == 0)")
        return math.pi / self.rabi


@dataclass(frozen=True)
class HoleMixingParams:
    epsilon: float
    m_hhhh: float
    m_lhhh: float
    l_lh: float = 1.0
    l_hh: float = 1.0

    def __post_init__(self):
        if not 0 <= self.epsilon < 1:
            raise ValueError("epsilon must lie in [0, 1)")
        if self.l_hh <= 0 or self.l_lh <= 0:
            raise ValueError("characteristic lengths must be positive")

    @classmethod
    def matched(cls, p: CqdParams, epsilon: float) -> HoleMixingParams:
        """Both Forster matrix elements equal to V_F and equal overlap lengths."""
        return cls(epsilon=epsilon, m_hhhh=p.v_f, m_lhhh=p.v_f, l_lh=1.0, l_hh=1.0)

    def epsilon_tilde(self) -> float:
        return self.epsilon * self.l_lh / (math.sqrt(3.0) * self.l_hh)

    def v_f_tilde(self) -> float:
        return 2.0 * self.epsilon_tilde() * self.m_lhhh


@dataclass(frozen=True)
class DetuningParams:
    """Exciton energies of two inequivalent dots and the laser (meV)."""

    omega_a: float
    omega_b: float
    omega_l: float
    gamma_a: float = 0.004
    gamma_b: float = 0.004

    def __post_init__(self):
        if not (self.gamma_a > 0 and self.gamma_b > 0):
            raise ValueError("decay rates must be > 0")

    @classmethod
    def midpoint(cls, omega_a: float, omega_b: float, gamma: float = 0.004) -> DetuningParams:
        """Laser tuned halfway between the two exciton lines."""
        return cls(omega_a, omega_b, 0.5 * (omega_a + omega_b), gamma, gamma)

    def delta_a(self) -> float:
        return self.omega_a - self.omega_l

    def delta_b(self) -> float:
        return self.omega_b - self.omega_l

    @property
    def delta_omega(self) -> float:
        """omega_A - omega_B."""
        return self.omega_a - self.omega_b


@dataclass(frozen=True)
class HamiltonianModel:
    basis: BasisRegistry
    matrix: Operator
    frame: str = FRAME

    def __post_init__(self):
        if self.matrix.basis.labels != self.basis.labels:
            raise ValueError("matrix basis does not match model basis")
        if not self.matrix.is_hermitian():
            raise ValueError("Hamiltonian is not Hermitian")

    @classmethod
    def from_array(cls, labels, m) -> HamiltonianModel:
        basis = BasisRegistry(tuple(labels))
        return cls(basis, Operator(basis, np.asarray(m, dtype=complex)))

    @property
    def elements(self) -> np.ndarray:
        return self.matrix.elements


def build_ideal_blocks(p: CqdParams) -> dict[str, HamiltonianModel]:
    """The four decoupled blocks h00, h01, h10, h11 of the ideal model."""
    d, half = p.detuning, p.rabi / 2
    odd = [[0, half], [half, d]]
    h11 = [
        [0, half, half, 0],
        [half, d, p.v_f, half],
        [half, p.v_f, d, half],
        [0, half, half, 2 * d + p.v_xx],
    ]
    return {
        "h00": HamiltonianModel.from_array(["00"], [[0]]),
        "h01": HamiltonianModel.from_array(["01", "0X"], odd),
        "h10": HamiltonianModel.from_array(["10", "X0"], odd),
        "h11": HamiltonianModel.from_array(["11", "1X", "X1", "XX"], h11),
    }


def assemble(blocks, basis: BasisRegistry = FULL) -> HamiltonianModel:
    """Place decoupled blocks into one matrix on `basis` (labels must be disjoint)."""
    m = np.zeros((basis.dim, basis.dim), dtype=complex)
    for block in (blocks.values() if isinstance(blocks, dict) else blocks):
        idx = basis.indices(block.basis.labels)
        m[np.ix_(idx, idx)] += block.elements
    return HamiltonianModel(basis, Operator(basis, m))


def full_hamiltonian(p: CqdParams, basis: BasisRegistry = FULL) -> HamiltonianModel:
    return assemble(build_ideal_blocks(p), basis)


FOERSTER_LABELS = ("11", "psi+", "psi-", "XX")


def foerster_basis_change() -> np.ndarray:
    """Columns are |11>, psi+, psi-, |XX> written in the |11>,|1X>,|X1>,|XX> basis."""
    s = 1 / math.sqrt(2)
    return np.array([
        [1, 0, 0, 0],
        [0, s, s, 0],
        [0, s, -s, 0],
        [0, 0, 0, 1],
    ], dtype=complex)


def transform_h11_to_foerster_basis(h11: HamiltonianModel, p: CqdParams) -> HamiltonianModel:
    m = h11.elements
    if h11.basis.labels != ("11", "1X", "X1", "XX"):
        raise ValueError("expected an h11 block")
    if abs(m[1, 1] - m[2, 2]) > 1e-12:
        raise ValueError("h11 has unequal single-exciton detunings; use transform_detuned_h11")
    v = foerster_basis_change()
    return HamiltonianModel.from_array(FOERSTER_LABELS, v.conj().T @ m @ v)


def pauli_blocking_margin(p: CqdParams) -> float:
    """min(|V_F|, |V_XX|) / (|Omega'| / 2) with Omega' = sqrt(2) * rabi.

    Values of at least ``PAULI_BLOCKING_THRESHOLD`` count as satisfying the
    blocking condition.  Returns ``inf`` without a laser.
    """
    if p.rabi == 0:
        return math.inf
    return min(abs(p.v_f), abs(p.v_xx)) / (math.sqrt(2.0) * p.rabi / 2)


HOLE_MIXING_LABELS = ("01", "0X-", "X+1", "X+X-")


def build_hole_mixing_odd_block(p: CqdParams, hm: HoleMixingParams, delta: float) -> HamiltonianModel:
    """4x4 odd-subspace block with light/heavy-hole mixing."""
    half = p.rabi / 2
    e = hm.epsilon_tilde()
    vt = hm.v_f_tilde()
    m = [
        [0, half, e * half, 0],
        [half, delta, vt, e * half],
        [e * half, vt, delta, half],
        [0, e * half, half, 2 * delta + p.v_xx],
    ]
    return HamiltonianModel.from_array(HOLE_MIXING_LABELS, m)


def build_detuned_h11(p: CqdParams, d: DetuningParams) -> HamiltonianModel:
    half = p.rabi / 2
    da, db = d.delta_a(), d.delta_b()
    m = [
        [0, half, half, 0],
        [half, db, p.v_f, half],
        [half, p.v_f, da, half],
        [0, half, half, da + db + p.v_xx],
    ]
    return HamiltonianModel.from_array(["11", "1X", "X1", "XX"], m)


class DetunedTransform(NamedTuple):
    model: HamiltonianModel
    theta: float
    omega_plus: float
    omega_minus: float
    delta_a_prime: float
    delta_b_prime: float

    def suppression_margin(self) -> float:
        """Smallest excited-level detuning over the largest half-coupling."""
        m = self.model.elements
        coupling = max(abs(self.omega_plus), abs(self.omega_minus)) / 2
        if coupling == 0:
            return math.inf
        gaps = (abs(self.delta_a_prime), abs(self.delta_b_prime), abs(m[3, 3].real))
        return min(gaps) / coupling


DETUNED_LABELS = ("11", "psi-", "psi+", "XX")


def mixing_angle(v_f: float, delta_a: float, delta_b: float) -> float:
    """Angle diagonalising the single-exciton block: tan(2 theta) = 2 V_F / (delta_A - delta_B)."""
    diff = delta_a - delta_b
    if diff == 0:
        if v_f == 0:
            raise ValueError("mixing angle undefined for delta_A == delta_B and V_F == 0")
        return math.copysign(math.pi / 4, v_f)
    return 0.5 * math.atan(2 * v_f / diff)


def detuned_basis_change(theta: float) -> np.ndarray:
    """Columns are |11>, psi-, psi+, |XX> in the |11>,|1X>,|X1>,|XX> basis."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([
        [1, 0, 0, 0],
        [0, c, s, 0],
        [0, -s, c, 0],
        [0, 0, 0, 1],
    ], dtype=complex)


def transform_detuned_h11(h: HamiltonianModel, p: CqdParams, d: DetuningParams) -> DetunedTransform:
    da, db = d.delta_a(), d.delta_b()
    theta = mixing_angle(p.v_f, da, db)
    c, s = math.cos(theta), math.sin(theta)
    om_p = p.rabi * (c + s)
    om_m = p.rabi * (c - s)
    dap = da * c * c + db * s * s + p.v_f * math.sin(2 * theta)
    dbp = da * s * s + db * c * c - p.v_f * math.sin(2 * theta)
    top = h.elements[3, 3].real
    m = [
        [0, om_m / 2, om_p / 2, 0],
        [om_m / 2, dbp, 0, om_m / 2],
        [om_p / 2, 0, dap, om_p / 2],
        [0, om_m / 2, om_p / 2, top],
    ]
    return DetunedTransform(HamiltonianModel.from_array(DETUNED_LABELS, m), theta, om_p, om_m, dap, dbp)


def build_detuned_odd_blocks(p: CqdParams, d: DetuningParams) -> dict[str, HamiltonianModel]:
    """Two decoupled resonant-drive blocks; the trion on dot A carries delta_A."""
    half = p.rabi / 2
    return {
        "h01": HamiltonianModel.from_array(["01", "0X"], [[0, half], [half, d.delta_b()]]),
        "h10": HamiltonianModel.from_array(["10", "X0"], [[0, half], [half, d.delta_a()]]),
    }
