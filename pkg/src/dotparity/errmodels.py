"""Imperfections: hole mixing, spatial separation, and spectral detuning of the dots."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .dynamics import DEFAULT_CONFIG, IntegratorConfig, anticommutator_superop, commutator_superop, integrate_linear, sandwich_superop
from .models import (
    CqdParams,
    DetuningParams,
    HamiltonianModel,
    HoleMixingParams,
    build_detuned_odd_blocks,
    build_hole_mixing_odd_block,
)
from .qcore import TRACE_FLOOR, BasisRegistry, DensityMatrix, transition
from .units import TWO_PI, wavevector_per_nm
from .exceptions import ImpossibleBranchError


@dataclass(frozen=True)
class SpatialParams:
    """Dot separation `delta_r` (nm) and resonant wavevector `k0` (1/nm)."""

    delta_r: float
    k0: float

    def __post_init__(self):
        if self.delta_r < 0:
            raise ValueError("delta_r must be >= 0")

    @classmethod
    def from_energy(cls, delta_r_nm: float, omega0_ev: float) -> SpatialParams:
        return cls(delta_r_nm, wavevector_per_nm(omega0_ev))

    def alpha(self) -> float:
        return self.k0 * self.delta_r


@dataclass(frozen=True)
class CoherencePosterior:
    """Magnitude and phase of an off-diagonal coherence; optionally the population it rides on."""

    magnitude: float
    phase: float
    population: float | None = None

    def __post_init__(self):
        if self.magnitude > 1 + 1e-9:
            raise ValueError("coherence magnitude exceeds 1")


def odd_coherence(rho: DensityMatrix, a: str = "01", b: str = "10") -> CoherencePosterior:
    """Normalised coherence rho_ab / sqrt(rho_aa rho_bb) between two basis states."""
    c = rho.element(a, b)
    pa, pb = rho.population(a), rho.population(b)
    if pa * pb <= 0:
        return CoherencePosterior(0.0, 0.0)
    return CoherencePosterior(min(1.0, abs(c) / math.sqrt(pa * pb)), math.atan2(c.imag, c.real))


# -- spatial separation ------------------------------------------------------

_SERIES_CUTOFF = 1.0
_SERIES_COEFFS = tuple(
    (-1) ** k * (1.0 / math.factorial(2 * k + 1) - 4.0 * (k + 1) / math.factorial(2 * k + 3)) for k in range(16)
)


def spatial_mode_overlap(alpha: float) -> float:
    """(2a cos a + (a^2 - 2) sin a) / a^3, continued to 1/3 at a = 0.

    Below ``_SERIES_CUTOFF`` the power series is summed instead, since the
    closed form cancels catastrophically for small a.
    """
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    if alpha < _SERIES_CUTOFF:
        a2 = alpha * alpha
        acc = 0.0
        for c in reversed(_SERIES_COEFFS):
            acc = acc * a2 + c
        return acc
    return (2 * alpha * math.cos(alpha) + (alpha * alpha - 2) * math.sin(alpha)) / alpha ** 3


def spatial_coherence_factor(sp: SpatialParams) -> float:
    """3 f(k0 dr): photon-path indistinguishability of the two dots."""
    return 3.0 * spatial_mode_overlap(sp.alpha())


def build_spatial_jump_superops(gamma: float, coherence3f: float, basis: BasisRegistry) -> tuple[np.ndarray, np.ndarray]:
    """Jump and damping superoperators for two spatially separated emitters.

    ``jump`` maps rho to gamma [a rho a^+ + 3f (a rho b^+ + b rho a^+) + b rho b^+]
    with a = |10><X0| and b = |01><0X|; ``damp`` is the matching
    (gamma / 2) {a^+ a + b^+ b, rho}.
    """
    if abs(coherence3f) > 1 + 1e-12:
        raise ValueError("|3f| must not exceed 1")
    a = transition(basis, "10", "X0").elements
    b = transition(basis, "01", "0X").elements
    jump = gamma * (
        sandwich_superop(a) + coherence3f * (sandwich_superop(a, b) + sandwich_superop(b, a)) + sandwich_superop(b)
    )
    damp = gamma * anticommutator_superop(a.conj().T @ a + b.conj().T @ b)
    return jump, damp


def apply_superop(superop: np.ndarray, rho: DensityMatrix) -> DensityMatrix:
    d = rho.basis.dim
    m = (superop @ rho.elements.reshape(-1)).reshape(d, d)
    return DensityMatrix(rho.basis, 0.5 * (m + m.conj().T))


def spatial_cme_generator(h: HamiltonianModel, gamma: float, coherence3f: float, eta: float) -> np.ndarray:
    """Click-free generator -i[H, .] + (1 - eta) J - A for separated dots."""
    jump, damp = build_spatial_jump_superops(gamma, coherence3f, h.basis)
    return commutator_superop(h.elements) + (1.0 - eta) * jump - damp


# -- hole mixing -------------------------------------------------------------

class HoleMixingScan(NamedTuple):
    t: np.ndarray
    pop_01: np.ndarray
    pop_biexciton: np.ndarray

    def residual_01(self) -> float:
        return float(self.pop_01[-1])

    def peak_biexciton(self) -> float:
        return float(self.pop_biexciton.max())


def _hermitian_evolution(h: np.ndarray, psi0: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Rows are psi(t) = exp(-i h t) psi0 for each t."""
    w, v = np.linalg.eigh(h)
    c = v.conj().T @ psi0
    return (v @ (np.exp(-1j * np.outer(w, times)) * c[:, None])).T


def holemix_pulse_scan(p: CqdParams, hm: HoleMixingParams, delta: float, grid: Sequence[float]) -> HoleMixingScan:
    """Closed-system populations of |01> and |X+X-> during the excitation pulse, starting in |01>."""
    grid = np.asarray(grid, dtype=float)
    h = build_hole_mixing_odd_block(p, hm, delta)
    psi0 = np.zeros(4, dtype=complex)
    psi0[0] = 1
    states = _hermitian_evolution(h.elements, psi0, grid)
    pops = np.abs(states) ** 2
    return HoleMixingScan(grid, pops[:, 0], pops[:, 3])


# -- detuned excitation ------------------------------------------------------

def _two_level_population(rabi: float, delta: float, times: np.ndarray) -> np.ndarray:
    h = np.array([[0, rabi / 2], [rabi / 2, delta]], dtype=complex)
    states = _hermitian_evolution(h, np.array([1, 0], dtype=complex), np.atleast_1d(times))
    return np.abs(states[:, 1]) ** 2


def max_exciton_transfer_numeric(rabi: float, delta: float) -> tuple[float, float]:
    """First maximum of the excited population of a driven, detuned two-level block."""
    if not rabi > 0:
        raise ValueError("rabi must be > 0")
    h = np.array([[0, rabi / 2], [rabi / 2, delta]])
    gap = float(np.ptp(np.linalg.eigvalsh(h)))
    period = TWO_PI / gap
    grid = np.linspace(0.0, period, 2049)
    pops = _two_level_population(rabi, delta, grid)
    k = int(np.argmax(pops))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    res = minimize_scalar(lambda t: -_two_level_population(rabi, delta, t)[0], bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-12 * period})
    return float(-res.fun), float(res.x)


def detuned_excitation_transfer(rabi: float, delta: float) -> tuple[float, float]:
    """(Omega^2 / (Omega^2 + delta^2), time of the first numerical maximum)."""
    if not rabi > 0:
        raise ValueError("rabi must be > 0")
    p_max = rabi ** 2 / (rabi ** 2 + delta ** 2)
    _, t_max = max_exciton_transfer_numeric(rabi, delta)
    return p_max, t_max


def detuned_excitation_phase(p: CqdParams, d: DetuningParams, pulse_time: float) -> CoherencePosterior:
    """Relative phase of the two promoted odd amplitudes after a pulse of `pulse_time`.

    The phase is arg(<X0|psi_10> conj(<0X|psi_01>)), i.e. trion on dot A
    relative to trion on dot B; ``population`` is the trion population of the
    dot-A block.
    """
    if abs(d.delta_a() + d.delta_b()) > 1e-12 * max(1.0, abs(d.delta_a())):
        raise ValueError("laser must sit at the midpoint (delta_A == -delta_B)")
    blocks = build_detuned_odd_blocks(p, d)
    g = np.array([1, 0], dtype=complex)
    amp_b = _hermitian_evolution(blocks["h01"].elements, g, np.array([pulse_time]))[0, 1]
    amp_a = _hermitian_evolution(blocks["h10"].elements, g, np.array([pulse_time]))[0, 1]
    z = amp_a * np.conj(amp_b)
    pop = abs(amp_a) ** 2
    phase = math.atan2(z.imag, z.real) if abs(z) > 0 else 0.0
    return CoherencePosterior(1.0 if abs(z) > 0 else 0.0, phase, pop)


# -- detuned detection -------------------------------------------------------

_DETECTION_LABELS = ("01", "0X", "10", "X0")


def _check_equal_rates(d: DetuningParams):
    if not math.isclose(d.gamma_a, d.gamma_b, rel_tol=1e-12):
        raise ValueError("unequal decay rates are not supported; set gamma_a == gamma_b")


def detection_generator(basis: BasisRegistry, d: DetuningParams, eta: float = 0.0) -> np.ndarray:
    """Generator of the two-colour decay equation in the laser frame.

    ``eta = 0`` gives the unconditional master equation; ``eta > 0`` the
    click-free equation of a detector with that efficiency.
    """
    _check_equal_rates(d)
    gamma = d.gamma_a
    ha = transition(basis, "X0", "X0").elements
    hb = transition(basis, "0X", "0X").elements
    h = d.delta_a() * ha + d.delta_b() * hb
    c = transition(basis, "01", "0X").elements + transition(basis, "10", "X0").elements
    return (commutator_superop(h) + (1.0 - eta) * gamma * sandwich_superop(c)
            - gamma * anticommutator_superop(ha + hb))


def detuned_detection_evolve(rho: DensityMatrix, d: DetuningParams, t: float,
                             cfg: IntegratorConfig = DEFAULT_CONFIG, eta: float = 0.0) -> DensityMatrix:
    for lab in _DETECTION_LABELS:
        rho.basis.index(lab)
    n = rho.basis.dim
    y = integrate_linear(detection_generator(rho.basis, d, eta), rho.elements.reshape(-1), t, cfg)
    y = y.reshape(n, n)
    return DensityMatrix(rho.basis, 0.5 * (y + y.conj().T))


def detuned_detection_jump(rho: DensityMatrix, d: DetuningParams) -> DensityMatrix:
    """Normalised state right after a click."""
    _check_equal_rates(d)
    c = transition(rho.basis, "01", "0X").elements + transition(rho.basis, "10", "X0").elements
    m = c @ rho.elements @ c.conj().T
    tr = np.trace(m).real
    if tr <= TRACE_FLOOR:
        raise ImpossibleBranchError("no trion population to emit a photon")
    return DensityMatrix(rho.basis, m / tr)


REGIME_THRESHOLD = 10.0


def spectral_regime(d: DetuningParams, threshold: float = REGIME_THRESHOLD) -> str:
    """Compare the line splitting with the mean linewidth."""
    ratio = abs(d.delta_omega) / (0.5 * (d.gamma_a + d.gamma_b))
    if ratio >= threshold:
        return "coherence lost"
    if ratio <= 1.0 / threshold:
        return "spectrally indistinguishable"
    return "intermediate"


def detection_phase(t_d: float, d: DetuningParams) -> float:
    """(omega_A - omega_B) t_D wrapped into [0, 2 pi)."""
    if t_d < 0:
        raise ValueError("t_d must be >= 0")
    return math.fmod(d.delta_omega * t_d, TWO_PI) % TWO_PI


def z_correction(rho: DensityMatrix, phase: float) -> DensityMatrix:
    """Z rotation on dot A: multiplies every state with dot A in |1> by exp(i phase).

    Applied with ``phase = detection_phase(t_D, d)`` it removes the phase a
    click imprints on the 01/10 coherence.
    """
    diag = np.array([np.exp(1j * phase) if lab[0] == "1" else 1.0 for lab in rho.basis.labels])
    m = diag[:, None] * rho.elements * diag.conj()[None, :]
    return DensityMatrix(rho.basis, m)
