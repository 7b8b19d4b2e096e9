"""Optical spin-parity measurement: excitation pulse, monitored relaxation, repetition."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
import numpy as np

from ._parallel import ordered_map
from .dynamics import (
    DEFAULT_CONFIG,
    IntegratorConfig,
    LindbladChannel,
    TrajectorySampler,
    evolve_unitary,
    trajectory_rng,
)
from .exceptions import ImpossibleBranchError
from .models import PAULI_BLOCKING_THRESHOLD, CqdParams, full_hamiltonian, pauli_blocking_margin
from .qcore import (
    COMPUTATIONAL,
    FULL,
    TRACE_FLOOR,
    BasisRegistry,
    DensityMatrix,
    Operator,
    PureState,
    density_from_pure,
    embed,
    projector,
    transition,
)

ODD_LABELS = ("01", "10")
EVEN_LABELS = ("00", "11")
EXCITED_ODD = {"01": "0X", "10": "X0"}


@dataclass(frozen=True)
class StateAmplitudes:
    """Coefficients of a two-qubit state in the 00, 01, 10, 11 basis."""

    a00: complex
    a01: complex
    a10: complex
    a11: complex

    def __post_init__(self):
        n = sum(abs(a) ** 2 for a in self.as_tuple())
        if abs(n - 1.0) >= 1e-12:
            raise ValueError(f"amplitudes have squared norm {n!r}, expected 1")

    @classmethod
    def uniform(cls) -> StateAmplitudes:
        return cls(0.5, 0.5, 0.5, 0.5)

    @classmethod
    def normalized(cls, a00, a01, a10, a11) -> StateAmplitudes:
        n = math.sqrt(sum(abs(a) ** 2 for a in (a00, a01, a10, a11)))
        return cls(a00 / n, a01 / n, a10 / n, a11 / n)

    def as_tuple(self) -> tuple[complex, complex, complex, complex]:
        return (self.a00, self.a01, self.a10, self.a11)

    @property
    def even_weight(self) -> float:
        return abs(self.a00) ** 2 + abs(self.a11) ** 2

    @property
    def odd_weight(self) -> float:
        return abs(self.a01) ** 2 + abs(self.a10) ** 2

    def to_state(self, basis: BasisRegistry = COMPUTATIONAL) -> PureState:
        return PureState.from_labels(basis, dict(zip(COMPUTATIONAL.labels, self.as_tuple())))


@dataclass(frozen=True)
class DetectorModel:
    efficiency: float = 0.5
    time_resolution: float = math.inf

    def __post_init__(self):
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValueError("efficiency must lie in [0, 1]")
        if not self.time_resolution >= 0:
            raise ValueError("time_resolution must be >= 0")


@dataclass(frozen=True)
class ProtocolConfig:
    """Timing of the protocol in hbar/meV.

    ``wait_time=None`` means ten radiative lifetimes, ``pulse_time=None`` a
    resonant pi pulse.
    """

    wait_time: float | None = None
    repetitions: int = 1
    pulse_time: float | None = None
    pulse_mode: str = "ideal"

    def __post_init__(self):
        if self.wait_time is not None and self.wait_time < 0:
            raise ValueError("wait_time must be >= 0")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.pulse_mode not in ("ideal", "simulated"):
            raise ValueError("pulse_mode must be 'ideal' or 'simulated'")

    def resolved_wait(self, p: CqdParams) -> float:
        return 10.0 / p.gamma_x if self.wait_time is None else self.wait_time

    def resolved_pulse(self, p: CqdParams) -> float:
        return p.pi_pulse_time if self.pulse_time is None else self.pulse_time


@dataclass(frozen=True)
class ParityOutcome:
    """Result of one protocol run.

    ``probability`` is the probability of the observed parity class for the
    input state (not of the exact click time).
    """

    variant: str
    posterior: DensityMatrix
    probability: float
    detection_time: float | None = None
    round: int | None = None

    def __post_init__(self):
        if self.variant not in ("odd", "even"):
            raise ValueError("variant must be 'odd' or 'even'")
        if not -1e-12 <= self.probability <= 1 + 1e-12:
            raise ValueError("probability outside [0, 1]")

    @property
    def is_odd(self) -> bool:
        return self.variant == "odd"

    def even_fidelity(self) -> float:
        return self.posterior.populations(EVEN_LABELS)


def parity_projectors(basis: BasisRegistry = COMPUTATIONAL) -> tuple[Operator, Operator]:
    """(P_odd, P_even) on `basis`."""
    return projector(basis, ODD_LABELS), projector(basis, EVEN_LABELS)


def relaxation_channel(p: CqdParams, efficiency: float, basis: BasisRegistry = FULL) -> LindbladChannel:
    """Collective trion decay sqrt(Gamma_X) (|01><0X| + |10><X0|)."""
    op = transition(basis, "01", "0X") + transition(basis, "10", "X0")
    return LindbladChannel(op, p.gamma_x, efficiency)


# -- excitation --------------------------------------------------------------

def ideal_pulse_operator(basis: BasisRegistry = FULL) -> Operator:
    """Permutation exchanging 01 <-> 0X and 10 <-> X0; everything else untouched."""
    m = np.eye(basis.dim, dtype=complex)
    for g, e in EXCITED_ODD.items():
        i, j = basis.index(g), basis.index(e)
        m[[i, j]] = m[[j, i]]
    return Operator(basis, m)


def simulated_pulse_operator(p: CqdParams, pulse_time: float | None = None,
                             cfg: IntegratorConfig = DEFAULT_CONFIG) -> Operator:
    """Propagator of the full laser-on Hamiltonian, one column per basis state."""
    h = full_hamiltonian(p)
    t = p.pi_pulse_time if pulse_time is None else pulse_time
    cols = []
    for k in range(FULL.dim):
        e = np.zeros(FULL.dim, dtype=complex)
        e[k] = 1
        cols.append(evolve_unitary(PureState(FULL, e), h, t, cfg).amplitudes)
    return Operator(FULL, np.column_stack(cols))


def _check_blocking(p: CqdParams):
    margin = pauli_blocking_margin(p)
    if margin < PAULI_BLOCKING_THRESHOLD:
        warnings.warn(f"Pauli-blocking margin {margin:.3g} is below {PAULI_BLOCKING_THRESHOLD}", stacklevel=3)


def _apply(u: Operator, state):
    if isinstance(state, PureState):
        return PureState(state.basis, u.elements @ state.amplitudes)
    m = u.elements @ state.elements @ u.elements.conj().T
    return DensityMatrix(state.basis, 0.5 * (m + m.conj().T))


def excitation_pulse(state, p: CqdParams, cfg: IntegratorConfig = DEFAULT_CONFIG,
                     mode: str = "ideal", pulse_time: float | None = None):
    """Apply the excitation pi pulse; returns the same kind of state on the full basis."""
    _check_blocking(p)
    state = embed(state, FULL)
    if mode == "ideal":
        return _apply(ideal_pulse_operator(), state)
    if mode != "simulated":
        raise ValueError("mode must be 'ideal' or 'simulated'")
    if abs(p.detuning) > 1e-12:
        raise ValueError("simulated excitation assumes a resonant laser (omega_l == omega0)")
    return _apply(simulated_pulse_operator(p, pulse_time, cfg), state)


@dataclass(frozen=True)
class PulseReport:
    state: object
    fidelity: float
    leakage_11: float


def pulse_report(psi: PureState, p: CqdParams, cfg: IntegratorConfig = DEFAULT_CONFIG) -> PulseReport:
    """Simulated pulse against the ideal target.

    The target carries the -i phase a resonant pi pulse gives the promoted
    odd amplitudes, so ``fidelity`` only measures genuine errors.
    """
    psi = embed(psi, FULL)
    sim = excitation_pulse(psi, p, cfg, mode="simulated")
    target = excitation_pulse(psi, p, mode="ideal").amplitudes.copy()
    for e in EXCITED_ODD.values():
        target[FULL.index(e)] *= -1j
    fid = abs(np.vdot(target, sim.amplitudes)) ** 2
    leak = sum(abs(sim.amplitude(lab)) ** 2 for lab in ("1X", "X1", "XX"))
    return PulseReport(sim, float(fid), float(leak))


# -- closed forms ------------------------------------------------------------

def _weights(a) -> tuple[float, float]:
    if not isinstance(a, StateAmplitudes):
        a = StateAmplitudes(*a)
    return a.even_weight, a.odd_weight


def p_even_analytic(a, eta: float, t: float, gamma: float) -> float:
    """Probability of the even subspace given no click up to time t."""
    even, odd = _weights(a)
    return even / (1.0 + eta * odd * (math.exp(-gamma * t) - 1.0))


def fidelity_even_repeated(a, eta: float, r: int) -> float:
    """Even-subspace fidelity after r click-free rounds; 0/0 is defined as 1."""
    if r < 1:
        raise ValueError("r must be >= 1")
    even, odd = _weights(a)
    den = (1.0 - eta) ** r * odd + even
    if den == 0.0:
        return 1.0
    return even / den


def fidelity_even(a, eta: float) -> float:
    return fidelity_even_repeated(a, eta, 1)


def apply_parity_channel(rho: DensityMatrix, eta: float, r: int = 1) -> DensityMatrix:
    """Posterior after r rounds without a click: odd block weighted by (1-eta)^r, renormalised."""
    if r < 1:
        raise ValueError("r must be >= 1")
    po, pe = parity_projectors(rho.basis)
    c_odd = (1.0 - eta) ** r
    m = c_odd * (po.elements @ rho.elements @ po.elements) + pe.elements @ rho.elements @ pe.elements
    tr = np.trace(m).real
    if tr <= TRACE_FLOOR:
        raise ImpossibleBranchError("no-click outcome has zero probability for this state")
    return DensityMatrix(rho.basis, m / tr)


# -- stochastic protocol -----------------------------------------------------

class ParityExperiment:
    """Reusable set-up for many shots of the protocol with fixed parameters."""

    def __init__(self, p: CqdParams, det: DetectorModel, cfg: ProtocolConfig = ProtocolConfig(),
                 integrator: IntegratorConfig = DEFAULT_CONFIG):
        _check_blocking(p)
        self.params, self.detector, self.config = p, det, cfg
        self.wait = cfg.resolved_wait(p)
        self.h_relax = full_hamiltonian(replace(p, rabi=0.0))
        self.channel = relaxation_channel(p, det.efficiency)
        self.sampler = TrajectorySampler(self.h_relax, [self.channel])
        if cfg.pulse_mode == "ideal":
            self.pulse = ideal_pulse_operator().elements
        else:
            self.pulse = simulated_pulse_operator(p, cfg.resolved_pulse(p), integrator).elements

    def _prepare(self, rho0) -> DensityMatrix:
        if isinstance(rho0, PureState):
            rho0 = density_from_pure(rho0)
        return embed(rho0, FULL)

    def _excite(self, psi, rho):
        u = self.pulse
        return u @ psi, u @ rho @ u.conj().T

    def post_pulse_state(self, rho0) -> DensityMatrix:
        rho = self._prepare(rho0).elements
        u = self.pulse
        return DensityMatrix(FULL, u @ rho @ u.conj().T)

    def even_probability(self, rho0) -> float:
        """Probability that no round produces a click."""
        rho = self._prepare(rho0).elements
        u = self.pulse
        prob = 1.0
        for _ in range(self.config.repetitions):
            rho = u @ rho @ u.conj().T
            rt = self.sampler.observer_evolve(rho, self.wait)
            tr = np.trace(rt).real
            prob *= tr
            if tr <= TRACE_FLOOR:
                return 0.0
            rho = rt / tr
        return float(prob)

    def shot(self, rho0, seed: int, stream: int = 0, p_even: float | None = None) -> ParityOutcome:
        rho0 = self._prepare(rho0)
        rng = trajectory_rng(seed, stream)
        psi = self.sampler.initial_pure(rho0, rng)
        rho = np.array(rho0.elements)
        if p_even is None:
            p_even = self.even_probability(rho0)
        for k in range(self.config.repetitions):
            psi, rho = self._excite(psi, rho)
            if self.wait == 0:
                continue
            seg = self.sampler.run(psi, rho, self.wait, rng)
            psi, rho = seg.psi, seg.rho
            if seg.clicks:
                return ParityOutcome("odd", DensityMatrix(FULL, rho), 1.0 - p_even,
                                     detection_time=seg.clicks[0], round=k + 1)
        return ParityOutcome("even", DensityMatrix(FULL, rho), p_even)

    def shots(self, rho0, seed: int, n: int, threads: int | None = None) -> list[ParityOutcome]:
        rho0 = self._prepare(rho0)
        p_even = self.even_probability(rho0)
        return ordered_map(lambda k: self.shot(rho0, seed, k, p_even), range(n), threads)


def run_protocol(rho0, p: CqdParams, det: DetectorModel, cfg: ProtocolConfig = ProtocolConfig(),
                 seed: int = 42, stream: int = 0) -> ParityOutcome:
    """One shot: pi pulse then monitored relaxation, repeated until a click or r rounds."""
    return ParityExperiment(p, det, cfg).shot(rho0, seed, stream)


def run_protocol_batch(rho0, p: CqdParams, det: DetectorModel, cfg: ProtocolConfig, seed: int,
                       shots: int, threads: int | None = None) -> list[ParityOutcome]:
    return ParityExperiment(p, det, cfg).shots(rho0, seed, shots, threads)


def uniform_post_pulse_state() -> DensityMatrix:
    """The uniform superposition after an ideal pulse, on the full basis."""
    return density_from_pure(excitation_pulse(StateAmplitudes.uniform().to_state(), CqdParams.canonical()))


def odd_component(a: StateAmplitudes, basis: BasisRegistry = FULL) -> PureState:
    return PureState.from_labels(basis, {"01": a.a01, "10": a.a10}).normalized()
