"""Time evolution: unitary, Lindblad, unnormalised conditional, and jump trajectories.

Density matrices are vectorised row-major, so ``vec(A rho B) = kron(A, B.T) vec(rho)``.

The trajectory sampler runs two coupled pieces of state.  The *unraveled*
state is conditioned on every emission, detected or missed, and is what
decides when photons leave the system.  The *observer* state is conditioned
only on the detector record; between clicks it follows the linear
unnormalised conditional equation, at a click it takes the normalised jump.
Averaged over records either one reproduces the unconditional master equation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm
from scipy.optimize import brentq
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from ._parallel import ordered_map
from .exceptions import DimensionError, NumericalError
from .models import HamiltonianModel
from .qcore import (
    BasisRegistry,
    DensityMatrix,
    Operator,
    PureState,
    TRACE_FLOOR,
)

METHODS = ("rk4_fixed", "rk45_adaptive")


@dataclass(frozen=True)
class LindbladChannel:
    """Decay channel ``c = sqrt(rate) * operator`` watched by a detector of efficiency ``efficiency``."""

    operator: Operator
    rate: float
    efficiency: float = 1.0

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError("rate must be >= 0")
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValueError("efficiency must lie in [0, 1]")

    @property
    def collapse(self) -> np.ndarray:
        return math.sqrt(self.rate) * self.operator.elements


@dataclass(frozen=True)
class IntegratorConfig:
    dt_max: float = 50.0
    rel_tol: float = 1e-9
    method: str = "rk45_adaptive"

    def __post_init__(self):
        if not self.dt_max > 0:
            raise ValueError("dt_max must be > 0")
        if not 0 < self.rel_tol <= 1e-3:
            raise ValueError("rel_tol must lie in (0, 1e-3]")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")

    @property
    def abs_tol(self) -> float:
        return self.rel_tol * 1e-3


@dataclass(frozen=True)
class TrajectoryRecord:
    """One monitored run.

    ``jump_times`` are detector clicks.  ``final_state`` is the observer's
    conditional state; ``unraveled_state`` additionally conditions on the
    missed emissions listed in ``emission_times``.  ``no_jump_norm`` is the
    trace of the unnormalised observer state over the last click-free stretch.
    """

    seed: int
    stream: int
    jump_times: tuple[float, ...]
    dn_total: int
    final_state: DensityMatrix
    no_jump_norm: float
    emission_times: tuple[float, ...] = ()
    jump_channels: tuple[int, ...] = ()
    unraveled_state: DensityMatrix | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.dn_total != len(self.jump_times):
            raise ValueError("dn_total must equal the number of jump times")


# -- superoperators ----------------------------------------------------------

def _check_model(h: HamiltonianModel, channels: Sequence[LindbladChannel], basis: BasisRegistry):
    if h.basis.labels != basis.labels:
        raise DimensionError("Hamiltonian and state live on different bases")
    for ch in channels:
        if ch.operator.basis.labels != basis.labels:
            raise DimensionError("channel operator lives on a different basis")


def commutator_superop(h: np.ndarray) -> np.ndarray:
    """-i[H, .] as a matrix on vec(rho)."""
    eye = np.eye(h.shape[0])
    return -1j * (np.kron(h, eye) - np.kron(eye, h.T))


def sandwich_superop(a: np.ndarray, b: np.ndarray | None = None) -> np.ndarray:
    """rho -> a rho b^dagger (b defaults to a)."""
    b = a if b is None else b
    return np.kron(a, b.conj())


def anticommutator_superop(a: np.ndarray) -> np.ndarray:
    """rho -> (a rho + rho a) / 2."""
    eye = np.eye(a.shape[0])
    return 0.5 * (np.kron(a, eye) + np.kron(eye, a.T))


def liouvillian(h: HamiltonianModel, channels: Sequence[LindbladChannel], conditional: bool = False) -> np.ndarray:
    """Generator of the Lindblad equation, or of the no-click equation if `conditional`.

    In the conditional form the refill term of channel j is weighted by
    ``1 - efficiency_j``.
    """
    gen = commutator_superop(h.elements)
    for ch in channels:
        c = ch.collapse
        weight = (1.0 - ch.efficiency) if conditional else 1.0
        gen = gen + weight * sandwich_superop(c) - anticommutator_superop(c.conj().T @ c)
    return gen


def effective_hamiltonian(h: HamiltonianModel, channels: Sequence[LindbladChannel]) -> np.ndarray:
    heff = h.elements.astype(complex)
    for ch in channels:
        c = ch.collapse
        heff = heff - 0.5j * (c.conj().T @ c)
    return heff


# -- integrators -------------------------------------------------------------

def _rk4(gen: np.ndarray, y0: np.ndarray, t: float, dt_max: float) -> np.ndarray:
    n = max(1, math.ceil(t / dt_max))
    dt = t / n
    y = y0
    for _ in range(n):
        k1 = gen @ y
        k2 = gen @ (y + 0.5 * dt * k1)
        k3 = gen @ (y + 0.5 * dt * k2)
        k4 = gen @ (y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


def integrate_linear(gen: np.ndarray, y0: np.ndarray, t: float, cfg: IntegratorConfig) -> np.ndarray:
    """Solve y' = gen @ y from 0 to t."""
    if t < 0:
        raise ValueError("t must be >= 0")
    y0 = np.asarray(y0, dtype=complex)
    if t == 0:
        return y0.copy()
    if cfg.method == "rk4_fixed":
        return _rk4(gen, y0, t, cfg.dt_max)
    sol = solve_ivp(
        lambda _t, y: gen @ y,
        (0.0, t),
        y0,
        method="RK45",
        rtol=cfg.rel_tol,
        atol=cfg.abs_tol,
        max_step=cfg.dt_max,
    )
    if not sol.success:
        raise NumericalError(f"integration failed: {sol.message}")
    return sol.y[:, -1]


DEFAULT_CONFIG = IntegratorConfig()


def evolve_unitary(psi: PureState, h: HamiltonianModel, t: float, cfg: IntegratorConfig = DEFAULT_CONFIG) -> PureState:
    if psi.basis.labels != h.basis.labels:
        raise DimensionError("state and Hamiltonian bases differ")
    y = integrate_linear(-1j * h.elements, psi.amplitudes, t, cfg)
    return PureState(psi.basis, y)


def _evolve_density(rho: DensityMatrix, gen: np.ndarray, t: float, cfg: IntegratorConfig) -> DensityMatrix:
    d = rho.basis.dim
    y = integrate_linear(gen, rho.elements.reshape(-1), t, cfg).reshape(d, d)
    return DensityMatrix(rho.basis, 0.5 * (y + y.conj().T))


def evolve_lindblad(rho: DensityMatrix, h: HamiltonianModel, channels: Sequence[LindbladChannel],
                    t: float, cfg: IntegratorConfig = DEFAULT_CONFIG) -> DensityMatrix:
    _check_model(h, channels, rho.basis)
    return _evolve_density(rho, liouvillian(h, channels), t, cfg)


def evolve_cme_unnormalized(rho_t: DensityMatrix, h: HamiltonianModel, channels: Sequence[LindbladChannel],
                            t: float, cfg: IntegratorConfig = DEFAULT_CONFIG) -> DensityMatrix:
    """Click-free evolution; the trace of the result is the probability of no click."""
    _check_model(h, channels, rho_t.basis)
    return _evolve_density(rho_t, liouvillian(h, channels, conditional=True), t, cfg)


def no_photon_probability(rho0: DensityMatrix, h: HamiltonianModel, channels: Sequence[LindbladChannel],
                          t: float, cfg: IntegratorConfig = DEFAULT_CONFIG) -> float:
    return evolve_cme_unnormalized(rho0, h, channels, t, cfg).trace


# -- exact propagation for trajectories --------------------------------------

class _Block:
    """exp(g t) on one invariant block: spectral when well conditioned, else expm."""

    COND_LIMIT = 1e4

    def __init__(self, g: np.ndarray):
        self.g = g
        self.w = None
        if g.shape[0] == 1:
            self.w, self.v, self.vinv = g[0], np.ones((1, 1)), np.ones((1, 1))
            return
        w, v = np.linalg.eig(g)
        cond = np.linalg.cond(v)
        if np.isfinite(cond) and cond < self.COND_LIMIT:
            self.w, self.v, self.vinv = w, v, np.linalg.inv(v)

    def apply(self, y: np.ndarray, t: float) -> np.ndarray:
        if self.w is not None:
            return self.v @ (np.exp(self.w * t) * (self.vinv @ y))
        return expm(self.g * t) @ y


class LinearPropagator:
    """exp(gen * t) @ y for a fixed generator.

    The generator is split into the connected components of its sparsity
    graph; each block is propagated on its own, which keeps eigenvector
    conditioning benign for the highly degenerate generators met here.
    """

    def __init__(self, gen: np.ndarray):
        self.gen = np.asarray(gen, dtype=complex)
        pattern = csr_matrix(np.abs(self.gen) > 0)
        n_comp, labels = connected_components(pattern, directed=False)
        self._blocks = []
        for k in range(n_comp):
            idx = np.flatnonzero(labels == k)
            self._blocks.append((idx, _Block(self.gen[np.ix_(idx, idx)])))

    @property
    def spectral(self) -> bool:
        return all(b.w is not None for _, b in self._blocks)

    def coefficients(self, y: np.ndarray):
        """Per-block spectral coordinates of `y` (requires :attr:`spectral`)."""
        return [b.vinv @ y[idx] for idx, b in self._blocks]

    def from_coefficients(self, coeffs, t: float) -> np.ndarray:
        out = np.empty(self.gen.shape[0], dtype=complex)
        for (idx, b), c in zip(self._blocks, coeffs):
            out[idx] = b.v @ (np.exp(b.w * t) * c)
        return out

    def apply(self, y: np.ndarray, t: float) -> np.ndarray:
        y = np.asarray(y, dtype=complex)
        out = np.empty_like(y)
        for idx, b in self._blocks:
            out[idx] = b.apply(y[idx], t)
        return out


def trajectory_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator for trajectory `stream` of master `seed`."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(stream)])))


@dataclass
class SegmentResult:
    psi: np.ndarray
    rho: np.ndarray
    clicks: list = field(default_factory=list)
    emissions: list = field(default_factory=list)
    channels: list = field(default_factory=list)
    no_click_norm: float = 1.0


class TrajectorySampler:
    """Precomputed propagators for repeated trajectories of one model."""

    def __init__(self, h: HamiltonianModel, channels: Sequence[LindbladChannel]):
        self.basis = h.basis
        _check_model(h, channels, self.basis)
        self.channels = tuple(ch for ch in channels if ch.rate > 0)
        self._c = [ch.collapse for ch in self.channels]
        self._eff = np.array([ch.efficiency for ch in self.channels])
        self._hidden = LinearPropagator(-1j * effective_hamiltonian(h, self.channels))
        self._observer = LinearPropagator(liouvillian(h, self.channels, conditional=True))
        self._decays = bool(self._c)

    # hidden (emission-resolved) pure state
    def _survival(self, psi: np.ndarray):
        """s -> squared norm of the no-emission state after time s."""
        if self._hidden.spectral:
            coeffs = self._hidden.coefficients(psi)

            def survival(s):
                v = self._hidden.from_coefficients(coeffs, s)
                return float(np.vdot(v, v).real)
        else:
            def survival(s):
                return float(np.linalg.norm(self._hidden.apply(psi, s)) ** 2)
        return survival

    def observer_evolve(self, rho: np.ndarray, dt: float) -> np.ndarray:
        """Unnormalised click-free evolution of an observer state matrix."""
        if dt == 0:
            return np.array(rho, dtype=complex)
        d = self.basis.dim
        return self._observer.apply(rho.reshape(-1), dt).reshape(d, d)

    def initial_pure(self, rho0: DensityMatrix, rng: np.random.Generator) -> np.ndarray:
        """Draw a pure state from the eigen-ensemble of `rho0`."""
        w, v = np.linalg.eigh(rho0.elements)
        w = np.clip(w, 0.0, None)
        w = w / w.sum()
        k = int(np.argmax(w))
        if w[k] < 1.0 - 1e-12:
            k = int(min(np.searchsorted(np.cumsum(w), rng.random(), side="right"), len(w) - 1))
        return v[:, k].astype(complex)

    def run(self, psi: np.ndarray, rho: np.ndarray, horizon: float, rng: np.random.Generator,
            t_offset: float = 0.0) -> SegmentResult:
        """Evolve hidden `psi` and observer `rho` (normalised) for `horizon`."""
        if not horizon > 0:
            raise ValueError("horizon must be > 0")
        out = SegmentResult(psi=psi, rho=rho)
        t = 0.0
        seg_start = 0.0
        rho_seg = rho
        while t < horizon and self._decays:
            u = rng.random()
            remaining = horizon - t
            survival = self._survival(psi)
            if survival(remaining) > u:
                break
            s = brentq(lambda x: survival(x) - u, 0.0, remaining, xtol=1e-12 * max(1.0, remaining), rtol=1e-10)
            phi = self._hidden.apply(psi, s)
            phi = phi / np.linalg.norm(phi)
            t += s
            weights = np.array([np.linalg.norm(c @ phi) ** 2 for c in self._c])
            j = 0
            if len(self._c) > 1:
                j = int(min(np.searchsorted(np.cumsum(weights / weights.sum()), rng.random(), side="right"),
                            len(weights) - 1))
            psi = self._c[j] @ phi
            psi = psi / np.linalg.norm(psi)
            out.emissions.append(t_offset + t)
            if rng.random() < self._eff[j]:
                # the observer sees a click: evolve its unnormalised state up to now, then jump
                rt = self.observer_evolve(rho_seg, t - seg_start)
                c = self._c[j]
                jumped = c @ rt @ c.conj().T
                tr = np.trace(jumped).real
                if tr <= TRACE_FLOOR:
                    raise NumericalError("observer assigns zero probability to a sampled click")
                rho_seg = jumped / tr
                seg_start = t
                out.clicks.append(t_offset + t)
                out.channels.append(j)
        if t < horizon:
            psi = self._hidden.apply(psi, horizon - t)
            psi = psi / np.linalg.norm(psi)
        rt = self.observer_evolve(rho_seg, horizon - seg_start)
        rt = 0.5 * (rt + rt.conj().T)
        tr = np.trace(rt).real
        if tr <= TRACE_FLOOR:
            raise NumericalError("observer no-click probability underflowed")
        out.psi = psi
        out.rho = rt / tr
        out.no_click_norm = float(tr)
        return out

    def sample(self, rho0: DensityMatrix, horizon: float, seed: int, stream: int = 0) -> TrajectoryRecord:
        if rho0.basis.labels != self.basis.labels:
            raise DimensionError("initial state lives on a different basis")
        rng = trajectory_rng(seed, stream)
        psi = self.initial_pure(rho0, rng)
        seg = self.run(psi, np.array(rho0.elements), horizon, rng)
        return TrajectoryRecord(
            seed=int(seed),
            stream=int(stream),
            jump_times=tuple(seg.clicks),
            dn_total=len(seg.clicks),
            final_state=DensityMatrix(self.basis, seg.rho),
            no_jump_norm=seg.no_click_norm,
            emission_times=tuple(seg.emissions),
            jump_channels=tuple(seg.channels),
            unraveled_state=DensityMatrix(self.basis, np.outer(seg.psi, seg.psi.conj())),
        )


def sample_trajectory(rho0: DensityMatrix, h: HamiltonianModel, channels: Sequence[LindbladChannel],
                      horizon: float, seed: int, stream: int = 0) -> TrajectoryRecord:
    if not horizon > 0:
        raise ValueError("horizon must be > 0")
    return TrajectorySampler(h, channels).sample(rho0, horizon, seed, stream)


def sample_ensemble(rho0: DensityMatrix, h: HamiltonianModel, channels: Sequence[LindbladChannel],
                    horizon: float, seed: int, n_trajectories: int, threads: int | None = None) -> list[TrajectoryRecord]:
    """`n_trajectories` records with streams 0..n-1, in stream order whatever the thread count."""
    if not horizon > 0:
        raise ValueError("horizon must be > 0")
    sampler = TrajectorySampler(h, channels)
    return ordered_map(lambda k: sampler.sample(rho0, horizon, seed, k), range(n_trajectories), threads)


def ensemble_mean(states: Sequence[DensityMatrix]) -> tuple[np.ndarray, np.ndarray]:
    """Elementwise mean and standard error (real and imaginary parts separately)."""
    stack = np.stack([s.elements for s in states])
    n = len(states)
    mean = stack.mean(axis=0)
    se = (stack.real.std(axis=0, ddof=1) + 1j * stack.imag.std(axis=0, ddof=1)) / math.sqrt(n)
    return mean, se
