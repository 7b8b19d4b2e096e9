"""Checking the entangling parity measurement with a second, rotated parity measurement."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import IndeterminateOutcome
from .qcore import (
    COMPUTATIONAL,
    TRACE_FLOOR,
    DensityMatrix,
    PureState,
    apply_operator,
    density_from_pure,
    expectation,
    global_hadamard_operator,
    pauli_string,
    projector,
)

DISCRIMINATION_THRESHOLD = 0.5


@dataclass(frozen=True)
class CoherenceFactor:
    """Surviving fraction of the 01/10 coherence after a click, in [0, 1]."""

    alpha: float

    def __post_init__(self):
        if not 0 <= self.alpha <= 1:
            raise ValueError("alpha must lie in [0, 1]")


class BellId(enum.Enum):
    PSI_PLUS = "psi_plus"
    PSI_MINUS = "psi_minus"
    PHI_PLUS = "phi_plus"
    PHI_MINUS = "phi_minus"


_BELL_AMPLITUDES = {
    BellId.PHI_PLUS: (1, 0, 0, 1),
    BellId.PHI_MINUS: (1, 0, 0, -1),
    BellId.PSI_PLUS: (0, 1, 1, 0),
    BellId.PSI_MINUS: (0, 1, -1, 0),
}

# Signs of <ZZ> and <XX> for each Bell state.
STABILIZER_SIGNS = {
    BellId.PSI_PLUS: (-1, +1),
    BellId.PSI_MINUS: (-1, -1),
    BellId.PHI_PLUS: (+1, +1),
    BellId.PHI_MINUS: (+1, -1),
}


def bell_state(which: BellId) -> DensityMatrix:
    amps = np.asarray(_BELL_AMPLITUDES[which], dtype=complex) / math.sqrt(2)
    return density_from_pure(PureState(COMPUTATIONAL, amps))


def _as_alpha(alpha) -> float:
    return alpha.alpha if isinstance(alpha, CoherenceFactor) else CoherenceFactor(float(alpha)).alpha


def dephased_parity_apply(rho: DensityMatrix, alpha) -> tuple[DensityMatrix | None, DensityMatrix | None, float]:
    """Parity measurement whose odd outcome keeps only a fraction `alpha` of the 01/10 coherence.

    Returns (odd branch, even branch, odd probability).  A branch of zero
    probability is returned as None.
    """
    if rho.basis.labels != COMPUTATIONAL.labels:
        raise ValueError("expected a two-qubit computational state")
    rho.check()
    a = _as_alpha(alpha)
    p01 = projector(COMPUTATIONAL, ["01"]).elements
    p10 = projector(COMPUTATIONAL, ["10"]).elements
    pe = projector(COMPUTATIONAL, ["00", "11"]).elements
    m = rho.elements
    odd = p01 @ m @ p01 + p10 @ m @ p10 + a * (p01 @ m @ p10 + p10 @ m @ p01)
    even = pe @ m @ pe
    p_odd = float(np.trace(odd).real)
    p_even = float(np.trace(even).real)
    odd_branch = DensityMatrix(COMPUTATIONAL, odd / p_odd) if p_odd > TRACE_FLOOR else None
    even_branch = DensityMatrix(COMPUTATIONAL, even / p_even) if p_even > TRACE_FLOOR else None
    return odd_branch, even_branch, p_odd


def global_hadamard(rho: DensityMatrix) -> DensityMatrix:
    return apply_operator(rho, global_hadamard_operator(rho.basis))


def odd_parity_probability(rho: DensityMatrix) -> float:
    return expectation(rho, projector(rho.basis, ["01", "10"]))


@dataclass(frozen=True)
class VerificationTrace:
    after_first: DensityMatrix
    after_rotation: DensityMatrix
    p_odd_second: float


def verification_pipeline(alpha) -> VerificationTrace:
    """Uniform input, dephased parity (odd branch), global Hadamard, second parity."""
    uniform = density_from_pure(PureState(COMPUTATIONAL, np.full(4, 0.5, dtype=complex)))
    odd, _, _ = dephased_parity_apply(uniform, alpha)
    rotated = global_hadamard(odd)
    return VerificationTrace(odd, rotated, odd_parity_probability(rotated))


def verification_probability(alpha) -> float:
    """Probability of an odd outcome in the second parity measurement; (1 - alpha) / 2."""
    return verification_pipeline(alpha).p_odd_second


def bell_discriminate(zz: float, xx: float, threshold: float = DISCRIMINATION_THRESHOLD) -> BellId:
    """Identify a Bell state from the signs of its ZZ and XX values."""
    for name, v in (("ZZ", zz), ("XX", xx)):
        if abs(v) < threshold:
            raise IndeterminateOutcome(f"{name} value {v} is too close to zero")
    key = (1 if zz > 0 else -1, 1 if xx > 0 else -1)
    return next(b for b, s in STABILIZER_SIGNS.items() if s == key)


def measure_bell(rho: DensityMatrix) -> BellId:
    """XX is read out as ZZ after a global Hadamard."""
    zz = expectation(rho, pauli_string("ZZ", rho.basis))
    xx = expectation(global_hadamard(rho), pauli_string("ZZ", rho.basis))
    return bell_discriminate(zz, xx)
