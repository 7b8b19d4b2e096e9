"""Check the measurement with itself: a rotated second parity measurement reveals lost coherence."""

from __future__ import annotations

import numpy as np

from dotparity import SpatialParams
from dotparity.errmodels import spatial_coherence_factor
from dotparity.verify import BellId, bell_state, measure_bell, verification_pipeline, verification_probability

print("ZZ and XX signs identify each Bell state:")
for which in BellId:
    print(f"  {which.value:10s} -> {measure_bell(bell_state(which)).value}")

tr = verification_pipeline(0.5)
np.set_printoptions(precision=3, suppress=True)
print("\nAfter an odd outcome that kept half of the coherence:")
print(tr.after_first.elements.real)
print("after a Hadamard on both spins:")
print(tr.after_rotation.elements.real)

print("\nProbability that the second measurement reads odd, which flags dephasing:")
for alpha in (1.0, 0.99, 0.9, 0.5, 0.0):
    print(f"  alpha = {alpha:4.2f}   p_odd = {verification_probability(alpha):.4f}")

alpha = spatial_coherence_factor(SpatialParams.from_energy(5.0, 2.0))
print(f"\nDots 5 nm apart emitting at 2 eV: alpha = {alpha:.5f}, p_odd = {verification_probability(alpha):.2e}")
