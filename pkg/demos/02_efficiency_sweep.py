"""How good must the detector be?  Average the even-outcome fidelity over all real inputs."""

from __future__ import annotations

import numpy as np

from dotparity import monte_carlo_average, sweep_efficiency

etas = [round(0.1 * k, 10) for k in range(11)]
rounds = [1, 2, 3, 5]
rows = sweep_efficiency(rounds, etas)
table = {r: [v for _, rr, v in rows if rr == r] for r in rounds}

print("eta   " + "".join(f"   r={r}   " for r in rounds))
for i, eta in enumerate(etas):
    print(f"{eta:4.1f}  " + "".join(f"  {table[r][i]:.5f} " for r in rounds))

mean, se = monte_carlo_average(0.5, 1, 200_000, np.random.default_rng(0))
print(f"\nMonte Carlo cross-check at eta = 0.5, r = 1: {mean:.5f} +- {se:.5f}  (quadrature {table[1][5]:.5f})")
print(f"Exact value at that point: 2 - 2 ln 2 = {2 - 2 * np.log(2):.5f}")
