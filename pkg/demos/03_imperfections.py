"""Three ways real dots spoil the measurement, and one way to undo the last."""

from __future__ import annotations

import math

import numpy as np

from dotparity import CqdParams, DetuningParams, HoleMixingParams, SpatialParams
from dotparity.errmodels import (
    detection_phase,
    detuned_detection_evolve,
    detuned_detection_jump,
    detuned_excitation_phase,
    detuned_excitation_transfer,
    holemix_pulse_scan,
    odd_coherence,
    spatial_coherence_factor,
    spectral_regime,
    z_correction,
)
from dotparity.dynamics import IntegratorConfig
from dotparity.qcore import FULL, PureState, density_from_pure

p = CqdParams.canonical()

print("Spatial separation: photons from dots a distance dr apart are slightly distinguishable")
for dr in (1.0, 5.0, 20.0, 100.0):
    sp = SpatialParams.from_energy(dr, 2.0)
    print(f"  dr = {dr:5.1f} nm   k0 dr = {sp.alpha():.4f}   surviving coherence 3f = {spatial_coherence_factor(sp):.6f}")

print("\nHole mixing: light-hole admixture lets the pi pulse leak into the doubly excited state")
grid = np.linspace(0.0, p.pi_pulse_time, 401)
for eps in (0.0, 0.01, 0.02, 0.05):
    scan = holemix_pulse_scan(p, HoleMixingParams.matched(p, eps), 0.0, grid)
    print(f"  eps = {eps:4.2f}   left in |01> {scan.residual_01():.2e}   peak |XX> {scan.peak_biexciton():.2e}")

print("\nSpectral detuning: dots at omega_L +- delta")
for ratio in (0.0, 0.1, 0.5, 1.0):
    delta = ratio * p.rabi
    pmax, tmax = detuned_excitation_transfer(p.rabi, delta)
    d = DetuningParams.midpoint(p.omega_l + delta, p.omega_l - delta)
    phase = detuned_excitation_phase(p, d, p.pi_pulse_time).phase
    print(f"  delta/Omega = {ratio:3.1f}   max transfer {pmax:.4f} at t = {tmax:6.2f}   relative phase {phase:+.4f}")

print("\nDetected photon frequency tags the odd state with a phase set by the click time")
d = DetuningParams.midpoint(2000.01, 1999.99)
print(f"  regime: {spectral_regime(d)}")
s = 1 / math.sqrt(2)
excited = density_from_pure(PureState.from_labels(FULL, {"0X": s, "X0": s}))
cfg = IntegratorConfig(rel_tol=1e-12, dt_max=1.0)
rng = np.random.default_rng(3)
raw, fixed = [], []
for t in rng.exponential(1 / d.gamma_a, 20):
    post = detuned_detection_jump(detuned_detection_evolve(excited, d, float(t), cfg, eta=1.0), d)
    raw.append(post.element("01", "10"))
    fixed.append(z_correction(post, detection_phase(float(t), d)).element("01", "10"))
print(f"  averaged coherence without correction {2 * abs(np.mean(raw)):.3f}")
print(f"  averaged coherence with Z correction  {2 * abs(np.mean(fixed)):.3f}")
print(f"  single shot after correction          {odd_coherence(z_correction(post, detection_phase(float(t), d))).magnitude:.9f}")
