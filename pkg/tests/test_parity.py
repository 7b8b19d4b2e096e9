from __future__ import annotations

import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from dotparity.exceptions import ImpossibleBranchError
from dotparity.models import CqdParams, full_hamiltonian
from dotparity.parity import (
    DetectorModel,
    ParityExperiment,
    ParityOutcome,
    ProtocolConfig,
    StateAmplitudes,
    apply_parity_channel,
    excitation_pulse,
    fidelity_even,
    fidelity_even_repeated,
    ideal_pulse_operator,
    p_even_analytic,
    parity_projectors,
    pulse_report,
    run_protocol,
    run_protocol_batch,
    uniform_post_pulse_state,
)
from dotparity.qcore import COMPUTATIONAL, FULL, DensityMatrix, PureState, density_from_pure, identity, pauli_string

from .strategies import amplitudes

P = CqdParams.canonical()
UNIFORM = StateAmplitudes.uniform()


class TestProjectors:
    def test_action(self):
        po, pe = parity_projectors()
        e01, e00 = np.eye(4)[1], np.eye(4)[0]
        np.testing.assert_allclose(po.elements @ e01, e01)
        np.testing.assert_allclose(po.elements @ e00, 0)

    def test_stabilizer_form(self):
        po, pe = parity_projectors()
        zz = pauli_string("ZZ").elements
        np.testing.assert_allclose(pe.elements, (np.eye(4) + zz) / 2)
        np.testing.assert_allclose(po.elements, (np.eye(4) - zz) / 2)

    def test_traces_and_orthogonality(self):
        po, pe = parity_projectors()
        assert np.trace(po.elements).real == 2 and np.trace(pe.elements).real == 2
        np.testing.assert_allclose(po.elements @ pe.elements, 0)
        np.testing.assert_allclose((po + pe).elements, identity(COMPUTATIONAL).elements)


class TestAmplitudes:
    def test_norm_enforced(self):
        with pytest.raises(ValueError):
            StateAmplitudes(1, 1, 0, 0)

    def test_weights(self):
        a = StateAmplitudes.normalized(1, 2, 0, 2)
        assert a.even_weight == pytest.approx(5 / 9) and a.odd_weight == pytest.approx(4 / 9)


class TestExcitation:
    def test_ideal_uniform(self):
        out = excitation_pulse(UNIFORM.to_state(), P)
        expected = PureState.from_labels(FULL, {"00": 0.5, "0X": 0.5, "X0": 0.5, "11": 0.5})
        np.testing.assert_allclose(out.amplitudes, expected.amplitudes)

    def test_even_only_unchanged(self):
        psi = StateAmplitudes.normalized(0.6, 0, 0, 0.8).to_state()
        out = excitation_pulse(psi, P)
        np.testing.assert_allclose(out.amplitudes[[0, 5]], [0.6, 0.8])
        assert np.count_nonzero(out.amplitudes) == 2

    def test_density_input(self):
        rho = density_from_pure(UNIFORM.to_state())
        out = excitation_pulse(rho, P)
        assert isinstance(out, DensityMatrix) and out.basis is FULL
        assert out.populations(["0X", "X0"]) == pytest.approx(0.5)

    def test_pulse_is_permutation(self):
        u = ideal_pulse_operator().elements
        np.testing.assert_allclose(u @ u.T, np.eye(9))

    def test_simulated_against_expm(self):
        rep = pulse_report(UNIFORM.to_state(), P)
        u = expm(-1j * full_hamiltonian(P).elements * P.pi_pulse_time)
        psi_full = np.zeros(9, dtype=complex)
        psi_full[[0, 1, 3, 5]] = 0.5
        np.testing.assert_allclose(rep.state.amplitudes, u @ psi_full, atol=1e-8)

    def test_simulated_leakage_bounded(self):
        psi = StateAmplitudes(0, 0, 0, 1).to_state()
        rep = pulse_report(psi, P)
        omega_eff = math.sqrt(2) * P.rabi
        bound = omega_eff ** 2 / (omega_eff ** 2 + P.v_f ** 2)
        assert 0 < rep.leakage_11 < bound
        assert rep.leakage_11 == pytest.approx(0.01787, abs=5e-4)

    def test_simulated_odd_transfer(self):
        rep = pulse_report(StateAmplitudes(0, 1, 0, 0).to_state(), P)
        assert rep.fidelity == pytest.approx(1.0, abs=1e-8)

    def test_simulated_requires_resonance(self):
        with pytest.raises(ValueError):
            excitation_pulse(UNIFORM.to_state(), CqdParams(omega_l=1999.9), mode="simulated")

    def test_weak_blocking_warns(self):
        with pytest.warns(UserWarning):
            excitation_pulse(UNIFORM.to_state(), CqdParams(rabi=1.0))


class TestClosedForms:
    def test_p_even_limits(self):
        assert p_even_analytic(UNIFORM, 0.5, 0.0, 0.004) == pytest.approx(0.5)
        assert p_even_analytic(UNIFORM, 1.0, 1e9, 0.004) == pytest.approx(1.0)
        assert p_even_analytic(UNIFORM, 0.5, 1e9, 0.004) == pytest.approx(2 / 3)

    def test_fidelity_values(self):
        assert fidelity_even(UNIFORM, 0.5) == pytest.approx(2 / 3)
        assert fidelity_even(UNIFORM, 1.0) == 1.0
        assert fidelity_even(UNIFORM, 0.0) == pytest.approx(0.5)
        assert fidelity_even_repeated(UNIFORM, 0.5, 2) == pytest.approx(0.8)
        assert fidelity_even_repeated(UNIFORM, 0.5, 10) == pytest.approx(0.5 / (0.5 / 1024 + 0.5))

    def test_zero_over_zero_convention(self):
        assert fidelity_even(StateAmplitudes(0, 1, 0, 0), 1.0) == 1.0

    def test_rounds_validated(self):
        with pytest.raises(ValueError):
            fidelity_even_repeated(UNIFORM, 0.5, 0)

    def test_channel_examples(self):
        rho01 = density_from_pure(StateAmplitudes(0, 1, 0, 0).to_state())
        np.testing.assert_allclose(apply_parity_channel(rho01, 0.5).elements, rho01.elements)
        out = apply_parity_channel(density_from_pure(UNIFORM.to_state()), 1.0, 1)
        expected = np.zeros((4, 4))
        expected[np.ix_([0, 3], [0, 3])] = 0.5
        np.testing.assert_allclose(out.elements, expected)

    def test_channel_impossible(self):
        rho01 = density_from_pure(StateAmplitudes(0, 1, 0, 0).to_state())
        with pytest.raises(ImpossibleBranchError):
            apply_parity_channel(rho01, 1.0)


@settings(max_examples=80, deadline=None)
@given(amplitudes(), st.floats(0.0, 1.0), st.integers(1, 8))
def test_repeated_fidelity_monotone_in_rounds(a, eta, r):
    assert fidelity_even_repeated(a, eta, r + 1) >= fidelity_even_repeated(a, eta, r) - 1e-15


@settings(max_examples=80, deadline=None)
@given(amplitudes(), st.floats(0.01, 0.99))
def test_fidelity_is_long_time_limit(a, eta):
    assert p_even_analytic(a, eta, 1e6, 0.004) == pytest.approx(fidelity_even(a, eta), abs=1e-12)


@settings(max_examples=80, deadline=None)
@given(amplitudes(), st.floats(0.01, 0.99), st.integers(1, 5))
def test_channel_matches_closed_form(a, eta, r):
    rho = density_from_pure(a.to_state())
    out = apply_parity_channel(rho, eta, r)
    assert out.populations(["00", "11"]) == pytest.approx(fidelity_even_repeated(a, eta, r), abs=1e-12)


class TestProtocol:
    def test_bell_input_perfect_detector(self):
        bell = StateAmplitudes(0, 1 / math.sqrt(2), 1 / math.sqrt(2), 0)
        exp = ParityExperiment(P, DetectorModel(1.0))
        outs = exp.shots(bell.to_state(), seed=1, n=200)
        assert all(o.is_odd for o in outs)
        o = outs[0]
        assert o.probability == pytest.approx(1 - math.exp(-10), abs=1e-9)
        assert o.posterior.element("01", "10") == pytest.approx(0.5, abs=1e-10)
        assert o.posterior.populations(["01", "10"]) == pytest.approx(1.0, abs=1e-12)

    def test_zero_efficiency_is_always_even(self):
        outs = run_protocol_batch(UNIFORM.to_state(), P, DetectorModel(0.0), ProtocolConfig(), seed=4, shots=50)
        assert all(not o.is_odd for o in outs)

    def test_even_posterior_matches_closed_form(self):
        o = run_protocol(UNIFORM.to_state(), P, DetectorModel(0.5), seed=8)
        if not o.is_odd:
            expected = p_even_analytic(UNIFORM, 0.5, 10 / P.gamma_x, P.gamma_x)
            assert o.even_fidelity() == pytest.approx(expected, abs=1e-9)

    def test_even_fraction(self):
        exp = ParityExperiment(P, DetectorModel(0.5))
        outs = exp.shots(UNIFORM.to_state(), seed=42, n=4000)
        frac = np.mean([not o.is_odd for o in outs])
        p = 1 - 0.5 * 0.5 * (1 - math.exp(-10))
        assert abs(frac - p) < 3 * math.sqrt(p * (1 - p) / 4000)

    def test_repetitions_boost_fidelity(self):
        exp = ParityExperiment(P, DetectorModel(0.5), ProtocolConfig(repetitions=3))
        rho = density_from_pure(UNIFORM.to_state())
        p_even = exp.even_probability(rho)
        # odd weight split into ground (g) and excited (x); each pulse swaps them
        g, x, s = 0.5, 0.0, math.exp(-10)
        for _ in range(3):
            g, x = x, g
            g, x = g + 0.5 * (1 - s) * x, s * x
        assert p_even == pytest.approx(0.5 + g + x, abs=1e-9)
        outs = exp.shots(rho, seed=6, n=300)
        for o in outs:
            if not o.is_odd:
                assert o.even_fidelity() > 0.88

    def test_outcome_validation(self):
        with pytest.raises(ValueError):
            ParityOutcome("maybe", uniform_post_pulse_state(), 0.5)
        with pytest.raises(ValueError):
            ProtocolConfig(repetitions=0)
        with pytest.raises(ValueError):
            DetectorModel(1.5)

    def test_seed_reproducible(self):
        exp = ParityExperiment(P, DetectorModel(0.5))
        a = exp.shot(UNIFORM.to_state(), seed=3, stream=17)
        b = exp.shot(UNIFORM.to_state(), seed=3, stream=17)
        assert a.variant == b.variant and a.detection_time == b.detection_time

    def test_simulated_pulse_mode(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            exp = ParityExperiment(P, DetectorModel(1.0), ProtocolConfig(pulse_mode="simulated"))
        o = exp.shot(StateAmplitudes(0, 1, 0, 0).to_state(), seed=0)
        assert o.is_odd
