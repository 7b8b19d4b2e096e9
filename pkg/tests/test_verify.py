from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dotparity.exceptions import IndeterminateOutcome
from dotparity.errmodels import SpatialParams, spatial_coherence_factor
from dotparity.qcore import COMPUTATIONAL, DensityMatrix, PureState, density_from_pure, expectation, pauli_string
from dotparity.verify import (
    STABILIZER_SIGNS,
    BellId,
    CoherenceFactor,
    bell_discriminate,
    bell_state,
    dephased_parity_apply,
    global_hadamard,
    measure_bell,
    verification_pipeline,
    verification_probability,
)

from .strategies import density_matrices


def rho_after_parity(a):
    return 0.5 * np.array([[0, 0, 0, 0], [0, 1, a, 0], [0, a, 1, 0], [0, 0, 0, 0]])


def rho_after_rotation(a):
    p, m = 1 + a, 1 - a
    return 0.25 * np.array([[p, 0, 0, -p], [0, m, -m, 0], [0, -m, m, 0], [-p, 0, 0, p]])


class TestPipeline:
    @pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0])
    def test_intermediate_matrices(self, alpha):
        tr = verification_pipeline(alpha)
        np.testing.assert_allclose(tr.after_first.elements, rho_after_parity(alpha), atol=1e-12)
        np.testing.assert_allclose(tr.after_rotation.elements, rho_after_rotation(alpha), atol=1e-12)

    def test_probability_grid(self):
        for alpha in np.linspace(0, 1, 101):
            assert verification_probability(alpha) == pytest.approx((1 - alpha) / 2, abs=1e-12)

    def test_composition_with_spatial_factor(self):
        assert verification_probability(0.99925) == pytest.approx(3.75e-4, abs=1e-12)
        alpha = spatial_coherence_factor(SpatialParams.from_energy(5.0, 2.0))
        assert verification_probability(alpha) == pytest.approx(3.75e-4, abs=1e-4)

    def test_alpha_range(self):
        with pytest.raises(ValueError):
            CoherenceFactor(1.2)
        with pytest.raises(ValueError):
            verification_probability(-0.1)
        assert verification_probability(CoherenceFactor(0.2)) == pytest.approx(0.4)


class TestParityApply:
    def test_even_only_state(self):
        odd, even, p = dephased_parity_apply(bell_state(BellId.PHI_PLUS), 0.3)
        assert odd is None and p == 0.0
        np.testing.assert_allclose(even.elements, bell_state(BellId.PHI_PLUS).elements)

    def test_wrong_basis(self):
        from dotparity.qcore import FULL, identity

        with pytest.raises(ValueError):
            dephased_parity_apply(DensityMatrix(FULL, identity(FULL).elements / 9), 0.5)


@settings(max_examples=50, deadline=None)
@given(density_matrices(COMPUTATIONAL), st.floats(0, 1))
def test_branches_are_states(rho, alpha):
    odd, even, p = dephased_parity_apply(rho, alpha)
    assert 0 <= p <= 1 + 1e-12
    for br in (odd, even):
        if br is not None:
            assert br.trace == pytest.approx(1.0, abs=1e-10)
            assert br.is_positive(atol=1e-9)


@settings(max_examples=50, deadline=None)
@given(density_matrices(COMPUTATIONAL))
def test_hadamard_involution(rho):
    np.testing.assert_allclose(global_hadamard(global_hadamard(rho)).elements, rho.elements, atol=1e-12)


class TestStabilizers:
    @pytest.mark.parametrize("which", list(BellId))
    def test_signs(self, which):
        rho = bell_state(which)
        zz, xx = STABILIZER_SIGNS[which]
        assert expectation(rho, pauli_string("ZZ")) == pytest.approx(zz)
        assert expectation(rho, pauli_string("XX")) == pytest.approx(xx)
        assert measure_bell(rho) is which

    def test_indeterminate(self):
        with pytest.raises(IndeterminateOutcome):
            bell_discriminate(0.1, 0.9)
        with pytest.raises(IndeterminateOutcome):
            bell_discriminate(-0.9, 0.2)
        assert bell_discriminate(-0.9, 0.9) is BellId.PSI_PLUS

    def test_fully_dephased_is_indeterminate(self):
        with pytest.raises(IndeterminateOutcome):
            measure_bell(verification_pipeline(0.0).after_first)

    def test_product_state_indeterminate(self):
        rho = density_from_pure(PureState.from_labels(COMPUTATIONAL, {"01": 1.0}))
        with pytest.raises(IndeterminateOutcome):
            measure_bell(rho)
