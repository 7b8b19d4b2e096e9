from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dotparity.analysis import (
    HypersphericalCoords,
    QuadratureConfig,
    amplitudes_from_hypersphere,
    average_even_fidelity,
    monte_carlo_average,
    sweep_efficiency,
)
from dotparity.exceptions import NumericalError
from dotparity.parity import fidelity_even_repeated

ETAS = np.round(np.linspace(0, 1, 11), 10)


class TestCoordinates:
    def test_poles(self):
        a = amplitudes_from_hypersphere(HypersphericalCoords(0.0, 0.0, 0.0))
        assert (a.a00, a.a01, a.a10, a.a11) == pytest.approx((0, 1, 0, 0))
        a = amplitudes_from_hypersphere(HypersphericalCoords(math.pi / 2, math.pi / 2, math.pi / 2))
        assert (a.a00, a.a01, a.a10, a.a11) == pytest.approx((0, 0, 0, 1), abs=1e-15)

    def test_range_checked(self):
        with pytest.raises(ValueError):
            HypersphericalCoords(4.0, 0.0, 0.0)
        with pytest.raises(ValueError):
            HypersphericalCoords(0.0, 0.0, 7.0)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0, math.pi), st.floats(0, math.pi), st.floats(0, 2 * math.pi))
    def test_unit_norm(self, p1, p2, p3):
        a = amplitudes_from_hypersphere(HypersphericalCoords(p1, p2, p3))
        assert a.a00 ** 2 + a.a01 ** 2 + a.a10 ** 2 + a.a11 ** 2 == pytest.approx(1.0, abs=1e-12)


class TestAverage:
    @pytest.mark.parametrize("r", [1, 2, 3, 5])
    def test_anchors(self, r):
        assert average_even_fidelity(0.0, r) == pytest.approx(0.5, abs=1e-6)
        assert average_even_fidelity(1.0, r) == pytest.approx(1.0, abs=1e-9)

    def test_closed_form_at_half(self):
        # with even weight u ~ Beta(2, 2) and (1 - eta)^r = 1/2, the average is 2 - 2 ln 2
        assert average_even_fidelity(0.5, 1) == pytest.approx(2 - 2 * math.log(2), abs=1e-6)

    def test_rules_agree(self):
        gl = average_even_fidelity(0.3, 2)
        tr = average_even_fidelity(0.3, 2, QuadratureConfig("trapezoid", 64))
        assert gl == pytest.approx(tr, abs=5e-6)

    def test_monte_carlo(self):
        mean, se = monte_carlo_average(0.6, 2, 100_000, np.random.default_rng(11))
        assert abs(mean - average_even_fidelity(0.6, 2)) < 3 * se

    def test_rounds_equal_effective_efficiency(self):
        # r rounds at eta act like one round at 1 - (1 - eta)^r
        assert average_even_fidelity(0.5, 3) == pytest.approx(average_even_fidelity(1 - 0.5 ** 3, 1), abs=2e-6)

    def test_validation(self):
        with pytest.raises(ValueError):
            average_even_fidelity(1.5)
        with pytest.raises(ValueError):
            average_even_fidelity(0.5, 0)
        with pytest.raises(ValueError):
            QuadratureConfig("simpson")
        with pytest.raises(ValueError):
            QuadratureConfig(points_per_axis=4)

    def test_non_convergence_reported(self, monkeypatch):
        import dotparity.analysis as an

        monkeypatch.setattr(an, "CONVERGENCE_TOL", 0.0)
        with pytest.raises(NumericalError):
            an.average_even_fidelity(0.4, 1, QuadratureConfig("trapezoid", 512))


class TestSweep:
    def test_monotone_and_dominance(self):
        rows = sweep_efficiency([1, 2, 3, 5], ETAS)
        assert len(rows) == 44
        curves = {r: [v for e, rr, v in rows if rr == r] for r in (1, 2, 3, 5)}
        for c in curves.values():
            assert all(b > a for a, b in zip(c, c[1:]))
        for i in range(1, 10):
            col = [curves[r][i] for r in (1, 2, 3, 5)]
            assert all(b > a for a, b in zip(col, col[1:]))
        assert all(c5 >= c1 for c1, c5 in zip(curves[1], curves[5]))

    def test_row_order(self):
        rows = sweep_efficiency([2, 1], [0.0, 0.5])
        assert [(e, r) for e, r, _ in rows] == [(0.0, 2), (0.5, 2), (0.0, 1), (0.5, 1)]

    def test_threads_identical(self):
        a = sweep_efficiency([1, 3], ETAS, threads=1)
        b = sweep_efficiency([1, 3], ETAS, threads=4)
        assert a == b

    def test_duplicates_rejected(self):
        with pytest.raises(ValueError):
            sweep_efficiency([1], [0.1, 0.1])
        with pytest.raises(ValueError):
            sweep_efficiency([1, 1], [0.1])
        with pytest.raises(ValueError):
            sweep_efficiency([], [0.1])


@settings(max_examples=30, deadline=None)
@given(st.floats(0, math.pi), st.floats(0, math.pi), st.floats(0, 2 * math.pi), st.floats(0, 1), st.integers(1, 5))
def test_pointwise_fidelity_bounded(p1, p2, p3, eta, r):
    a = amplitudes_from_hypersphere(HypersphericalCoords(p1, p2, p3))
    assert 0.0 <= fidelity_even_repeated(a, eta, r) <= 1.0 + 1e-12
