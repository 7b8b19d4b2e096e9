"""Averages of the even-outcome fidelity over real two-qubit input states."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from ._parallel import ordered_map
from .exceptions import NumericalError
from .parity import StateAmplitudes

CONVERGENCE_TOL = 1e-6
MAX_POINTS_PER_AXIS = 2048
RULES = ("gauss_legendre", "trapezoid")


@dataclass(frozen=True)
class HypersphericalCoords:
    phi1: float
    phi2: float
    phi3: float

    def __post_init__(self):
        if not (0 <= self.phi1 <= math.pi and 0 <= self.phi2 <= math.pi and 0 <= self.phi3 <= 2 * math.pi):
            raise ValueError("coordinates out of range: phi1, phi2 in [0, pi], phi3 in [0, 2 pi]")


@dataclass(frozen=True)
class QuadratureConfig:
    rule: str = "gauss_legendre"
    points_per_axis: int = 64

    def __post_init__(self):
        if self.rule not in RULES:
            raise ValueError(f"unknown rule {self.rule!r}; choose from {RULES}")
        if self.points_per_axis < 8:
            raise ValueError("points_per_axis must be >= 8")

    def refined(self) -> QuadratureConfig:
        return QuadratureConfig(self.rule, 2 * self.points_per_axis)


def _amplitude_arrays(phi1, phi2, phi3):
    s1 = np.sin(phi1)
    s12 = s1 * np.sin(phi2)
    return s12 * np.cos(phi3), np.cos(phi1), s1 * np.cos(phi2), s12 * np.sin(phi3)


def amplitudes_from_hypersphere(c: HypersphericalCoords) -> StateAmplitudes:
    a00, a01, a10, a11 = (float(x) for x in _amplitude_arrays(c.phi1, c.phi2, c.phi3))
    return StateAmplitudes(a00, a01, a10, a11)


def _nodes(rule: str, n: int, lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
    if rule == "gauss_legendre":
        x, w = np.polynomial.legendre.leggauss(n)
        half = 0.5 * (hi - lo)
        return lo + half * (x + 1), half * w
    x = np.linspace(lo, hi, n)
    w = np.full(n, (hi - lo) / (n - 1))
    w[[0, -1]] *= 0.5
    return x, w


@lru_cache(maxsize=4)
def _grid(rule: str, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Even weight, odd weight and normalised measure on the (phi1, phi2) plane.

    The integrand depends on phi3 only through cos^2 + sin^2, so that axis
    integrates out exactly.
    """
    x1, w1 = _nodes(rule, n, 0.0, math.pi)
    x2, w2 = _nodes(rule, n, 0.0, math.pi)
    p1, p2 = np.meshgrid(x1, x2, indexing="ij")
    measure = np.outer(w1 * np.sin(x1) ** 2, w2 * np.sin(x2))
    measure /= measure.sum()
    even = (np.sin(p1) * np.sin(p2)) ** 2
    odd = np.cos(p1) ** 2 + (np.sin(p1) * np.cos(p2)) ** 2
    for a in (even, odd, measure):
        a.setflags(write=False)
    return even, odd, measure


def _average_once(eta: float, r: int, q: QuadratureConfig) -> float:
    even, odd, measure = _grid(q.rule, q.points_per_axis)
    den = (1.0 - eta) ** r * odd + even
    with np.errstate(invalid="ignore", divide="ignore"):
        f = np.where(den > 0, even / np.where(den > 0, den, 1.0), 1.0)
    return float(np.sum(f * measure))


def average_even_fidelity(eta: float, r: int = 1, q: QuadratureConfig = QuadratureConfig()) -> float:
    """Even-outcome fidelity after `r` click-free rounds, averaged uniformly over the real 3-sphere.

    The quadrature is doubled until two successive values agree within
    ``CONVERGENCE_TOL``.
    """
    if not 0 <= eta <= 1:
        raise ValueError("eta must lie in [0, 1]")
    if r < 1:
        raise ValueError("r must be >= 1")
    prev = _average_once(eta, r, q)
    while q.points_per_axis < MAX_POINTS_PER_AXIS:
        q = q.refined()
        cur = _average_once(eta, r, q)
        if abs(cur - prev) < CONVERGENCE_TOL:
            return min(1.0, max(0.0, cur))
        prev = cur
    raise NumericalError(f"quadrature did not converge for eta={eta}, r={r}")


def sweep_efficiency(r_list: Sequence[int], eta_grid: Sequence[float], q: QuadratureConfig = QuadratureConfig(),
                     threads: int | None = None) -> list[tuple[float, int, float]]:
    """Rows (eta, r, average fidelity), r-major, in input order."""
    r_list = [int(r) for r in r_list]
    eta_grid = [float(e) for e in eta_grid]
    if not r_list or not eta_grid:
        raise ValueError("grids must be nonempty")
    if len(set(eta_grid)) != len(eta_grid):
        raise ValueError("duplicate eta values")
    if len(set(r_list)) != len(r_list):
        raise ValueError("duplicate r values")
    points = [(e, r) for r in r_list for e in eta_grid]
    values = ordered_map(lambda er: average_even_fidelity(er[0], er[1], q), points, threads)
    return [(e, r, v) for (e, r), v in zip(points, values)]


def monte_carlo_average(eta: float, r: int, n: int, rng: np.random.Generator) -> tuple[float, float]:
    """Self-normalised importance estimate of the same average and its standard error.

    Coordinates are drawn uniformly on their box and weighted by the area
    element sin^2(phi1) sin(phi2).
    """
    phi1 = rng.uniform(0.0, math.pi, n)
    phi2 = rng.uniform(0.0, math.pi, n)
    phi3 = rng.uniform(0.0, 2 * math.pi, n)
    a00, a01, a10, a11 = _amplitude_arrays(phi1, phi2, phi3)
    even = a00 ** 2 + a11 ** 2
    odd = a01 ** 2 + a10 ** 2
    den = (1.0 - eta) ** r * odd + even
    with np.errstate(invalid="ignore", divide="ignore"):
        f = np.where(den > 0, even / np.where(den > 0, den, 1.0), 1.0)
    w = np.sin(phi1) ** 2 * np.sin(phi2)
    w /= w.mean()
    mean = float(np.mean(w * f))
    resid = w * (f - mean)
    return mean, float(resid.std(ddof=1) / math.sqrt(n))
