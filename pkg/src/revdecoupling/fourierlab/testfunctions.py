"""Coefficient families on a frequency lattice."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import FrequencyLattice

FAMILIES = ("constant", "random-phase", "smooth-indicator")


@dataclass
class TestFunction:
    __test__ = False  # not a pytest class

    lattice: FrequencyLattice
    coeffs: np.ndarray
    family: str
    seed: int = 0

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.shape != (len(self.lattice),):
            raise ValueError("one coefficient per lattice point is required")


def smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


def bump(dist, delta):
    """1 on the inner half of the neighborhood, smoothly down to 0 at distance delta."""
    return 1.0 - smooth_step(2.0 * np.asarray(dist) / delta - 1.0)


def synth_test_function(lat: FrequencyLattice, family: str = "constant", seed: int = 0) -> TestFunction:
    if len(lat) == 0:
        raise ValueError("empty lattice")
    if family == "constant":
        c = np.ones(len(lat), dtype=complex)
    elif family == "random-phase":
        rng = np.random.Generator(np.random.PCG64(seed))
        c = np.exp(2j * np.pi * rng.random(len(lat)))
    elif family == "smooth-indicator":
        c = bump(lat.dist, lat.delta).astype(complex)
    else:
        raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")
    return TestFunction(lat, c, family, seed)
