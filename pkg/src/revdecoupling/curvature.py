"""Shape operator, Gaussian curvature and principal curvatures.

Two independent routes are provided: the general graph formulas, fed with
the analytic chain-rule partials of g(x) = gamma(|x|), and the closed forms
for surfaces of revolution in terms of the profile jet.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .profile import Profile


@dataclass(frozen=True)
class GraphJet2:
    xi1: float
    xi2: float
    g: float
    g1: float
    g2: float
    g11: float
    g12: float
    g22: float


@dataclass(frozen=True)
class CurvatureSample:
    r: float
    K: float
    lambda_rad: float
    lambda_ang: float


def shape_operator(j: GraphJet2) -> np.ndarray:
    g1, g2, g11, g12, g22 = j.g1, j.g2, j.g11, j.g12, j.g22
    scale = (1.0 + g1 * g1 + g2 * g2) ** -1.5
    m = np.array(
        [
            [g11 * (1 + g2 * g2) - g1 * g2 * g12, g12 * (1 + g2 * g2) - g1 * g2 * g22],
            [g12 * (1 + g1 * g1) - g1 * g2 * g11, g22 * (1 + g1 * g1) - g1 * g2 * g12],
        ]
    )
    if not np.all(np.isfinite(m)):
        raise ValueError("non-finite graph jet")
    return scale * m


def gaussian_curvature_graph(j: GraphJet2) -> float:
    return (j.g11 * j.g22 - j.g12**2) / (1.0 + j.g1**2 + j.g2**2) ** 2


def revolution_graph_jet(p: Profile, xi1: float, xi2: float) -> GraphJet2:
    """Partials of g(xi) = gamma(|xi|) by the chain rule on the exact jet."""
    rho = math.hypot(xi1, xi2)
    _require(p, rho)
    g0, d1, d2 = (float(v) for v in p.derivs(rho, 2))
    x = (xi1, xi2)
    grad = [d1 * xi / rho for xi in x]
    hess = [[0.0, 0.0], [0.0, 0.0]]
    for a in range(2):
        for b in range(2):
            kron = 1.0 if a == b else 0.0
            hess[a][b] = d2 * x[a] * x[b] / rho**2 + d1 * (kron / rho - x[a] * x[b] / rho**3)
    return GraphJet2(xi1, xi2, g0, grad[0], grad[1], hess[0][0], hess[0][1], hess[1][1])


def _require(p: Profile, r):
    if np.any(np.asarray(r) <= 0) or not np.all(p.in_domain(r)):
        raise DomainError(f"r={r!r} outside profile domain {p.domain}")


def gaussian_curvature_profile(p: Profile, r):
    _require(p, r)
    _, d1, d2 = p.derivs(r, 2)
    K = d1 * d2 / (np.asarray(r) * (1.0 + d1 * d1) ** 2)
    return float(K) if np.ndim(K) == 0 else K


def principal_curvatures(p: Profile, r):
    """Magnitudes ``(|lambda_rad|, |lambda_ang|)`` along the circle of radius r."""
    _require(p, r)
    return principal_curvatures_unchecked(p, r)


def principal_curvatures_unchecked(p: Profile, r):
    _, d1, d2 = p.derivs(r, 2)
    w = 1.0 + d1 * d1
    lam_rad = np.abs(d2) / w**1.5
    lam_ang = np.abs(d1) / (np.asarray(r) * np.sqrt(w))
    if np.ndim(lam_rad) == 0:
        return float(lam_rad), float(lam_ang)
    return lam_rad, lam_ang


def curvature_samples(p: Profile, radii) -> list:
    radii = np.asarray(radii, dtype=float)
    K = np.atleast_1d(gaussian_curvature_profile(p, radii))
    lr, la = (np.atleast_1d(v) for v in principal_curvatures(p, radii))
    return [CurvatureSample(float(r), float(k), float(a), float(b)) for r, k, a, b in zip(radii, K, lr, la)]
