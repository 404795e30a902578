"""Rescaled caps as graphs, and sampled certificates for the rescaling maps.

Everything here works in normalized coordinates (see :class:`LocalModel`).
For the perturbed cone the surface is written in the rotated coordinates
x2' = (x2 + x3)/2, x3' = (x3 - x2)/2 as the graph x3' = psi(x1', x2'), with
psi the solution of

    4 x2' x3' = x1'^2 + 2 E (x2' + x3') - E^2,   E = g(rho) - rho,
    rho = sqrt(x1'^2 + (x2' - x3')^2),

where g is the normalized profile.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from ..curvature import GraphJet2, shape_operator
from ..errors import ConvergenceError
from ..profile import Profile
from ..structure import PERTURBED_CONE, QUASI_TORUS, decompose_interval, find_curvature_zeros
from .stages import LocalModel, dyadic_annuli, first_stage_caps, rescale_map

FIXED_POINT_TOL = 1e-12
MAX_ITER = 500


@functools.lru_cache(maxsize=32)
def normalized_model(p: Profile, case: str = None):
    """Normalized profile function, order, zero and half-width for the first zero of ``case``.

    A cone is normalized to g(rho) = rho, with order 1 and no zero.
    """
    if p.kind == "cone":
        return (lambda rho: np.asarray(rho, dtype=float)), 1, None, None
    zeros = find_curvature_zeros(p)
    decomp = decompose_interval(p, zeros)
    for z, _ in decomp.degenerate:
        if case is None or z.case == case:
            model = LocalModel(p, z)
            return model.normalized_profile, z.n, z, model
    raise ValueError(f"profile has no {case or 'degenerate'} zero")


def solve_psi(g, x1, x2, tol: float = FIXED_POINT_TOL):
    """Fixed-point solution of the implicit equation for psi, vectorized."""
    x1, x2 = np.broadcast_arrays(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float))
    x3 = x1 * x1 / (4 * x2)
    for it in range(MAX_ITER):
        rho = np.sqrt(x1 * x1 + (x2 - x3) ** 2)
        E = g(rho) - rho
        with np.errstate(over="ignore", invalid="ignore"):
            new = (x1 * x1 + 2 * E * (x2 + x3) - E * E) / (4 * x2)
        change = float(np.max(np.abs(new - x3))) if new.size else 0.0
        if not np.isfinite(change):
            raise ConvergenceError("fixed point for psi diverged")
        x3 = new
        scale = max(float(np.max(np.abs(x3))) if x3.size else 0.0, 1e-300)
        if change <= 4 * np.finfo(float).eps * scale:
            return x3
    if change > tol * scale:
        raise ConvergenceError(f"fixed point for psi did not converge (last change {change:.3g})")
    return x3


def phi(g, x1, x2):
    """Deviation of psi from the pure-cone term x1'^2 / (4 x2')."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    return solve_psi(g, x1, x2) - x1 * x1 / (4 * x2)


def rescaled_graph(g, case: str, n: int, s: float, side: int = 1):
    """Height function of the rescaled cap: eta3 = F(eta1, eta2)."""
    if case == QUASI_TORUS:
        def F(e1, e2):
            rho = np.hypot(math.sqrt(s) * np.asarray(e1), 1 + side * s * np.asarray(e2))
            return (g(rho) - 1.0) / s**n
    elif case == PERTURBED_CONE:
        def F(e1, e2):
            return solve_psi(g, s ** (n / 2) * np.asarray(e1), 1 + side * s * np.asarray(e2)) / s**n
    else:
        raise ValueError(f"no rescaled graph for case {case}")
    return F


def graph_derivatives(F, e1, e2, h: float = 1e-3):
    """Gradient and Hessian of F by fourth-order central differences."""
    w = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
    w2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
    offs = np.arange(-2, 3)
    e1 = np.asarray(e1, dtype=float)[..., None]
    e2 = np.asarray(e2, dtype=float)[..., None]
    f1 = F(e1 + offs * h, e2 + 0 * offs)
    f2 = F(e1 + 0 * offs, e2 + offs * h)
    g1 = f1 @ w / h
    g2 = f2 @ w / h
    h11 = f1 @ w2 / h**2
    h22 = f2 @ w2 / h**2
    # mixed derivative: product stencil
    ii, jj = np.meshgrid(offs, offs, indexing="ij")
    fm = F(e1[..., None] + ii * h, e2[..., None] + jj * h)
    h12 = np.einsum("...ij,i,j->...", fm, w, w) / h**2
    return g1, g2, h11, h12, h22


def principal_curvature_magnitudes(F, e1, e2, h: float = 1e-3):
    g1, g2, h11, h12, h22 = graph_derivatives(F, e1, e2, h)
    out = []
    for a in zip(*(np.ravel(v) for v in (g1, g2, h11, h12, h22))):
        M = shape_operator(GraphJet2(0.0, 0.0, 0.0, *a))
        out.append(np.sort(np.abs(np.linalg.eigvals(M).real)))
    return np.array(out)


@dataclass(frozen=True)
class RescalingCertificate:
    k: int
    s: float
    containment: float  # worst sampled gap in units of delta_eff / s^n
    curvature_min: float
    curvature_max: float
    caps: int
    samples: int


def _ball(rng, m):
    v = rng.normal(size=(m, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v * rng.random((m, 1)) ** (1.0 / 3.0)


def rescaling_certificate(p: Profile, k: int, delta: float, ncaps: int = 10, samples: int = 10_000,
                          seed: int = 0, case: str = None) -> RescalingCertificate:
    """Sampled check that the rescaling map sends N_delta(cap) near the rescaled cap.

    Points of the delta_eff-neighborhood of normalized caps are mapped and
    their vertical gap to the rescaled graph is measured; the vertical gap
    bounds the distance from above.  Principal curvatures of the rescaled
    graph are sampled on a 5 x 5 grid per cap.
    """
    g, n, zero, model = normalized_model(p, case)
    if zero is None:
        raise ValueError("certificate needs a degenerate zero")
    d_eff = model.effective_delta(delta)
    Delta_n = zero.delta / model.R
    annuli = [a for a in dyadic_annuli(n, d_eff, Delta_n) if a.k == k]
    if not annuli:
        raise ValueError(f"no annulus with k={k}")
    rng = np.random.Generator(np.random.PCG64(seed))
    caps = []
    for ann in annuli:
        caps += first_stage_caps(zero.case, k, n, d_eff, ann.side, Delta_n)
    pick = rng.choice(len(caps), size=min(ncaps, len(caps)), replace=False)
    worst, cmin, cmax = 0.0, math.inf, 0.0
    s = annuli[0].s
    for i in sorted(pick):
        cap = caps[i]
        L = rescale_map(zero.case, k, n, cap)
        r = cap.r1 + (cap.r2 - cap.r1) * rng.random(samples)
        a = cap.alpha1 + (cap.alpha2 - cap.alpha1) * rng.random(samples)
        pts = np.column_stack([r * np.cos(a), r * np.sin(a), g(r)]) + d_eff * _ball(rng, samples)
        eta = L(pts)
        F = rescaled_graph(g, zero.case, n, s, cap.side)
        gap = np.abs(eta[:, 2] - F(eta[:, 0], eta[:, 1]))
        worst = max(worst, float(gap.max()) * s**n / d_eff)
        if k >= 1:
            rr, aa = np.meshgrid(np.linspace(cap.r1, cap.r2, 5), np.linspace(cap.alpha1, cap.alpha2, 5))
            e = L(np.column_stack([rr.ravel() * np.cos(aa.ravel()), rr.ravel() * np.sin(aa.ravel()), g(rr.ravel())]))
            lam = principal_curvature_magnitudes(F, e[:, 0], e[:, 1])
            cmin, cmax = min(cmin, float(lam.min())), max(cmax, float(lam.max()))
    return RescalingCertificate(k, s, worst, cmin, cmax, len(pick), samples)
