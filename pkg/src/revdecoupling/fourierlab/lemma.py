"""Numerical checks of the perturbed-cone derivative bounds and the Hessian scaling identity."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..partition.rescaled import graph_derivatives, normalized_model, phi, rescaled_graph, solve_psi
from ..partition.stages import dyadic_annuli
from ..profile import Profile
from ..structure import PERTURBED_CONE

DEFAULT_DELTA = 2.0**-12
ETA1 = (-0.5, 0.5)
ETA2 = (0.5, 1.0)


@dataclass
class LemmaTable:
    k: int
    s: float
    n: int
    maxima: dict = field(default_factory=dict)  # (p, q) -> max |D1^p D2^q psi_k|
    phi_max: float = 0.0
    phi_ratio: float = 0.0  # phi_max / s^n

    def rows(self):
        return [(self.k, a, b, v) for (a, b), v in sorted(self.maxima.items())]


def _scale(p: Profile, k: int, n: int, delta: float, Delta: float):
    if p.kind == "cone":
        return 2.0**k * delta ** (1.0 / n)
    _, _, zero, model = normalized_model(p, PERTURBED_CONE)
    Delta = zero.delta / model.R if Delta is None else Delta
    d_eff = model.effective_delta(delta)
    for ann in dyadic_annuli(n, d_eff, Delta):
        if ann.k == k:
            return ann.s
    raise ValueError(f"no annulus with k={k}")


def _model(p: Profile, n: int):
    g, order, zero, _ = normalized_model(p, PERTURBED_CONE if p.kind != "cone" else None)
    if zero is not None and zero.n != n:
        raise ValueError(f"zero has order {zero.n}, not {n}")
    return g


def _central(f, axis, order, h):
    for _ in range(order):
        f = (np.take(f, range(2, f.shape[axis]), axis=axis) - np.take(f, range(0, f.shape[axis] - 2), axis=axis)) / (2 * h)
    return f


def lemma_derivative_check(p: Profile, k: int, n: int = 3, maxorder: int = 3, delta: float = DEFAULT_DELTA,
                           Delta: float = None, grid: int = 33) -> LemmaTable:
    """Maxima of the finite-difference derivatives of psi_k over the unit parameter box.

    psi_k(eta) = psi(s^(n/2) eta1, 1 + s eta2) / s^n on eta1 in [-1/2, 1/2],
    eta2 in [1/2, 1].  Also reports max |phi| on the matching xi' box.
    """
    if maxorder < 0:
        raise ValueError("maxorder must be non-negative")
    g = _model(p, n)
    s = _scale(p, k, n, delta, Delta)
    F = rescaled_graph(g, PERTURBED_CONE, n, s) if p.kind != "cone" else (
        lambda e1, e2: solve_psi(g, s ** (n / 2) * np.asarray(e1), 1 + s * np.asarray(e2)) / s**n)
    h = (ETA2[1] - ETA2[0]) / (grid - 1)
    pad = maxorder
    e1 = ETA1[0] + h * np.arange(-pad, int(round((ETA1[1] - ETA1[0]) / h)) + pad + 1)
    e2 = ETA2[0] + h * np.arange(-pad, grid + pad)
    E1, E2 = np.meshgrid(e1, e2, indexing="ij")
    vals = F(E1, E2)
    table = LemmaTable(k, s, n)
    for a in range(maxorder + 1):
        for b in range(maxorder + 1 - a):
            d = _central(_central(vals, 0, a, h), 1, b, h)
            # drop the padding that the stencil did not consume
            d = d[pad - a : d.shape[0] - (pad - a), pad - b : d.shape[1] - (pad - b)]
            table.maxima[(a, b)] = float(np.max(np.abs(d)))
    x1 = s ** (n / 2) * np.linspace(*ETA1, grid)
    x2 = 1 + s * np.linspace(*ETA2, grid)
    X1, X2 = np.meshgrid(x1, x2, indexing="ij")
    table.phi_max = float(np.max(np.abs(phi(g, X1, X2))))
    table.phi_ratio = table.phi_max / s**n
    return table


@dataclass(frozen=True)
class HessianReport:
    k: int
    s: float
    rel_error: float  # det Hess(psi_k) against s^(2-n) det Hess(psi)
    matrix_error: float  # full chain-rule identity, relative to the Hessian norm
    eig_min: float  # smallest |eigenvalue| of Hess(psi_k)
    eig_max: float
    det_min: float
    det_max: float


def hessian_identity_check(p: Profile, k: int, n: int = 3, delta: float = DEFAULT_DELTA, Delta: float = None,
                           samples: int = 25) -> HessianReport:
    """Compare Hess(psi_k) with the pulled-back Hess(psi) at ``samples`` points.

    Both Hessians come from independent finite differences (in eta and in
    xi' coordinates).  The determinant obeys det Hess(psi_k) = s^(2-n)
    det Hess(psi); the matrices obey Hess(psi_k) = D Hess(psi) D / s^n with
    D = diag(s^(n/2), s).
    """
    g = _model(p, n)
    s = _scale(p, k, n, delta, Delta)
    m = int(round(math.sqrt(samples)))
    e1, e2 = np.meshgrid(np.linspace(*ETA1, m), np.linspace(*ETA2, m), indexing="ij")
    e1, e2 = e1.ravel(), e2.ravel()
    Fk = lambda a, b: solve_psi(g, s ** (n / 2) * np.asarray(a), 1 + s * np.asarray(b)) / s**n
    psi = lambda a, b: solve_psi(g, a, b)

    _, _, k11, k12, k22 = graph_derivatives(Fk, e1, e2, h=2e-3)
    Hk = np.stack([np.stack([k11, k12], -1), np.stack([k12, k22], -1)], -2)

    # psi is anisotropic: step sizes follow the natural scale of each variable
    x1, x2 = s ** (n / 2) * e1, 1 + s * e2
    h1, h2 = 1.3e-3 * s ** (n / 2), 1.3e-3 * s
    _, _, p11, _, _ = graph_derivatives(lambda a, b: psi(a, b + 0 * a), x1, x2, h=h1)
    _, _, _, _, p22 = graph_derivatives(lambda a, b: psi(a + 0 * b, b), x1, x2, h=h2)
    p12 = _mixed(psi, x1, x2, h1, h2)
    H = np.stack([np.stack([p11, p12], -1), np.stack([p12, p22], -1)], -2)

    D = np.diag([s ** (n / 2), s])
    pulled = D @ H @ D / s**n
    matrix_error = float(np.max(np.linalg.norm(Hk - pulled, axis=(1, 2)) / np.linalg.norm(Hk, axis=(1, 2))))
    det_k = np.linalg.det(Hk)
    det = s ** (2 - n) * np.linalg.det(H)
    rel = float(np.max(np.abs(det_k - det) / np.abs(det_k)))
    eig = np.abs(np.linalg.eigvalsh(Hk))
    return HessianReport(k, s, rel, matrix_error, float(eig.min()), float(eig.max()), float(det_k.min()),
                         float(det_k.max()))


def _mixed(f, x1, x2, h1, h2):
    w = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
    offs = np.arange(-2, 3)
    ii, jj = np.meshgrid(offs, offs, indexing="ij")
    vals = f(x1[:, None, None] + ii * h1, x2[:, None, None] + jj * h2)
    return np.einsum("bij,i,j->b", vals, w, w) / (h1 * h2)


def cone_hessian_determinant(x1, x2):
    """det Hess of x1^2 / (4 x2), which vanishes identically."""
    x1, x2 = np.asarray(x1, dtype=float), np.asarray(x2, dtype=float)
    a = 1 / (2 * x2)
    b = -x1 / (2 * x2**2)
    c = x1**2 / (2 * x2**3)
    return a * c - b * b
