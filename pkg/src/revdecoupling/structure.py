"""Zeros of gamma' * gamma'', their classification, and the I/J interval split.

Interval convention: every piece is half-open ``[lo, hi)`` except the piece
that ends at the upper end of the profile domain, which is closed.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ClassificationError, StructureError
from .profile import Profile

log = logging.getLogger(__name__)

CONE = "Cone"
QUASI_TORUS = "QuasiTorus"
PERTURBED_CONE = "PerturbedCone"

VANISH_RTOL = 1e-8
DEFAULT_SAMPLES = 4096
DEFAULT_CAP = 0.25


@dataclass(frozen=True)
class ZeroPoint:
    r: float
    n: int
    case: str
    delta: Optional[float] = None

    @property
    def interval(self):
        return (self.r - self.delta, self.r + self.delta)

    def to_dict(self):
        return {"r": self.r, "n": self.n, "case": self.case, "delta": self.delta}


@dataclass(frozen=True)
class IntervalDecomposition:
    domain: tuple
    degenerate: tuple  # of (ZeroPoint, (lo, hi))
    nondegenerate: tuple  # of (lo, hi)

    def pieces(self):
        """All intervals in increasing order, tagged with their zero (or None)."""
        items = [(iv, z) for z, iv in self.degenerate] + [(iv, None) for iv in self.nondegenerate]
        return sorted(items, key=lambda t: t[0][0])

    def to_dict(self):
        return {
            "domain": list(self.domain),
            "zeros": [z.to_dict() for z, _ in self.degenerate],
            "intervals": [
                {"lo": lo, "hi": hi, "kind": "I" if z is not None else "J", "zero": None if z is None else z.r}
                for (lo, hi), z in self.pieces()
            ],
        }


def _h(p: Profile, r):
    d = p.derivs(r, 2)
    return d[1] * d[2]


def _hprime(p: Profile, r):
    d = p.derivs(r, 3)
    return d[2] * d[2] + d[1] * d[3]


def _bisect(f, a: float, b: float, tol: float) -> float:
    fa = f(a)
    if fa == 0:
        return a
    fb = f(b)
    if fb == 0:
        return b
    while b - a > tol:
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0:
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def _sign_change_roots(f, grid: np.ndarray, tol: float) -> list:
    vals = f(grid)
    roots = [float(x) for x in grid[vals == 0]]
    s = np.sign(vals)
    idx = np.nonzero(s[:-1] * s[1:] < 0)[0]
    scalar = lambda x: float(f(np.float64(x)))
    roots += [_bisect(scalar, float(grid[i]), float(grid[i + 1]), tol) for i in idx]
    return roots


def _vanishing(derivs: np.ndarray):
    """Per-order vanishing flags, compared on Taylor coefficients."""
    coeffs = np.array([abs(d) / math.factorial(m) for m, d in enumerate(derivs)])
    scale = max(1.0, float(coeffs.max()))
    return coeffs <= VANISH_RTOL * scale


def classify_point(p: Profile, r: float) -> Optional[ZeroPoint]:
    """Classify a point where gamma' * gamma'' vanishes; None if it does not."""
    derivs = p.derivs(r, p.max_order)
    vanish = _vanishing(derivs)
    if vanish[1]:
        for m in range(2, len(derivs)):
            if not vanish[m]:
                return ZeroPoint(float(r), m, QUASI_TORUS)
        raise ClassificationError(
            f"unclassifiable degeneracy at r={r:.12g}: gamma' vanishes beyond order {p.max_order}"
        )
    if vanish[2]:
        for m in range(3, len(derivs)):
            if not vanish[m]:
                return ZeroPoint(float(r), m, PERTURBED_CONE)
        return ZeroPoint(float(r), 1, CONE)
    return None


def _is_affine(p: Profile, grid) -> bool:
    d = p.derivs(grid, p.max_order)
    scale = max(1.0, float(np.abs(d[:2]).max()))
    return bool(np.all(np.abs(d[2:]) <= VANISH_RTOL * scale)) and bool(np.all(np.abs(d[1]) > VANISH_RTOL * scale))


def find_curvature_zeros(p: Profile, tol: float = 1e-10, samples: int = DEFAULT_SAMPLES) -> list:
    """Zeros of gamma' gamma'' in the domain, classified by the jet.

    A profile whose curvature product vanishes identically is either a cone
    (one zero spanning the whole domain) or unclassifiable.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    lo, hi = p.domain
    grid = np.linspace(lo, hi, samples)
    h = _h(p, grid)
    d1 = p.derivs(grid, 1)[1]
    hscale = max(1.0, float(np.abs(d1).max()) ** 2)
    if np.all(np.abs(h) <= VANISH_RTOL * 1e-4 * hscale):
        if _is_affine(p, grid):
            return [ZeroPoint(0.5 * (lo + hi), 1, CONE, 0.5 * (hi - lo))]
        raise ClassificationError("unclassifiable degeneracy: gamma' gamma'' vanishes identically but gamma is not affine")

    candidates = _sign_change_roots(lambda x: _h(p, x), grid, tol)
    # even-order zeros of h touch zero without a sign change; they are odd-order zeros of h'
    candidates += _sign_change_roots(lambda x: _hprime(p, x), grid, tol)
    candidates.sort()

    zeros = []
    for r in candidates:
        z = classify_point(p, r)
        if z is None:
            continue
        if zeros and abs(z.r - zeros[-1].r) < 2 * tol:
            continue
        zeros.append(z)
    return zeros


def _leading_model(p: Profile, z: ZeroPoint, u: np.ndarray, m: int):
    """m-th derivative of the leading model and of the leading term at r = z.r + u."""
    d = p.derivs(z.r, max(z.n, 1))
    c = d[z.n] / math.factorial(z.n)
    if m <= z.n:
        term = c * math.factorial(z.n) / math.factorial(z.n - m) * u ** (z.n - m)
    else:
        term = np.zeros_like(u)
    model = term.copy()
    if m == 0:
        model = model + d[0]
        if z.case == PERTURBED_CONE:
            model = model + d[1] * u
    elif m == 1 and z.case == PERTURBED_CONE:
        model = model + d[1]
    return model, term


def validate_expansion_radius(p: Profile, z: ZeroPoint, delta: float, eta: float = 0.5, grid: int = 256) -> bool:
    """Whether the leading model dominates the remainder on (r - delta, r + delta).

    Checks ``|gamma^(m) - model^(m)| <= eta |term^(m)|`` for every order
    ``m = 0..n`` on a symmetric grid, where ``term = c (r - z.r)**n`` and the
    model is the renormalized quasi-torus or perturbed-cone leading form.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    if z.case == CONE:
        return True
    half = grid // 2
    u = delta * np.arange(1, half + 1) / half
    u = np.concatenate([-u[::-1], u])
    r = z.r + u
    vlo, vhi = p.validity()
    if np.any(r <= vlo) or np.any(r >= vhi) or np.any(r <= 0):
        return False
    derivs = p.derivs(r, z.n)
    for m in range(z.n + 1):
        model, term = _leading_model(p, z, u, m)
        if np.any(np.abs(derivs[m] - model) > eta * np.abs(term)):
            return False
    return True


def largest_valid_radius(p: Profile, z: ZeroPoint, upper: float, eta: float = 0.5, iters: int = 40) -> float:
    if validate_expansion_radius(p, z, upper, eta):
        return upper
    lo, hi = 0.0, upper
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if validate_expansion_radius(p, z, mid, eta):
            lo = mid
        else:
            hi = mid
    if lo == 0.0:
        raise StructureError(f"no admissible expansion radius around r={z.r:.12g}")
    return lo


def decompose_interval(p: Profile, zeros: list, cap: float = DEFAULT_CAP, eta: float = 0.5) -> IntervalDecomposition:
    """Choose the half-widths and split the domain into I (degenerate) and J pieces.

    A ``delta`` already set on a zero acts as its user cap.
    """
    lo, hi = p.domain
    zeros = sorted(zeros, key=lambda z: z.r)
    if any(z.case == CONE for z in zeros):
        if len(zeros) != 1:
            raise StructureError("a cone zero must be the only zero of the profile")
        z = dataclasses.replace(zeros[0], r=0.5 * (lo + hi), delta=0.5 * (hi - lo))
        return IntervalDecomposition((lo, hi), ((z, (lo, hi)),), ())

    chosen = []
    for i, z in enumerate(zeros):
        if not lo < z.r < hi:
            raise StructureError(f"zero r={z.r:.12g} is not interior to the domain")
        left = zeros[i - 1].r if i > 0 else lo
        right = zeros[i + 1].r if i + 1 < len(zeros) else hi
        user_cap = z.delta if z.delta is not None else cap
        bound = min(user_cap, 0.5 * (z.r - left), 0.5 * (right - z.r))
        delta = largest_valid_radius(p, z, bound, eta)
        log.info("zero r=%.12g (%s, n=%d): Delta=%.6g", z.r, z.case, z.n, delta)
        chosen.append(dataclasses.replace(z, delta=delta))

    degenerate = tuple((z, (z.r - z.delta, z.r + z.delta)) for z in chosen)
    nondegenerate = []
    cursor = lo
    for _, (a, b) in degenerate:
        if a > cursor:
            nondegenerate.append((cursor, a))
        cursor = b
    if cursor < hi:
        nondegenerate.append((cursor, hi))
    if not degenerate and not nondegenerate:
        raise StructureError("empty domain after subtraction")
    return IntervalDecomposition((lo, hi), degenerate, tuple(nondegenerate))


def sampled_min_curvature_product(p: Profile, interval, samples: int = 257) -> float:
    a, b = interval
    r = np.linspace(a, b, samples)
    return float(np.abs(_h(p, r)).min())
