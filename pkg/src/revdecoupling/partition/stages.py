"""The individual constructions that make up a partition.

Degenerate pieces are built in normalized coordinates, where the governing
zero sits at r = 1 and the profile reads 1 + (r - 1)**n + ... (quasi-torus)
or r + kappa (r - 1)**n + ... (perturbed cone).  :class:`LocalModel` holds the
affine change of variables between world and normalized coordinates.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from ..profile import Profile, make_profile
from ..structure import PERTURBED_CONE, QUASI_TORUS, ZeroPoint
from .flatness import flatness_batch
from .geometry import (
    TWO_PI,
    AffineMap,
    CapFootprint,
    CylinderSurface,
    RevolutionSurface,
    as_surface,
    build_frames,
    sample_params,
)

log = logging.getLogger(__name__)

NONDEGENERATE = "Nondegenerate"
CONE_PLATE = "ConePlate"
CYLINDER_PLATE = "CylinderPlate"
MAX_REFINE = 16


@dataclass(frozen=True)
class Annulus:
    k: int
    side: int
    lo: float
    hi: float
    s: float

    @property
    def width(self):
        return self.hi - self.lo


class LocalModel:
    """Affine renormalization around one degenerate zero.

    ``to_normalized`` maps world points to coordinates in which the zero is at
    radius 1, the profile value there is 1 and the leading coefficient is 1
    (quasi-torus) or the tangent cone has slope 1 (perturbed cone).
    """

    def __init__(self, profile: Profile, zero: ZeroPoint):
        if zero.case not in (QUASI_TORUS, PERTURBED_CONE):
            raise ValueError(f"no local model for case {zero.case}")
        self.profile = profile
        self.zero = zero
        self.n = zero.n
        self.R = zero.r
        d = profile.derivs(zero.r, zero.n)
        self.g0 = float(d[0])
        lead = float(d[zero.n]) / math.factorial(zero.n)
        if zero.case == QUASI_TORUS:
            self.vscale = lead * self.R**self.n
            self.kappa = 1.0
        else:
            self.vscale = float(d[1]) * self.R
            self.kappa = lead * self.R**self.n / self.vscale
        lin = np.diag([1.0 / self.R, 1.0 / self.R, 1.0 / self.vscale])
        self.to_normalized = AffineMap(lin, np.array([0.0, 0.0, 1.0 - self.g0 / self.vscale]))
        self.stretch = max(1.0 / self.R, 1.0 / abs(self.vscale))

    def effective_delta(self, delta: float) -> float:
        """Thickness of the image of N_delta(S) in normalized coordinates."""
        return delta * self.stretch

    def normalized_profile(self, r):
        return 1.0 + (self.profile(self.R * np.asarray(r)) - self.g0) / self.vscale

    def footprint_to_world(self, fp: CapFootprint) -> CapFootprint:
        return replace(fp, r1=fp.r1 * self.R, r2=fp.r2 * self.R, s=fp.s)


def dyadic_annuli(n: int, delta: float, Delta: float) -> list:
    """Dyadic annuli around radius 1, left side (side=-1) then right side.

    Right side: U_0 = [1, 1 + s_0), U_k = [1 + s_k / 2, 1 + s_k) with
    s_k = 2**k * delta**(1/n), the last one truncated at 1 + Delta.
    """
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    s0 = delta ** (1.0 / n)
    if s0 >= Delta:
        log.info("delta^(1/n)=%.6g >= Delta=%.6g: single truncated annulus", s0, Delta)
        bounds = [(0, 0.0, Delta, s0)]
    else:
        K = max(1, math.ceil(math.log2(Delta / s0) - 1e-12))
        bounds = [(0, 0.0, s0, s0)]
        for k in range(1, K + 1):
            s = s0 * 2.0**k
            bounds.append((k, s / 2, min(s, Delta), s))
    out = []
    for side in (-1, 1):
        for k, a, b, s in bounds:
            lo, hi = (1.0 - b, 1.0 - a) if side < 0 else (1.0 + a, 1.0 + b)
            out.append(Annulus(k, side, lo, hi, s))
    return out


def angular_exponent(case: str, n: int) -> float:
    return 0.5 if case == QUASI_TORUS else 0.5 * n


def first_stage_caps(case: str, k: int, n: int, delta: float, side: int = 1, Delta: float = math.inf) -> list:
    """Caps tiling the annulus U_k (normalized coordinates).

    Angular width is at most s_k**(1/2) (quasi-torus) or s_k**(n/2)
    (perturbed cone); radial extent is the whole annulus.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    annuli = dyadic_annuli(n, delta, Delta) if math.isfinite(Delta) else _untruncated(n, delta, k)
    ann = next((a for a in annuli if a.k == k and a.side == side), None)
    if ann is None:
        raise ValueError(f"annulus k={k} does not exist for Delta={Delta}")
    width = ann.s ** angular_exponent(case, n)
    m = max(1, math.ceil(TWO_PI / width - 1e-9))
    return [
        CapFootprint(TWO_PI * j / m, TWO_PI * (j + 1) / m, ann.lo, ann.hi, case, k, j, 0, n, side, ann.s)
        for j in range(m)
    ]


def _untruncated(n, delta, k):
    s0 = delta ** (1.0 / n)
    return dyadic_annuli(n, delta, s0 * 2.0**k * (1 + 1e-12))


def rescale_map(case: str, k: int, n: int, cap: CapFootprint, model: LocalModel = None) -> AffineMap:
    """Parabolic rescaling of a cap to unit size.

    Rotates the cap to sit over the positive x2 axis, then applies
    (x1 / s^(1/2), side (x2 - 1) / s, (x3 - 1) / s^n) for the quasi-torus, or
    the pi/4 rotation x2' = (x2 + x3)/2, x3' = (x3 - x2)/2 followed by
    (x1' / s^(n/2), side (x2' - 1) / s, x3' / s^n) for the perturbed cone.
    With ``model`` the world-to-normalized map is composed first.
    """
    s = cap.s
    side = cap.side if cap.side else 1
    alpha_c = cap.center[0]
    rot = AffineMap.rotation_z(math.pi / 2 - alpha_c)
    if case == QUASI_TORUS:
        lin = np.diag([s**-0.5, side / s, s**-n])
        L = AffineMap(lin, np.array([0.0, -side / s, -(s**-n)]))
    elif case == PERTURBED_CONE:
        tilt = AffineMap(np.array([[1.0, 0.0, 0.0], [0.0, 0.5, 0.5], [0.0, -0.5, 0.5]]), np.zeros(3))
        scale = AffineMap(np.diag([s ** (-0.5 * n), side / s, s**-n]), np.array([0.0, -side / s, 0.0]))
        L = scale @ tilt
    else:
        raise ValueError(f"no rescaling for case {case}")
    out = L @ rot
    if model is not None:
        out = out @ model.to_normalized
    if out.condition > 1e14:
        raise RuntimeError("singular rescaling map")
    return out


def subdivide(cap: CapFootprint, na: int, nr: int) -> list:
    """Equal ``na x nr`` polar subdivision, radial-major second-stage index."""
    a = np.linspace(cap.alpha1, cap.alpha2, na + 1)
    r = np.linspace(cap.r1, cap.r2, nr + 1)
    a[-1], r[-1] = cap.alpha2, cap.r2
    return [
        replace(cap, alpha1=float(a[l]), alpha2=float(a[l + 1]), r1=float(r[i]), r2=float(r[i + 1]), second=i * na + l)
        for i in range(nr)
        for l in range(na)
    ]


def refine_until_flat(surface, cap: CapFootprint, na: int, nr: int, delta: float, C: float = 1000.0):
    """Smallest refinement of ``(na, nr)`` (by factors 3/2) whose cells are all flat.

    The failing direction is found by comparing the worst cell split
    angularly against the same cell split radially.
    """
    for _ in range(MAX_REFINE):
        subs = subdivide(cap, na, nr)
        frames = build_frames(surface, subs, delta)
        reports = flatness_batch(frames, surface, subs, delta, C)
        if all(reports):
            return na, nr
        worst = subs[int(np.argmax([r.deviation for r in reports]))]
        dev_a = _max_deviation(surface, subdivide(worst, 2, 1), delta)
        dev_r = _max_deviation(surface, subdivide(worst, 1, 2), delta)
        if dev_a <= dev_r:
            na = max(na + 1, math.ceil(1.5 * na))
        else:
            nr = max(nr + 1, math.ceil(1.5 * nr))
    raise RuntimeError(f"could not certify flatness for cap {cap}")


def _max_deviation(surface, caps, delta):
    frames = build_frames(surface, caps, delta)
    return max(r.deviation for r in flatness_batch(frames, surface, caps, delta))


def image_counts(cap: CapFootprint, lmap: AffineMap, surface, h: float, m: int = 17):
    """Grid counts covering the rescaled image of ``cap`` with cells of size h."""
    rr, aa = sample_params([cap], m)
    pts = as_surface(surface).points(rr[0][:, None], aa[0][None, :]).reshape(-1, 3)
    eta = lmap(pts)
    e1 = float(np.ptp(eta[:, 0]))
    e2 = float(np.ptp(eta[:, 1]))
    return max(1, math.ceil(e1 / h - 1e-6)), max(1, math.ceil(e2 / h - 1e-6))


def second_stage_refine(
    cap: CapFootprint, lmap: AffineMap, delta: float, surface=None, delta_scale: float = 1.0, counts=None
) -> list:
    """Split a first-stage cap into the pullbacks of a (delta/s^n)^(1/2) grid.

    ``delta`` is the world thickness; ``delta_scale`` converts it to
    normalized coordinates.  Returns ``(footprint, frame)`` pairs; a cap that
    is already flat (delta >= s^n) is returned unchanged.
    """
    if surface is None:
        raise ValueError("second_stage_refine needs the surface to build frames")
    d_eff = delta * delta_scale
    scaled = d_eff / cap.s**cap.n
    if scaled >= 1.0:
        return list(zip([cap], build_frames(surface, [cap], delta)))
    if counts is None:
        counts = image_counts(cap, lmap, surface, math.sqrt(scaled))
    subs = subdivide(cap, *counts)
    return list(zip(subs, build_frames(surface, subs, delta)))


def _arclength_breaks(surface, lo: float, hi: float, step: float) -> np.ndarray:
    grid = np.linspace(lo, hi, 4097)
    speed = surface.radial_speed(grid)
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (speed[1:] + speed[:-1]) * np.diff(grid))])
    rows = max(1, math.ceil(cum[-1] / step - 1e-9))
    breaks = np.interp(np.linspace(0.0, cum[-1], rows + 1), cum, grid)
    breaks[0], breaks[-1] = lo, hi
    return breaks


def partition_nondegenerate(profile, J, delta: float, C: float = 1000.0, case: str = NONDEGENERATE) -> list:
    """Caps of arclength about delta^(1/2) in both directions over ``J x [0, 2 pi)``.

    Each row's cap count is refined until a representative cap is flat (all
    caps of a row are rotations of each other).
    """
    surface = as_surface(profile)
    lo, hi = J
    side = math.sqrt(delta)
    breaks = _arclength_breaks(surface, lo, hi, side)
    out = []
    first = 0
    for i in range(len(breaks) - 1):
        r1, r2 = float(breaks[i]), float(breaks[i + 1])
        m = max(1, math.ceil(TWO_PI * float(surface.angular_speed(r2)) / side - 1e-9))
        rep = CapFootprint(0.0, TWO_PI / m, r1, r2, case, -1, 0, 0, 0, 0, 0.0)
        na, nr = refine_until_flat(surface, rep, 1, 1, delta, C)
        m *= na
        rb = np.linspace(r1, r2, nr + 1)
        rb[-1] = r2
        row = []
        for j in range(nr):
            for l in range(m):
                a2 = TWO_PI * (l + 1) / m if l + 1 < m else TWO_PI
                row.append(CapFootprint(TWO_PI * l / m, a2, float(rb[j]), float(rb[j + 1]), case, -1, first, 0, 0, 0, 0.0))
                first += 1
        out.extend(zip(row, build_frames(surface, row, delta)))
    return out


def partition_cone_plates(delta: float, variant: str = "cone", profile: Profile = None, interval=None) -> list:
    """Angular sectors of width at most delta^(1/2) spanning the full radial (or axial) range."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if variant == "cone":
        profile = profile if profile is not None else make_profile("cone", slope=1.0)
        surface = RevolutionSurface(profile)
        lo, hi = interval if interval is not None else profile.domain
        case = CONE_PLATE
    elif variant == "cylinder":
        surface = CylinderSurface(1.0)
        lo, hi = interval if interval is not None else (-1.0, 1.0)
        case = CYLINDER_PLATE
    else:
        raise ValueError(f"unknown plate variant {variant!r}")
    m = max(1, math.ceil(TWO_PI / math.sqrt(delta) - 1e-9))
    fps = [
        CapFootprint(TWO_PI * j / m, TWO_PI * (j + 1) / m if j + 1 < m else TWO_PI, lo, hi, case, -1, j, 0, 1, 0, 0.0)
        for j in range(m)
    ]
    return list(zip(fps, build_frames(surface, fps, delta)))
