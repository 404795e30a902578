"""Discrete frequency supports: lattice points of a delta-neighborhood, grouped by box."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from ..errors import LatticeError
from ..partition.geometry import TWO_PI
from ..partition.manifest import PartitionManifest
from ..profile import Profile

_NEWTON_STEPS = 6
_CHUNK = 1 << 20


@dataclass
class FrequencyLattice:
    """Points ``spacing * index`` of a lattice, each tagged with a box.

    ``dist`` is the distance of each point to the underlying surface or
    segment; the smooth-indicator family is built from it.
    """

    spacing: float
    index: np.ndarray  # (P, d) integer lattice coordinates
    box_of: np.ndarray  # (P,) box number in 0..nboxes-1
    delta: float
    dist: np.ndarray = None
    box_ids: tuple = ()  # manifest index of each box, when there is a manifest
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.index = np.asarray(self.index, dtype=np.int64)
        if self.index.ndim != 2:
            raise ValueError("index must be a (P, d) array")
        self.box_of = np.asarray(self.box_of, dtype=np.int64)
        if self.box_of.shape != (len(self.index),):
            raise ValueError("box_of must have one entry per point")
        if self.dist is None:
            self.dist = np.zeros(len(self.index))
        if not self.box_ids:
            self.box_ids = tuple(range(int(self.box_of.max()) + 1 if len(self.box_of) else 0))

    @classmethod
    def from_points(cls, index, box_of=None, spacing: float = 1.0, delta: float = None):
        index = np.atleast_2d(np.asarray(index, dtype=np.int64))
        box_of = np.zeros(len(index), dtype=np.int64) if box_of is None else box_of
        return cls(spacing, index, box_of, spacing if delta is None else delta)

    @property
    def points(self) -> np.ndarray:
        return self.spacing * self.index

    @property
    def dim(self) -> int:
        return self.index.shape[1]

    @property
    def nboxes(self) -> int:
        return len(self.box_ids)

    def __len__(self):
        return len(self.index)

    def groups(self):
        """Point indices of every box, in box order."""
        order = np.argsort(self.box_of, kind="stable")
        bounds = np.searchsorted(self.box_of[order], np.arange(self.nboxes + 1))
        return [order[bounds[b] : bounds[b + 1]] for b in range(self.nboxes)]


class MeridianProjector:
    """Nearest point on the profile curve ``{(r, gamma(r)) : r in domain}``."""

    def __init__(self, profile: Profile, resolution: float):
        self.profile = profile
        lo, hi = profile.domain
        # arclength step well below the resolution
        d1max = float(np.abs(profile.derivs(np.linspace(lo, hi, 2049), 1)[1]).max())
        n = max(2049, int(math.ceil((hi - lo) * math.sqrt(1 + d1max**2) / (0.25 * resolution))) + 1)
        self.r = np.linspace(lo, hi, n)
        self.tree = cKDTree(np.column_stack([self.r, profile(self.r)]))

    def foot(self, rho, z):
        """Foot parameter ``r`` and distance for meridian points ``(rho, z)``."""
        lo, hi = self.profile.domain
        _, idx = self.tree.query(np.column_stack([rho, z]))
        r = self.r[idx]
        for _ in range(_NEWTON_STEPS):
            g, g1, g2 = self.profile.derivs(r, 2)
            f = (r - rho) + (g - z) * g1
            fp = 1 + g1 * g1 + (g - z) * g2
            step = np.where(fp > 0, f / np.where(fp > 0, fp, 1.0), 0.0)
            r = np.clip(r - step, lo, hi)
        dist = np.hypot(r - rho, self.profile(r) - z)
        return r, dist


def _in_arc(alpha, lo, hi):
    """alpha (any branch) inside the arc [lo, hi)."""
    t = np.mod(alpha - lo, TWO_PI)
    return t < (hi - lo)


class _BoxLocator:
    """Maps a parameter point (alpha, r) to the manifest box whose footprint holds it."""

    def __init__(self, footprints):
        rows = {}
        for i, fp in enumerate(footprints):
            rows.setdefault((fp.r1, fp.r2), []).append(i)
        keys = sorted(rows)
        self.r1 = np.array([k[0] for k in keys])
        self.r2 = np.array([k[1] for k in keys])
        self.members = []
        for k in keys:
            ids = sorted(rows[k], key=lambda i: footprints[i].alpha1)
            self.members.append(np.array(ids))
        self.a1 = np.array([fp.alpha1 for fp in footprints])
        self.a2 = np.array([fp.alpha2 for fp in footprints])

    def locate(self, alpha, r):
        alpha = np.mod(alpha, TWO_PI)
        row = np.clip(np.searchsorted(self.r1, r, side="right") - 1, 0, len(self.r1) - 1)
        out = np.full(len(r), -1, dtype=np.int64)
        for j in np.unique(row):
            sel = np.nonzero(row == j)[0]
            ids = self.members[j]
            m = len(ids)
            guess = np.clip(np.floor(alpha[sel] * m / TWO_PI).astype(np.int64), 0, m - 1)
            for _ in range(3):  # sectors are uniform up to rounding
                lo_fix = alpha[sel] < self.a1[ids[guess]]
                hi_fix = alpha[sel] >= self.a2[ids[guess]]
                guess = np.clip(guess - lo_fix + hi_fix, 0, m - 1)
            out[sel] = ids[guess]
        return out


def _resolve_spacing(delta, spacing):
    if not 0 < delta < 1:
        raise LatticeError("delta must lie in (0, 1)")
    spacing = delta / 2 if spacing is None else float(spacing)
    if not 0 < spacing <= delta * (1 + 1e-12):
        raise LatticeError(f"spacing {spacing:g} must lie in (0, delta={delta:g}]")
    return spacing


def segment_lattice(delta: float, spacing: float = None, tubes: int = 1) -> FrequencyLattice:
    """Lattice points of ``[0, 1] x [-delta, delta]``, split into equal tubes along x."""
    spacing = _resolve_spacing(delta, spacing)
    if tubes < 1:
        raise LatticeError("tube count must be positive")
    nx = int(math.floor(1.0 / spacing + 1e-9))
    ny = int(math.floor(delta / spacing + 1e-9))
    ix, iy = np.meshgrid(np.arange(nx + 1), np.arange(-ny, ny + 1), indexing="ij")
    index = np.column_stack([ix.ravel(), iy.ravel()])
    x = index[:, 0] * spacing
    box = np.minimum(np.floor(x * tubes + 1e-9).astype(np.int64), tubes - 1)
    dist = np.abs(index[:, 1] * spacing)
    return FrequencyLattice(spacing, index, box, delta, dist, tuple(range(tubes)), {"kind": "segment", "tubes": tubes})


def _candidate_columns(profile, spacing, delta, rlo, rhi, alo, ahi):
    """Lattice (x, y) columns whose radius and angle can reach the target region."""
    reach = rhi + delta
    n = int(math.ceil(reach / spacing)) + 1
    ax = np.arange(-n, n + 1)
    ix, iy = np.meshgrid(ax, ax, indexing="ij")
    ix, iy = ix.ravel(), iy.ravel()
    rho = np.hypot(ix, iy) * spacing
    keep = (rho >= rlo - delta) & (rho <= rhi + delta) & (rho > 0)
    if alo is not None:
        alpha = np.arctan2(iy, ix)
        pad = delta / max(rlo - delta, spacing)
        keep &= _in_arc(alpha, alo - pad, ahi + pad)
    return ix[keep], iy[keep], rho[keep]


def discretize_support(source, delta: float, spacing: float = None, region=None, reduce2d: bool = False) -> FrequencyLattice:
    """Lattice points of the delta-neighborhood, assigned to manifest boxes.

    ``source`` is a :class:`PartitionManifest` or the string ``"segment"``
    (then ``region`` may carry ``{"tubes": N}``).  For a manifest,
    ``region = {"r": (lo, hi), "alpha": (lo, hi)}`` keeps only points whose
    foot point lies in that part of the surface; a box cut by the region
    keeps the points inside.  ``reduce2d`` keeps the meridian plane x = 0
    and returns a 2-D lattice in (y, z).
    """
    if isinstance(source, str):
        if source != "segment":
            raise LatticeError(f"unknown support {source!r}")
        return segment_lattice(delta, spacing, (region or {}).get("tubes", 1))
    if not isinstance(source, PartitionManifest):
        raise LatticeError("source must be a PartitionManifest or 'segment'")
    spacing = _resolve_spacing(delta, spacing)
    p = source.profile
    dlo, dhi = p.domain
    region = region or {}
    rlo, rhi = (max(dlo, region["r"][0]), min(dhi, region["r"][1])) if "r" in region else (dlo, dhi)
    alo, ahi = region.get("alpha", (None, None))
    if not rlo < rhi:
        raise LatticeError("region misses the profile domain")

    proj = MeridianProjector(p, spacing)
    if reduce2d:
        iy = np.arange(-int(math.ceil((rhi + delta) / spacing)), int(math.ceil((rhi + delta) / spacing)) + 1)
        ix = np.zeros_like(iy)
        rho = np.abs(iy) * spacing
        keep = (rho >= rlo - delta) & (rho <= rhi + delta) & (rho > 0)
        if alo is not None:
            keep &= _in_arc(np.arctan2(iy, ix), alo, ahi)
        ix, iy, rho = ix[keep], iy[keep], rho[keep]
    else:
        ix, iy, rho = _candidate_columns(p, spacing, delta, rlo, rhi, alo, ahi)

    # vertical window of each column
    probe = np.stack([np.clip(rho + t * delta, dlo, dhi) for t in (-1.0, 0.0, 1.0)])
    g = p(probe)
    zlo = np.floor((g.min(axis=0) - 2 * delta) / spacing).astype(np.int64)
    zhi = np.ceil((g.max(axis=0) + 2 * delta) / spacing).astype(np.int64)
    counts = zhi - zlo + 1

    pieces_idx, pieces_dist, pieces_box = [], [], []
    locator = _BoxLocator(source.footprints)
    starts = np.concatenate([[0], np.cumsum(counts)])
    col_chunks = np.minimum(np.searchsorted(starts, np.arange(0, starts[-1] + _CHUNK, _CHUNK)), len(counts))
    col_chunks = np.unique(np.concatenate([col_chunks, [len(counts)]]))
    for c0, c1 in zip(col_chunks[:-1], col_chunks[1:]):
        if c0 >= c1:
            continue
        sl = slice(c0, c1)
        reps = counts[sl]
        cx = np.repeat(ix[sl], reps)
        cy = np.repeat(iy[sl], reps)
        offs = np.arange(int(reps.sum())) - np.repeat(starts[c0:c1] - starts[c0], reps)
        cz = np.repeat(zlo[sl], reps) + offs
        crho = np.hypot(cx, cy) * spacing
        r_foot, dist = proj.foot(crho, cz * spacing)
        ok = dist <= delta
        ok &= (r_foot >= rlo) & ((r_foot < rhi) | (rhi == dhi))
        alpha = np.arctan2(cy, cx).astype(float)
        if alo is not None:
            ok &= _in_arc(alpha, alo, ahi)
        if not np.any(ok):
            continue
        box = locator.locate(alpha[ok], r_foot[ok])
        if np.any(box < 0):
            raise LatticeError("a lattice point fell outside every box footprint")
        idx = np.column_stack([cy[ok], cz[ok]]) if reduce2d else np.column_stack([cx[ok], cy[ok], cz[ok]])
        pieces_idx.append(idx)
        pieces_dist.append(dist[ok])
        pieces_box.append(box)

    if not pieces_idx:
        raise LatticeError("resolution too coarse: no lattice point lies in the delta-neighborhood")
    index = np.concatenate(pieces_idx)
    dist = np.concatenate(pieces_dist)
    box = np.concatenate(pieces_box)
    ids, compact = np.unique(box, return_inverse=True)
    order = np.lexsort(index.T[::-1])
    meta = {"kind": "manifest", "region": {k: list(v) for k, v in region.items()}, "reduce2d": reduce2d}
    return FrequencyLattice(spacing, index[order], compact[order], delta, dist[order], tuple(int(i) for i in ids), meta)
