"""Assembly of the full partition of a surface of revolution."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from ..profile import Profile, make_profile
from ..structure import CONE, DEFAULT_CAP, decompose_interval, find_curvature_zeros
from .flatness import DEFAULT_C, flatness_batch
from .geometry import TWO_PI, BoxFrame, CapFootprint, RevolutionSurface, build_frames
from .stages import (
    CONE_PLATE,
    CYLINDER_PLATE,
    LocalModel,
    angular_exponent,
    dyadic_annuli,
    first_stage_caps,
    image_counts,
    partition_cone_plates,
    partition_nondegenerate,
    refine_until_flat,
    rescale_map,
    subdivide,
)

log = logging.getLogger(__name__)


@dataclass
class PartitionManifest:
    profile: Profile
    delta: float
    boxes: list  # of (CapFootprint, BoxFrame)
    counts: dict = field(default_factory=dict)
    predicted: dict = field(default_factory=dict)
    log: list = field(default_factory=list)
    decomposition: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.boxes)

    @property
    def footprints(self):
        return [fp for fp, _ in self.boxes]

    @property
    def frames(self):
        return [fr for _, fr in self.boxes]

    def to_dict(self) -> dict:
        prof = self.profile.describe()
        prof["id"] = self.profile.id
        return {
            "profile": prof,
            "delta": self.delta,
            "boxes": [{"footprint": fp.to_dict(), "frame": fr.to_dict()} for fp, fr in self.boxes],
            "counts": dict(self.counts),
            "predicted": dict(self.predicted),
            "decomposition": self.decomposition,
            "log": list(self.log),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "PartitionManifest":
        prof = d["profile"]
        profile = make_profile(prof["kind"], domain=tuple(prof["domain"]), **prof["params"])
        boxes = []
        for b in d["boxes"]:
            f = dict(b["footprint"])
            boxes.append((CapFootprint(**f), BoxFrame.from_dict(b["frame"])))
        return cls(profile, d["delta"], boxes, d.get("counts", {}), d.get("predicted", {}), d.get("log", []),
                   d.get("decomposition", {}))


def surface_area(p: Profile, lo: float, hi: float, samples: int = 2049) -> float:
    r = np.linspace(lo, hi, samples)
    d1 = p.derivs(r, 1)[1]
    f = TWO_PI * r * np.sqrt(1 + d1 * d1)
    return float(np.sum(0.5 * (f[1:] + f[:-1]) * np.diff(r)))


def _degenerate_piece(p: Profile, surface, zero, delta: float, C: float, notes: list):
    """Two-stage construction around one quasi-torus or perturbed-cone zero."""
    model = LocalModel(p, zero)
    d_eff = model.effective_delta(delta)
    if not d_eff < 1:
        raise ValueError(f"delta={delta:g} too large for the local model at r={zero.r:.6g}")
    Delta_n = zero.delta / model.R
    out, counts, predicted = [], {}, {}
    for ann in dyadic_annuli(zero.n, d_eff, Delta_n):
        caps_n = first_stage_caps(zero.case, ann.k, zero.n, d_eff, ann.side, Delta_n)
        caps = [model.footprint_to_world(c) for c in caps_n]
        ratio = ann.s**zero.n / d_eff
        rep = caps[0]
        if ratio <= 1 + 1e-9:
            na, nr = refine_until_flat(surface, rep, 1, 1, delta, C)
        else:
            lmap = rescale_map(zero.case, ann.k, zero.n, caps_n[0], model)
            na0, nr0 = image_counts(rep, lmap, surface, math.sqrt(1.0 / ratio))
            na, nr = refine_until_flat(surface, rep, na0, nr0, delta, C)
            if (na, nr) != (na0, nr0):
                notes.append(f"r0={zero.r:.6g} side={ann.side} k={ann.k}: grid {na0}x{nr0} refined to {na}x{nr}")
        subs = [s for c in caps for s in subdivide(c, na, nr)] if (na, nr) != (1, 1) else caps
        out.extend(zip(subs, build_frames(surface, subs, delta)))
        key = f"{zero.case}@{zero.r:.6g}:side={ann.side}:k={ann.k}"
        counts[key] = len(subs)
        width = ann.s ** angular_exponent(zero.case, zero.n)
        # caps per annulus times subcaps per cap, from the nominal dimensions
        if ratio > 1:
            predicted[key] = (TWO_PI / width) * math.sqrt(ratio) * max(1.0, ann.width * math.sqrt(ratio) / ann.s)
        else:
            predicted[key] = TWO_PI / width
    out.sort(key=lambda b: (b[0].side, b[0].k, b[0].first, b[0].second))
    return out, counts, predicted


def build_partition(p: Profile, delta: float, cap: float = DEFAULT_CAP, eta: float = 0.5, C: float = DEFAULT_C,
                    zeros=None, certify: bool = True) -> PartitionManifest:
    """Partition the delta-neighborhood of the surface into essentially flat boxes.

    Pieces are emitted in increasing radius; inside a degenerate piece boxes
    are ordered by (side, k, first-stage index, second-stage index).
    With ``certify`` every frame is checked and a failure raises.
    """
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if zeros is None:
        zeros = find_curvature_zeros(p)
    decomp = decompose_interval(p, zeros, cap, eta)
    surface = RevolutionSurface(p)
    boxes, counts, predicted, notes = [], {}, {}, []
    for (lo, hi), z in decomp.pieces():
        if z is None:
            piece = partition_nondegenerate(p, (lo, hi), delta, C)
            key = f"J[{lo:.6g},{hi:.6g}]"
            counts[key] = len(piece)
            predicted[key] = surface_area(p, lo, hi) / delta
            boxes.extend(piece)
        elif z.case == CONE:
            piece = partition_cone_plates(delta, "cone", p, (lo, hi))
            counts["ConePlates"] = len(piece)
            predicted["ConePlates"] = TWO_PI / math.sqrt(delta)
            boxes.extend(piece)
        else:
            piece, c, pr = _degenerate_piece(p, surface, z, delta, C, notes)
            counts.update(c)
            predicted.update(pr)
            boxes.extend(piece)
        notes.append(f"piece [{lo:.6g},{hi:.6g}) {'J' if z is None else z.case}: {len(piece)} boxes")
    counts["total"] = len(boxes)
    manifest = PartitionManifest(p, delta, boxes, counts, predicted, notes, decomp.to_dict())
    if certify:
        reports = flatness_batch(manifest.frames, surface, manifest.footprints, delta, C)
        bad = sum(not r for r in reports)
        manifest.log.append(f"flatness: {len(reports) - bad}/{len(reports)} pass at C={C:g}")
        if bad:
            raise RuntimeError(f"{bad} boxes failed the flatness certificate")
    return manifest


def maximality_fraction(manifest: PartitionManifest, factor: float = 4.0, C: float = DEFAULT_C) -> float:
    """Fraction of curved-piece boxes that stop being flat when inflated tangentially.

    The footprint grows by ``factor`` about its center (clipped to the
    profile domain) and the frame's two tangential halfwidths grow by the
    same factor.
    """
    p = manifest.profile
    lo, hi = p.domain
    fps, frames = [], []
    for fp, fr in manifest.boxes:
        if fp.case in (CONE_PLATE, CYLINDER_PLATE):
            continue
        big = fp.inflate(factor)
        big = replace(big, r1=max(big.r1, lo), r2=min(big.r2, hi))
        fps.append(big)
        frames.append(fr.scaled([factor, factor, 1.0]))
    if not fps:
        return 0.0
    reports = flatness_batch(frames, RevolutionSurface(p), fps, manifest.delta, C)
    return sum(not r for r in reports) / len(reports)
