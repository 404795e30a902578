"""Sampled certificate that a box frame is essentially flat for its cap."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import BoxFrame, CapFootprint, as_surface, sample_params

DEFAULT_C = 1000.0
DEFAULT_SAMPLES = 32
_CHUNK = 1024


@dataclass(frozen=True)
class FlatnessReport:
    passed: bool
    deviation: float
    containment: float

    def __bool__(self):
        return self.passed


def flatness_report(frame: BoxFrame, points, delta: float, C: float = DEFAULT_C) -> FlatnessReport:
    """Certificate from explicit surface samples.

    ``deviation`` is the largest distance from a sample to the frame's
    central plane.  ``containment`` is the smallest dilation factor of the
    frame that holds the delta-neighborhood of all samples.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    rel = pts - frame.center
    deviation = float(np.max(np.abs(rel @ frame.plane_normal)))
    dual = np.linalg.inv(frame.axes.T)  # rows: dual basis vectors
    coords = rel @ dual.T
    reach = np.abs(coords) + delta * np.linalg.norm(dual, axis=1)
    containment = float(np.max(reach / frame.halfwidths))
    return FlatnessReport(deviation <= delta * (1 + 1e-12) and containment <= C, deviation, containment)


def flatness_check(
    frame: BoxFrame,
    surface,
    footprint: CapFootprint,
    delta: float,
    C: float = DEFAULT_C,
    samples: int = DEFAULT_SAMPLES,
) -> FlatnessReport:
    """Check one frame against a ``samples x samples`` grid over its footprint.

    ``surface`` is a :class:`~revdecoupling.profile.Profile` or any object
    with a ``points(r, alpha)`` method.
    """
    return flatness_batch([frame], surface, [footprint], delta, C, samples)[0]


def flatness_batch(frames, surface, footprints, delta: float, C: float = DEFAULT_C, samples: int = DEFAULT_SAMPLES):
    """Vectorized :func:`flatness_check` over many boxes."""
    surface = as_surface(surface)
    reports = []
    for start in range(0, len(frames), _CHUNK):
        fr = frames[start : start + _CHUNK]
        fp = footprints[start : start + _CHUNK]
        centers = np.array([f.center for f in fr])
        duals = np.linalg.inv(np.array([f.axes.T for f in fr]))  # (B, 3, 3), rows: dual basis
        dual_len = np.linalg.norm(duals, axis=2)
        hws = np.array([f.halfwidths for f in fr])
        rr, aa = sample_params(fp, samples)
        pts = surface.points(rr[:, :, None], aa[:, None, :]).reshape(len(fr), -1, 3)
        coords = np.matmul(pts - centers[:, None, :], duals.transpose(0, 2, 1))
        # the third dual row is orthogonal to the first two axes, i.e. along the plane normal
        dev = np.max(np.abs(coords[:, :, 2]), axis=1) / dual_len[:, 2]
        reach = np.abs(coords) + delta * dual_len[:, None, :]
        cont = np.max(reach / hws[:, None, :], axis=(1, 2))
        for d, c in zip(dev, cont):
            reports.append(FlatnessReport(bool(d <= delta * (1 + 1e-12) and c <= C), float(d), float(c)))
    return reports
