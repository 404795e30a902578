"""Affine maps, box frames, footprints and the surfaces they live on."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ..profile import Profile

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class AffineMap:
    linear: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "linear", np.asarray(self.linear, dtype=float).reshape(3, 3))
        object.__setattr__(self, "offset", np.asarray(self.offset, dtype=float).reshape(3))

    @classmethod
    def identity(cls):
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def rotation_z(cls, angle: float):
        c, s = math.cos(angle), math.sin(angle)
        return cls(np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]), np.zeros(3))

    def __call__(self, pts):
        pts = np.asarray(pts, dtype=float)
        return pts @ self.linear.T + self.offset

    def compose(self, inner: "AffineMap") -> "AffineMap":
        """``self o inner``."""
        return AffineMap(self.linear @ inner.linear, self.linear @ inner.offset + self.offset)

    __matmul__ = compose

    def inverse(self) -> "AffineMap":
        inv = np.linalg.inv(self.linear)
        return AffineMap(inv, -inv @ self.offset)

    @property
    def condition(self) -> float:
        return float(np.linalg.cond(self.linear))


@dataclass(frozen=True)
class CapFootprint:
    """Polar parameter rectangle ``[alpha1, alpha2) x [r1, r2)`` of a cap.

    For the cylinder the radial slot holds the axial coordinate.
    """

    alpha1: float
    alpha2: float
    r1: float
    r2: float
    case: str = "Nondegenerate"
    k: int = -1
    first: int = 0
    second: int = 0
    n: int = 0
    side: int = 0
    s: float = 0.0

    def __post_init__(self):
        if not self.r1 < self.r2:
            raise ValueError(f"empty radial interval [{self.r1}, {self.r2})")
        if not 0.0 <= self.alpha2 - self.alpha1 <= TWO_PI + 1e-12:
            raise ValueError("angular extent must lie in [0, 2 pi]")

    @property
    def angular_width(self):
        return self.alpha2 - self.alpha1

    @property
    def radial_width(self):
        return self.r2 - self.r1

    @property
    def center(self):
        return 0.5 * (self.alpha1 + self.alpha2), 0.5 * (self.r1 + self.r2)

    def inflate(self, factor: float) -> "CapFootprint":
        a, r = self.center
        ha, hr = 0.5 * factor * self.angular_width, 0.5 * factor * self.radial_width
        return replace(self, alpha1=a - ha, alpha2=a + ha, r1=r - hr, r2=r + hr)

    def to_dict(self):
        return {
            "alpha1": self.alpha1,
            "alpha2": self.alpha2,
            "r1": self.r1,
            "r2": self.r2,
            "case": self.case,
            "k": self.k,
            "n": self.n,
            "side": self.side,
            "first": self.first,
            "second": self.second,
        }


@dataclass(frozen=True)
class BoxFrame:
    center: np.ndarray
    axes: np.ndarray  # rows are unit axis directions
    halfwidths: np.ndarray  # sorted descending

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float).reshape(3))
        object.__setattr__(self, "axes", np.asarray(self.axes, dtype=float).reshape(3, 3))
        object.__setattr__(self, "halfwidths", np.asarray(self.halfwidths, dtype=float).reshape(3))

    @classmethod
    def from_axes(cls, center, axes, halfwidths) -> "BoxFrame":
        """Normalize the axes and order them by decreasing halfwidth."""
        axes = np.asarray(axes, dtype=float)
        axes = axes / np.linalg.norm(axes, axis=1, keepdims=True)
        hw = np.asarray(halfwidths, dtype=float)
        order = np.argsort(-hw, kind="stable")
        return cls(center, axes[order], hw[order])

    @property
    def plane_normal(self) -> np.ndarray:
        n = np.cross(self.axes[0], self.axes[1])
        return n / np.linalg.norm(n)

    def max_orthogonality_defect(self) -> float:
        """Largest deviation from 90 degrees between two axes, in degrees."""
        worst = 0.0
        for i in range(3):
            for j in range(i + 1, 3):
                cosang = abs(float(self.axes[i] @ self.axes[j]))
                worst = max(worst, 90.0 - math.degrees(math.acos(min(1.0, cosang))))
        return worst

    def scaled(self, factors) -> "BoxFrame":
        return BoxFrame(self.center, self.axes, self.halfwidths * np.asarray(factors, dtype=float))

    def coordinates(self, pts) -> np.ndarray:
        dual = np.linalg.inv(self.axes.T)
        return (np.asarray(pts, dtype=float) - self.center) @ dual.T

    def to_dict(self):
        return {
            "center": [float(x) for x in self.center],
            "axes": [float(x) for x in self.axes.ravel()],
            "halfwidths": [float(x) for x in self.halfwidths],
        }

    @classmethod
    def from_dict(cls, d):
        return cls(np.array(d["center"]), np.array(d["axes"]).reshape(3, 3), np.array(d["halfwidths"]))


class RevolutionSurface:
    """``(r cos a, r sin a, gamma(r))`` with its analytic frame vectors."""

    def __init__(self, profile: Profile):
        self.profile = profile

    def radial_data(self, r):
        d = self.profile.derivs(r, 1)
        return d[0], d[1]

    def points(self, r, alpha):
        g, _ = self.radial_data(r)
        r, alpha = np.broadcast_arrays(r, alpha)
        g = np.broadcast_to(g, r.shape)
        return np.stack([r * np.cos(alpha), r * np.sin(alpha), g], axis=-1)

    def frame_vectors(self, r, alpha):
        """Unit radial tangent, unit angular tangent, unit normal."""
        _, d1 = self.radial_data(r)
        r, alpha, d1 = np.broadcast_arrays(r, alpha, d1)
        c, s = np.cos(alpha), np.sin(alpha)
        w = np.sqrt(1.0 + d1 * d1)
        e_r = np.stack([c / w, s / w, d1 / w], axis=-1)
        e_a = np.stack([-s, c, np.zeros_like(c)], axis=-1)
        nrm = np.stack([-d1 * c / w, -d1 * s / w, 1.0 / w], axis=-1)
        return e_r, e_a, nrm

    def radial_speed(self, r):
        _, d1 = self.radial_data(r)
        return np.sqrt(1.0 + d1 * d1)

    def angular_speed(self, r):
        return np.asarray(r, dtype=float)


class CylinderSurface:
    """``(R cos a, R sin a, z)``; footprints use ``r1, r2`` for the axial range."""

    def __init__(self, radius: float = 1.0):
        self.radius = float(radius)

    def points(self, z, alpha):
        z, alpha = np.broadcast_arrays(np.asarray(z, dtype=float), alpha)
        return np.stack([self.radius * np.cos(alpha), self.radius * np.sin(alpha), z], axis=-1)

    def frame_vectors(self, z, alpha):
        z, alpha = np.broadcast_arrays(np.asarray(z, dtype=float), alpha)
        c, s = np.cos(alpha), np.sin(alpha)
        zero = np.zeros_like(c)
        e_z = np.stack([zero, zero, np.ones_like(c)], axis=-1)
        e_a = np.stack([-s, c, zero], axis=-1)
        nrm = np.stack([c, s, zero], axis=-1)
        return e_z, e_a, nrm

    def radial_speed(self, z):
        return np.ones_like(np.asarray(z, dtype=float))

    def angular_speed(self, z):
        return np.full_like(np.asarray(z, dtype=float), self.radius)


def as_surface(obj):
    if isinstance(obj, Profile):
        return RevolutionSurface(obj)
    return obj


def sample_params(footprints, m: int):
    """``(B, m)`` radial and angular sample grids (endpoints included)."""
    t = np.linspace(0.0, 1.0, m)
    r1 = np.array([f.r1 for f in footprints])[:, None]
    r2 = np.array([f.r2 for f in footprints])[:, None]
    a1 = np.array([f.alpha1 for f in footprints])[:, None]
    a2 = np.array([f.alpha2 for f in footprints])[:, None]
    return r1 + (r2 - r1) * t, a1 + (a2 - a1) * t


def build_frames(surface, footprints, delta: float, m: int = 12) -> list:
    """Tangent-aligned box frames for a batch of footprints.

    The frame is the tangent frame at the parameter center, shifted along the
    normal to the midrange of the sampled patch; halfwidths cover the sampled
    patch plus ``delta`` in every direction.
    """
    if not footprints:
        return []
    surface = as_surface(surface)
    ac = np.array([f.center[0] for f in footprints])
    rc = np.array([f.center[1] for f in footprints])
    center = surface.points(rc, ac)  # (B, 3)
    e1, e2, e3 = surface.frame_vectors(rc, ac)
    axes = np.stack([e1, e2, e3], axis=1)  # (B, 3, 3)

    rr, aa = sample_params(footprints, m)
    pts = surface.points(rr[:, :, None], aa[:, None, :])  # (B, m, m, 3)
    rel = pts - center[:, None, None, :]
    coords = np.einsum("bijk,bak->bija", rel, axes)  # (B, m, m, 3)
    lo = coords.min(axis=(1, 2))
    hi = coords.max(axis=(1, 2))
    shift = 0.5 * (lo[:, 2] + hi[:, 2])
    center = center + shift[:, None] * e3
    hw = np.empty((len(footprints), 3))
    hw[:, 0] = np.maximum(np.abs(lo[:, 0]), np.abs(hi[:, 0])) + delta
    hw[:, 1] = np.maximum(np.abs(lo[:, 1]), np.abs(hi[:, 1])) + delta
    hw[:, 2] = 0.5 * (hi[:, 2] - lo[:, 2]) + delta
    return [BoxFrame.from_axes(center[b], axes[b], hw[b]) for b in range(len(footprints))]
