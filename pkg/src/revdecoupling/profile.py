"""Profile curves of surfaces of revolution and their exact derivative jets.

The surface generated by a profile ``gamma`` is

    S = {(x1, x2, gamma(sqrt(x1**2 + x2**2)))}

Every profile kind reduces to one of three closed forms (linear function,
square root of a quadratic, polynomial about a center) and is differentiated
with :mod:`revdecoupling.series`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CapabilityError, DomainError, ProfileError
from .series import Series, horner

KINDS = ("cone", "torus", "quasi_torus", "perturbed_cone", "power_series")
DEFAULT_MAX_ORDER = 8
_DOMAIN_SLACK = 1e-12


@dataclass(frozen=True)
class Jet:
    """``values[m]`` is the m-th derivative of the profile at ``r``."""

    r: float
    values: tuple

    @property
    def order(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, m):
        return self.values[m]


@dataclass(frozen=True)
class Profile:
    kind: str
    params: dict = field(hash=False)
    domain: tuple
    max_order: int = DEFAULT_MAX_ORDER

    # Polynomial kinds are stored as (center, coefficients) in the shifted
    # variable t = r - center.
    def _poly(self):
        p = self.params
        if self.kind == "power_series":
            return float(p["center"]), tuple(float(c) for c in p["coeffs"])
        n = int(p["n"])
        tail = tuple(float(c) for c in p.get("tail", ()))
        coeffs = [0.0] * (n + 1)
        coeffs[0] = 1.0
        coeffs[n] += 1.0
        if self.kind == "perturbed_cone":
            coeffs[1] += 1.0
        return 1.0, tuple(coeffs) + tail

    def series(self, r, order: int) -> Series:
        """Taylor series of the profile about every entry of ``r``.

        No domain check: callers inside the package use this to evaluate
        on the validity region, which may be larger than ``domain``.
        """
        r = np.asarray(r, dtype=float)
        if self.kind == "cone":
            return Series.variable(r, order) * float(self.params["slope"])
        if self.kind == "torus":
            rho = float(self.params["minor"])
            u = Series.variable(r - 1.0, order)
            return (rho * rho - u * u).sqrt()
        center, coeffs = self._poly()
        return horner(coeffs, Series.variable(r - center, order))

    def derivs(self, r, nderiv: int = 0) -> np.ndarray:
        """Array of shape ``(nderiv + 1, *r.shape)`` of derivatives at ``r``."""
        return self.series(r, nderiv).derivatives()

    def __call__(self, r):
        return self.derivs(r, 0)[0]

    def in_domain(self, r) -> np.ndarray:
        lo, hi = self.domain
        r = np.asarray(r, dtype=float)
        return (r >= lo - _DOMAIN_SLACK) & (r <= hi + _DOMAIN_SLACK)

    def validity(self) -> tuple:
        """Largest closed interval on which the closed form is real analytic."""
        if self.kind == "torus":
            rho = float(self.params["minor"])
            return (1.0 - rho, 1.0 + rho)
        if self.kind == "power_series":
            c, rad = float(self.params["center"]), float(self.params["radius"])
            return (max(0.0, c - rad), c + rad)
        return (0.0, math.inf)

    def describe(self) -> dict:
        params = {k: (list(v) if isinstance(v, (list, tuple)) else v) for k, v in self.params.items()}
        return {"kind": self.kind, "params": params, "domain": list(self.domain)}

    @property
    def id(self) -> str:
        items = ",".join(f"{k}={v}" for k, v in sorted(self.describe()["params"].items()))
        return f"{self.kind}({items})[{self.domain[0]:g},{self.domain[1]:g}]"


def make_profile(kind: str, domain=None, max_order: int = DEFAULT_MAX_ORDER, **params) -> Profile:
    """Build a validated :class:`Profile`.

    Parameters per kind:

    * ``cone``: ``slope``; gamma(r) = slope * r.
    * ``torus``: ``minor`` (default 1/2) and ``Delta``; gamma(r) =
      sqrt(minor**2 - (r - 1)**2) on [1 - Delta, 1 + Delta], Delta < minor.
    * ``quasi_torus``: ``n`` >= 2 and ``tail``; gamma = 1 + u**n + sum tail[j] u**(n+1+j).
    * ``perturbed_cone``: ``n`` >= 3 and ``tail``; gamma = r + u**n + ...
    * ``power_series``: ``center``, ``coeffs``, ``radius``.

    Here u = r - 1.
    """
    if kind not in KINDS:
        raise ProfileError(f"unknown profile kind {kind!r}; expected one of {KINDS}")
    if max_order < 0:
        raise ProfileError("max_order must be non-negative")

    if kind == "cone":
        slope = float(params.get("slope", 1.0))
        if not math.isfinite(slope) or slope == 0.0:
            raise ProfileError("cone slope must be finite and nonzero")
        params = {"slope": slope}
        domain = (0.5, 2.0) if domain is None else domain
    elif kind == "torus":
        minor = float(params.get("minor", 0.5))
        if not 0.0 < minor < 1.0:
            raise ProfileError("torus minor radius must lie in (0, 1)")
        if domain is None:
            Delta = float(params.get("Delta", 0.49))
            if not Delta < minor:
                raise ProfileError(f"Delta<{minor:g} required (got Delta={Delta:g})")
            if Delta <= 0:
                raise ProfileError("Delta must be positive")
            domain = (1.0 - Delta, 1.0 + Delta)
        params = {"minor": minor}
    elif kind in ("quasi_torus", "perturbed_cone"):
        n = int(params["n"])
        lowest = 2 if kind == "quasi_torus" else 3
        if n < lowest:
            raise ProfileError(f"{kind} requires n >= {lowest}")
        tail = [float(c) for c in params.get("tail", ())]
        if not all(math.isfinite(c) for c in tail):
            raise ProfileError("tail coefficients must be finite")
        params = {"n": n, "tail": tuple(tail)}
        domain = (0.5, 2.0) if domain is None else domain
    else:
        coeffs = [float(c) for c in params["coeffs"]]
        radius = float(params.get("radius", math.inf))
        if not coeffs or not all(math.isfinite(c) for c in coeffs):
            raise ProfileError("power series coefficients must be finite and nonempty")
        if not radius > 0:
            raise ProfileError("convergence radius must be positive")
        params = {"center": float(params.get("center", 0.0)), "coeffs": tuple(coeffs), "radius": radius}
        domain = (0.5, 2.0) if domain is None else domain

    lo, hi = (float(x) for x in domain)
    if not lo < hi:
        raise ProfileError(f"empty domain [{lo:g}, {hi:g}]")
    profile = Profile(kind, params, (lo, hi), max_order)
    vlo, vhi = profile.validity()
    if kind == "torus":
        if not (lo > vlo and hi < vhi):
            raise ProfileError(
                f"Delta<{params['minor']:g} required: domain [{lo:g}, {hi:g}] leaves the torus"
            )
    else:
        if kind != "power_series" and not (0.5 - _DOMAIN_SLACK <= lo and hi <= 2.0 + _DOMAIN_SLACK):
            raise ProfileError(f"domain [{lo:g}, {hi:g}] must lie inside [1/2, 2]")
        if lo <= 0:
            raise ProfileError("domain must lie in r > 0")
        if not (lo >= vlo and hi <= vhi):
            raise ProfileError(
                f"domain [{lo:g}, {hi:g}] exceeds the convergence interval [{vlo:g}, {vhi:g}]"
            )
    return profile


def _check(p: Profile, r: float, order: int):
    if order < 0 or order > p.max_order:
        raise CapabilityError(f"derivative order {order} outside 0..{p.max_order}")
    if not bool(p.in_domain(r)):
        raise DomainError(f"r={r!r} outside profile domain {p.domain}")


def eval_jet(p: Profile, r: float, order: int) -> Jet:
    """Exact derivatives ``gamma^(m)(r)`` for ``m = 0..order``."""
    _check(p, r, order)
    values = p.derivs(float(r), order)
    return Jet(float(r), tuple(float(v) for v in values))


def taylor_at(p: Profile, r0: float, order: int) -> list:
    """Taylor coefficients ``gamma^(m)(r0) / m!``."""
    _check(p, r0, order)
    return [float(c) for c in p.series(float(r0), order).c]
