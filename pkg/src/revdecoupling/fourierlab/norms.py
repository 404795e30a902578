"""L^p norms of lattice-supported exponential sums and decoupling quotients."""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass

import numpy as np
import scipy.fft

from ..errors import LatticeError
from .lattice import segment_lattice
from .testfunctions import TestFunction, synth_test_function

DEFAULT_BUDGET = 256**3
DEFAULT_OVERSAMPLE = 2


def dft_shape(index: np.ndarray, oversample: int = DEFAULT_OVERSAMPLE):
    extent = index.max(axis=0) - index.min(axis=0)
    return tuple(int(scipy.fft.next_fast_len(int(oversample * (e + 1)))) for e in extent)


def _lp_from_index(index, coeffs, p, oversample, budget, workers):
    shape = dft_shape(index, oversample)
    size = math.prod(shape)
    if size > budget:
        raise LatticeError(
            f"DFT grid {shape} ({size} cells) exceeds the memory budget of {budget}; "
            "use a larger delta, a smaller region or the 2-D reduction mode"
        )
    grid = np.zeros(shape, dtype=complex)
    rel = index - index.min(axis=0)
    np.add.at(grid, tuple(rel.T), coeffs)
    vals = scipy.fft.ifftn(grid, workers=workers, overwrite_x=True)
    vals *= size  # plain exponential sum at the grid nodes
    a = np.abs(vals)
    if p == 2:
        return float(math.sqrt(np.mean(a * a)))
    # scale before powering to avoid overflow for large p
    m = float(a.max())
    if m == 0:
        return 0.0
    return m * float(np.mean((a / m) ** p)) ** (1.0 / p)


def lp_norm(f: TestFunction, p: float, oversample: int = DEFAULT_OVERSAMPLE, budget: int = DEFAULT_BUDGET,
            workers: int = None) -> float:
    """``(mean |f|^p)^(1/p)`` over one period of the lattice-supported exponential sum.

    The coefficients are placed on a DFT grid of ``oversample * (extent + 1)``
    cells per axis (rounded up to a fast FFT length).  The mean is exact for
    p = 2 at any oversample and for p = 4 from oversample 2 on.
    """
    if not p >= 1:
        raise ValueError("p must be at least 1")
    if oversample < 2:
        raise ValueError("oversample must be at least 2")
    if len(f.coeffs) == 0:
        return 0.0
    return _lp_from_index(f.lattice.index, f.coeffs, p, oversample, budget, workers)


def box_norms(f: TestFunction, p: float, oversample: int = DEFAULT_OVERSAMPLE, budget: int = DEFAULT_BUDGET,
              workers: int = None) -> np.ndarray:
    """``||f_tau||_p`` for every box; each on its own small grid (norms ignore modulation)."""
    out = np.zeros(f.lattice.nboxes)
    for b, idx in enumerate(f.lattice.groups()):
        if len(idx):
            out[b] = _lp_from_index(f.lattice.index[idx], f.coeffs[idx], p, oversample, budget, workers)
    return out


@dataclass
class ExperimentRecord:
    surface: str
    case: str
    delta: float
    p: float
    q: float
    family: str
    seed: int
    num_boxes: int
    norm_f: float
    rhs: float
    ratio: float
    seconds: float = 0.0
    N: int = 0

    CSV_FIELDS = ("surface", "case", "delta", "p", "q", "family", "seed", "num_boxes", "norm_f", "rhs", "ratio", "seconds")

    def row(self, fields=CSV_FIELDS):
        d = asdict(self)
        return [d[k] for k in fields]


def aggregate(norms: np.ndarray, q: float) -> float:
    """Right-hand side: l^2 sum for q = 2, |P|^(1/4) l^4 for q = 4, plain l^q otherwise."""
    norms = np.asarray(norms, dtype=float)
    if q == 4:
        return len(norms) ** 0.25 * float(np.sum(norms**4)) ** 0.25
    return float(np.sum(norms**q)) ** (1.0 / q)


def decoupling_ratio(f: TestFunction, p: float, q: float = 2, surface: str = "", case: str = "",
                     oversample: int = DEFAULT_OVERSAMPLE, budget: int = DEFAULT_BUDGET,
                     workers: int = None) -> ExperimentRecord:
    """``||f||_p`` over the box aggregate of ``||f_tau||_p``.

    Boxes are the groups of ``f.lattice.box_of``; ``|P|`` in the q = 4 form
    counts the boxes that hold at least one lattice point.
    """
    t0 = time.perf_counter()
    lat = f.lattice
    if np.any(lat.box_of < 0):
        raise LatticeError("every lattice point must belong to a box")
    norm_f = lp_norm(f, p, oversample, budget, workers)
    norms = box_norms(f, p, oversample, budget, workers)
    rhs = aggregate(norms, q)
    ratio = norm_f / rhs if rhs > 0 else float("nan")
    return ExperimentRecord(surface, case, lat.delta, p, q, f.family, f.seed, lat.nboxes, norm_f, rhs, ratio,
                            time.perf_counter() - t0)


def prop5_experiment(N: int, delta: float, p: float, family: str = "smooth-indicator", seed: int = 0,
                     spacing: float = None, oversample: int = DEFAULT_OVERSAMPLE) -> ExperimentRecord:
    """Decoupling of the delta-neighborhood of a unit segment into N equal tubes (l^2 form)."""
    if N < 1:
        raise ValueError("N must be positive")
    if N * delta > 1:
        raise ValueError("N * delta must not exceed 1")
    lat = segment_lattice(delta, spacing, N)
    f = synth_test_function(lat, family, seed)
    rec = decoupling_ratio(f, p, 2, surface="segment", case="Segment", oversample=oversample)
    rec.N = N
    return rec
