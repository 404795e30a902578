import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from oracles import SEGMENT_POINTS_DELTA_1_32, TWO_BOX_Q4_RATIO, TWO_FREQ_L2, TWO_FREQ_L4
from revdecoupling.errors import LatticeError
from revdecoupling.fourierlab.fitting import fit_loglog, sweep_and_fit
from revdecoupling.fourierlab.lattice import FrequencyLattice, discretize_support, segment_lattice
from revdecoupling.fourierlab.norms import (
    ExperimentRecord,
    aggregate,
    decoupling_ratio,
    lp_norm,
    prop5_experiment,
)
from revdecoupling.fourierlab.presets import get_preset, run_experiment
from revdecoupling.fourierlab.testfunctions import TestFunction, bump, synth_test_function


def _const(index, box_of=None):
    lat = FrequencyLattice.from_points(index, box_of)
    return TestFunction(lat, np.ones(len(lat)), "constant")


# ----------------------------------------------------------------- lattice


def test_segment_point_count():
    lat = segment_lattice(1 / 32)
    assert len(lat) == SEGMENT_POINTS_DELTA_1_32
    assert lat.spacing == 1 / 64


def test_spacing_larger_than_delta_rejected():
    with pytest.raises(LatticeError):
        segment_lattice(1 / 32, spacing=1 / 16)
    with pytest.raises(LatticeError):
        discretize_support(get_preset("torus").manifest(2.0**-5), 2.0**-5, spacing=2.0**-4)


def test_empty_region_is_too_coarse():
    m = get_preset("torus").manifest(2.0**-5)
    with pytest.raises(LatticeError, match="resolution too coarse"):
        discretize_support(m, 2.0**-5, region={"r": (1.0, 1.0001), "alpha": (0.003, 0.00301)})


@pytest.fixture(scope="module")
def torus_lattice():
    m = get_preset("torus").manifest(2.0**-6)
    return m, discretize_support(m, 2.0**-6, region={"r": (0.8, 1.2), "alpha": (-0.2, 0.2)})


def test_torus_lattice_within_delta(torus_lattice):
    m, lat = torus_lattice
    delta = lat.delta
    g = m.profile
    lo, hi = g.domain
    rng = np.random.default_rng(3)
    for i in rng.choice(len(lat), 200, replace=False):
        x, y, z = lat.points[i]
        rho = math.hypot(x, y)
        res = minimize_scalar(lambda r: (r - rho) ** 2 + (float(g(r)) - z) ** 2, bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12})
        d = math.sqrt(res.fun)
        assert d <= delta * (1 + 1e-6)
        assert d == pytest.approx(lat.dist[i], abs=1e-7)


def test_torus_lattice_assigned_to_boxes(torus_lattice):
    m, lat = torus_lattice
    assert np.all(lat.box_of >= 0)
    assert lat.nboxes <= len(m)


def test_two_d_reduction_is_planar():
    m = get_preset("torus").manifest(2.0**-6)
    lat = discretize_support(m, 2.0**-6, reduce2d=True)
    assert lat.dim == 2 and len(lat) > 0


# ----------------------------------------------------------------- test functions


def test_families():
    lat = segment_lattice(1 / 32)
    assert np.all(synth_test_function(lat, "constant").coeffs == 1)
    a = synth_test_function(lat, "random-phase", seed=7).coeffs
    b = synth_test_function(lat, "random-phase", seed=7).coeffs
    assert np.array_equal(a, b) and np.allclose(np.abs(a), 1)
    assert not np.array_equal(a, synth_test_function(lat, "random-phase", seed=8).coeffs)
    c = synth_test_function(lat, "smooth-indicator").coeffs.real
    assert c.min() >= 0 and c.max() <= 1
    assert np.all(c[lat.dist <= lat.delta / 2] == 1)
    with pytest.raises(ValueError):
        synth_test_function(lat, "nonsense")


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 1))
def test_bump_monotone_between_half_and_full(t):
    assert 0 <= bump(t, 1.0) <= 1
    assert bump(min(t + 0.01, 1.0), 1.0) <= bump(t, 1.0)


# ----------------------------------------------------------------- norms


@pytest.mark.parametrize("p", [1, 2, 4, 7.5])
def test_single_frequency_norm_is_one(p):
    assert lp_norm(_const([[3, -2, 5]]), p) == pytest.approx(1.0)


def test_two_frequency_norms():
    f = _const([[0, 0], [1, 0]])
    assert lp_norm(f, 4) == pytest.approx(TWO_FREQ_L4, rel=1e-12)
    assert lp_norm(f, 2) == pytest.approx(TWO_FREQ_L2, rel=1e-12)


def test_two_box_ratios():
    f = _const([[0, 0], [1, 0]], [0, 1])
    assert decoupling_ratio(f, 4, 4).ratio == pytest.approx(TWO_BOX_Q4_RATIO, rel=1e-12)
    assert decoupling_ratio(f, 2, 2).ratio == pytest.approx(1.0, rel=1e-12)
    assert decoupling_ratio(_const([[0, 0], [1, 0]]), 4, 4).ratio == pytest.approx(1.0)


def test_oversampling_converges():
    lat = segment_lattice(1 / 32)
    f = synth_test_function(lat, "random-phase", seed=1)
    assert lp_norm(f, 6, oversample=2) == pytest.approx(lp_norm(f, 6, oversample=4), rel=0.01)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 40), st.integers(0, 2**32 - 1))
def test_plancherel(n, seed):
    rng = np.random.default_rng(seed)
    idx = rng.choice(400, size=n, replace=False)
    index = np.column_stack([idx % 20, idx // 20])
    c = rng.normal(size=n) + 1j * rng.normal(size=n)
    f = TestFunction(FrequencyLattice.from_points(index, rng.integers(0, 3, n)), c, "random")
    assert lp_norm(f, 2) == pytest.approx(np.linalg.norm(c), rel=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 30), st.integers(0, 2**32 - 1), st.sampled_from([2, 4, 6]))
def test_ratio_triangle_floor(n, seed, p):
    rng = np.random.default_rng(seed)
    index = np.column_stack([rng.choice(64, n, replace=False), np.zeros(n, dtype=int)])
    boxes = rng.integers(0, 4, n)
    f = TestFunction(FrequencyLattice.from_points(index, boxes), np.exp(2j * np.pi * rng.random(n)), "random-phase")
    rec = decoupling_ratio(f, p, 2)
    nonempty = len(np.unique(boxes))
    # triangle inequality plus Cauchy-Schwarz: ||f||_p <= sqrt(|P|) * (sum ||f_tau||_p^2)^(1/2)
    assert rec.ratio <= math.sqrt(nonempty) * (1 + 1e-9)
    assert rec.ratio > 0


def test_memory_guard():
    f = _const([[0, 0, 0], [300, 300, 300]])
    with pytest.raises(LatticeError, match="2-D reduction"):
        lp_norm(f, 4)


def test_aggregate_forms():
    assert aggregate([1.0, 1.0], 2) == pytest.approx(math.sqrt(2))
    assert aggregate([1.0, 1.0], 4) == pytest.approx(math.sqrt(2))
    assert aggregate([2.0], 4) == 2.0


# ----------------------------------------------------------------- fitting


def test_fit_examples():
    assert fit_loglog([2, 4, 8], [2, 4, 8]).slope == pytest.approx(1.0)
    assert fit_loglog([2, 4, 8], [3, 3, 3]).slope == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        fit_loglog([2, 2, 4], [1, 2, 3])
    with pytest.raises(ValueError):
        fit_loglog([2, 4], [1, 2])


def test_sweep_and_fit_keys():
    recs = [ExperimentRecord("s", "c", d, 4, 2, "constant", 0, 1, 1, 1, 1 / d) for d in (0.5, 0.25, 0.125)]
    assert sweep_and_fit(recs, "inv_delta").slope == pytest.approx(1.0)
    with pytest.raises(ValueError):
        sweep_and_fit(recs, "bogus")


# ----------------------------------------------------------------- segment sweep


def test_segment_trivial_cases():
    assert prop5_experiment(1, 2.0**-8, 4).ratio == pytest.approx(1.0)
    for fam in ("constant", "random-phase", "smooth-indicator"):
        assert prop5_experiment(16, 2.0**-10, 2, fam).ratio <= 1 + 1e-6


def test_segment_rejects_bad_tube_count():
    with pytest.raises(ValueError):
        prop5_experiment(0, 2.0**-8, 4)
    with pytest.raises(ValueError):
        prop5_experiment(512, 2.0**-8, 4)


def test_run_experiment_records_fields():
    rec = run_experiment(get_preset("torus"), 2.0**-5, 4, 2, "constant")
    assert rec.surface == "torus" and rec.num_boxes > 0 and rec.ratio > 0
    assert len(rec.row()) == len(ExperimentRecord.CSV_FIELDS)
