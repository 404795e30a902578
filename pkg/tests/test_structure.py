import pytest

from revdecoupling.errors import ClassificationError
from revdecoupling.profile import make_profile
from revdecoupling.structure import (
    CONE,
    PERTURBED_CONE,
    QUASI_TORUS,
    ZeroPoint,
    classify_point,
    decompose_interval,
    find_curvature_zeros,
    sampled_min_curvature_product,
    validate_expansion_radius,
)


def test_no_zeros_for_paraboloid():
    assert find_curvature_zeros(make_profile("power_series", coeffs=[0, 0, 1])) == []


def test_torus_zero():
    (z,) = find_curvature_zeros(make_profile("torus", Delta=0.4))
    assert (z.r, z.n, z.case) == (pytest.approx(1.0, abs=1e-9), 2, QUASI_TORUS)


def test_perturbed_cone_zero():
    (z,) = find_curvature_zeros(make_profile("perturbed_cone", n=3))
    assert (z.r, z.n, z.case) == (pytest.approx(1.0, abs=1e-9), 3, PERTURBED_CONE)


def test_cone_is_one_zero_spanning_domain():
    (z,) = find_curvature_zeros(make_profile("cone", slope=2.0))
    assert z.case == CONE
    d = decompose_interval(make_profile("cone", slope=2.0), [z])
    assert d.degenerate[0][1] == (0.5, 2.0) and d.nondegenerate == ()


def test_higher_orders():
    (z,) = find_curvature_zeros(make_profile("quasi_torus", n=4))
    assert (z.n, z.case) == (4, QUASI_TORUS)
    (z,) = find_curvature_zeros(make_profile("perturbed_cone", n=5))
    assert (z.n, z.case) == (5, PERTURBED_CONE)


def test_classification_stable_under_tol_halving():
    for p in [make_profile("torus"), make_profile("perturbed_cone", n=3), make_profile("quasi_torus", n=3)]:
        a = [(round(z.r, 8), z.n, z.case) for z in find_curvature_zeros(p, tol=1e-10)]
        b = [(round(z.r, 8), z.n, z.case) for z in find_curvature_zeros(p, tol=5e-11)]
        assert a == b


def test_unclassifiable_flat_profile():
    p = make_profile("power_series", coeffs=[1.0])
    with pytest.raises(ClassificationError):
        find_curvature_zeros(p)


def test_classify_point_not_a_zero():
    assert classify_point(make_profile("torus"), 1.2) is None


def test_decompose_with_given_half_width():
    p = make_profile("quasi_torus", n=2)
    d = decompose_interval(p, [ZeroPoint(1.0, 2, QUASI_TORUS, 0.2)])
    (z, iv), = d.degenerate
    assert iv == pytest.approx((0.8, 1.2))
    (a, b), (c, e) = d.nondegenerate
    assert (a, b, c, e) == pytest.approx((0.5, 0.8, 1.2, 2.0))


def test_decompose_without_zeros():
    p = make_profile("power_series", coeffs=[0, 0, 1])
    d = decompose_interval(p, [])
    assert d.degenerate == () and d.nondegenerate == ((0.5, 2.0),)


def test_close_zeros_share_the_gap():
    p = make_profile("power_series", center=1.0, coeffs=[1, 0, -0.05, 1 / 3], radius=10)
    zs = [ZeroPoint(1.0, 2, QUASI_TORUS, 0.2), ZeroPoint(1.1, 2, QUASI_TORUS, 0.2)]
    d = decompose_interval(p, zs)
    assert all(z.delta <= 0.05 + 1e-12 for z, _ in d.degenerate)


def test_pieces_tile_domain():
    p = make_profile("torus")
    d = decompose_interval(p, find_curvature_zeros(p))
    pieces = [iv for iv, _ in d.pieces()]
    assert pieces[0][0] == p.domain[0] and pieces[-1][1] == p.domain[1]
    assert all(a[1] == b[0] for a, b in zip(pieces, pieces[1:]))
    for lo, hi in d.nondegenerate:
        assert sampled_min_curvature_product(p, (lo, hi)) > 0


def test_validate_expansion_radius_examples():
    torus = make_profile("torus")
    z = ZeroPoint(1.0, 2, QUASI_TORUS)
    assert validate_expansion_radius(torus, z, 0.1, 0.5)
    assert not validate_expansion_radius(torus, z, 0.45, 0.5)
    cone = make_profile("cone")
    assert validate_expansion_radius(cone, ZeroPoint(1.0, 1, CONE), 0.7)


def test_zero_pattern_rechecked_with_jets():
    p = make_profile("perturbed_cone", n=4)
    (z,) = find_curvature_zeros(p)
    d = p.derivs(z.r, 4)
    assert abs(d[1]) > 0.5 and abs(d[2]) < 1e-8 and abs(d[3]) < 1e-8 and abs(d[4]) > 1
