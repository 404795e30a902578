import numpy as np
import pytest

from revdecoupling.errors import ConvergenceError
from revdecoupling.fourierlab.lemma import (
    cone_hessian_determinant,
    hessian_identity_check,
    lemma_derivative_check,
)
from revdecoupling.partition.rescaled import normalized_model, phi, solve_psi
from revdecoupling.profile import make_profile

PC3 = make_profile("perturbed_cone", n=3)


def test_solve_psi_satisfies_implicit_equation():
    g = normalized_model(PC3)[0]
    x1 = np.linspace(-0.05, 0.05, 11)[:, None]
    x2 = np.linspace(1.05, 1.2, 7)[None, :]
    x3 = solve_psi(g, x1, x2)
    rho = np.sqrt(x1**2 + (x2 - x3) ** 2)
    E = g(rho) - rho
    assert np.allclose(4 * x2 * x3, x1**2 + 2 * E * (x2 + x3) - E**2, atol=1e-14)


def test_pure_cone_has_no_remainder():
    ident = lambda r: r
    x1, x2 = np.meshgrid(np.linspace(-0.3, 0.3, 5), np.linspace(0.5, 1.5, 5))
    assert np.all(phi(ident, x1, x2) == 0)
    assert np.allclose(cone_hessian_determinant(x1, x2), 0, atol=1e-15)


def test_solve_psi_reports_divergence():
    wild = lambda r: r + 50 * (r - 1) ** 2
    with pytest.raises(ConvergenceError):
        solve_psi(wild, np.array([3.0]), np.array([0.2]))


def test_phi_is_order_s_cubed():
    for k in (1, 2):
        t = lemma_derivative_check(PC3, k)
        assert t.phi_ratio <= 8


def test_derivative_maxima_bounded_across_k():
    a = lemma_derivative_check(PC3, 1)
    b = lemma_derivative_check(PC3, 2)
    for key in a.maxima:
        hi, lo = max(a.maxima[key], b.maxima[key]), min(a.maxima[key], b.maxima[key])
        if hi >= 0.1:
            assert hi / lo < 4, key
        else:
            assert hi < 0.1, key


def test_hessian_identity():
    h = hessian_identity_check(PC3, 2)
    assert h.rel_error <= 1e-4 and h.matrix_error <= 1e-4
    assert 0.1 <= h.eig_min and h.eig_max <= 10


def test_derivative_table_rejects_wrong_order():
    with pytest.raises(ValueError):
        lemma_derivative_check(PC3, 1, n=4)
