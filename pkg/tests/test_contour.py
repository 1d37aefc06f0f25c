import numpy as np
import pytest

from todatau import DomainError, build_domain, contour_integral
from todatau.contour import spectral_radius_point


def test_ell_values():
    assert spectral_radius_point(2.5) == pytest.approx(2.0, abs=1e-15)
    assert spectral_radius_point(2.0) == pytest.approx(1.0, abs=1e-15)
    build_domain(2.0, 1.1, 64, 16)


@pytest.mark.parametrize("kwargs", [dict(R=1.5), dict(R=2.0), dict(M=255), dict(M=6, N=1), dict(M=64, N=17),
                                    dict(lambda0=1.9)])
def test_invalid_domains(kwargs):
    args = dict(lambda0=2.5, R=3.0, M=256, N=64) | kwargs
    with pytest.raises(DomainError):
        build_domain(**args)


def test_node_set_closed_under_involutions(domain):
    g = domain.grid
    z = g.nodes
    assert np.max(np.abs(1.0 / z - z[g.reciprocal_index])) < 1e-14 * domain.R
    assert np.max(np.abs(np.conj(z) - z[g.conjugate_index])) < 1e-14 * domain.R
    assert np.allclose(np.abs(g.nodes_inner), 1 / domain.R)


def test_orientation_and_residues(domain):
    g = domain.grid
    z = g.nodes
    assert abs(contour_integral(np.ones_like(z), g)) < 1e-13
    assert abs(contour_integral(1 / z, g)) < 1e-12
    assert contour_integral(1 / z, g, outer_only=True) == pytest.approx(2j * np.pi, abs=1e-12)
    # a pole between the circles is counted once, by the outer circle
    w = np.exp(0.3j)
    assert contour_integral(1 / (z - w), g) == pytest.approx(2j * np.pi, abs=1e-10)
    # poles outside or inside the annulus are enclosed by neither or both
    assert abs(contour_integral(1 / (z - 5.0), g)) < 1e-12
    assert abs(contour_integral(1 / (z - 0.1), g)) < 1e-12


def test_monomials_integrate_to_zero(domain):
    g = domain.grid
    z = g.nodes
    circ = 2 * np.pi * domain.R
    for n in range(-2 * domain.N, 2 * domain.N + 1):
        if n != -1:
            val = contour_integral(z**n, g)
            assert abs(val) <= 1e-12 * circ * max(domain.R ** abs(n), 1.0)


def test_spectral_convergence():
    f = lambda z: 1 / (z - 4.0) + 1 / (z * (z - 0.2)) + np.exp(z / 3)
    fine, coarse = build_domain(2.5, 3.0, 512, 64), build_domain(2.5, 3.0, 256, 64)
    a = contour_integral(f(fine.grid.nodes), fine.grid)
    b = contour_integral(f(coarse.grid.nodes), coarse.grid)
    assert abs(a - b) < 1e-10
