import numpy as np
import pytest

from todatau import JacobiCoefficients, m_from_q, validate_M, weyl_minus, weyl_plus
from todatau.errors import NearSpectrum, ValidationFail
from todatau.jacobi import MFunctionHandle, herglotz_dzeta, herglotz_transform, spectrum_bounds


def half_line_resolvent(q, w, side, L=400):
    lo, hi = (1, L) if side > 0 else (-L, -1)
    d, e = q.matrix(lo, hi)
    H = np.diag(d) + np.diag(e, 1) + np.diag(e, -1)
    G = np.linalg.inv(H - w * np.eye(L))
    return G[0, 0] if side > 0 else G[-1, -1]


def test_coefficient_container():
    q = JacobiCoefficients.from_dict(a={2: 1.5}, b={-1: 0.2})
    assert q.n_min == -1 and q.n_max == 2
    assert q.a_at(2) == 1.5 and q.a_at(50) == 1.0 and q.b_at(-1) == 0.2
    assert JacobiCoefficients.from_json(q.to_json()).max_abs_diff(q, -5, 5) == 0
    assert q.shifted(1).a_at(1) == 1.5
    with pytest.raises(ValueError):
        JacobiCoefficients.from_dict(a={0: -1.0})


def test_weyl_functions_are_half_line_resolvents(three_site):
    for w in [0.4 + 1.5j, -3.0, 2.7 - 0.1j]:
        assert weyl_plus(three_site, w) == pytest.approx(half_line_resolvent(three_site, w, +1), abs=1e-12)
        assert weyl_minus(three_site, w) == pytest.approx(half_line_resolvent(three_site, w, -1), abs=1e-12)
    with pytest.raises(NearSpectrum):
        weyl_plus(three_site, 1.0, lambda0=2.5)


def test_free_m_function_is_identity():
    m = m_from_q(JacobiCoefficients.free())
    z = np.array([2 + 1j, 0.3j, -5.0, 0.3])
    assert np.max(np.abs(m(z) - z)) < 1e-13


def test_m_function_frozen_values(one_site, three_site):
    assert m_from_q(one_site)(2j) == pytest.approx(2j, abs=1e-14)
    assert m_from_q(one_site)(0.5j) == pytest.approx(0.3 + 0.5j, abs=1e-14)
    m = m_from_q(three_site)
    assert m(5.0) == pytest.approx(5.038, abs=1e-12)
    assert m(4 + 4j) == pytest.approx(4.02375 + 3.97625j, abs=1e-12)
    assert (m.b0, m.a0sq, m.a1sq) == pytest.approx((0.3, 1.44, 0.81))


def test_m_function_glues_half_line_data(three_site):
    # z and 1/z sit over the same spectral parameter z + 1/z
    m = m_from_q(three_site)
    z = 1.7 + 0.9j
    w = z + 1 / z
    assert m(z) == pytest.approx(w + 0.81 * weyl_plus(three_site, w), abs=1e-12)
    assert m(1 / z) == pytest.approx(0.3 - 1.44 * weyl_minus(three_site, w), abs=1e-12)


def test_validate_M(three_site):
    cert = validate_M(m_from_q(three_site))
    assert cert.passed and cert.non_rational_assumed
    bad = MFunctionHandle(lambda z: np.asarray(z) - 0.5j, 1.0, 1.0, 0.0)
    with pytest.raises(ValidationFail):
        validate_M(bad)
    assert "(ii) Herglotz" in validate_M(bad, raise_on_fail=False).violations


def test_herglotz_transform_positive_and_consistent(three_site):
    m = m_from_q(three_site)
    rng = np.random.default_rng(5)
    for zeta in [5.0, 0.2 + 0.1j, -0.15]:
        dm = herglotz_transform(m, zeta)
        z = rng.uniform(-4, 4, 40) + 1j * rng.uniform(0.05, 4, 40)
        z = z[np.abs(np.abs(z) - 1) > 1e-3]
        assert np.all(dm(z).imag > 0)
        assert herglotz_dzeta(m, zeta, 3j) == pytest.approx(dm(3j))
        # still of the form z + O(1/z)
        assert abs(dm(1e4) - 1e4) < 1e-2


def test_spectrum_bounds(three_site):
    lo, hi = spectrum_bounds(three_site)
    assert lo == pytest.approx(-2.0109919412633106, abs=1e-9)
    assert hi == pytest.approx(2.02788745823883, abs=1e-9)
    assert spectrum_bounds(JacobiCoefficients.free())[1] < 2.0
