import numpy as np
import pytest

from todatau import JacobiCoefficients
from todatau.errors import PositivityLoss, StepTooLarge
from todatau.oracle import (LatticeState, antisymmetric_part, commutator_factor, flaschka_partner, integrate,
                            isospectral_drift, jacobi_matrix, lax_residual, open_chain_rhs, oracle_drift,
                            oracle_trajectory, toda_rhs, trace_moments)


@pytest.fixture(scope="module")
def evolved(three_site):
    s0 = LatticeState.from_jacobi(three_site, 60)
    return s0, integrate(s0, times=[0.3])[0]


def test_free_lattice_is_stationary():
    s0 = LatticeState.from_jacobi(JacobiCoefficients.free(), 30)
    s = integrate(s0, 1.0)[0]
    assert np.max(np.abs(s.a - 1)) == 0 and np.max(np.abs(s.b)) == 0


def test_frozen_one_site_trajectory(one_site):
    s1, s5 = oracle_trajectory(one_site, [0.1, 0.5])
    sl = slice(198, 203)
    assert s1.a[sl] == pytest.approx([1.000000401355311, 1.0002010036676985, 1.0298374124031169,
                                      0.9710213460305097, 0.9998049172290653], abs=1e-12)
    assert s5.b[sl] == pytest.approx([0.01085694109119718, 0.11315539769681361, 0.0666245924961218,
                                      0.09902426923955289, 0.009602645208938408], abs=1e-12)


def test_time_reversal(evolved):
    s0, s = evolved
    back = integrate(s, 0.0)[0]
    assert np.max(np.abs(back.a - s0.a)) < 1e-8 and np.max(np.abs(back.b - s0.b)) < 1e-8


def test_step_control(three_site):
    s0 = LatticeState.from_jacobi(three_site, 30)
    with pytest.raises(StepTooLarge):
        integrate(s0, 0.5, dt=0.1)

    def collapsing(a, b, a_tail, b_tail):
        return -5.0 * np.ones_like(a), np.zeros_like(b)

    with pytest.raises(PositivityLoss):
        integrate(s0, 1.0, rhs=collapsing, richardson=False)


def test_lax_pair_normalization(evolved):
    _, s = evolved
    # dH/dt = [B, H] with B the antisymmetrized H
    c, res = commutator_factor(s, antisymmetric_part(jacobi_matrix(s)))
    assert c == pytest.approx(1.0, abs=1e-12) and res < 1e-12
    assert lax_residual(s) < 1e-12
    # the partner with coupling a_n between n and n+1 is not proportional
    _, res_printed = commutator_factor(s, flaschka_partner(s))
    assert res_printed > 1e-2


def test_open_chain_is_isospectral(three_site):
    s0 = LatticeState.from_jacobi(three_site, 80)
    traj = [s0] + integrate(s0, times=[0.2, 0.5], rhs=open_chain_rhs)
    assert isospectral_drift(traj) < 1e-12
    m0, m1 = trace_moments(traj[0]), trace_moments(traj[-1])
    assert m1 == pytest.approx(m0, abs=1e-11)
    # interior agrees with the frozen-end lattice
    frozen = integrate(s0, times=[0.5])[0]
    sl = slice(80 - 10, 80 + 11)
    assert np.max(np.abs(frozen.a[sl] - traj[-1].a[sl])) < 1e-14
    assert oracle_drift(three_site, [0.0, 0.25, 0.5], L=80) < 1e-12


def test_frozen_ends_break_isospectrality(three_site):
    s0 = LatticeState.from_jacobi(three_site, 80)
    assert isospectral_drift([s0] + integrate(s0, times=[0.5])) > 1e-6


def test_rhs_pads_are_frozen():
    a = np.array([1.0, 2.0, 1.5, 1.0])
    b = np.array([0.5, 0.0, 0.3, -0.1])
    da, db = toda_rhs(a, b)
    assert da[0] == da[-1] == db[0] == db[-1] == 0
    assert da[1] == pytest.approx(2.0 * (0.0 - 0.5))
    assert db[1] == pytest.approx(2 * (1.5**2 - 2.0**2))
