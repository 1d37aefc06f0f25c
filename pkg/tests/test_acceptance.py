"""Acceptance suite at default scale: lambda0 = 2.5, R = 3, M = 256, N = 64, window |n| <= 8, L = 200.

Run with ``pytest -m acceptance -v``; a PASS/FAIL line per criterion is
printed in the terminal summary.
"""
import time

import numpy as np
import pytest

from conftest import random_exterior_point, random_q, random_real_element
from todatau import GroupElement, JacobiCoefficients, build_domain, m_from_q, msymbol_from_m
from todatau.flow import (FlowEngine, base_symbol, check_spectrum, hierarchy_element, p_hat, toda_apply)
from todatau.jacobi import herglotz_transform
from todatau.oracle import oracle_drift, oracle_trajectory
from todatau.symbol import mgroup_product
from todatau.tau import SymbolMFunction, tau_det, tau_q2, tau_qzeta, tau_r
from todatau.toeplitz import SymbolFrame, build_T

pytestmark = pytest.mark.acceptance

LAMBDA0, RADIUS = 2.5, 3.0
WINDOW = (-8, 8)
TIMES = [round(0.05 * k, 10) for k in range(11)]
LINEAR = p_hat([0, 1])


@pytest.fixture(scope="module")
def dom():
    return build_domain(LAMBDA0, RADIUS, 256, 64)


def winding_free_element(rng, R, count=2):
    """Real rational element with poles only in the outer exterior component, times exp(h)."""
    g = GroupElement.identity()
    for _ in range(count):
        if rng.random() < 0.5:
            g = g * GroupElement.q(float(rng.uniform(1.3 * R, 4 * R) * rng.choice([-1, 1])))
        else:
            g = g * GroupElement.r(complex(rng.uniform(1.3 * R, 4 * R) * np.exp(1j * rng.uniform(0, np.pi))))
    return g * GroupElement.exp({1: rng.uniform(-0.3, 0.3), -1: rng.uniform(-0.3, 0.3)}, real=True)


def upper_points(rng, count, ell, margin=1e-3, rmax=6.0):
    """Random points of the upper half-plane off the spectral curve."""
    out = []
    while len(out) < count:
        z = np.exp(rng.uniform(-np.log(rmax), np.log(rmax))) * np.exp(1j * rng.uniform(0, np.pi))
        if z.imag < margin or abs(abs(z) - 1) < margin:
            continue
        out.append(z)
    return np.array(out)


def exterior_upper_points(rng, count, R):
    out = []
    while len(out) < count:
        z = random_exterior_point(rng, R)
        if z.imag > 1e-3 * abs(z):
            out.append(z)
    return np.array(out)


def test_01_closed_form_tau(dom, acceptance_record):
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(20):
        q = random_q(rng)
        base = base_symbol(q, dom)
        # also a symbol with non-trivial phi^(0): the product with a winding-free element
        moved = SymbolFrame(base.symbol.times(winding_free_element(rng, RADIUS)))
        for fr in (base, moved):
            zeta = random_exterior_point(rng, RADIUS)
            pairs = [(tau_det(fr, GroupElement.q(zeta)).value, tau_qzeta(fr, zeta).value),
                     (tau_det(fr, GroupElement.r(zeta)).value, tau_r(fr, zeta).value)]
            z1, z2 = random_exterior_point(rng, RADIUS), random_exterior_point(rng, RADIUS)
            pairs.append((tau_det(fr, GroupElement.q(z1) * GroupElement.q(z2)).value, tau_q2(fr, z1, z2).value))
            worst = max(worst, max(abs(d - c) / abs(d) for d, c in pairs))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-8 and elapsed <= 60
    acceptance_record(1, "closed-form vs determinant tau", ok,
                      f"max rel diff {worst:.2e} (tol 1e-8), {elapsed:.1f} s (limit 60 s)")
    assert ok


def test_02_cocycle(dom, acceptance_record):
    rng = np.random.default_rng(102)
    frames = [base_symbol(random_q(rng), dom) for _ in range(5)]
    worst = 0.0
    for i in range(50):
        fr = frames[i % 5]
        g1 = winding_free_element(rng, RADIUS, count=int(rng.integers(1, 3)))
        g2 = random_real_element(rng, RADIUS, poles=2, exp_terms=0) * GroupElement.zpow(int(rng.integers(-2, 3)))
        lhs = tau_det(fr, g1 * g2).value
        rhs = tau_det(fr, g1).value * tau_det(SymbolFrame(fr.symbol.times(g1)), g2).value
        worst = max(worst, abs(lhs - rhs) / abs(lhs))
    ok = worst <= 1e-7
    acceptance_record(2, "cocycle", ok, f"max rel diff {worst:.2e} over 50 pairs (tol 1e-7)")
    assert ok


def test_03_multiplicativity(dom, acceptance_record):
    rng = np.random.default_rng(103)
    worst = 0.0
    for _ in range(20):
        m, _ = msymbol_from_m(m_from_q(random_q(rng)), dom)
        n, _ = msymbol_from_m(m_from_q(random_q(rng)), dom)
        diff = build_T(mgroup_product(m, n)).entries - build_T(m).entries @ build_T(n).entries
        worst = max(worst, np.linalg.norm(diff, 2))
    ok = worst <= 1e-8
    acceptance_record(3, "T(m n) = T(m) T(n)", ok, f"max operator-norm diff {worst:.2e} (tol 1e-8)")
    assert ok


def test_04_fixed_point(dom, acceptance_record):
    rng = np.random.default_rng(104)
    free = JacobiCoefficients.free()
    engine = FlowEngine(free, dom)
    worst = 0.0
    for i in range(10):
        t = rng.uniform(0, 1)
        g = GroupElement.exp({1: -2 * t}, real=True)
        if i >= 3:
            g = g * random_real_element(rng, RADIUS)
        out = toda_apply(free, g, WINDOW, engine=engine)
        worst = max(worst, out.max_abs_diff(free, *WINDOW))
    ok = worst <= 1e-9
    acceptance_record(4, "free lattice fixed point", ok, f"max coefficient error {worst:.2e} (tol 1e-9)")
    assert ok


def test_05_round_trip(dom, acceptance_record):
    rng = np.random.default_rng(105)
    worst = 0.0
    for _ in range(20):
        q = random_q(rng, sites=int(rng.integers(1, 6)))
        out = FlowEngine(q, dom).apply(None, WINDOW)
        worst = max(worst, out.max_abs_diff(q, *WINDOW))
    ok = worst <= 1e-7
    acceptance_record(5, "round trip q -> m -> symbol -> q", ok, f"max recovery error {worst:.2e} (tol 1e-7)")
    assert ok


def test_06_flow_vs_oracle(dom, acceptance_record):
    start = time.perf_counter()
    cases = {"one-site": JacobiCoefficients.from_dict(b={0: 0.3}),
             "three-site": JacobiCoefficients.from_dict(a={0: 1.2, 1: 0.9}, b={0: 0.3, -1: -0.2})}
    n = np.arange(WINDOW[0], WINDOW[1] + 1)
    worst, where = 0.0, None
    for name, q in cases.items():
        engine = FlowEngine(q, dom)
        for t, ref in zip(TIMES, oracle_trajectory(q, TIMES, L=200)):
            flow = toda_apply(q, hierarchy_element(t, LINEAR), WINDOW, engine=engine)
            oracle = ref.to_jacobi(WINDOW)
            gap = float(np.max(np.abs(flow.a_at(n) - oracle.a_at(n)) + np.abs(flow.b_at(n) - oracle.b_at(n))))
            if gap >= worst:
                worst, where = gap, (name, t)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-6 and elapsed <= 300
    acceptance_record(6, "flow vs oracle", ok,
                      f"max |da|+|db| {worst:.2e} at {where} (tol 1e-6), {elapsed:.1f} s (limit 300 s)")
    assert ok


def test_07_group_property(dom, acceptance_record):
    rng = np.random.default_rng(107)
    q = random_q(rng)
    engine = FlowEngine(q, dom)
    worst = 0.0
    for _ in range(10):
        t1, t2 = rng.uniform(0, 0.5, size=2)
        direct = toda_apply(q, hierarchy_element(t1 + t2, LINEAR), WINDOW, engine=engine)
        middle = toda_apply(q, hierarchy_element(t1, LINEAR), (-20, 20), engine=engine)
        composed = toda_apply(middle, hierarchy_element(t2, LINEAR), WINDOW, domain=dom)
        worst = max(worst, direct.max_abs_diff(composed, *WINDOW))
    ok = worst <= 1e-7
    acceptance_record(7, "group property", ok, f"max sup-norm diff {worst:.2e} (tol 1e-7)")
    assert ok


def test_08_positivity_cone(dom, acceptance_record):
    rng = np.random.default_rng(108)
    bad, lowest, imag = 0, np.inf, 0.0
    for _ in range(10):
        fr = base_symbol(random_q(rng), dom)
        for _ in range(100):
            g = random_real_element(rng, RADIUS, poles=int(rng.integers(0, 4)), exp_terms=int(rng.integers(1, 3)))
            g = g * GroupElement.zpow(int(rng.integers(-2, 3)))
            v = tau_det(fr, g).value
            imag = max(imag, abs(v.imag) / abs(v))
            lowest = min(lowest, v.real)
            bad += not v.real > 0
    ok = bad == 0
    acceptance_record(8, "positivity cone", ok,
                      f"{bad} non-positive of 1000, min tau {lowest:.3e}, max |Im|/|tau| {imag:.1e}")
    assert ok


def test_09_spectrum(dom, acceptance_record):
    rng = np.random.default_rng(109)
    extreme = 0.0
    qs = [JacobiCoefficients.from_dict(b={0: 0.3}), JacobiCoefficients.from_dict(a={0: 1.2, 1: 0.9}, b={0: 0.3, -1: -0.2})]
    qs += [random_q(rng) for _ in range(3)]
    for q in qs:
        engine = FlowEngine(q, dom)
        for g in [hierarchy_element(0.25, LINEAR), hierarchy_element(0.5, LINEAR), random_real_element(rng, RADIUS)]:
            out = toda_apply(q, g, WINDOW, engine=engine, check=False)
            lo, hi = check_spectrum(out, LAMBDA0)
            extreme = max(extreme, -lo, hi)
    drift = max(oracle_drift(q, TIMES, L=200) for q in qs[:2])
    ok = extreme <= LAMBDA0 + 0.01 and drift <= 1e-4
    acceptance_record(9, "spectrum preservation", ok,
                      f"max |lambda| {extreme:.4f} (bound {LAMBDA0 + 0.01}), isospectral drift {drift:.1e} (tol 1e-4)")
    assert ok


def test_10_herglotz(dom, acceptance_record):
    rng = np.random.default_rng(110)
    ell = dom.ell
    counts = {}
    q = random_q(rng)
    m = m_from_q(q, LAMBDA0)
    # m of a moved symbol g m, read from the symbol on the exterior of the annulus
    fr = base_symbol(q, dom)
    moved = SymbolMFunction(fr, random_real_element(rng, RADIUS) * hierarchy_element(0.3, LINEAR))
    counts["Im m_ga (exterior)"] = int(np.sum(~(moved(exterior_upper_points(rng, 500, RADIUS)).imag > 0)))
    counts["Im m (C+ off curve)"] = int(np.sum(~(m(upper_points(rng, 500, ell)).imag > 0)))
    bad_x = bad_zz = 0
    for _ in range(25):
        x = float(rng.choice([-1, 1]) * (rng.uniform(1.05 * ell, 8) if rng.random() < 0.5 else rng.uniform(0.05, 0.95 / ell)))
        bad_x += int(np.sum(~(herglotz_transform(m, x)(upper_points(rng, 20, ell)).imag > 0)))
        zeta = upper_points(rng, 1, ell, margin=0.05)[0]
        dd = herglotz_transform(herglotz_transform(m, zeta), np.conj(zeta))
        bad_zz += int(np.sum(~(dd(upper_points(rng, 20, ell)).imag > 0)))
    counts["Im d_x m"] = bad_x
    counts["Im d_zetabar d_zeta m"] = bad_zz
    ok = sum(counts.values()) == 0
    acceptance_record(10, "Herglotz positivity", ok,
                      ", ".join(f"{k}: {v}/500 violations" for k, v in counts.items()))
    assert ok


def test_11_contour_independence(dom, acceptance_record):
    rng = np.random.default_rng(111)
    wide = build_domain(LAMBDA0, 3.5, 256, 64)
    worst = 0.0
    for _ in range(3):
        q = random_q(rng)
        narrow_engine, wide_engine = FlowEngine(q, dom), FlowEngine(q, wide)
        for g in [None, hierarchy_element(0.3, LINEAR),
                  GroupElement.r(6 * np.exp(1j * rng.uniform(0, np.pi))) * GroupElement.q(0.1) * hierarchy_element(0.2, LINEAR)]:
            a = narrow_engine.apply(g, WINDOW)
            b = wide_engine.apply(g, WINDOW)
            worst = max(worst, a.max_abs_diff(b, *WINDOW))
    ok = worst <= 1e-7
    acceptance_record(11, "independence of contour", ok, f"max R=3.0 vs R=3.5 diff {worst:.2e} (tol 1e-7)")
    assert ok


def power_approximant(c: float, k: int, n: int) -> GroupElement:
    """``(1 - c z**k / n)**(-n)`` for ``k = +1`` or ``-1``."""
    if k == 1:
        return GroupElement(poles=(n / c,) * n, const=(-n / c) ** n, real=True)
    return GroupElement(zeros=(0.0,) * n, poles=(c / n,) * n, real=True)


def test_12_continuity(dom, acceptance_record):
    rng = np.random.default_rng(112)
    fr = base_symbol(random_q(rng), dom)
    ns = [8, 16, 32, 64]
    details, ok = [], True
    for c, k, required in [(0.02, 1, True), (0.02, -1, True), (0.3, 1, False)]:
        target = tau_det(fr, GroupElement.exp({k: c}, real=True)).value
        errs = [abs(tau_det(fr, power_approximant(c, k, n)).value - target) for n in ns]
        mono = all(b < a for a, b in zip(errs, errs[1:]))
        ratio = errs[-2] / errs[-1]
        if required:
            ok &= mono and errs[-1] <= 1e-6
        else:
            ok &= mono
        details.append(f"h={c}z^{k}: gap {errs[-1]:.2e}, monotone {mono}, last ratio {ratio:.2f}")
    acceptance_record(12, "continuity (1-h/n)^-n -> e^h", ok, "; ".join(details))
    assert ok


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-m", "acceptance", "-q"]))
