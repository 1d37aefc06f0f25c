import numpy as np
import pytest

from todatau import GroupElement, JacobiCoefficients, build_domain
from todatau.flow import FlowEngine, base_symbol


@pytest.fixture(scope="session")
def domain():
    return build_domain(2.5, 3.0, 256, 64)


@pytest.fixture(scope="session")
def one_site():
    return JacobiCoefficients.from_dict(b={0: 0.3})


@pytest.fixture(scope="session")
def three_site():
    return JacobiCoefficients.from_dict(a={0: 1.2, 1: 0.9}, b={0: 0.3, -1: -0.2})


@pytest.fixture(scope="session")
def frame_three(three_site, domain):
    return base_symbol(three_site, domain)


@pytest.fixture(scope="session")
def frame_one(one_site, domain):
    return base_symbol(one_site, domain)


@pytest.fixture(scope="session")
def engine_one(one_site, domain):
    return FlowEngine(one_site, domain)


def random_q(rng, sites=3, lambda0=2.5):
    """Eventually free q with a in [0.5, 2], b in [-0.5, 0.5] and spectrum inside [-lambda0, lambda0]."""
    from todatau.jacobi import spectrum_bounds

    while True:
        lo = -(sites // 2)
        a = {n: rng.uniform(0.5, 2.0) for n in range(lo, lo + sites)}
        b = {n: rng.uniform(-0.5, 0.5) for n in range(lo, lo + sites)}
        q = JacobiCoefficients.from_dict(a, b)
        lo_ev, hi_ev = spectrum_bounds(q)
        if -lambda0 < lo_ev and hi_ev < lambda0:
            return q


def random_exterior_point(rng, R, real=False):
    """Point of D- well away from the contour, outside or inside."""
    r = rng.uniform(1.3 * R, 4 * R)
    if rng.random() < 0.5:
        r = 1.0 / r
    if real:
        return float(r * rng.choice([-1.0, 1.0]))
    return complex(r * np.exp(1j * rng.uniform(0, 2 * np.pi)))


def random_real_element(rng, R, poles=2, exp_terms=2, scale=0.3):
    """Conjugation-symmetric rational times exp of a real Laurent polynomial."""
    g = GroupElement.identity()
    for _ in range(poles):
        if rng.random() < 0.5:
            g = g * GroupElement.q(random_exterior_point(rng, R, real=True))
        else:
            g = g * GroupElement.r(random_exterior_point(rng, R))
    h = {}
    for _ in range(exp_terms):
        k = int(rng.choice([-2, -1, 1, 2]))
        h[k] = h.get(k, 0.0) + rng.uniform(-scale, scale)
    return g * GroupElement.exp(h, real=True)


_RESULTS = pytest.StashKey[list]()


@pytest.fixture
def acceptance_record(request):
    """Record one acceptance verdict; the lines are printed in the terminal summary."""
    store = request.config.stash.setdefault(_RESULTS, [])

    def record(number: int, title: str, passed: bool, detail: str):
        line = f"{'PASS' if passed else 'FAIL'} criterion {number:2d} {title}: {detail}"
        store.append((number, line))
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(_RESULTS, [])
    if results:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(results):
            terminalreporter.write_line(line)
