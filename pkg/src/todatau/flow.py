"""The flow map ``Toda(g)``: coefficients of ``g m`` from tau ratios.

For a symbol ``a`` and a group element ``g`` the shift factors

    d_k    = 1 + phi^{(0)}_{z^k g a}(0)
    beta_k = lim z phi^{(0)}_{z^k g a}(z)        (z -> oo)

give ``a_n = sqrt(d_{n-1} / d_n)`` and ``b_n = beta_n - beta_{n-1}``.  Each
``d_k`` is a ratio ``tau(z^{k-1}) / tau(z^k)``, so positivity of every
``d_k`` is positivity of the whole chain ``tau(z^n)``.

Time convention: ``hierarchy_element(t, p_hat) = exp(+2 t p_hat)``.  With
this sign the coefficients solve ``dH/dt = [p(H)_a, H]``, which for
``p(x) = x`` is ``a' = a_n (b_n - b_{n-1})``, ``b' = 2 (a_{n+1}^2 - a_n^2)``.
``exp(s z)`` alone advances that system by ``s / 2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

from .contour import AnnulusDomain, build_domain
from .errors import NonPositiveTau, NumericalError, SpectrumViolation
from .jacobi import JacobiCoefficients, m_from_q, spectrum_bounds
from .symbol import GroupElement, VectorSymbol, msymbol_from_m
from .tau import shift_factors
from .toeplitz import SymbolFrame

SPECTRUM_SLACK = 0.01
# d_k is real in exact arithmetic; its imaginary part measures rounding,
# which grows like R**(2|k|).  Only a clearly complex value is rejected.
IMAG_TOL = 1e-3


def p_hat(p) -> dict:
    """Non-negative part of ``p(z + 1/z)`` as ``{power: coefficient}``.

    ``p`` lists polynomial coefficients in increasing degree.
    """
    out: dict[int, float] = {}
    for k, c in enumerate(p):
        if c == 0:
            continue
        # (z + 1/z)**k = sum_i C(k, i) z**(k - 2i)
        for i in range(k + 1):
            j = k - 2 * i
            if j >= 0:
                out[j] = out.get(j, 0.0) + float(c) * comb(k, i)
    return {j: v for j, v in sorted(out.items()) if v != 0}


def laurent_of_p(p) -> dict:
    """Full Laurent expansion of ``p(z + 1/z)``."""
    out: dict[int, float] = {}
    for k, c in enumerate(p):
        for i in range(k + 1):
            j = k - 2 * i
            out[j] = out.get(j, 0.0) + float(c) * comb(k, i)
    return {j: v for j, v in out.items() if v != 0}


def hierarchy_element(t: float, ph: dict) -> GroupElement:
    """``exp(2 t p_hat)``: the flow generator for hierarchy time ``t``."""
    return GroupElement.exp({k: 2.0 * t * v for k, v in ph.items() if k != 0}, real=True)


@dataclass
class FlowSpec:
    p: list
    times: list
    window: tuple[int, int] = (-8, 8)
    p_hat: dict = field(init=False)

    def __post_init__(self):
        self.p = [float(c) for c in self.p]
        if not self.p or not any(self.p):
            raise ValueError("flow generator polynomial is empty")
        self.p_hat = p_hat(self.p)
        full = laurent_of_p(self.p)
        # p(z + 1/z) = p_hat(z) + p_hat(1/z) - p_hat(0)
        rebuilt: dict[int, float] = {}
        for j, v in self.p_hat.items():
            rebuilt[j] = rebuilt.get(j, 0.0) + v
            rebuilt[-j] = rebuilt.get(-j, 0.0) + v
        if 0 in self.p_hat:
            rebuilt[0] -= self.p_hat[0]
        keys = set(full) | set(rebuilt)
        if any(abs(full.get(k, 0.0) - rebuilt.get(k, 0.0)) > 1e-12 for k in keys):
            raise ValueError("polynomial part does not reproduce p(z + 1/z)")
        lo, hi = self.window
        if lo > hi:
            raise ValueError("empty window")

    def element(self, t: float) -> GroupElement:
        return hierarchy_element(t, self.p_hat)


@dataclass
class FlowDiagnostics:
    """Condition numbers, shift factors and the ``tau(z^n)`` chain of one evaluation.

    ``tau_zpow`` is keyed by ``(center, n)``: each block of the window is
    computed from the symbol of ``q`` shifted by ``center``, so the chain is
    normalized per block.
    """

    conditions: list = field(default_factory=list)
    shift_factors: dict = field(default_factory=dict)
    tau_zpow: dict = field(default_factory=dict)
    imag_defect: float = 0.0

    @property
    def max_condition(self) -> float:
        return float(max(self.conditions)) if self.conditions else float("nan")

    @property
    def min_tau(self) -> float:
        return float(min(self.tau_zpow.values())) if self.tau_zpow else float("nan")

    def to_json(self) -> dict:
        return {"max_condition": self.max_condition, "min_tau_zpow": self.min_tau,
                "imag_defect": self.imag_defect,
                "tau_zpow": {f"{c}:{n}": v for (c, n), v in sorted(self.tau_zpow.items())}}


def _positive(value: complex, k: int, tol: float = IMAG_TOL) -> float:
    v = complex(value)
    if not v.real > 0 or abs(v.imag) > tol * max(abs(v), 1.0):
        raise NonPositiveTau(f"shift factor d_{k} = {v:.6g} is not positive", k)
    return v.real


def _tau_chain(d: dict) -> dict:
    """``tau(z^n)`` from the shift factors available in ``d``."""
    out = {0: 1.0}
    val, k = 1.0, 1
    while k in d:
        val /= d[k]
        out[k] = val
        k += 1
    val, k = 1.0, 0
    while k in d:
        val *= d[k]
        out[k - 1] = val
        k -= 1
    return out


def coefficients_from_symbol(a: VectorSymbol | SymbolFrame, window: tuple[int, int],
                             g: GroupElement | None = None, a_tail: float = 1.0, b_tail: float = 0.0,
                             diagnostics: FlowDiagnostics | None = None, center: int = 0) -> JacobiCoefficients:
    """Jacobi coefficients of the symbol ``g a`` on ``window`` (inclusive).

    Accuracy degrades like ``eps * R**(2|n|)`` away from site 0; see
    :class:`FlowEngine` for windows wider than a few sites.
    """
    frame = a if isinstance(a, SymbolFrame) else SymbolFrame(a)
    lo, hi = window
    N = frame.domain.N
    if min(lo - 1, 0) < -N or max(hi, 1) > N:
        raise ValueError(f"window {window} needs powers of z beyond the truncation order {N}")
    diag = diagnostics if diagnostics is not None else FlowDiagnostics()
    raw_d, beta = shift_factors(frame, min(lo - 1, 0), max(hi, 1), g)
    d = {k: _positive(v, k) for k, v in raw_d.items()}
    diag.conditions.append(frame.condition if g is None else frame.transport(g).condition)
    diag.imag_defect = max(diag.imag_defect, max(abs(v.imag) / abs(v) for v in raw_d.values()))
    diag.shift_factors.update({(center, k): v for k, v in d.items()})
    diag.tau_zpow.update({(center, k): v for k, v in _tau_chain(d).items()})
    n = np.arange(lo, hi + 1)
    a_n = np.array([np.sqrt(d[k - 1] / d[k]) for k in n])
    b_n = np.array([(beta[k] - beta[k - 1]).real for k in n])
    return JacobiCoefficients(lo, hi, a_n, b_n, a_tail, b_tail)


def base_symbol(q: JacobiCoefficients, domain: AnnulusDomain | None = None) -> SymbolFrame:
    """Factored symbol ``m`` of ``q`` built through its m-function."""
    domain = build_domain() if domain is None else domain
    m = m_from_q(q, domain.lambda0)
    sym, _ = msymbol_from_m(m, domain)
    return SymbolFrame(sym)


def check_spectrum(q: JacobiCoefficients, lambda0: float, slack: float = SPECTRUM_SLACK, size: int = 400):
    lo, hi = spectrum_bounds(q, size=max(size, 4 * (q.n_max - q.n_min + 1)))
    if lo < -lambda0 - slack or hi > lambda0 + slack:
        raise SpectrumViolation(f"spectrum [{lo:.6f}, {hi:.6f}] leaves [-{lambda0}, {lambda0}]")
    return lo, hi


BLOCK_RADIUS = 2


class FlowEngine:
    """Applies ``Toda(g)`` to one initial datum, block by block.

    Information about site ``n`` enters the symbol on ``|z| = R`` at relative
    size ``R**(-2|n|)``, so extraction far from site 0 loses digits.  The
    flow commutes with lattice shifts, so the block around site ``c`` is
    read off the symbol of ``q`` shifted by ``c``.  Frames are cached per
    block center.
    """

    def __init__(self, q: JacobiCoefficients, domain: AnnulusDomain | None = None,
                 block_radius: int = BLOCK_RADIUS):
        self.q = q
        self.domain = build_domain() if domain is None else domain
        self.block_radius = int(block_radius)
        self._frames: dict[int, SymbolFrame] = {}

    def frame(self, center: int = 0) -> SymbolFrame:
        if center not in self._frames:
            self._frames[center] = base_symbol(self.q.shifted(center), self.domain)
        return self._frames[center]

    def blocks(self, window: tuple[int, int]):
        lo, hi = window
        width = 2 * self.block_radius + 1
        start = lo
        while start <= hi:
            stop = min(start + width - 1, hi)
            center = (start + stop) // 2
            yield center, start, stop
            start = stop + 1

    def apply(self, g: GroupElement | None, window: tuple[int, int] = (-8, 8),
              diagnostics: FlowDiagnostics | None = None) -> JacobiCoefficients:
        diag = diagnostics if diagnostics is not None else FlowDiagnostics()
        a_parts, b_parts = [], []
        for c, start, stop in self.blocks(window):
            part = coefficients_from_symbol(self.frame(c), (start - c, stop - c), g,
                                            self.q.a_tail, self.q.b_tail, diag, center=c)
            a_parts.append(part.a)
            b_parts.append(part.b)
        return JacobiCoefficients(window[0], window[1], np.concatenate(a_parts), np.concatenate(b_parts),
                                  self.q.a_tail, self.q.b_tail)


def toda_apply(q: JacobiCoefficients, g: GroupElement, window: tuple[int, int] = (-8, 8),
               domain: AnnulusDomain | None = None, frame: SymbolFrame | None = None,
               diagnostics: FlowDiagnostics | None = None, check: bool = True,
               engine: FlowEngine | None = None) -> JacobiCoefficients:
    """``Toda(g) q``: coefficients of ``g m`` where ``m`` is the symbol of ``q``.

    With an explicit ``frame`` the whole window is read from that single
    symbol; otherwise a :class:`FlowEngine` splits it into blocks.
    """
    if not g.is_conjugation_symmetric():
        raise ValueError("group element is not real")
    if frame is not None:
        out = coefficients_from_symbol(frame, window, g, q.a_tail, q.b_tail, diagnostics)
        lam0 = frame.domain.lambda0
    else:
        engine = FlowEngine(q, domain) if engine is None else engine
        out = engine.apply(g, window, diagnostics)
        lam0 = engine.domain.lambda0
    if check:
        check_spectrum(out, lam0)
    return out


def toda_exp_tz(q: JacobiCoefficients, s: float, window: tuple[int, int] = (-8, 8), **kw) -> JacobiCoefficients:
    """``Toda(exp(s z)) q``, the same as hierarchy time ``s / 2`` for ``p(x) = x``."""
    return toda_apply(q, GroupElement.exp({1: s}, real=True), window, **kw)


@dataclass
class Trajectory:
    times: list
    states: list
    diagnostics: list

    def min_tau(self) -> float:
        return float(min(dg.min_tau for dg in self.diagnostics))

    def rows(self):
        for t, q in zip(self.times, self.states):
            for n in q.sites:
                yield t, int(n), float(q.a_at(n)), float(q.b_at(n))


def toda_trajectory(q: JacobiCoefficients, spec: FlowSpec, domain: AnnulusDomain | None = None,
                    engine: FlowEngine | None = None) -> Trajectory:
    """Every time is computed from the same base symbols; nothing is stepped."""
    engine = FlowEngine(q, domain) if engine is None else engine
    states, diags = [], []
    for t in spec.times:
        dg = FlowDiagnostics()
        try:
            states.append(toda_apply(q, spec.element(t), spec.window, diagnostics=dg, engine=engine))
        except NumericalError as exc:
            exc.args = (f"t={t}: {exc.args[0] if exc.args else exc}",) + exc.args[1:]
            raise
        diags.append(dg)
    return Trajectory(list(spec.times), states, diags)
