"""Tau functions, closed forms for rational group elements, and m-functions of symbols.

``tau_a(g) = det(I + g^{-1} H_g S_a T(a)^{-1})``.  For ``g = q_zeta`` and
products of two such factors the operator has rank one or two and the
determinant reduces to values of ``phi^{(0)}`` and ``phi^{(1)}``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DivByZero, NonPositiveTau
from .symbol import GroupElement, VectorSymbol, symbol_tilde
from .toeplitz import SymbolFrame, TransportedFrame

CONFLUENT_GAP = 1e-6


@dataclass
class TauValue:
    value: complex
    method: str
    condition: float = float("nan")

    @property
    def real(self) -> float:
        return float(np.real(self.value))

    def to_json(self, g: GroupElement | None = None) -> dict:
        out = {"value_re": float(np.real(self.value)), "value_im": float(np.imag(self.value)),
               "method": self.method, "condition": float(self.condition)}
        if g is not None:
            out["g"] = g.to_json()
        return out


def as_frame(a) -> SymbolFrame:
    return a if isinstance(a, SymbolFrame) else SymbolFrame(a)


def tau_det(a, g: GroupElement) -> TauValue:
    """Determinant evaluation (complete-pivoting LU of ``I + A_g``)."""
    tr = as_frame(a).transport(g)
    return TauValue(tr.determinant, "determinant", tr.condition)


def tau_qzeta(a, zeta: complex) -> TauValue:
    """``tau_a(q_zeta) = 1 + phi^{(0)}(zeta)``; ``zeta = 0`` gives ``tau_a(1/z)``."""
    fr = as_frame(a)
    return TauValue(1.0 + fr.phi(0)(complex(zeta)), "closed_form", fr.condition)


def tau_q2(a, z1: complex, z2: complex) -> TauValue:
    """``tau_a(q_z1 q_z2) = (b1 a2 - a1 b2) / (z1 - z2)``.

    Here ``a_j = 1 + phi^{(0)}(z_j)`` and ``b_j = z_j + phi^{(1)}(z_j)``.
    Close points switch to the confluent limit ``a1 b1' - b1 a1'``.
    """
    fr = as_frame(a)
    p0, p1 = fr.phi(0), fr.phi(1)
    z1, z2 = complex(z1), complex(z2)
    A1, B1 = 1.0 + p0(z1), z1 + p1(z1)
    if abs(z1 - z2) < CONFLUENT_GAP:
        dA, dB = p0.derivative(z1), 1.0 + p1.derivative(z1)
        return TauValue(A1 * dB - B1 * dA, "closed_form", fr.condition)
    A2, B2 = 1.0 + p0(z2), z2 + p1(z2)
    return TauValue((B1 * A2 - A1 * B2) / (z1 - z2), "closed_form", fr.condition)


def tau_r(a, zeta: complex) -> TauValue:
    """``tau_a(r_zeta)`` with ``r_zeta = q_zeta q_conj(zeta)``."""
    zeta = complex(zeta)
    return tau_q2(a, zeta, zeta.conjugate())


def shift_factor(a, k: int, g: GroupElement | None = None) -> complex:
    """``d_k = 1 + phi^{(0)}_{z^k g a}(0)`` by a direct transport of ``z^k g``.

    Slower and less accurate than :func:`shift_factors`; kept as an
    independent route for cross-checks.
    """
    fr = as_frame(a)
    G = GroupElement.zpow(k) if g is None else GroupElement.zpow(k) * g
    return 1.0 + fr.transport(G).phi(0)(0.0)


def shift_factors(a, lo: int, hi: int, g: GroupElement | None = None) -> tuple[dict, dict]:
    """``d_k`` and ``beta_k = lim z phi^{(0)}_{z^k g a}(z)`` for ``lo <= k <= hi``.

    One transport by ``g``; the powers of ``z`` are then applied exactly.
    With ``w_n = z^n + phi_n`` normalized in ``W`` and ``c_n = lim z phi_n``,

        z W:       phi'_0 = (z phi_{-1} - c_{-1}) / (1 + c_{-1}),
                   phi'_{n+1} = z phi_n - c_n (1 + phi'_0)
        z^{-1} W:  chi_n = (phi_n - phi_n(0)) / z,
                   phi'_{-1} = chi_0 / (1 + phi_0(0)),
                   phi'_{n-1} = chi_n - phi_n(0) phi'_{-1}

    Only H- node values are carried.  The recursion needs ``phi_n`` for
    ``-K-1 <= n <= K`` with ``K = max(-lo, hi)``.
    """
    fr = as_frame(a)
    dom = fr.domain
    K = max(-lo, hi, 0) + 1
    if K > dom.N:
        raise ValueError(f"shifts up to {K} exceed the truncation order {dom.N}")
    powers = np.arange(-K - 1, K + 1)
    if g is None:
        idx = powers + dom.N + 1
        block = fr.phi_columns[:, idx] * fr._scale[idx]
    else:
        block = fr.transport(g).phi_block(powers)
    nodes = dom.grid.nodes
    weights = dom.grid.weights / (2j * np.pi)
    at0 = -weights / nodes  # Cauchy kernel at zeta = 0
    start = dict(zip(powers.tolist(), block.T))

    def record(k, phi0):
        d[k] = 1.0 + complex(at0 @ phi0)
        beta[k] = complex(weights @ phi0)

    d, beta = {}, {}
    if lo <= 0 <= hi:
        record(0, start[0])
    cur = start
    for k in range(1, hi + 1):
        c = {n: complex(weights @ v) for n, v in cur.items()}
        p0 = (nodes * cur[-1] - c[-1]) / (1.0 + c[-1])
        nxt = {n + 1: nodes * v - c[n] * (1.0 + p0) for n, v in cur.items() if n not in (-1, max(cur))}
        nxt[0] = p0
        cur = nxt
        if k >= lo:
            record(k, p0)
    cur = start
    for k in range(-1, lo - 1, -1):
        v0 = {n: complex(at0 @ v) for n, v in cur.items()}
        chi = {n: (v - v0[n]) / nodes for n, v in cur.items()}
        pm1 = chi[0] / (1.0 + v0[0])
        nxt = {n - 1: chi[n] - v0[n] * pm1 for n in cur if n not in (0, min(cur))}
        nxt[-1] = pm1
        cur = nxt
        if k <= hi:
            record(k, cur[0])
    return d, beta


def tau_zpow(a, n: int, g: GroupElement | None = None) -> TauValue:
    """``tau_{g a}(z**n)`` by chaining the cocycle through single shifts.

    ``tau(z**n) = prod_{k=1..n} 1/d_k`` for ``n > 0`` and
    ``prod_{k=0..|n|-1} d_{-k}`` for ``n < 0``.
    """
    fr = as_frame(a)
    if n == 0:
        return TauValue(1.0, "cocycle_chain", fr.condition)
    lo, hi = (1, n) if n > 0 else (n + 1, 0)
    d, _ = shift_factors(fr, lo, hi, g)
    val = 1.0 + 0j
    for k in range(lo, hi + 1):
        val = val / d[k] if n > 0 else val * d[k]
    return TauValue(val, "cocycle_chain", fr.condition)


def check_positive(value: complex, what: str, n=None, tol: float = 1e-9) -> float:
    v = complex(value)
    if not v.real > 0 or abs(v.imag) > max(tol * abs(v), 1e-14):
        raise NonPositiveTau(f"{what} = {v} is not positive", n)
    return v.real


# ---------------------------------------------------------------- m-functions of symbols

class SymbolMFunction:
    """``m_a`` and ``n_a`` for a base symbol, or for ``g a`` via transport."""

    def __init__(self, a, g: GroupElement | None = None):
        fr = as_frame(a)
        src = fr if g is None else fr.transport(g)
        self.frame = fr
        self.phi0, self.phi1, self.phim1 = src.phi(0), src.phi(1), src.phi(-1)
        self.constant = self.phi0.at_infinity()
        self._p0_at_0 = self.phi0(0.0)

    def denominators(self, z):
        return 1.0 + self.phi0(z)

    def __call__(self, z):
        den = self.denominators(z)
        if np.any(np.abs(den) < 1e-12):
            raise DivByZero("1 + phi^{(0)}(z) vanishes")
        return (z + self.phi1(z)) / den + self.constant

    def n(self, z):
        """``(1/z + phi^{(-1)}(z)) / (1 + phi^{(0)}(z))``."""
        den = self.denominators(z)
        if np.any(np.abs(den) < 1e-12):
            raise DivByZero("1 + phi^{(0)}(z) vanishes")
        return (1.0 / z + self.phim1(z)) / den

    def n_from_m(self, z):
        return (z + 1.0 / z - self(z)) / (1.0 + self._p0_at_0)

    def derivative_at_zero(self, h: float | None = None) -> complex:
        """Four-point central difference around ``0`` (radius ``1e-4/R``)."""
        h = 1e-4 / self.frame.domain.R if h is None else h
        return complex((self(h) - self(-h) - 1j * (self(1j * h) - self(-1j * h))) / (4 * h))


def mfun(a, z, g: GroupElement | None = None):
    return SymbolMFunction(a, g)(z)


def nfun(a, z, g: GroupElement | None = None):
    return SymbolMFunction(a, g).n(z)


def _joukowski(z):
    return z + 1.0 / z


def herglotz_update(a, zeta: complex, z, m: SymbolMFunction | None = None):
    """``m_{q_zeta a}(z)`` computed only from values of ``m_a``.

    ``(m(0) - m(zeta)) (1 - (J(z) - J(zeta)) / (m(z) - m(zeta))) + J(z)``
    with ``J(z) = z + 1/z``; at ``zeta = 0`` the limit
    ``m'(0) / (m(0) - m(z)) + J(z)`` is used.
    """
    m = SymbolMFunction(a) if m is None else m
    zeta = complex(zeta)
    m0 = m(0.0)
    mz = m(z)
    if zeta == 0:
        den = m0 - mz
        if np.any(np.abs(den) < 1e-12):
            raise DivByZero("m(z) = m(0)")
        return m.derivative_at_zero() / den + _joukowski(z)
    mzeta = m(zeta)
    den = mz - mzeta
    if np.any(np.abs(den) < 1e-12):
        raise DivByZero("m(z) = m(zeta)")
    return (m0 - mzeta) * (1.0 - (_joukowski(z) - _joukowski(zeta)) / den) + _joukowski(z)


def tau_symmetry_pair(a: VectorSymbol, g: GroupElement) -> tuple[TauValue, TauValue]:
    """``tau_a(g)`` and ``tau_{a~}(g~)``, which must agree."""
    return tau_det(a, g), tau_det(symbol_tilde(a), g.tilde())
