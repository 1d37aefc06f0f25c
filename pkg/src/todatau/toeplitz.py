"""Truncated Toeplitz, Hankel-type and projection operators.

All matrices act on balanced Laurent coefficients (see :mod:`hardy`).

``SymbolFrame`` factors ``T(a)`` once and stores the node values of
``a T(a)^{-1} e_j`` for every basis vector.  These columns span the
subspace ``W_a = a H_+`` and their H- parts are the functions ``phi^{(j)}``.

For a group element ``g`` the symbol ``g a`` is never factored directly.
Its subspace is ``g W_a`` and the element with H+ part ``f`` is
``g a T(a)^{-1} x`` where ``(I + A_g) x = f / g`` and
``A_g = g^{-1} H_g S_a T(a)^{-1}``, the same operator whose determinant is
the tau function.  This keeps every solve on the well-conditioned base
symbol even when ``g`` winds around a circle (e.g. ``g = z**n``), where
finite sections of ``T(g a)`` are singular.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg as sla

from .contour import AnnulusDomain
from .errors import NotInvertible, PoleHit
from .hardy import (GridFunction, LaurentVector, analysis_matrix, at_infinity, balance_scale,
                    cauchy_minus, plus_projector, synthesis_matrix)
from .symbol import GroupElement, VectorSymbol

COND_MAX = 1e12


@dataclass(eq=False)
class OperatorMatrix:
    """Dense operator in the balanced basis.

    ``role`` is one of ``T``, ``S``, ``H``, ``composite``.  ``S`` maps
    coefficients to node values; ``H`` maps node values to coefficients.
    """

    entries: np.ndarray
    role: str
    domain: AnnulusDomain
    condition: float = float("nan")
    _lu: tuple | None = field(default=None, repr=False)

    def raw(self) -> np.ndarray:
        """Matrix with respect to the raw monomials ``z**n``."""
        s = balance_scale(self.domain.R, self.domain.N)
        E = self.entries
        if self.role == "S":
            return E * s[None, :]
        if self.role == "H":
            return E / s[:, None]
        return E * s[None, :] / s[:, None]

    def factor(self, cond_max: float = COND_MAX) -> "OperatorMatrix":
        if self._lu is None:
            self.condition = float(np.linalg.cond(self.entries))
            if not np.isfinite(self.condition) or self.condition > cond_max:
                raise NotInvertible(f"condition number {self.condition:.3e} exceeds {cond_max:.1e}")
            self._lu = sla.lu_factor(self.entries)
        return self

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        self.factor()
        return sla.lu_solve(self._lu, rhs)


def _symbol_columns(a: VectorSymbol) -> np.ndarray:
    """Node values of ``a e_j`` for every balanced basis vector."""
    return a.apply_values(synthesis_matrix(a.domain))


def build_T(a: VectorSymbol) -> OperatorMatrix:
    """Galerkin matrix of ``T(a) u = P+(a u)``."""
    dom = a.domain
    return OperatorMatrix(analysis_matrix(dom) @ _symbol_columns(a), "T", dom)


def build_S(a: VectorSymbol) -> OperatorMatrix:
    """Node values of the H- part of ``a e_j``."""
    cols = _symbol_columns(a)
    return OperatorMatrix(cols - plus_projector(a.domain) @ cols, "S", a.domain)


def difference_kernel(g: GroupElement, domain: AnnulusDomain) -> np.ndarray:
    """Node matrix of ``v -> g^{-1} P+(g P- v)``.

    Entry ``(k, j)`` is ``(g(l_j)/g(z_k) - 1) / (l_j - z_k)`` times the
    quadrature weight over ``2 pi i``; the diagonal holds the limit
    ``g'(z_k)/g(z_k)``.  Because the kernel is a divided difference it
    annihilates H+ data, so it already contains the projection onto H-.
    """
    g.check_admissible(domain)
    nodes = domain.grid.nodes
    n = len(nodes)
    ell = g.log_value(nodes)
    L = ell[None, :] - ell[:, None]
    # only exp(L) matters; the smallest branch keeps expm1 accurate near the diagonal
    L = L - 2j * np.pi * np.round(L.imag / (2 * np.pi))
    diff = nodes[None, :] - nodes[:, None]
    diff[np.diag_indices(n)] = 1.0
    K = np.expm1(L) / diff
    K[np.diag_indices(n)] = g.log_derivative(nodes)
    return K * (domain.grid.weights / (2j * np.pi))[None, :]


def build_H(g: GroupElement, domain: AnnulusDomain) -> OperatorMatrix:
    """``H_g v = P+(g v)`` from node values of ``v`` in H- to coefficients."""
    K = difference_kernel(g, domain)
    gv = g(domain.grid.nodes)
    return OperatorMatrix(analysis_matrix(domain) @ (gv[:, None] * K), "H", domain)


def multiplication_matrix(g: GroupElement, domain: AnnulusDomain) -> OperatorMatrix:
    """Truncated matrix of multiplication by ``g`` on H+."""
    gv = g(domain.grid.nodes)
    return OperatorMatrix(analysis_matrix(domain) @ (gv[:, None] * synthesis_matrix(domain)), "composite", domain)


def solve_T(T: OperatorMatrix, rhs: LaurentVector) -> LaurentVector:
    """Solve ``T u = rhs`` (raw coefficients in and out)."""
    R = T.domain.R
    u = T.solve(rhs.scaled(R))
    res = np.linalg.norm(T.entries @ u - rhs.scaled(R))
    if res > 1e-9 * max(np.linalg.norm(rhs.scaled(R)), 1e-300):
        raise NotInvertible(f"residual {res:.2e} after LU solve")
    return LaurentVector.from_scaled(u, R, T.domain.N)


# ---------------------------------------------------------------- phi functions

@dataclass(eq=False)
class PhiFunction:
    """The H- part ``phi`` of an element ``w = f + phi`` of a subspace ``W``.

    ``values`` are node values of any function whose H- part is ``phi``
    (``w`` itself, or ``phi`` alone).  Cauchy evaluation and the limit at
    infinity both ignore H+ components.
    """

    values: np.ndarray
    domain: AnnulusDomain

    def __call__(self, zeta):
        out = cauchy_minus(self.values, self.domain, zeta)
        return complex(out[0]) if np.ndim(zeta) == 0 else out

    def derivative(self, zeta):
        out = cauchy_minus(self.values, self.domain, zeta, derivative=1)
        return complex(out[0]) if np.ndim(zeta) == 0 else out

    def at_infinity(self) -> complex:
        """``lim z phi(z)`` as ``z -> oo`` (coefficient of ``1/z`` on the outer circle)."""
        return complex(at_infinity(self.values, self.domain))

    def grid_function(self) -> GridFunction:
        v = self.values - plus_projector(self.domain) @ self.values
        return GridFunction(v, self.domain)


class SymbolFrame:
    """Factored Toeplitz data of one base symbol."""

    def __init__(self, a: VectorSymbol, cond_max: float = COND_MAX):
        self.symbol = a
        self.domain = a.domain
        dom = self.domain
        cols = _symbol_columns(a)
        self.T = OperatorMatrix(analysis_matrix(dom) @ cols, "T", dom).factor(cond_max)
        self.size = self.T.entries.shape[0]
        # node values of a T^{-1} e_j
        self.columns = cols @ self.T.solve(np.eye(self.size))
        # their H- parts, i.e. S_a T^{-1} e_j; carrying only these avoids
        # cancelling against the H+ part e_j, which is large on one circle
        self.phi_columns = self.columns - plus_projector(dom) @ self.columns
        self._scale = balance_scale(dom.R, dom.N)
        self._ana = analysis_matrix(dom)

    @property
    def condition(self) -> float:
        return self.T.condition

    def index(self, n: int) -> int:
        N = self.domain.N
        if not -N - 1 <= n <= N:
            raise ValueError(f"mode {n} outside the truncation window")
        return n + N + 1

    def phi(self, n: int) -> PhiFunction:
        """``phi^{(n)}`` for the base symbol."""
        return PhiFunction(self.phi_columns[:, self.index(n)] * self._scale[self.index(n)], self.domain)

    def element(self, n: int) -> np.ndarray:
        """Node values of the full element ``z**n + phi^{(n)}``."""
        return self.columns[:, self.index(n)] * self._scale[self.index(n)]

    def tau_matrix(self, g: GroupElement) -> np.ndarray:
        """Balanced matrix of ``A_g = g^{-1} H_g S_a T(a)^{-1}``."""
        K = difference_kernel(g, self.domain)
        return self._ana @ (K @ self.phi_columns)

    def transport(self, g: GroupElement) -> "TransportedFrame":
        return TransportedFrame(self, g)


class TransportedFrame:
    """Quantities of the symbol ``g a`` expressed through the base frame."""

    def __init__(self, frame: SymbolFrame, g: GroupElement):
        self.frame = frame
        self.g = g
        dom = frame.domain
        self.matrix = np.eye(frame.size) + frame.tau_matrix(g)
        self.condition = float(np.linalg.cond(self.matrix))
        if not np.isfinite(self.condition) or self.condition > COND_MAX:
            raise NotInvertible(f"I + A_g has condition {self.condition:.3e}")
        self._lu = sla.lu_factor(self.matrix)
        self._g_nodes = g(dom.grid.nodes)

    @cached_property
    def determinant(self) -> complex:
        return full_pivot_det(self.matrix)

    def solve(self, rhs_nodes: np.ndarray) -> np.ndarray:
        """Coefficients ``x`` of the element of ``W_{g a}`` whose H+ part is ``rhs_nodes``.

        ``rhs_nodes`` may hold one function per column.
        """
        G = self._g_nodes if rhs_nodes.ndim == 1 else self._g_nodes[:, None]
        return sla.lu_solve(self._lu, self.frame._ana @ (rhs_nodes / G))

    def element(self, rhs_nodes: np.ndarray) -> PhiFunction:
        """H- part of the element of ``W_{g a}`` whose H+ part is ``rhs_nodes``.

        The element is ``g a T^{-1} x``; since ``g`` is in H+, its H- part is
        that of ``g S_a T^{-1} x``.
        """
        x = self.solve(rhs_nodes)
        return PhiFunction(self._g_nodes * (self.frame.phi_columns @ x), self.frame.domain)

    def phi_block(self, powers) -> np.ndarray:
        """Node values of ``phi^{(n)}_{g a}`` (H- parts only) for each ``n`` in ``powers``."""
        dom = self.frame.domain
        powers = np.asarray(list(powers))
        x = self.solve(dom.grid.nodes[:, None] ** powers[None, :])
        V = self._g_nodes[:, None] * (self.frame.phi_columns @ x)
        return V - plus_projector(dom) @ V

    def phi(self, n: int) -> PhiFunction:
        """``phi^{(n)}`` for the symbol ``g a``."""
        nodes = self.frame.domain.grid.nodes
        return self.element(nodes**n)


def full_pivot_det(A: np.ndarray) -> complex:
    """Determinant from an LU factorization with complete pivoting (LAPACK getc2).

    The scipy wrapper returns 0-based pivot indices.
    """
    A = np.array(A, dtype=complex, order="F")
    lu, ipiv, jpiv, info = sla.lapack.zgetc2(A)
    sign = 1.0
    for i, p in enumerate(ipiv):
        if p != i:
            sign = -sign
    for i, p in enumerate(jpiv):
        if p != i:
            sign = -sign
    return complex(sign * np.prod(np.diag(lu)))


def phi_n(a: VectorSymbol | SymbolFrame, n: int) -> PhiFunction:
    frame = a if isinstance(a, SymbolFrame) else SymbolFrame(a)
    return frame.phi(n)
