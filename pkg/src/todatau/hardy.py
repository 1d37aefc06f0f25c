"""Functions on the contour, Laurent coefficients and the Riesz projections.

Internally every Laurent expansion is stored in the balanced basis
``e_n(z) = z**n / R**abs(n)``.  On the circle where ``e_n`` is large it has
modulus one, so matrices built in this basis are well scaled even though the
raw monomials ``z**n`` span many orders of magnitude on ``C``.  Public
``LaurentVector`` objects carry the raw coefficients ``c_n`` of ``z**n``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
import warnings

import numpy as np

from .contour import AnnulusDomain
from .errors import DomainError, EvalTooClose, TruncationWarning


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Values of a function at the ``2M`` contour nodes (outer circle first)."""

    values: np.ndarray
    domain: AnnulusDomain

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (2 * self.domain.M,):
            raise ValueError(f"expected {2 * self.domain.M} node values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid function has non-finite values")
        object.__setattr__(self, "values", v)

    @property
    def grid(self):
        return self.domain.grid

    @property
    def values_outer(self) -> np.ndarray:
        return self.values[: self.domain.M]

    @property
    def values_inner(self) -> np.ndarray:
        return self.values[self.domain.M:]

    def __add__(self, other):
        return GridFunction(self.values + _vals(other), self.domain)

    def __sub__(self, other):
        return GridFunction(self.values - _vals(other), self.domain)

    def __mul__(self, other):
        return GridFunction(self.values * _vals(other), self.domain)

    __rmul__ = __mul__

    def __neg__(self):
        return GridFunction(-self.values, self.domain)


def _vals(x):
    return x.values if isinstance(x, GridFunction) else x


def sample(func, domain: AnnulusDomain) -> GridFunction:
    """Evaluate a vectorized callable at all contour nodes."""
    return GridFunction(func(domain.grid.nodes), domain)


@dataclass(frozen=True, eq=False)
class LaurentVector:
    """Raw Laurent coefficients ``c_n`` of ``z**n`` for ``-order-1 <= n <= order``."""

    coeffs: np.ndarray
    order: int

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (2 * self.order + 2,):
            raise ValueError("coefficient array does not match the truncation order")
        object.__setattr__(self, "coeffs", c)

    @property
    def modes(self) -> np.ndarray:
        return mode_indices(self.order)

    def __getitem__(self, n: int) -> complex:
        return self.coeffs[n + self.order + 1]

    def scaled(self, R: float) -> np.ndarray:
        return self.coeffs * balance_scale(R, self.order)

    @classmethod
    def from_scaled(cls, scaled: np.ndarray, R: float, order: int) -> "LaurentVector":
        return cls(np.asarray(scaled) / balance_scale(R, order), order)

    @classmethod
    def monomial(cls, n: int, order: int) -> "LaurentVector":
        c = np.zeros(2 * order + 2, dtype=complex)
        c[n + order + 1] = 1.0
        return cls(c, order)


def mode_indices(order: int) -> np.ndarray:
    return np.arange(-order - 1, order + 1)


def balance_scale(R: float, order: int) -> np.ndarray:
    """``R**abs(n)``: raw coefficient times this gives the balanced coefficient."""
    return float(R) ** np.abs(mode_indices(order)).astype(float)


def full_order(domain: AnnulusDomain) -> int:
    """Largest order the grid resolves without aliasing the two mode families."""
    return domain.M // 2 - 1


def balanced_basis(points, R: float, order: int) -> np.ndarray:
    """Matrix ``[e_n(z)]`` with rows indexed by points and columns by modes."""
    z = np.asarray(points, dtype=complex).reshape(-1, 1)
    n = mode_indices(order).reshape(1, -1)
    pos = n >= 0
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(pos, (z / R) ** np.where(pos, n, 0), (z * R) ** np.where(pos, 0, n))
    return out


@lru_cache(maxsize=16)
def _synthesis(R: float, M: int, order: int) -> np.ndarray:
    # exact phases: omega**(k n) computed from (k n mod M)
    k = np.arange(M).reshape(-1, 1)
    n = mode_indices(order).reshape(1, -1)
    phase_out = np.exp(2j * np.pi * ((k * n) % M) / M)
    phase_in = np.conj(phase_out)
    absn = np.abs(n).astype(float)
    decay = float(R) ** (-2.0 * absn)
    outer = np.where(n >= 0, phase_out, phase_out * decay)
    inner = np.where(n >= 0, phase_in * decay, phase_in)
    S = np.vstack([outer, inner])
    S.setflags(write=False)
    return S


@lru_cache(maxsize=16)
def _analysis(R: float, M: int, order: int) -> np.ndarray:
    k = np.arange(M).reshape(1, -1)
    n = mode_indices(order).reshape(-1, 1)
    phase = np.exp(-2j * np.pi * ((k * n) % M) / M) / M
    A = np.zeros((2 * order + 2, 2 * M), dtype=complex)
    pos = (n >= 0).ravel()
    A[pos, :M] = phase[pos]
    A[~pos, M:] = np.conj(phase[~pos])
    A.setflags(write=False)
    return A


def synthesis_matrix(domain: AnnulusDomain, order: int | None = None) -> np.ndarray:
    """Node values of the balanced basis, shape ``(2M, 2*order+2)``."""
    order = domain.N if order is None else order
    return _synthesis(domain.R, domain.M, order)


def analysis_matrix(domain: AnnulusDomain, order: int | None = None) -> np.ndarray:
    """Balanced Laurent coefficients from node values, shape ``(2*order+2, 2M)``.

    Non-negative modes are read from the outer circle, negative modes from
    the inner circle.
    """
    order = domain.N if order is None else order
    return _analysis(domain.R, domain.M, order)


@lru_cache(maxsize=8)
def _plus_projector(R: float, M: int) -> np.ndarray:
    order = M // 2 - 1
    P = _synthesis(R, M, order) @ _analysis(R, M, order)
    P.setflags(write=False)
    return P


def plus_projector(domain: AnnulusDomain) -> np.ndarray:
    """Grid-level matrix of the projection onto the Hardy space H+.

    Uses every mode the grid resolves, so it is exact (up to aliasing) for
    any function analytic near ``C``.
    """
    return _plus_projector(domain.R, domain.M)


def analyze(f: GridFunction, order: int | None = None, warn: bool = True) -> LaurentVector:
    """Raw Laurent coefficients of the H+ part of ``f``."""
    dom = f.domain
    order = dom.N if order is None else order
    scaled = analysis_matrix(dom, order) @ f.values
    if warn and order < full_order(dom):
        mag = np.abs(scaled)
        peak = mag.max()
        if peak > 0 and max(mag[0], mag[-1]) > 1e-8 * peak:
            warnings.warn("Laurent coefficients not resolved at the truncation edge", TruncationWarning, stacklevel=2)
    return LaurentVector.from_scaled(scaled, dom.R, order)


def synthesize(u: LaurentVector, points, R: float) -> np.ndarray:
    """Evaluate ``sum c_n z**n`` at arbitrary points of the closed annulus."""
    return balanced_basis(points, R, u.order) @ u.scaled(R)


def synthesize_on_grid(u: LaurentVector, domain: AnnulusDomain) -> GridFunction:
    return GridFunction(synthesis_matrix(domain, u.order) @ u.scaled(domain.R), domain)


def project_plus(f: GridFunction) -> GridFunction:
    return GridFunction(plus_projector(f.domain) @ f.values, f.domain)


def project_minus(f: GridFunction) -> GridFunction:
    """H- part of ``f``, i.e. ``f`` minus its H+ part, on the grid."""
    return GridFunction(f.values - plus_projector(f.domain) @ f.values, f.domain)


def apply_R(f: GridFunction) -> GridFunction:
    """``(Rf)(z) = f(1/z) / z`` as a node permutation."""
    g = f.grid
    return GridFunction(f.values[g.reciprocal_index] / g.nodes, f.domain)


def _check_exterior(domain: AnnulusDomain, zeta) -> np.ndarray:
    zeta = np.atleast_1d(np.asarray(zeta, dtype=complex))
    if np.any(domain.in_closed_annulus(zeta) & (domain.distance_to_contour(zeta) >= domain.dist_min)):
        raise DomainError("evaluation point lies inside the annulus")
    if np.any(domain.distance_to_contour(zeta) < domain.dist_min):
        raise EvalTooClose("evaluation point within one grid spacing of the contour")
    return zeta


def cauchy_minus(values: np.ndarray, domain: AnnulusDomain, zeta, derivative: int = 0) -> np.ndarray:
    """``(1/2 pi i) int f(l) / (zeta - l) dl`` at points ``zeta`` off the annulus.

    The integral returns the H- part of ``f`` at ``zeta`` whatever H+
    component ``f`` carries.  ``values`` may be 1-d (one function) or 2-d
    (columns are functions).  ``derivative=1`` differentiates in ``zeta``.
    """
    zeta = _check_exterior(domain, zeta)
    g = domain.grid
    cw = g.weights / (2j * np.pi)
    diff = zeta.reshape(-1, 1) - g.nodes.reshape(1, -1)
    if derivative == 0:
        K = cw / diff
    elif derivative == 1:
        K = -cw / diff**2
    else:
        raise ValueError("only first derivatives are supported")
    return K @ values


def at_infinity(values: np.ndarray, domain: AnnulusDomain) -> np.ndarray:
    """``lim z * (H- part of f)(z)`` as ``z -> oo``; equals ``(1/2 pi i) int_C f``.

    This is the coefficient of ``z**-1`` in the outer-circle expansion.
    """
    return (domain.grid.weights / (2j * np.pi)) @ values


def eval_hminus(f: GridFunction, zeta) -> complex | np.ndarray:
    """Value at ``zeta`` (outside the closed annulus) of the H- part of ``f``."""
    out = cauchy_minus(f.values, f.domain, zeta)
    return complex(out[0]) if np.ndim(zeta) == 0 else out
