"""Direct integration of the Toda lattice and Lax-pair diagnostics.

Nothing here touches symbols or tau functions.  The lattice lives on sites
``-L..L``; values outside are frozen at the tail constants.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import ceil
from typing import Callable

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from .errors import PositivityLoss, StepTooLarge
from .jacobi import JacobiCoefficients

DEFAULT_DT = 1e-3
RICHARDSON_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class LatticeState:
    L: int
    a: np.ndarray
    b: np.ndarray
    a_tail: float = 1.0
    b_tail: float = 0.0
    t: float = 0.0

    @property
    def sites(self) -> np.ndarray:
        return np.arange(-self.L, self.L + 1)

    @classmethod
    def from_jacobi(cls, q: JacobiCoefficients, L: int = 200) -> "LatticeState":
        n = np.arange(-L, L + 1)
        return cls(L, q.a_at(n).astype(float), q.b_at(n).astype(float), q.a_tail, q.b_tail)

    def to_jacobi(self, window: tuple[int, int] | None = None) -> JacobiCoefficients:
        lo, hi = window if window is not None else (-self.L, self.L)
        sl = slice(lo + self.L, hi + self.L + 1)
        return JacobiCoefficients(lo, hi, self.a[sl].copy(), self.b[sl].copy(), self.a_tail, self.b_tail)

    def with_values(self, a, b, t) -> "LatticeState":
        return LatticeState(self.L, a, b, self.a_tail, self.b_tail, t)


def toda_rhs(a: np.ndarray, b: np.ndarray, a_tail: float = 1.0, b_tail: float = 0.0, pad: int = 1):
    """``a' = a_n (b_n - b_{n-1})``, ``b' = 2 (a_{n+1}^2 - a_n^2)`` with frozen ends."""
    b_prev = np.concatenate(([b_tail], b[:-1]))
    a_next = np.concatenate((a[1:], [a_tail]))
    da = a * (b - b_prev)
    db = 2.0 * (a_next**2 - a**2)
    if pad:
        da[:pad] = da[-pad:] = 0.0
        db[:pad] = db[-pad:] = 0.0
    return da, db


def open_chain_rhs(a: np.ndarray, b: np.ndarray, a_tail: float = 1.0, b_tail: float = 0.0):
    """Toda equations of the finite chain ``-L..L`` with no coupling past the ends.

    Its Jacobi matrix is exactly isospectral.  Frozen ends (:func:`toda_rhs`)
    break the Lax relation in the boundary rows, which moves the delocalized
    eigenvalues by ``O(1/L)`` even while the interior is untouched.
    ``a[0]`` couples to a site outside the chain and is ignored.
    """
    inner = a.copy()
    inner[0] = 0.0
    b_prev = np.concatenate(([0.0], b[:-1]))
    a_next = np.concatenate((inner[1:], [0.0]))
    return inner * (b - b_prev), 2.0 * (a_next**2 - inner**2)


def state_rhs(s: LatticeState):
    return toda_rhs(s.a, s.b, s.a_tail, s.b_tail)


def _rk4(a, b, dt, steps, rhs, a_tail, b_tail):
    for _ in range(steps):
        k1a, k1b = rhs(a, b, a_tail, b_tail)
        k2a, k2b = rhs(a + 0.5 * dt * k1a, b + 0.5 * dt * k1b, a_tail, b_tail)
        k3a, k3b = rhs(a + 0.5 * dt * k2a, b + 0.5 * dt * k2b, a_tail, b_tail)
        k4a, k4b = rhs(a + dt * k3a, b + dt * k3b, a_tail, b_tail)
        a = a + dt / 6.0 * (k1a + 2 * k2a + 2 * k3a + k4a)
        b = b + dt / 6.0 * (k1b + 2 * k2b + 2 * k3b + k4b)
    return a, b


def _march(s0: LatticeState, times, dt, rhs):
    out = []
    a, b, t = s0.a.copy(), s0.b.copy(), s0.t
    for target in times:
        span = target - t
        steps = int(ceil(abs(span) / dt - 1e-12)) if span else 0
        if steps:
            a, b = _rk4(a, b, span / steps, steps, rhs, s0.a_tail, s0.b_tail)
        if np.any(a <= 0):
            raise PositivityLoss(f"off-diagonal coefficient lost positivity before t={target}")
        t = target
        out.append(s0.with_values(a.copy(), b.copy(), t))
    return out


def integrate(s0: LatticeState, t_end: float | None = None, dt: float = DEFAULT_DT,
              times=None, rhs: Callable = toda_rhs, richardson: bool = True) -> list[LatticeState]:
    """Classical RK4 from ``s0.t``; returns the states at ``times`` (default ``[t_end]``).

    The run is repeated with half the step; an endpoint change above
    ``RICHARDSON_TOL`` raises :class:`StepTooLarge`.
    """
    if times is None:
        if t_end is None:
            raise ValueError("give t_end or times")
        times = [t_end]
    times = [float(t) for t in times]
    coarse = _march(s0, times, dt, rhs)
    if richardson and times:
        fine = _march(s0, times[-1:] if len(times) == 1 else times, dt / 2, rhs)
        gap = max(float(np.max(np.abs(c.a - f.a)) + np.max(np.abs(c.b - f.b))) for c, f in zip(coarse, fine))
        if gap > RICHARDSON_TOL:
            raise StepTooLarge(f"halving dt={dt} moves the solution by {gap:.2e}")
    return coarse


# ---------------------------------------------------------------- Lax pair

def jacobi_matrix(s: LatticeState) -> np.ndarray:
    n = 2 * s.L + 1
    H = np.diag(s.b.astype(float))
    off = s.a[1:]
    H[np.arange(n - 1), np.arange(1, n)] = off
    H[np.arange(1, n), np.arange(n - 1)] = off
    return H


def antisymmetric_part(X: np.ndarray) -> np.ndarray:
    """Upper triangle kept, diagonal zeroed, lower triangle negated."""
    return np.triu(X, 1) - np.tril(X, -1)


def lax_matrices(s: LatticeState, p=(0.0, 1.0)) -> tuple[np.ndarray, np.ndarray]:
    """``H`` and ``p(H)_a`` on the truncated lattice; ``p`` in increasing degree."""
    H = jacobi_matrix(s)
    P = np.zeros_like(H)
    for c in reversed(list(p)):
        P = P @ H + c * np.eye(len(H))
    return H, antisymmetric_part(P)


def flaschka_partner(s: LatticeState) -> np.ndarray:
    """``(P u)_n = (a_n u_{n+1} - a_{n-1} u_{n-1}) / 2`` exactly as printed."""
    n = 2 * s.L + 1
    P = np.zeros((n, n))
    i = np.arange(n - 1)
    # row n couples to n+1 with a_n; row n+1 couples to n with -a_n
    P[i, i + 1] = 0.5 * s.a[:-1]
    P[i + 1, i] = -0.5 * s.a[:-1]
    return P


def rhs_matrix(s: LatticeState) -> np.ndarray:
    da, db = state_rhs(s)
    return _tridiag(db, da[1:])


def _tridiag(d, e):
    H = np.diag(np.asarray(d, dtype=float))
    k = np.arange(len(e))
    H[k, k + 1] = e
    H[k + 1, k] = e
    return H


def commutator_factor(s: LatticeState, partner: np.ndarray, margin: int = 5) -> tuple[float, float]:
    """Best ``c`` with ``dH/dt = c [partner, H]`` on interior sites, and the residual."""
    H = jacobi_matrix(s)
    C = partner @ H - H @ partner
    D = rhs_matrix(s)
    sl = slice(margin, len(H) - margin)
    c_vec, d_vec = C[sl, sl].ravel(), D[sl, sl].ravel()
    denom = float(c_vec @ c_vec)
    c = float(c_vec @ d_vec) / denom if denom else 0.0
    return c, float(np.max(np.abs(d_vec - c * c_vec)))


def lax_residual(s: LatticeState, p=(0.0, 1.0), factor: float = 1.0, margin: int = 5) -> float:
    """``max |dH/dt - factor [p(H)_a, H]|`` over interior entries."""
    H, X = lax_matrices(s, p)
    D = rhs_matrix(s)
    sl = slice(margin, len(H) - margin)
    return float(np.max(np.abs(D - factor * (X @ H - H @ X))[sl, sl]))


# ---------------------------------------------------------------- invariants

def spectrum(s: LatticeState) -> np.ndarray:
    return eigvalsh_tridiagonal(s.b.astype(float), s.a[1:].astype(float))


def isospectral_drift(traj: list[LatticeState]) -> float:
    """Largest shift of the sorted eigenvalues relative to the first state."""
    if not traj:
        return 0.0
    ref = spectrum(traj[0])
    return float(max((np.max(np.abs(spectrum(s) - ref)) for s in traj[1:]), default=0.0))


def oracle_drift(q: JacobiCoefficients, times, L: int = 200, dt: float = DEFAULT_DT) -> float:
    """Isospectral drift of the open chain started from ``q``."""
    s0 = LatticeState.from_jacobi(q, L)
    nonzero = sorted(float(t) for t in times if t != 0.0)
    return isospectral_drift([s0] + (integrate(s0, times=nonzero, dt=dt, rhs=open_chain_rhs) if nonzero else []))


def trace_moments(s: LatticeState) -> tuple[float, float]:
    """``tr H`` and ``tr H^2`` of the truncated lattice."""
    return float(np.sum(s.b)), float(np.sum(s.b**2) + 2 * np.sum(s.a[1:] ** 2))


def oracle_trajectory(q: JacobiCoefficients, times, L: int = 200, dt: float = DEFAULT_DT) -> list[LatticeState]:
    s0 = LatticeState.from_jacobi(q, L)
    times = [float(t) for t in times]
    out = integrate(s0, times=[t for t in times if t != 0.0] or [0.0], dt=dt)
    by_t = {s.t: s for s in out}
    by_t[0.0] = s0
    return [by_t[t] for t in times]
