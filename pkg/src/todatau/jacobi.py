"""Eventually-free Jacobi coefficients, Weyl functions and m-functions.

The Jacobi operator is ``(H u)_n = a_{n+1} u_{n+1} + a_n u_{n-1} + b_n u_n``.
Coefficients are given on a finite window and are constant outside it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable
import json

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from .errors import Degenerate, DivByZero, NearSpectrum, ValidationFail

WEYL_BUFFER = 200


@dataclass(frozen=True, eq=False)
class JacobiCoefficients:
    """``a_n, b_n`` for ``n_min <= n <= n_max``; ``a_tail, b_tail`` elsewhere."""

    n_min: int
    n_max: int
    a: np.ndarray
    b: np.ndarray
    a_tail: float = 1.0
    b_tail: float = 0.0

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        size = self.n_max - self.n_min + 1
        if a.shape != (size,) or b.shape != (size,):
            raise ValueError("coefficient arrays must cover the window")
        if np.any(a <= 0) or self.a_tail <= 0:
            raise ValueError("off-diagonal coefficients must be positive")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def free(cls, n_min: int = -1, n_max: int = 1, a_tail: float = 1.0, b_tail: float = 0.0):
        size = n_max - n_min + 1
        return cls(n_min, n_max, np.full(size, a_tail), np.full(size, b_tail), a_tail, b_tail)

    @classmethod
    def from_dict(cls, a: dict | None = None, b: dict | None = None, a_tail=1.0, b_tail=0.0):
        """Build from sparse ``{site: value}`` perturbations of a free tail."""
        a, b = a or {}, b or {}
        sites = list(a) + list(b) or [0]
        lo, hi = min(sites), max(sites)
        q = cls.free(lo, hi, a_tail, b_tail)
        av, bv = q.a.copy(), q.b.copy()
        for n, v in a.items():
            av[n - lo] = v
        for n, v in b.items():
            bv[n - lo] = v
        return cls(lo, hi, av, bv, a_tail, b_tail)

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.n_min, self.n_max + 1)

    def a_at(self, n):
        n = np.asarray(n)
        inside = (n >= self.n_min) & (n <= self.n_max)
        idx = np.clip(n - self.n_min, 0, len(self.a) - 1)
        return np.where(inside, self.a[idx], self.a_tail)

    def b_at(self, n):
        n = np.asarray(n)
        inside = (n >= self.n_min) & (n <= self.n_max)
        idx = np.clip(n - self.n_min, 0, len(self.b) - 1)
        return np.where(inside, self.b[idx], self.b_tail)

    def restrict(self, n_min: int, n_max: int) -> "JacobiCoefficients":
        n = np.arange(n_min, n_max + 1)
        return JacobiCoefficients(n_min, n_max, self.a_at(n), self.b_at(n), self.a_tail, self.b_tail)

    def shifted(self, k: int) -> "JacobiCoefficients":
        """Coefficients of the shifted sequence ``n -> q_{n+k}``."""
        return JacobiCoefficients(self.n_min - k, self.n_max - k, self.a, self.b, self.a_tail, self.b_tail)

    def matrix(self, lo: int, hi: int) -> tuple[np.ndarray, np.ndarray]:
        """Diagonal and off-diagonal of the truncation to sites ``lo..hi``."""
        n = np.arange(lo, hi + 1)
        return self.b_at(n).astype(float), self.a_at(n[1:]).astype(float)

    def max_abs_diff(self, other: "JacobiCoefficients", lo: int, hi: int) -> float:
        n = np.arange(lo, hi + 1)
        return float(np.max(np.abs(self.a_at(n) - other.a_at(n)) + np.abs(self.b_at(n) - other.b_at(n))))

    def to_json(self) -> dict:
        return {"n_min": int(self.n_min), "n_max": int(self.n_max), "a": self.a.tolist(),
                "b": self.b.tolist(), "tail": {"a": float(self.a_tail), "b": float(self.b_tail)}}

    @classmethod
    def from_json(cls, obj) -> "JacobiCoefficients":
        if isinstance(obj, str):
            obj = json.loads(obj)
        tail = obj.get("tail", {})
        return cls(int(obj["n_min"]), int(obj["n_max"]), obj["a"], obj["b"],
                   float(tail.get("a", 1.0)), float(tail.get("b", 0.0)))


# ---------------------------------------------------------------- Weyl functions

def _decaying_root(w):
    """Root of ``x + 1/x = w`` with ``|x| >= 1``."""
    s = np.sqrt(w * w - 4.0 + 0j)
    r1, r2 = 0.5 * (w + s), 0.5 * (w - s)
    return np.where(np.abs(r1) >= np.abs(r2), r1, r2)


def _check_off_interval(z, lambda0: float, tol: float = 1e-6):
    z = np.asarray(z, dtype=complex)
    x = np.clip(z.real, -lambda0, lambda0)
    dist = np.abs(z - x)
    if np.any(dist < tol):
        raise NearSpectrum(f"point within {tol} of the spectral interval [-{lambda0}, {lambda0}]")


def _interval(q: JacobiCoefficients, lambda0):
    return lambda0 if lambda0 is not None else abs(q.b_tail) + 2 * q.a_tail


def weyl_plus(q: JacobiCoefficients, z, buffer: int = WEYL_BUFFER, lambda0: float | None = None):
    """``m_+(z) = -g_1 / (a_1 g_0)`` for the solution decaying at ``+oo``.

    The ratio ``g_n / g_{n-1}`` is recursed downward from the exact free tail.
    """
    z = np.asarray(z, dtype=complex)
    _check_off_interval(z, _interval(q, lambda0))
    zeta = _decaying_root((z - q.b_tail) / q.a_tail)
    ratio = 1.0 / zeta  # g_n / g_{n-1} deep in the tail
    top = max(q.n_max, 1) + buffer
    for n in range(top, 0, -1):
        denom = z - q.b_at(n) - q.a_at(n + 1) * ratio
        if np.any(np.abs(denom) < 1e-300):
            raise Degenerate(f"Weyl solution vanishes at site {n - 1}")
        ratio = q.a_at(n) / denom
    return -ratio / q.a_at(1)


def weyl_minus(q: JacobiCoefficients, z, buffer: int = WEYL_BUFFER, lambda0: float | None = None):
    """``m_-(z) = -g_{-1} / (a_0 g_0)`` for the solution decaying at ``-oo``."""
    z = np.asarray(z, dtype=complex)
    _check_off_interval(z, _interval(q, lambda0))
    zeta = _decaying_root((z - q.b_tail) / q.a_tail)
    ratio = 1.0 / zeta  # g_n / g_{n+1} deep in the tail
    bottom = min(q.n_min, -1) - buffer
    for n in range(bottom, 0):
        denom = z - q.b_at(n) - q.a_at(n) * ratio
        if np.any(np.abs(denom) < 1e-300):
            raise Degenerate(f"Weyl solution vanishes at site {n + 1}")
        ratio = q.a_at(n + 1) / denom
    return -ratio / q.a_at(0)


# ---------------------------------------------------------------- m-functions

@dataclass(eq=False)
class MFunctionHandle:
    """Evaluator of an m-function together with its data at ``z = 0``.

    ``b0 = m(0)`` and ``a0sq = m'(0)``.  ``a1sq`` is the coefficient in the
    outer-branch formula (``nan`` when unknown).
    """

    func: Callable
    a0sq: float
    a1sq: float
    b0: float
    lambda0: float = 2.5

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        scalar = z.ndim == 0
        out = self.func(np.atleast_1d(z))
        return complex(out[0]) if scalar else out

    eval = __call__

    def value_at_zero(self) -> complex:
        return self.b0

    def derivative_at_zero(self) -> complex:
        return self.a0sq


def _joukowski(z):
    return z + 1.0 / z


def m_from_q(q: JacobiCoefficients, lambda0: float = 2.5, buffer: int = WEYL_BUFFER) -> MFunctionHandle:
    """Glue the Weyl functions into a single function off the spectral curve."""
    a0, a1, b0 = float(q.a_at(0)), float(q.a_at(1)), float(q.b_at(0))

    def func(z):
        z = np.asarray(z, dtype=complex)
        r = np.abs(z)
        if np.any(np.abs(r - 1.0) < 1e-12):
            raise NearSpectrum("m-function requested on the unit circle")
        out = np.empty_like(z)
        outer = r > 1
        inner = ~outer & (z != 0)
        if np.any(outer):
            w = _joukowski(z[outer])
            out[outer] = w + a1 * a1 * weyl_plus(q, w, buffer, lambda0)
        if np.any(inner):
            w = _joukowski(z[inner])
            out[inner] = -a0 * a0 * weyl_minus(q, w, buffer, lambda0) + b0
        out[z == 0] = b0
        return out

    m = MFunctionHandle(func, a0 * a0, a1 * a1, b0, lambda0)
    big = np.array([1e3, 1e3j, -1e3])
    err = np.max(np.abs((m(big) - big) * big))
    if err > 10.0 * (1.0 + a1 * a1 + abs(b0) + float(np.max(np.abs(q.b))) + float(np.max(q.a)) ** 2):
        raise ValidationFail("m-function does not behave like z + O(1/z)", ["asymptotics"])
    return m


@dataclass
class MCertificate:
    violations: list = field(default_factory=list)
    witnesses: dict = field(default_factory=dict)
    non_rational_assumed: bool = True

    @property
    def passed(self) -> bool:
        return not self.violations


def _upper_samples(count: int, lambda0: float, rng, margin: float = 1e-3, rmax: float = 6.0):
    """Random points of the upper half-plane at distance >= margin from the spectral curve."""
    ell = 0.5 * (lambda0 + np.sqrt(lambda0 * lambda0 - 4.0))
    out = []
    while len(out) < count:
        r = np.exp(rng.uniform(-np.log(rmax), np.log(rmax)))
        th = rng.uniform(0, np.pi)
        z = r * np.exp(1j * th)
        if abs(abs(z) - 1) < margin or z.imag < margin:
            continue
        if abs(z.imag) < margin and 1 / ell - margin <= abs(z.real) <= ell + margin:
            continue
        out.append(z)
    return np.array(out)


def validate_M(m, samples: int = 200, radius: float = 3.0, lambda0: float = 2.5, seed: int = 0,
               raise_on_fail: bool = True) -> MCertificate:
    """Check the defining conditions of the m-function class on samples.

    (i) ``m(z) - z -> 0`` at infinity, (ii) ``Im m > 0`` on the upper
    half-plane, (iii) ``m(z) != m(1/z)``, and reality ``m(conj z) = conj m(z)``.
    That ``m`` is not a rational function of ``z + 1/z`` cannot be decided
    from samples and is recorded as assumed.
    """
    rng = np.random.default_rng(seed)
    cert = MCertificate()
    th = 2 * np.pi * (np.arange(16) + 0.5) / 16
    near = 10 * radius * np.exp(1j * th)
    far = 100 * radius * np.exp(1j * th)
    e_near = np.max(np.abs(m(near) - near))
    e_far = np.max(np.abs(m(far) - far))
    if not (e_far <= 0.2 * e_near + 1e-9 and e_far < 1.0):
        cert.violations.append("(i) asymptotics")
        cert.witnesses["(i) asymptotics"] = complex(far[0])

    z = _upper_samples(samples, lambda0, rng)
    mz = m(z)
    bad = np.flatnonzero(~(mz.imag > 0))
    if bad.size:
        cert.violations.append("(ii) Herglotz")
        cert.witnesses["(ii) Herglotz"] = complex(z[bad[0]])
    diff = np.abs(mz - m(1.0 / z))
    bad = np.flatnonzero(diff <= 1e-10)
    if bad.size:
        cert.violations.append("(iii) reflection")
        cert.witnesses["(iii) reflection"] = complex(z[bad[0]])
    refl = np.abs(m(np.conj(z)) - np.conj(mz))
    bad = np.flatnonzero(refl > 1e-10 * (1 + np.abs(mz)))
    if bad.size:
        cert.violations.append("reality")
        cert.witnesses["reality"] = complex(z[bad[0]])
    if cert.violations and raise_on_fail:
        raise ValidationFail("m-function violates: " + ", ".join(cert.violations), cert.violations)
    return cert


# ---------------------------------------------------------------- Herglotz transform

def _four_point_derivative(f, h: float) -> complex:
    return complex((f(h) - f(-h) - 1j * (f(1j * h) - f(-1j * h))) / (4 * h))


def herglotz_transform(m: MFunctionHandle, zeta: complex) -> MFunctionHandle:
    """The transform ``d_zeta m`` as a new handle.

    ``d_zeta m(z) = J(z) - (m(zeta) - m(0)) (1 - (J(z) - J(zeta)) / (m(z) - m(zeta)))``
    with ``J(z) = z + 1/z``; the value at ``0`` uses the finite limit
    ``m(0) - m(zeta) + J(zeta) + m'(0) / (m(0) - m(zeta))``.
    """
    zeta = complex(zeta)
    m0 = m.value_at_zero()
    mz = m(zeta)
    jz = _joukowski(zeta)
    if abs(mz - m0) < 1e-12:
        raise DivByZero("m(zeta) = m(0)")
    at_zero = m0 - mz + jz + m.derivative_at_zero() / (m0 - mz)

    def func(z):
        z = np.asarray(z, dtype=complex)
        out = np.empty_like(z)
        nz = z != 0
        zz = z[nz]
        mzz = m(zz)
        den = mzz - mz
        if np.any(np.abs(den) < 1e-12):
            raise DivByZero("m(z) = m(zeta)")
        jzz = _joukowski(zz)
        out[nz] = jzz - (mz - m0) * (1.0 - (jzz - jz) / den)
        out[~nz] = at_zero
        return out

    handle = MFunctionHandle(func, np.nan, np.nan, at_zero, m.lambda0)
    handle.a0sq = _four_point_derivative(handle, 1e-4 / 3.0)
    return handle


def herglotz_dzeta(m: MFunctionHandle, zeta: complex, z):
    return herglotz_transform(m, zeta)(z)


# ---------------------------------------------------------------- spectrum

def spectrum_bounds(q: JacobiCoefficients, size: int = 400, center: int | None = None) -> tuple[float, float]:
    """Extreme eigenvalues of the ``size x size`` truncation around ``center``."""
    if center is None:
        center = (q.n_min + q.n_max) // 2
    lo = center - size // 2
    d, e = q.matrix(lo, lo + size - 1)
    ev = eigvalsh_tridiagonal(d, e)
    return float(ev[0]), float(ev[-1])
