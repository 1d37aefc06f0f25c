"""Vector symbols, the symbol group and the flow group.

A vector symbol ``a = (a1, a2)`` acts on functions on the contour by

    (a u)(l) = a1(l) u(l) + a2(l) u(1/l) / l,

i.e. ``a u = a1 u + a2 (R u)`` with the reflection ``R`` of :mod:`hardy`.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .contour import AnnulusDomain
from .errors import CertFail, PoleHit
from .hardy import GridFunction, analysis_matrix, apply_R, full_order, mode_indices

POINT_TOL = 1e-10
NONVANISH_TOL = 1e-8


# ---------------------------------------------------------------- group elements

def _key(z: complex) -> complex:
    return complex(z)


@dataclass(frozen=True)
class GroupElement:
    """``g = const * prod(z - zero) / prod(z - pole) * exp(h(z))``.

    ``zeros`` and ``poles`` are tuples of complex numbers off the closed
    annulus (``0`` is allowed: it lies in the inner component of the
    exterior).  ``exponent`` maps integer powers ``k`` to the coefficient of
    ``z**k`` in ``h``.  The constant only matters for evaluation; tau values
    are invariant under scalar multiples of ``g``.
    """

    zeros: tuple = ()
    poles: tuple = ()
    exponent: dict = field(default_factory=dict)
    const: complex = 1.0
    real: bool = False

    def __post_init__(self):
        object.__setattr__(self, "zeros", tuple(_key(z) for z in self.zeros))
        object.__setattr__(self, "poles", tuple(_key(p) for p in self.poles))
        h = {int(k): complex(v) for k, v in dict(self.exponent).items() if v != 0}
        object.__setattr__(self, "exponent", h)
        object.__setattr__(self, "const", complex(self.const))
        if self.real and not self.is_conjugation_symmetric():
            raise ValueError("group element flagged real is not conjugation symmetric")

    def __hash__(self):
        return hash((self.zeros, self.poles, tuple(sorted(self.exponent.items())), self.const))

    # constructors
    @classmethod
    def identity(cls) -> "GroupElement":
        return cls(real=True)

    @classmethod
    def q(cls, zeta: complex) -> "GroupElement":
        """``q_zeta(z) = 1 / (1 - z/zeta)``."""
        zeta = complex(zeta)
        return cls(poles=(zeta,), const=-zeta, real=zeta.imag == 0)

    @classmethod
    def r(cls, zeta: complex) -> "GroupElement":
        """``r_zeta = q_zeta * q_conj(zeta)``; real for every ``zeta``."""
        zeta = complex(zeta)
        return cls(poles=(zeta, zeta.conjugate()), const=abs(zeta) ** 2, real=True)

    @classmethod
    def zpow(cls, n: int) -> "GroupElement":
        n = int(n)
        if n >= 0:
            return cls(zeros=(0j,) * n, real=True)
        return cls(poles=(0j,) * (-n), real=True)

    @classmethod
    def exp(cls, h: dict, real: bool | None = None) -> "GroupElement":
        h = {int(k): v for k, v in h.items()}
        if real is None:
            real = all(complex(v).imag == 0 for v in h.values())
        return cls(exponent=h, real=real)

    @classmethod
    def time_flow(cls, t: float, p_hat: dict) -> "GroupElement":
        """``exp(2 t p_hat(z))``; see :mod:`todatau.flow` for the sign."""
        return cls.exp({k: 2.0 * t * v for k, v in p_hat.items() if k != 0})

    # algebra
    def __mul__(self, other: "GroupElement") -> "GroupElement":
        h = dict(self.exponent)
        for k, v in other.exponent.items():
            h[k] = h.get(k, 0) + v
        zeros = Counter(self.zeros) + Counter(other.zeros)
        poles = Counter(self.poles) + Counter(other.poles)
        common = zeros & poles
        zeros -= common
        poles -= common
        return GroupElement(
            tuple(zeros.elements()), tuple(poles.elements()), h, self.const * other.const,
            real=self.real and other.real,
        )

    def inverse(self) -> "GroupElement":
        return GroupElement(self.poles, self.zeros, {k: -v for k, v in self.exponent.items()},
                            1.0 / self.const, real=self.real)

    def __pow__(self, n: int) -> "GroupElement":
        if n < 0:
            return self.inverse() ** (-n)
        out = GroupElement.identity()
        for _ in range(n):
            out = out * self
        return out

    def tilde(self) -> "GroupElement":
        """``g(1/z)`` written again in zero/pole/exponent form."""
        zeros, poles, const = [], [], self.const
        for a in self.zeros:
            if a == 0:
                poles.append(0j)
            else:  # 1/z - a = -a (z - 1/a) / z
                zeros.append(1 / a)
                poles.append(0j)
                const *= -a
        for p in self.poles:
            if p == 0:
                zeros.append(0j)
            else:
                poles.append(1 / p)
                zeros.append(0j)
                const /= -p
        zc, pc = Counter(zeros), Counter(poles)
        common = zc & pc
        zc -= common
        pc -= common
        return GroupElement(tuple(zc.elements()), tuple(pc.elements()),
                            {-k: v for k, v in self.exponent.items()}, const, real=self.real)

    def is_conjugation_symmetric(self, tol: float = 1e-12) -> bool:
        def closed(roots):
            rest = list(roots)
            while rest:
                z = rest.pop()
                if abs(z.imag) <= tol:
                    continue
                j = min(range(len(rest)), key=lambda i: abs(rest[i] - z.conjugate()), default=None)
                if j is None or abs(rest[j] - z.conjugate()) > tol * max(1, abs(z)):
                    return False
                rest.pop(j)
            return True

        return (closed(self.zeros) and closed(self.poles)
                and all(abs(v.imag) <= tol for v in self.exponent.values())
                and abs(self.const.imag) <= tol * abs(self.const))

    # evaluation
    def _grouped(self):
        return Counter(self.zeros), Counter(self.poles)

    def h(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for k, v in self.exponent.items():
            out = out + v * z**k
        return out

    def h_prime(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for k, v in self.exponent.items():
            if k:
                out = out + k * v * z ** (k - 1)
        return out

    def __call__(self, lam):
        lam = np.asarray(lam, dtype=complex)
        zeros, poles = self._grouped()
        for p in poles:
            if np.any(np.abs(lam - p) < 1e-12):
                raise PoleHit(f"evaluation at a pole {p}")
        out = self.const * np.exp(self.h(lam))
        for a, k in zeros.items():
            out = out * (lam - a) ** k
        for p, k in poles.items():
            out = out / (lam - p) ** k
        return out

    def log_ratio(self, lam, z):
        """``log(g(lam) / g(z))`` up to multiples of ``2 pi i``."""
        lam = np.asarray(lam, dtype=complex)
        z = np.asarray(z, dtype=complex)
        zeros, poles = self._grouped()
        out = self.h(lam) - self.h(z)
        for a, k in zeros.items():
            out = out + k * np.log((lam - a) / (z - a))
        for p, k in poles.items():
            out = out - k * np.log((lam - p) / (z - p))
        return out

    def log_value(self, z):
        """A branch of ``log(g(z) / const)``; only differences modulo ``2 pi i`` are meaningful."""
        z = np.asarray(z, dtype=complex)
        zeros, poles = self._grouped()
        out = self.h(z)
        for a, k in zeros.items():
            out = out + k * np.log(z - a)
        for p, k in poles.items():
            out = out - k * np.log(z - p)
        return out

    def log_derivative(self, z):
        """``g'(z) / g(z)``."""
        z = np.asarray(z, dtype=complex)
        zeros, poles = self._grouped()
        out = self.h_prime(z)
        for a, k in zeros.items():
            out = out + k / (z - a)
        for p, k in poles.items():
            out = out - k / (z - p)
        return out

    def check_admissible(self, domain: AnnulusDomain) -> None:
        """Raise :class:`PoleHit` if a zero or pole is in or near the closed annulus."""
        for r in self.zeros + self.poles:
            if domain.in_closed_annulus(r) or domain.distance_to_contour(r) < domain.dist_min:
                raise PoleHit(f"zero/pole {r} too close to the contour (R={domain.R})")

    # serialization
    def to_json(self) -> dict:
        out = {
            "zeros": [[z.real, z.imag] for z in self.zeros],
            "poles": [[p.real, p.imag] for p in self.poles],
            "exponent": {str(k): (v.real if v.imag == 0 else [v.real, v.imag]) for k, v in sorted(self.exponent.items())},
            "real": bool(self.real),
        }
        if self.const != 1:
            out["const"] = [self.const.real, self.const.imag]
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "GroupElement":
        def cplx(v):
            if isinstance(v, (list, tuple)):
                return complex(v[0], v[1] if len(v) > 1 else 0.0)
            return complex(v)

        if "q" in obj:
            return cls.q(cplx(obj["q"]))
        if "r" in obj:
            return cls.r(cplx(obj["r"]))
        g = cls(
            zeros=tuple(cplx(z) for z in obj.get("zeros", [])),
            poles=tuple(cplx(p) for p in obj.get("poles", [])),
            exponent={int(k): cplx(v) for k, v in obj.get("exponent", {}).items()},
            const=cplx(obj.get("const", 1.0)),
            real=bool(obj.get("real", False)),
        )
        return g


def group_eval(g: GroupElement, lam):
    return g(lam)


# ---------------------------------------------------------------- vector symbols

@dataclass(frozen=True, eq=False)
class VectorSymbol:
    """Pair of node-value arrays with an optional closed-form evaluator.

    ``evaluator(z)`` returns ``(a1(z), a2(z))`` for points near ``C`` and, for
    members of the symbol group, anywhere off the annulus.
    """

    a1: GridFunction
    a2: GridFunction
    evaluator: Callable | None = None
    is_real: bool = False

    @property
    def domain(self) -> AnnulusDomain:
        return self.a1.domain

    @classmethod
    def from_callables(cls, f1, f2, domain: AnnulusDomain, is_real: bool = False) -> "VectorSymbol":
        z = domain.grid.nodes
        return cls(GridFunction(f1(z) * np.ones_like(z), domain), GridFunction(f2(z) * np.ones_like(z), domain),
                   lambda w: (f1(w), f2(w)), is_real)

    @classmethod
    def identity(cls, domain: AnnulusDomain) -> "VectorSymbol":
        one = lambda z: np.ones_like(np.asarray(z, dtype=complex))
        zero = lambda z: np.zeros_like(np.asarray(z, dtype=complex))
        return cls.from_callables(one, zero, domain, is_real=True)

    def __call__(self, z):
        if self.evaluator is None:
            raise ValueError("symbol has no closed-form evaluator")
        return self.evaluator(z)

    def apply_values(self, U: np.ndarray) -> np.ndarray:
        """Apply to node values; ``U`` has shape ``(2M,)`` or ``(2M, k)``."""
        g = self.domain.grid
        a1, a2 = self.a1.values, self.a2.values
        if U.ndim == 2:
            a1, a2 = a1[:, None], a2[:, None]
            RU = U[g.reciprocal_index] / g.nodes[:, None]
        else:
            RU = U[g.reciprocal_index] / g.nodes
        return a1 * U + a2 * RU

    def realness_defect(self) -> float:
        idx = self.domain.grid.conjugate_index
        return max(np.max(np.abs(self.a1.values[idx] - np.conj(self.a1.values))),
                   np.max(np.abs(self.a2.values[idx] - np.conj(self.a2.values))))

    def sup_norm(self) -> float:
        return float(np.max(np.hypot(np.abs(self.a1.values), np.abs(self.a2.values))))

    def times(self, g: GroupElement) -> "VectorSymbol":
        """Pointwise product ``g * a``."""
        g.check_admissible(self.domain)
        gv = g(self.domain.grid.nodes)
        ev = None
        if self.evaluator is not None:
            base = self.evaluator

            def ev(z):
                b1, b2 = base(z)
                gz = g(z)
                return gz * b1, gz * b2

        return VectorSymbol(self.a1 * gv, self.a2 * gv, ev, self.is_real and g.real)


def symbol_apply(a: VectorSymbol, u: GridFunction) -> GridFunction:
    return a.a1 * u + a.a2 * apply_R(u)


def symbol_tilde(a: VectorSymbol) -> VectorSymbol:
    """``a~(z) = a(1/z)`` by node permutation."""
    idx = a.domain.grid.reciprocal_index
    ev = None
    if a.evaluator is not None:
        base = a.evaluator
        ev = lambda z: base(1.0 / np.asarray(z, dtype=complex))
    return VectorSymbol(GridFunction(a.a1.values[idx], a.domain), GridFunction(a.a2.values[idx], a.domain),
                        ev, a.is_real)


def mgroup_product(m: VectorSymbol, n: VectorSymbol) -> VectorSymbol:
    """``(m1 n1 + m2 n2~, m1 n2 + m2 n1~)``."""
    nt = symbol_tilde(n)
    ev = None
    if m.evaluator is not None and n.evaluator is not None:
        def ev(z):
            z = np.asarray(z, dtype=complex)
            m1, m2 = m.evaluator(z)
            n1, n2 = n.evaluator(z)
            t1, t2 = n.evaluator(1.0 / z)
            return m1 * n1 + m2 * t2, m1 * n2 + m2 * t1

    return VectorSymbol(m.a1 * n.a1 + m.a2 * nt.a2, m.a1 * n.a2 + m.a2 * nt.a1, ev, m.is_real and n.is_real)


def mgroup_inverse(m: VectorSymbol) -> VectorSymbol:
    """``(m1~ / D, -m2 / D)`` with ``D = m1 m1~ - m2 m2~``."""
    mt = symbol_tilde(m)
    det = m.a1 * mt.a1 - m.a2 * mt.a2
    ev = None
    if m.evaluator is not None:
        def ev(z):
            z = np.asarray(z, dtype=complex)
            m1, m2 = m.evaluator(z)
            t1, t2 = m.evaluator(1.0 / z)
            d = m1 * t1 - m2 * t2
            return t1 / d, -m2 / d

    return VectorSymbol(GridFunction(mt.a1.values / det.values, m.domain),
                        GridFunction(-m.a2.values / det.values, m.domain), ev, m.is_real)


# ---------------------------------------------------------------- membership certificate

@dataclass
class MSymbolCert:
    """Numerical membership checks for the symbol group.

    Point values at ``0`` and ``oo`` are read from the mean of the node
    values on the inner and outer circle, which is exact for components
    analytic off the annulus.
    """

    m1_at_0: complex
    m1_at_inf: complex
    m2_at_0: complex
    m2_at_inf: complex
    min_det: float
    sup_norm: float
    analytic_defect: float
    det_identity_residual: float = float("nan")
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def _exterior_samples(domain: AnnulusDomain) -> np.ndarray:
    R = domain.R
    th = 2 * np.pi * (np.arange(32) + 0.5) / 32
    radii = np.array([1.25 * R, 2 * R, 5 * R, 50 * R])
    outer = (radii[:, None] * np.exp(1j * th)[None, :]).ravel()
    return np.concatenate([outer, 1.0 / outer, [0.0]])


def certify(m: VectorSymbol, raise_on_fail: bool = True) -> MSymbolCert:
    dom = m.domain
    M = dom.M
    comps = []
    defect = 0.0
    K = full_order(dom)
    A = analysis_matrix(dom, K)
    modes = mode_indices(K)
    for comp in (m.a1, m.a2):
        v = comp.values
        at_inf, at_0 = v[:M].mean(), v[M:].mean()
        comps.append((at_0, at_inf))
        c = A @ v
        defect = max(defect, float(np.max(np.abs(c[modes != 0]))))
    (m1_0, m1_inf), (m2_0, m2_inf) = comps
    sup = m.sup_norm()

    nodes = dom.grid.nodes
    mt = symbol_tilde(m)
    dets = [np.abs(m.a1.values * mt.a1.values - m.a2.values * mt.a2.values)]
    if m.evaluator is not None:
        z = _exterior_samples(dom)
        z = z[z != 0]
        m1, m2 = m.evaluator(z)
        t1, t2 = m.evaluator(1.0 / z)
        dets.append(np.abs(m1 * t1 - m2 * t2))
    dets.append(np.abs([m1_0 * m1_inf - m2_0 * m2_inf]))
    min_det = float(min(d.min() for d in dets))

    cert = MSymbolCert(m1_0, m1_inf, m2_0, m2_inf, min_det, sup, defect / max(sup, 1e-300))
    if abs(m1_0 - 1) > POINT_TOL or abs(m1_inf - 1) > POINT_TOL:
        cert.failures.append(f"first component must equal 1 at 0 and oo (got {m1_0:.3e}, {m1_inf:.3e})")
    if abs(m2_0) > POINT_TOL or abs(m2_inf) > POINT_TOL:
        cert.failures.append(f"second component must vanish at 0 and oo (got {m2_0:.3e}, {m2_inf:.3e})")
    if min_det <= NONVANISH_TOL * max(sup, 1.0) ** 2:
        cert.failures.append(f"determinant m1 m1~ - m2 m2~ nearly vanishes (min {min_det:.3e})")
    if cert.analytic_defect > 1e-8:
        cert.failures.append(f"components not analytic off the annulus (defect {cert.analytic_defect:.3e})")
    if cert.failures and raise_on_fail:
        raise CertFail("; ".join(cert.failures))
    return cert


def msymbol_from_m(m, domain: AnnulusDomain, raise_on_fail: bool = True) -> tuple[VectorSymbol, MSymbolCert]:
    """Build ``((z m - 1)/(z^2 - 1), z^2 (z - m)/(z^2 - 1))`` from an m-function.

    ``m`` is any vectorized callable defined off the spectral curve.
    """

    def ev(z):
        z = np.asarray(z, dtype=complex)
        mz = m(z)
        d = z * z - 1.0
        return (z * mz - 1.0) / d, z * z * (z - mz) / d

    nodes = domain.grid.nodes
    a1, a2 = ev(nodes)
    sym = VectorSymbol(GridFunction(a1, domain), GridFunction(a2, domain), ev, is_real=True)
    sym = VectorSymbol(sym.a1, sym.a2, ev, is_real=sym.realness_defect() <= 1e-12 * max(sym.sup_norm(), 1.0))
    cert = certify(sym, raise_on_fail=raise_on_fail)
    # determinant identity on the contour
    mt = symbol_tilde(sym)
    lhs = sym.a1.values * mt.a1.values - sym.a2.values * mt.a2.values
    mz = m(nodes)
    rhs = (mz - m(1.0 / nodes)) / (nodes - 1.0 / nodes)
    cert.det_identity_residual = float(np.max(np.abs(lhs - rhs)))
    return sym, cert
