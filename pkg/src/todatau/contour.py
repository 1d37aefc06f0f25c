"""Annular domain and trapezoidal quadrature on its two boundary circles.

The domain is the annulus ``1/R < |z| < R``.  Its boundary ``C`` consists of
the outer circle ``|z| = R`` traversed anticlockwise and the inner circle
``|z| = 1/R`` traversed clockwise.  Node ``k`` of the inner circle is the
reciprocal of node ``k`` of the outer circle, so ``z -> 1/z`` swaps the two
halves of the node array and ``z -> conj(z)`` is the index map ``k -> -k``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
import math

import numpy as np

from .errors import DomainError


def spectral_radius_point(lambda0: float) -> float:
    """Return ``ell``, the larger root of ``x + 1/x = lambda0``."""
    return 0.5 * (lambda0 + math.sqrt(lambda0 * lambda0 - 4.0))


@dataclass(frozen=True)
class ContourGrid:
    """Trapezoidal nodes and weights on both circles.

    ``nodes`` and ``weights`` have length ``2M``; the first ``M`` entries
    belong to the outer circle, the rest to the inner one.  The weights
    encode ``d lambda`` together with the orientation.
    """

    R: float
    M: int

    @cached_property
    def angles(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.M) / self.M

    @cached_property
    def nodes_outer(self) -> np.ndarray:
        return self.R * np.exp(1j * self.angles)

    @cached_property
    def nodes_inner(self) -> np.ndarray:
        return np.exp(-1j * self.angles) / self.R

    @cached_property
    def nodes(self) -> np.ndarray:
        return np.concatenate([self.nodes_outer, self.nodes_inner])

    @cached_property
    def weights(self) -> np.ndarray:
        h = 2.0 * np.pi / self.M
        # anticlockwise outer: d lambda = i lambda d theta; clockwise inner flips the sign
        return np.concatenate([1j * h * self.nodes_outer, -1j * h * self.nodes_inner])

    @cached_property
    def reciprocal_index(self) -> np.ndarray:
        """Index map realizing ``z -> 1/z`` on the node array."""
        M = self.M
        return np.concatenate([np.arange(M, 2 * M), np.arange(M)])

    @cached_property
    def conjugate_index(self) -> np.ndarray:
        """Index map realizing ``z -> conj(z)`` on the node array."""
        M = self.M
        k = (-np.arange(M)) % M
        return np.concatenate([k, k + M])

    @property
    def spacing(self) -> float:
        return 2.0 * np.pi * max(self.R, 1.0) / self.M


@dataclass(frozen=True)
class AnnulusDomain:
    """Annulus ``1/R < |z| < R`` containing the spectral curve.

    Parameters
    ----------
    lambda0 : float
        Bound on the spectrum of the Jacobi operators, ``lambda0 >= 2``.
    R : float
        Outer radius; must exceed ``ell``.
    M : int
        Quadrature nodes per circle (even).
    N : int
        Laurent truncation order.  Coefficients are kept for
        ``-N-1 <= n <= N`` so that the reflection ``n -> -n-1`` maps the
        index set onto itself.
    """

    lambda0: float
    R: float
    M: int
    N: int
    ell: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "ell", spectral_radius_point(self.lambda0))

    @cached_property
    def grid(self) -> ContourGrid:
        return ContourGrid(self.R, self.M)

    @property
    def dist_min(self) -> float:
        return self.grid.spacing

    def in_closed_annulus(self, z, tol: float = 0.0) -> np.ndarray:
        r = np.abs(np.asarray(z))
        return (r >= 1.0 / self.R - tol) & (r <= self.R + tol)

    def distance_to_contour(self, z) -> np.ndarray:
        r = np.abs(np.asarray(z))
        return np.minimum(np.abs(r - self.R), np.abs(r - 1.0 / self.R))

    def in_spectral_curve(self, z, tol: float = 0.0) -> np.ndarray:
        """True where ``z`` lies within ``tol`` of the unit circle or the
        real segments ``1/ell <= |x| <= ell``."""
        z = np.asarray(z, dtype=complex)
        on_circle = np.abs(np.abs(z) - 1.0) <= tol
        ax = np.abs(z.real)
        on_segment = (np.abs(z.imag) <= tol) & (ax >= 1.0 / self.ell - tol) & (ax <= self.ell + tol)
        return on_circle | on_segment

    def with_radius(self, R: float) -> "AnnulusDomain":
        return build_domain(self.lambda0, R, self.M, self.N)


def build_domain(lambda0: float = 2.5, R: float = 3.0, M: int = 256, N: int = 64) -> AnnulusDomain:
    """Validate parameters and return the domain (its grid is ``dom.grid``)."""
    if not lambda0 >= 2.0:
        raise DomainError(f"lambda0 must be >= 2, got {lambda0}")
    ell = spectral_radius_point(lambda0)
    if not R > ell:
        raise DomainError(f"outer radius R={R} must exceed ell={ell}")
    if M % 2 or M < 8:
        raise DomainError(f"M must be even and >= 8, got {M}")
    if N < 1 or M < 4 * N:
        raise DomainError(f"need N >= 1 and M >= 4N, got M={M}, N={N}")
    return AnnulusDomain(float(lambda0), float(R), int(M), int(N))


def contour_integral(f, grid: ContourGrid | None = None, outer_only: bool = False) -> complex:
    """Trapezoidal approximation of the integral of ``f`` over ``C``.

    ``f`` is a GridFunction or a raw array of ``2M`` node values (then
    ``grid`` is required).
    """
    values = getattr(f, "values", f)
    grid = grid if grid is not None else f.grid
    w = grid.weights
    if outer_only:
        return complex(np.sum(values[: grid.M] * w[: grid.M]))
    return complex(np.sum(values * w))
