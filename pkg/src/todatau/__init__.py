"""Toda flow from tau functions of Toeplitz symbols on an annulus."""
from .contour import AnnulusDomain, ContourGrid, build_domain, contour_integral
from .errors import (CertFail, ConfigError, DomainError, NonPositiveTau, NotInvertible, NumericalError,
                     PoleHit, TodaError, VerificationFailure)
from .flow import (FlowEngine, FlowSpec, Trajectory, coefficients_from_symbol, hierarchy_element, p_hat, toda_apply,
                   toda_exp_tz, toda_trajectory)
from .jacobi import JacobiCoefficients, m_from_q, validate_M, weyl_minus, weyl_plus
from .oracle import LatticeState, integrate, oracle_drift, oracle_trajectory
from .symbol import GroupElement, VectorSymbol, msymbol_from_m
from .tau import tau_det, tau_q2, tau_qzeta, tau_zpow
from .toeplitz import SymbolFrame, build_T, phi_n

__version__ = "0.1.0"
