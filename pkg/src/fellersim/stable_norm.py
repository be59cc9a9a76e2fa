"""Normalization constant for the isotropic stable jump density.

``stable_constant(alpha, d)`` returns c(alpha, d) such that

    int_{R^d} (1 - cos(y . xi)) c |y|^{-d-alpha} dy = |xi|^alpha.

The constant is fixed numerically from this defining identity rather than
from a transcribed closed form: reduce to the one-dimensional integral
I(alpha) = int_0^inf (1 - cos u) u^{-1-alpha} du (regular head plus an
oscillatory tail handled by weighted quadrature), and for d >= 2 multiply by
the cross-sectional factor J(d, alpha) = int_{R^{d-1}} (1+|v|^2)^{-(d+alpha)/2} dv.

For vectorized evaluation (state-dependent stability index) the constant is
tabulated on an alpha grid and interpolated.
"""
from __future__ import annotations

import warnings
from functools import lru_cache

import numpy as np
from scipy import integrate, special
from scipy.interpolate import PchipInterpolator

ALPHA_MIN = 0.02
ALPHA_MAX = 1.995


def sphere_area(d: int) -> float:
    """Surface measure of the unit sphere in R^d (2 for d = 1)."""
    return float(2.0 * np.pi ** (d / 2.0) / special.gamma(d / 2.0))


@lru_cache(maxsize=None)
def _one_minus_cos_integral(alpha: float) -> float:
    # head: 1 - cos u = 2 sin^2(u/2) avoids cancellation near 0
    head, _ = integrate.quad(
        lambda u: 2.0 * np.sin(0.5 * u) ** 2 * u ** (-1.0 - alpha),
        0.0, 1.0, epsabs=1e-13, epsrel=1e-11, limit=200)
    # tail: int_1^inf u^{-1-a} du - int_1^inf cos(u) u^{-1-a} du
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        osc, _ = integrate.quad(
            lambda u: u ** (-1.0 - alpha), 1.0, np.inf,
            weight="cos", wvar=1.0, epsabs=1e-13, epsrel=1e-11, limit=200)
    return head + 1.0 / alpha - osc


@lru_cache(maxsize=None)
def _cross_section_factor(d: int, alpha: float) -> float:
    if d == 1:
        return 1.0
    m = d - 1
    s = 0.5 * (d + alpha)
    radial, _ = integrate.quad(
        lambda rho: rho ** (m - 1) * (1.0 + rho * rho) ** (-s),
        0.0, np.inf, epsabs=1e-13, epsrel=1e-11, limit=200)
    return sphere_area(m) * radial


@lru_cache(maxsize=None)
def stable_constant(alpha: float, d: int = 1) -> float:
    """c(alpha, d) from the defining quadrature identity; alpha in (0, 2)."""
    if not ALPHA_MIN / 2 < alpha < 2.0:
        raise ValueError(f"stable index alpha={alpha} outside (0, 2)")
    return 1.0 / (2.0 * _one_minus_cos_integral(alpha) * _cross_section_factor(d, alpha))


@lru_cache(maxsize=None)
def _interpolant(d: int) -> PchipInterpolator:
    grid = np.linspace(ALPHA_MIN, ALPHA_MAX, 120)
    vals = np.array([stable_constant(float(a), d) for a in grid])
    return PchipInterpolator(grid, np.log(vals))


def stable_constant_array(alpha, d: int = 1) -> np.ndarray:
    """Vectorized c(alpha, d) via a tabulated interpolant (alpha in [0.02, 1.995])."""
    a = np.asarray(alpha, dtype=float)
    if np.any(a < ALPHA_MIN) or np.any(a > ALPHA_MAX):
        raise ValueError("vectorized stable constant supports alpha in "
                         f"[{ALPHA_MIN}, {ALPHA_MAX}]; got range "
                         f"[{a.min()}, {a.max()}]")
    return np.exp(_interpolant(d)(a))
