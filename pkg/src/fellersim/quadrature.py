"""Quadrature settings and small wrappers around scipy.integrate."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import QuadratureError


@dataclass(frozen=True)
class QuadSpec:
    """Resolution knobs shared by the integral-heavy routines."""

    epsabs: float = 1e-10
    epsrel: float = 1e-8
    limit: int = 200
    gh_order: int = 96          # Gauss-Hermite order per axis (d >= 2)
    im_tol: float = 1e-5        # allowed spurious imaginary part, relative
    dft_size: int = 8192        # grid size for discrete Fourier transforms
    strict: bool = False        # escalate convergence warnings to errors


DEFAULT_QUAD = QuadSpec()


def quad(fn, a, b, spec: QuadSpec = DEFAULT_QUAD, *, name: str = "integral", **kwargs):
    """scipy.integrate.quad with uniform tolerance handling.

    With ``spec.strict`` a non-convergence warning is raised as a
    QuadratureError naming the integral, otherwise it is suppressed and the
    best estimate returned.
    """
    limit = kwargs.pop("limit", spec.limit)
    with warnings.catch_warnings():
        if spec.strict:
            warnings.simplefilter("error", integrate.IntegrationWarning)
        else:
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
        try:
            val, _err = integrate.quad(
                fn, a, b, epsabs=spec.epsabs, epsrel=spec.epsrel,
                limit=limit, **kwargs)
        except integrate.IntegrationWarning as exc:  # strict mode only
            raise QuadratureError(f"{name} did not converge on [{a}, {b}]: {exc}") from exc
    return val


def complex_quad(fn, a, b, spec: QuadSpec = DEFAULT_QUAD, *, name: str = "integral", **kwargs):
    """Integrate a complex-valued integrand (real and imaginary parts separately)."""
    re = quad(lambda t: fn(t).real, a, b, spec, name=f"Re {name}", **kwargs)
    im = quad(lambda t: fn(t).imag, a, b, spec, name=f"Im {name}", **kwargs)
    return re + 1j * im


def gauss_hermite_nodes(order: int):
    """Nodes/weights (u, w) for integrals of the form int exp(-u^2) g(u) du."""
    u, w = np.polynomial.hermite.hermgauss(order)
    return u, w
