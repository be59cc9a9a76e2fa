"""Applying the operator of a symbol to smooth test functions, two ways.

``apply_fourier`` evaluates

    A f(x) = - int q(x, xi) e^{i x.xi} fhat(xi) d xi,
    fhat(xi) = (2 pi)^{-d} int e^{-i y.xi} f(y) dy,

using the closed-form transform for Gaussian-family test functions (adaptive
quadrature in d = 1, tensor Gauss-Hermite in d = 2, 3) and a dense discrete
transform with spectral truncation otherwise (d = 1).

``apply_characteristics`` evaluates the same operator through the triplet:

    b(x).grad f(x) + 1/2 tr(Q(x) Hess f(x))
    + int [ f(x+y) - f(x) - grad f(x).y 1_{(0,1)}(|y|) ] nu(x, dy).

Below the scale ``delta`` the jump integrand is replaced by its second-order
Taylor term integrated against the truncated second moment, which avoids
catastrophic cancellation; the neglected remainder is O(int_{|y|<delta}
|y|^3 nu).  The two routes are independent and cross-check each other.

``lyapunov_constant`` computes sup |L w| / w for w(x) = 1/(1+|x|^2) or
w(x) = |x|^2 + 1 with L built on the small-jump truncation of the symbol;
these are the Gronwall rates used by the statistical verifier.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import (ConfigurationError, HypothesisViolationError,
                     NumericalConsistencyError, QuadratureError)
from .levy_measures import LevyMeasure, RestrictedLevyMeasure
from .quadrature import DEFAULT_QUAD, QuadSpec, gauss_hermite_nodes, quad
from .reports import fit_log_trend
from .symbols import CharacteristicsView, SymbolField, direction_sequence

_INF = float("inf")


@dataclass(frozen=True)
class TestFunction:
    """Smooth test function with analytic derivatives and (optionally) a
    closed-form Fourier transform under the (2 pi)^{-d} convention."""

    family: str
    dim: int
    value: Callable = field(repr=False)
    gradient: Callable = field(repr=False)
    hessian: Callable = field(repr=False)
    sup_norm: float = 1.0
    decay_radius: float = _INF     # |f| below 1e-16 outside this radius
    fourier: Callable | None = field(repr=False, default=None)
    label: str = ""
    scale: float = 1.0             # gaussian-family width (transform decay)
    center: tuple = ()             # gaussian-family center


def gaussian_bump(height: float = 1.0, center=0.0, scale: float = 1.0,
                  dim: int = 1) -> TestFunction:
    """f(x) = height * exp(-|x - center|^2 / (2 scale^2))."""
    c = np.atleast_1d(np.asarray(center, dtype=float))
    if c.shape != (dim,):
        c = np.full(dim, float(np.atleast_1d(center)[0]))
    s2 = scale * scale

    def value(x):
        x = np.asarray(x, dtype=float)
        if dim == 1:
            d2 = (x - c[0]) ** 2
        else:
            d2 = np.sum((np.atleast_2d(x) - c) ** 2, axis=-1)
            if np.ndim(x) == 1:
                d2 = d2[0]
        return height * np.exp(-0.5 * d2 / s2)

    def grad(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return -(x - c) / s2 * value(x if dim > 1 else x[0])

    def hess(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        u = (x - c) / s2
        return (np.outer(u, u) - np.eye(dim) / s2) * value(x if dim > 1 else x[0])

    def fourier(xi):
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        return (height * scale ** dim * (2.0 * math.pi) ** (-0.5 * dim)
                * np.exp(-1j * float(np.dot(xi, c)) - 0.5 * s2 * float(np.dot(xi, xi))))

    return TestFunction("gaussian_bump", dim, value, grad, hess,
                        sup_norm=height,
                        decay_radius=float(np.linalg.norm(c)) + 9.5 * scale,
                        fourier=fourier, label=f"bump(h={height},c={center},s={scale})",
                        scale=scale, center=tuple(c))


def polynomial_times_gaussian(coeffs, scale: float = 1.0) -> TestFunction:
    """f(x) = (c0 + c1 x + c2 x^2) exp(-x^2/(2 scale^2)), d = 1."""
    c0, c1, c2 = (list(coeffs) + [0.0, 0.0, 0.0])[:3]
    s2 = scale * scale

    def value(x):
        x = np.asarray(x, dtype=float)
        return (c0 + c1 * x + c2 * x * x) * np.exp(-0.5 * x * x / s2)

    def grad(x):
        x = float(np.atleast_1d(x)[0])
        g = math.exp(-0.5 * x * x / s2)
        return np.array([((c1 + 2 * c2 * x) - (c0 + c1 * x + c2 * x * x) * x / s2) * g])

    def hess(x):
        x = float(np.atleast_1d(x)[0])
        g = math.exp(-0.5 * x * x / s2)
        p = c0 + c1 * x + c2 * x * x
        dp = c1 + 2 * c2 * x
        val = (2 * c2 - 2 * dp * x / s2 + p * (x * x / s2 - 1.0) / s2) * g
        return np.array([[val]])

    def fourier(xi):
        xi = float(np.atleast_1d(xi)[0])
        ghat = scale / math.sqrt(2.0 * math.pi) * math.exp(-0.5 * s2 * xi * xi)
        # multiplication by x corresponds to i d/dxi on the transform
        return (c0 + c1 * 1j * (-s2 * xi) + c2 * (s2 - s2 * s2 * xi * xi)) * ghat

    xs = np.linspace(-12 * scale, 12 * scale, 4001)
    sup = float(np.max(np.abs(value(xs))))
    return TestFunction("polynomial_times_gaussian", 1, value, grad, hess,
                        sup_norm=sup, decay_radius=14.0 * scale, fourier=fourier,
                        label=f"polygauss({c0},{c1},{c2})", scale=scale,
                        center=(0.0,))


def _bump_h(t):
    return math.exp(-1.0 / t) if t > 0 else 0.0


def _bump_h1(t):
    return math.exp(-1.0 / t) / (t * t) if t > 0 else 0.0


def _bump_h2(t):
    return math.exp(-1.0 / t) * (1.0 / t ** 4 - 2.0 / t ** 3) if t > 0 else 0.0


def smooth_cutoff(rho: float, dim: int = 1) -> TestFunction:
    """Smooth chi with 1 on B(0, rho) and 0 outside B(0, rho + 1)."""
    if rho <= 0:
        raise ConfigurationError("cutoff radius must be positive")

    def psi_parts(t):
        u, v = _bump_h(rho + 1.0 - t), _bump_h(t - rho)
        u1, v1 = -_bump_h1(rho + 1.0 - t), _bump_h1(t - rho)
        u2, v2 = _bump_h2(rho + 1.0 - t), _bump_h2(t - rho)
        return u, v, u1, v1, u2, v2

    def psi(t):
        if t <= rho:
            return 1.0
        if t >= rho + 1.0:
            return 0.0
        u, v, *_ = psi_parts(t)
        return u / (u + v)

    def psi1(t):
        if t <= rho or t >= rho + 1.0:
            return 0.0
        u, v, u1, v1, _, _ = psi_parts(t)
        return (u1 * v - u * v1) / (u + v) ** 2

    def psi2(t):
        if t <= rho or t >= rho + 1.0:
            return 0.0
        u, v, u1, v1, u2, v2 = psi_parts(t)
        return ((u2 * v - u * v2) * (u + v) - 2.0 * (u1 * v - u * v1) * (u1 + v1)) \
            / (u + v) ** 3

    def value(x):
        x = np.asarray(x, dtype=float)
        if dim == 1:
            flat = np.abs(np.atleast_1d(x))
            out = np.array([psi(t) for t in flat])
            return out.reshape(np.shape(x)) if np.ndim(x) else float(out[0])
        r = np.linalg.norm(np.atleast_2d(x), axis=-1)
        out = np.array([psi(t) for t in r])
        return out if np.ndim(x) > 1 else float(out[0])

    def grad(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        r = float(np.linalg.norm(x))
        if r == 0.0:
            return np.zeros(dim)
        return psi1(r) * x / r

    def hess(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        r = float(np.linalg.norm(x))
        if r == 0.0:
            return psi2(0.0) * np.eye(dim)
        u = x / r
        return psi2(r) * np.outer(u, u) + psi1(r) / r * (np.eye(dim) - np.outer(u, u))

    return TestFunction("smooth_cutoff", dim, value, grad, hess, sup_norm=1.0,
                        decay_radius=rho + 1.0, fourier=None,
                        label=f"cutoff(rho={rho})")


# ---- Fourier route ----

def _fourier_grid_transform(f: TestFunction, spec: QuadSpec):
    """fhat on a dense grid by FFT (d = 1), with spectral truncation."""
    big_l = f.decay_radius + 6.0
    n = spec.dft_size
    dx = 2.0 * big_l / n
    xs = -big_l + dx * np.arange(n)
    vals = np.asarray(f.value(xs), dtype=float)
    xi = 2.0 * math.pi * np.fft.fftfreq(n, d=dx)
    fhat = dx / (2.0 * math.pi) * np.exp(1j * xi * big_l) * np.fft.fft(vals)
    order = np.argsort(xi)
    xi, fhat = xi[order], fhat[order]
    keep = np.abs(fhat) >= 1e-12 * np.max(np.abs(fhat))
    return xi[keep], fhat[keep], xi[1] - xi[0]


def apply_fourier(symbol: SymbolField, f: TestFunction, x,
                  spec: QuadSpec = DEFAULT_QUAD) -> float:
    """A f(x) through the frequency integral; returns the real part.

    Raises NumericalConsistencyError when the spurious imaginary part
    exceeds ``spec.im_tol`` relatively.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if symbol.dim != f.dim:
        raise ConfigurationError("symbol and test function dimensions differ")
    d = symbol.dim

    if d == 1:
        if f.fourier is not None:
            big_l = 12.0 / f.scale   # gaussian transforms die by |s xi| ~ 9
            xv = float(x[0])

            def integrand(xi):
                return -symbol(x, np.array([xi])) * np.exp(1j * xv * xi) \
                    * f.fourier(np.array([xi]))

            re = quad(lambda t: integrand(t).real, -big_l, big_l, spec,
                      name="fourier apply (real)", points=[0.0])
            im = quad(lambda t: integrand(t).imag, -big_l, big_l, spec,
                      name="fourier apply (imag)", points=[0.0])
            val = re + 1j * im
        else:
            xi, fhat, dxi = _fourier_grid_transform(f, spec)
            xv = float(x[0])
            qs = np.array([symbol(x, np.array([w])) for w in xi])
            val = -np.sum(qs * np.exp(1j * xv * xi) * fhat) * dxi
    elif d in (2, 3):
        if f.family != "gaussian_bump":
            raise ConfigurationError(
                "frequency-route application in d >= 2 supports gaussian bumps only")
        val = _apply_fourier_gh(symbol, f, x, spec)
    else:
        raise ConfigurationError("frequency route supports d <= 3")

    if abs(val.imag) > spec.im_tol * (1.0 + abs(val.real)):
        raise NumericalConsistencyError(
            f"imaginary residual {val.imag:.3e} exceeds tolerance at x={x}")
    return float(val.real)


def _apply_fourier_gh(symbol, f, x, spec):
    # f(y) = A exp(-|y-c|^2/(2 s^2)); substitute xi = sqrt(2) u / s so the
    # transform's gaussian factor becomes the Gauss-Hermite weight exp(-|u|^2)
    d = symbol.dim
    order = spec.gh_order if d == 2 else min(spec.gh_order, 32)
    u, w = gauss_hermite_nodes(order)
    s = f.scale
    shift = x - np.asarray(f.center, dtype=float)
    grids = np.meshgrid(*([u] * d), indexing="ij")
    weights = np.ones_like(grids[0])
    for g in np.meshgrid(*([w] * d), indexing="ij"):
        weights = weights * g
    total = 0.0 + 0.0j
    coeff = f.sup_norm * math.pi ** (-0.5 * d)
    flat_xi = [math.sqrt(2.0) / s * g for g in grids]
    it = np.nditer(weights, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        xi = np.array([flat_xi[k][idx] for k in range(d)])
        total += weights[idx] * symbol(x, xi) * np.exp(1j * float(np.dot(xi, shift)))
    return -coeff * total


# ---- characteristics route ----

def _jump_integral(nu: LevyMeasure, f_value, f_grad, f_hess, x, spec: QuadSpec,
                   delta: float, decay_radius: float, dim: int) -> float:
    """int [f(x+y) - f(x) - grad f(x).y 1_{(0,1)}(|y|)] nu(dy)."""
    total = 0.0
    fx = float(f_value(x if dim > 1 else float(x[0])))
    gx = np.atleast_1d(f_grad(x))

    for y, mass in nu.atoms():
        r = float(np.linalg.norm(y))
        fy = float(f_value(x + y if dim > 1 else float(x[0] + y[0])))
        comp = float(np.dot(gx, y)) if r < 1.0 else 0.0
        total += mass * (fy - fx - comp)

    dens_probe = None if nu.atoms() else nu.density(np.r_[1.0, np.zeros(dim - 1)])
    has_density = dens_probe is not None and nu.mass_between(delta, _INF) > 0.0
    if not has_density:
        return total

    # below delta: second-order Taylor term against the truncated second moment
    hx = np.atleast_2d(f_hess(x))
    m2_small = nu.second_moment_between(0.0, delta)
    total += 0.5 * float(np.trace(hx)) / dim * m2_small

    upper = min(nu.support_upper(),
                float(np.linalg.norm(x)) + decay_radius + 1.0)
    if not math.isfinite(upper):
        raise QuadratureError(
            "jump integral has no usable truncation radius "
            f"(unbounded measure, non-decaying function) at x={x}")

    if dim == 1:
        xv = float(x[0])

        def compensated(y):
            return float(f_value(xv + y)) - fx - float(gx[0]) * y

        def plain(y):
            return float(f_value(xv + y)) - fx

        for sign in (1.0, -1.0):
            def gdens(y, s=sign):
                return nu.density(np.array([s * abs(y)]))
            lo, mid, hi = delta, min(1.0, upper), upper
            if mid > lo:
                total += quad(lambda y, s=sign: compensated(s * y) * gdens(y, s),
                              lo, mid, spec, name="jump integral (compensated)")
            if hi > mid:
                total += quad(lambda y, s=sign: plain(s * y) * gdens(y, s),
                              mid, hi, spec, name="jump integral (large)")
    else:
        dirs = direction_sequence(dim, 24)

        def shell(r):
            avg = np.mean([float(f_value(x + r * u)) for u in dirs]) - fx
            dens_r = nu.density(np.r_[r, np.zeros(dim - 1)])
            from .stable_norm import sphere_area
            return avg * dens_r * sphere_area(dim) * r ** (dim - 1)

        total += quad(shell, delta, upper, spec, name="jump integral (radial)")

    # beyond the truncation radius the function has decayed: only -f(x) remains
    tail = nu.tail_mass(upper)
    if math.isfinite(tail):
        total += -fx * tail
    return total


def apply_characteristics(symbol: SymbolField, f: TestFunction, x,
                          spec: QuadSpec = DEFAULT_QUAD, delta: float = 1e-3,
                          view: CharacteristicsView | None = None) -> float:
    """A f(x) through drift, diffusion, and compensated jump terms."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if view is None:
        view = symbol.characteristics(x)
    gx = np.atleast_1d(f.gradient(x))
    hx = np.atleast_2d(f.hessian(x))
    val = float(np.dot(view.drift, gx)) + 0.5 * float(np.trace(view.diffusion @ hx))
    val += _jump_integral(view.jump, f.value, f.gradient, f.hessian, x, spec,
                          delta, f.decay_radius, symbol.dim)
    return val


# ---- Lyapunov rates ----

def _weight_function(kind: str, dim: int):
    if kind == "u":
        def value(x):
            x = np.asarray(x, dtype=float)
            s2 = x * x if np.ndim(x) == 0 or dim == 1 else np.sum(np.atleast_2d(x) ** 2, -1)
            return 1.0 / (1.0 + s2)

        def grad(x):
            x = np.atleast_1d(np.asarray(x, dtype=float))
            u = 1.0 / (1.0 + float(np.dot(x, x)))
            return -2.0 * x * u * u

        def hess(x):
            x = np.atleast_1d(np.asarray(x, dtype=float))
            u = 1.0 / (1.0 + float(np.dot(x, x)))
            return -2.0 * u * u * np.eye(dim) + 8.0 * u ** 3 * np.outer(x, x)

        return value, grad, hess
    if kind == "v":
        def value(x):
            x = np.asarray(x, dtype=float)
            s2 = x * x if np.ndim(x) == 0 or dim == 1 else np.sum(np.atleast_2d(x) ** 2, -1)
            return 1.0 + s2

        def grad(x):
            return 2.0 * np.atleast_1d(np.asarray(x, dtype=float))

        def hess(x):
            return 2.0 * np.eye(dim)

        return value, grad, hess
    raise ConfigurationError(f"unknown Lyapunov weight kind {kind!r}")


def lyapunov_constant(symbol: SymbolField, kind: str, radii=None,
                      spec: QuadSpec = DEFAULT_QUAD, delta: float = 1e-3) -> float:
    """sup over the probe grid of |L w(x)| / w(x), w = u or v.

    L acts through the characteristics with the jump measure truncated to
    radii below max(1, |x|/2) (the small-jump part), so the integral against
    the quadratic weight converges.  Raises HypothesisViolationError when the
    ratio diverges along the grid.
    """
    if radii is None:
        radii = tuple(2.0 ** k for k in range(6))
    value, grad, hess = _weight_function(kind, symbol.dim)
    dirs = direction_sequence(symbol.dim, 2 if symbol.dim == 1 else 4)
    probes = [np.zeros(symbol.dim)] + [r * u for r in radii for u in dirs]

    ratios, rads = [], []
    for x in probes:
        view = symbol.characteristics(x)
        cutoff = max(1.0, 0.5 * float(np.linalg.norm(x)))
        small = RestrictedLevyMeasure(view.jump, 0.0, cutoff)
        view_s = CharacteristicsView(view.drift, view.diffusion, small)
        gx = np.atleast_1d(grad(x))
        hx = np.atleast_2d(hess(x))
        val = float(np.dot(view_s.drift, gx)) + 0.5 * float(np.trace(view_s.diffusion @ hx))
        val += _jump_integral(small, value, grad, hess, x, spec, delta,
                              _INF, symbol.dim)
        w = float(value(x if symbol.dim > 1 else float(x[0])))
        ratios.append(abs(val) / w)
        rads.append(max(float(np.linalg.norm(x)), 1e-6))

    fit = fit_log_trend(np.array(rads), np.array(ratios), head_fraction=0.5)
    if fit.slope is not None and fit.slope > 0.25 and fit.final > 10.0 * max(fit.first, 1e-12):
        raise HypothesisViolationError(
            f"|L{kind}|/{kind} grows along the radius grid (slope {fit.slope:.2f}); "
            "the truncated-symbol hypothesis fails")
    return float(np.max(ratios))
