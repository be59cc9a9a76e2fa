"""Frozen-state jump measures with mass, moment, ball, and sampling queries.

Every measure object answers a common set of questions about a sigma-finite
measure on R^d minus the origin integrating min(|y|^2, 1):

* ``mass_between(a, b)``            nu({a <= |y| < b})
* ``tail_mass(r)``                  nu({|y| >= r})
* ``second_moment_between(a, b)``   int_{a <= |y| < b} |y|^2 nu(dy)
* ``truncated_second_moment(r)``    int_{|y| < r} |y|^2 nu(dy)
* ``first_moment_between(a, b)``    int_{a <= |y| < b} y nu(dy)  (vector)
* ``ball_mass(center, r, window)``  nu({|y - center| <= r, window[0] <= |y| < window[1]})
* ``sample_between(rng, n, a, b)``  draws from the normalized restriction
* ``atoms()``                       point masses, if any
* ``exp_tail_envelope()``           (c, rate) with density <= c exp(-rate |y|)
                                    outside the unit ball, or None

Shells are half-open ``[a, b)``; balls are closed.  Concrete families:
zero, purely atomic, isotropic radial densities (with closed-form overrides
for power-law tails), and Gaussian mixtures driven by a subordinator density
(covers the tempered/relativistic-type families).  Wrappers implement scalar
pushforward ``y -> s y``, pointwise scaling, and radial restriction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special
from scipy.stats import ncx2

from .errors import ConfigurationError
from .quadrature import DEFAULT_QUAD, QuadSpec, quad
from .stable_norm import sphere_area, stable_constant

_INF = float("inf")
_SQRT2 = math.sqrt(2.0)


def _norm_cdf(z):
    return 0.5 * special.erfc(-np.asarray(z) / _SQRT2)


def _norm_pdf(z):
    z = np.asarray(z)
    return np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)


def _gauss_interval_mass(lo, hi, mu, var):
    s = math.sqrt(var)
    return float(_norm_cdf((hi - mu) / s) - _norm_cdf((lo - mu) / s))


def _gauss_interval_m1(lo, hi, mu, var):
    # int_lo^hi y n(y; mu, var) dy = mu dPhi - var (n(hi) - n(lo))
    s = math.sqrt(var)
    a, b = (lo - mu) / s, (hi - mu) / s
    return float(mu * (_norm_cdf(b) - _norm_cdf(a)) - s * (_norm_pdf(b) - _norm_pdf(a)))


def _gauss_interval_m2(lo, hi, mu, var):
    # int_lo^hi y^2 n dy = (mu^2 + var) dPhi - s [(hi + mu) n(b) - (lo + mu) n(a)]
    s = math.sqrt(var)
    a, b = (lo - mu) / s, (hi - mu) / s
    dphi = _norm_cdf(b) - _norm_cdf(a)
    return float((mu * mu + var) * dphi - s * ((hi + mu) * _norm_pdf(b) - (lo + mu) * _norm_pdf(a)))


class LevyMeasure:
    """Interface and shared helpers; subclasses fill in the primitives."""

    dim: int = 1

    def atoms(self) -> list[tuple[np.ndarray, float]]:
        return []

    def mass_between(self, a: float, b: float) -> float:
        raise NotImplementedError

    def second_moment_between(self, a: float, b: float) -> float:
        raise NotImplementedError

    def first_moment_between(self, a: float, b: float) -> np.ndarray:
        raise NotImplementedError

    def ball_mass(self, center, radius: float, window=(0.0, _INF)) -> float:
        raise NotImplementedError

    def sample_between(self, rng, n: int, a: float, b: float) -> np.ndarray:
        raise NotImplementedError

    def exp_tail_envelope(self):
        return None

    def density(self, y):
        """Pointwise density against Lebesgue measure, if one exists."""
        return None

    def support_upper(self) -> float:
        """A radius beyond which the measure has no mass (inf if unbounded)."""
        return _INF

    # ---- derived queries ----
    def tail_mass(self, r: float) -> float:
        return self.mass_between(r, _INF)

    def truncated_second_moment(self, r: float) -> float:
        return self.second_moment_between(0.0, r)

    def small_large_moment(self) -> float:
        """int min(|y|^2, 1) nu(dy), the local-boundedness jump quantity."""
        return self.truncated_second_moment(1.0) + self.tail_mass(1.0)


class ZeroLevyMeasure(LevyMeasure):
    def __init__(self, dim: int = 1):
        self.dim = dim

    def mass_between(self, a, b):
        return 0.0

    def second_moment_between(self, a, b):
        return 0.0

    def first_moment_between(self, a, b):
        return np.zeros(self.dim)

    def ball_mass(self, center, radius, window=(0.0, _INF)):
        return 0.0

    def sample_between(self, rng, n, a, b):
        raise ConfigurationError("cannot sample from the zero measure")

    def density(self, y):
        return 0.0

    def support_upper(self):
        return 0.0


class AtomLevyMeasure(LevyMeasure):
    """Finite measure given by point masses (compound-Poisson style)."""

    def __init__(self, atoms, dim: int = 1):
        self.dim = dim
        cleaned = []
        for y, mass in atoms:
            y = np.atleast_1d(np.asarray(y, dtype=float))
            if y.shape != (dim,):
                raise ConfigurationError(f"atom location {y} does not have dimension {dim}")
            if np.linalg.norm(y) == 0.0:
                raise ConfigurationError("jump atoms must sit away from the origin")
            if mass <= 0:
                raise ConfigurationError("atom masses must be positive")
            cleaned.append((y, float(mass)))
        self._atoms = cleaned

    def atoms(self):
        return list(self._atoms)

    def _select(self, a, b):
        return [(y, m) for y, m in self._atoms if a <= np.linalg.norm(y) < b]

    def mass_between(self, a, b):
        return float(sum(m for _, m in self._select(a, b)))

    def second_moment_between(self, a, b):
        return float(sum(m * np.dot(y, y) for y, m in self._select(a, b)))

    def first_moment_between(self, a, b):
        out = np.zeros(self.dim)
        for y, m in self._select(a, b):
            out += m * y
        return out

    def ball_mass(self, center, radius, window=(0.0, _INF)):
        c = np.atleast_1d(np.asarray(center, dtype=float))
        total = 0.0
        for y, m in self._atoms:
            r_y = np.linalg.norm(y)
            if window[0] <= r_y < window[1] and np.linalg.norm(y - c) <= radius:
                total += m
        return total

    def support_upper(self):
        return max(np.linalg.norm(y) for y, _ in self._atoms)

    def sample_between(self, rng, n, a, b):
        sel = self._select(a, b)
        if not sel:
            raise ConfigurationError(f"no atoms with radius in [{a}, {b})")
        weights = np.array([m for _, m in sel])
        idx = rng.choice(len(sel), size=n, p=weights / weights.sum())
        return np.stack([sel[i][0] for i in idx])


def _uniform_sphere(rng, n, d):
    if d == 1:
        return rng.choice([-1.0, 1.0], size=(n, 1))
    v = rng.standard_normal((n, d))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


class _RadialTable:
    """Inverse-CDF table for the radial shell-mass density on [lo, hi]."""

    def __init__(self, shell_density, lo, hi, n_nodes=3000):
        grid = np.geomspace(lo, hi, n_nodes)
        vals = shell_density(grid)
        cum = integrate.cumulative_trapezoid(vals, grid, initial=0.0)
        self.grid = grid
        self.cum = cum
        self.total = cum[-1]

    def sample(self, rng, n):
        u = rng.random(n) * self.total
        return np.interp(u, self.cum, self.grid)


class RadialDensityLevyMeasure(LevyMeasure):
    """Isotropic density nu(dy) = g(|y|) dy with optional closed-form overrides."""

    def __init__(self, dim, profile, *, infinite_origin,
                 mass_fn=None, second_moment_fn=None, inverse_shell_sampler=None,
                 envelope=None, spec: QuadSpec = DEFAULT_QUAD):
        self.dim = dim
        self.profile = profile
        self.infinite_origin = infinite_origin
        self._mass_fn = mass_fn                      # mass_fn(a, b) closed form
        self._m2_fn = second_moment_fn
        self._inverse = inverse_shell_sampler        # inverse(u, a, b) vectorized
        self._envelope = envelope
        self._spec = spec
        self._area = sphere_area(dim)
        self._tables: dict[tuple, _RadialTable] = {}

    def density(self, y):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        r = float(np.linalg.norm(y))
        return float(self.profile(r))

    def shell_density(self, s):
        s = np.asarray(s, dtype=float)
        return self._area * s ** (self.dim - 1) * self.profile(s)

    def mass_between(self, a, b):
        if b <= a:
            return 0.0
        if self._mass_fn is not None:
            return self._mass_fn(a, b)
        if b == _INF:
            return quad(lambda s: self.shell_density(s), a, _INF, self._spec,
                        name="radial tail mass")
        return quad(lambda s: self.shell_density(s), a, b, self._spec,
                    name="radial shell mass")

    def second_moment_between(self, a, b):
        if b <= a:
            return 0.0
        if self._m2_fn is not None:
            return self._m2_fn(a, b)
        hi = b if b < _INF else None
        if hi is None:
            return quad(lambda s: s * s * self.shell_density(s), a, _INF, self._spec,
                        name="radial second moment")
        return quad(lambda s: s * s * self.shell_density(s), a, hi, self._spec,
                    name="radial second moment")

    def first_moment_between(self, a, b):
        return np.zeros(self.dim)   # isotropic

    def ball_mass(self, center, radius, window=(0.0, _INF)):
        c = np.atleast_1d(np.asarray(center, dtype=float))
        big_r = float(np.linalg.norm(c))
        lo, hi = window
        if big_r <= radius and lo <= 0.0 and self.infinite_origin:
            return _INF
        if self.dim == 1:
            z = float(c[0])
            left, right = z - radius, z + radius
            total = 0.0
            # positive side radii
            plo, phi = max(left, 0.0), max(right, 0.0)
            plo, phi = max(plo, lo), min(phi, hi)
            if phi > plo:
                total += 0.5 * self.mass_between(plo, phi)
            # negative side radii
            nlo, nhi = max(-right, 0.0), max(-left, 0.0)
            nlo, nhi = max(nlo, lo), min(nhi, hi)
            if nhi > nlo:
                total += 0.5 * self.mass_between(nlo, nhi)
            return total
        if self.dim in (2, 3):
            s_lo = max(lo, max(big_r - radius, 0.0))
            s_hi = min(hi, big_r + radius)
            if s_hi <= s_lo:
                return 0.0

            def cap(s):
                if big_r == 0.0:
                    frac = 1.0 if s <= radius else 0.0
                else:
                    cosq = (s * s + big_r * big_r - radius * radius) / (2.0 * s * big_r)
                    cosq = min(1.0, max(-1.0, cosq))
                    theta = math.acos(cosq)
                    frac = theta / math.pi if self.dim == 2 else 0.5 * (1.0 - cosq)
                return frac * self._area * s ** (self.dim - 1) * float(self.profile(s))

            return quad(cap, s_lo, s_hi, self._spec, name="radial ball mass")
        raise ConfigurationError(f"ball mass not implemented for d={self.dim}")

    def exp_tail_envelope(self):
        return self._envelope

    def sample_between(self, rng, n, a, b):
        if self._inverse is not None:
            radii = self._inverse(rng.random(n), a, b)
        else:
            if b == _INF:
                hi = max(a * 2, 1.0)
                target = 1e-10 * self.mass_between(a, _INF)
                while self.tail_mass(hi) > target:
                    hi *= 2.0
                b = hi
            key = (round(math.log(max(a, 1e-300)), 6), round(math.log(b), 6))
            table = self._tables.get(key)
            if table is None:
                table = _RadialTable(self.shell_density, a, b)
                self._tables[key] = table
            radii = table.sample(rng, n)
        return radii[:, None] * _uniform_sphere(rng, n, self.dim)


def isotropic_stable_measure(alpha: float, dim: int = 1,
                             spec: QuadSpec = DEFAULT_QUAD) -> RadialDensityLevyMeasure:
    """Jump measure with density c(alpha,d) |y|^{-d-alpha}: exponent |xi|^alpha."""
    if not 0.0 < alpha < 2.0:
        raise ConfigurationError(f"stable index must be in (0, 2); got {alpha}")
    c = stable_constant(alpha, dim)
    area = sphere_area(dim)
    k = c * area

    def mass_fn(a, b):
        if a <= 0.0:
            return _INF
        hi_term = 0.0 if b == _INF else b ** (-alpha)
        return k * (a ** (-alpha) - hi_term) / alpha

    def m2_fn(a, b):
        if b == _INF:
            raise ConfigurationError("stable second moment diverges on unbounded shells")
        return k * (b ** (2.0 - alpha) - a ** (2.0 - alpha)) / (2.0 - alpha)

    def inverse(u, a, b):
        hi_term = 0.0 if b == _INF else b ** (-alpha)
        return (a ** (-alpha) - u * (a ** (-alpha) - hi_term)) ** (-1.0 / alpha)

    return RadialDensityLevyMeasure(
        dim, lambda r: c * r ** (-dim - alpha), infinite_origin=True,
        mass_fn=mass_fn, second_moment_fn=m2_fn, inverse_shell_sampler=inverse,
        spec=spec)


def tempered_stable_measure_1d(alpha: float, rho: float,
                               spec: QuadSpec = DEFAULT_QUAD) -> RadialDensityLevyMeasure:
    """Exponentially tempered power-law density c(alpha,1) e^{-rho |y|} |y|^{-1-alpha}."""
    if not 0.0 < alpha < 2.0 or rho <= 0:
        raise ConfigurationError("tempered density needs alpha in (0,2) and rho > 0")
    c = stable_constant(alpha, 1)
    return RadialDensityLevyMeasure(
        1, lambda r: c * np.exp(-rho * r) * r ** (-1.0 - alpha),
        infinite_origin=True, envelope=(c, rho), spec=spec)


def tempered_stable_subordinator_density(rho: float, theta: float):
    """Levy density of the subordinator with Laplace exponent (u+theta)^rho - theta^rho."""
    coeff = rho / special.gamma(1.0 - rho)

    def m(t):
        t = np.asarray(t, dtype=float)
        return coeff * t ** (-1.0 - rho) * np.exp(-theta * t)

    return m


def gamma_ratio_subordinator_density(alpha: float, rho: float):
    """Levy density for the Laplace exponent G(u+rho+alpha)/G(u+rho) - G(rho+alpha)/G(rho).

    Fixed by the Beta-integral identity
    int_0^1 (1 - x^u) x^{rho+alpha-1} (1-x)^{-1-alpha} dx
        = Gamma(-alpha) [ (rho)_alpha - (u+rho)_alpha ],
    which gives density (alpha/Gamma(1-alpha)) e^{-(rho+alpha) t} (1-e^{-t})^{-1-alpha}.
    """
    coeff = alpha / special.gamma(1.0 - alpha)

    def m(t):
        # 1 - e^{-t} via expm1 for small-t accuracy
        t = np.asarray(t, dtype=float)
        return coeff * np.exp(-(rho + alpha) * t) * (-np.expm1(-t)) ** (-1.0 - alpha)

    return m


class SubordinateBrownianLevyMeasure(LevyMeasure):
    """Jump measure of a (possibly drifting) Brownian motion time-changed by a
    pure-jump subordinator: nu(dy) = int_0^inf N(y; beta t, 2 t I) m(t) dt dy.

    ``m`` is the subordinator Levy density, ``t_scale`` a characteristic time
    used to split the quadrature, ``beta`` a drift rate (d = 1 only).
    """

    def __init__(self, dim, sub_density, t_scale=1.0, beta=0.0,
                 envelope_rate=None, spec: QuadSpec = DEFAULT_QUAD):
        if beta != 0.0 and dim != 1:
            raise ConfigurationError("drifting subordinate Brownian measures are 1-d only")
        self.dim = dim
        self.m = sub_density
        self.t_scale = t_scale
        self.beta = beta
        self._spec = spec
        self._envelope_rate = envelope_rate
        self._envelope_cache = None
        self._tables = {}
        self._profile = None    # lazy log-log density interpolant per sign

    def _t_integral(self, fn, name, features=()):
        """Integrate fn(t) m(t) dt in log-time.

        The integrands have boundary layers at t ~ r^2/4 for the radii r
        involved in the query; those scales are passed as ``features`` and
        become breakpoints, so the adaptive rule resolves them at any
        separation from the subordinator time scale.
        """
        feats = [t for t in features if t is not None and t > 0.0 and math.isfinite(t)]
        anchors = feats + [self.t_scale]
        u_lo = math.log(min(anchors)) - 80.0
        u_hi = math.log(max(anchors)) + 50.0
        pts = sorted({math.log(t) for t in anchors})

        def g(u):
            t = math.exp(u)
            return fn(t) * float(self.m(t)) * t

        return quad(g, u_lo, u_hi, self._spec, name=name, points=pts,
                    limit=max(self._spec.limit, 300))

    def _density_direct(self, y):
        y = np.asarray(y, dtype=float)
        if self.dim == 1:
            yy = float(np.atleast_1d(y)[0]) if y.ndim else float(y)

            def kern(t):
                var = 2.0 * t
                return math.exp(-0.5 * (yy - self.beta * t) ** 2 / var) / math.sqrt(2.0 * math.pi * var)

            r_eff = abs(yy)
        else:
            r2 = float(np.dot(y, y))

            def kern(t):
                var = 2.0 * t
                return math.exp(-0.5 * r2 / var) / (2.0 * math.pi * var) ** (self.dim / 2.0)

            r_eff = math.sqrt(r2)
        feats = [0.25 * r_eff * r_eff]
        if self.beta:
            feats.append(r_eff / abs(self.beta))
        return self._t_integral(kern, "subordinate density", feats)

    _PROFILE_RLO = 1e-8
    _PROFILE_NODES = 320

    def _build_profile(self):
        from scipy.interpolate import PchipInterpolator
        sides = (1.0,) if self.beta == 0.0 else (1.0, -1.0)
        interp = {}
        scale = math.sqrt(self.t_scale)
        r_lo = self._PROFILE_RLO * min(1.0, scale)
        for side in sides:
            r_hi = max(4.0, 20.0 * scale)
            while self._density_direct(np.r_[side * r_hi, np.zeros(self.dim - 1)]) > 1e-280:
                r_hi *= 2.0
            grid = np.geomspace(r_lo, r_hi, self._PROFILE_NODES)
            vals = np.array([self._density_direct(np.r_[side * r, np.zeros(self.dim - 1)])
                             for r in grid])
            good = vals > 0.0
            grid, vals = grid[good], vals[good]
            interp[side] = (PchipInterpolator(np.log(grid), np.log(vals)),
                            grid[0], grid[-1])
        self._profile = interp

    def density(self, y):
        # hot path: serve from the tabulated log-log profile
        if self._profile is None:
            self._build_profile()
        y = np.atleast_1d(np.asarray(y, dtype=float))
        r = float(np.linalg.norm(y))
        side = 1.0 if (self.beta == 0.0 or float(y[0]) >= 0.0) else -1.0
        fn, r_min, r_max = self._profile[side]
        if r_min <= r <= r_max:
            return float(math.exp(fn(math.log(r))))
        if r > r_max:
            return 0.0
        return self._density_direct(y)

    def mass_between(self, a, b):
        if b <= a:
            return 0.0

        if self.dim == 1:
            def kern(t):
                mu, var = self.beta * t, 2.0 * t
                out = _gauss_interval_mass(a, b, mu, var) + _gauss_interval_mass(-b, -a, mu, var)
                return out
        else:
            def kern(t):
                # |N(0, 2t I)|^2 / (2t) ~ chi2_d
                hi = 1.0 if b == _INF else special.gammainc(self.dim / 2.0, b * b / (4.0 * t))
                lo = special.gammainc(self.dim / 2.0, a * a / (4.0 * t))
                return hi - lo

        if a <= 0.0:
            return _INF  # infinite activity at the origin
        feats = [0.25 * a * a] + ([0.25 * b * b] if b < _INF else [])
        return self._t_integral(kern, "subordinate shell mass", feats)

    def second_moment_between(self, a, b):
        if b <= a:
            return 0.0

        if self.dim == 1:
            def kern(t):
                mu, var = self.beta * t, 2.0 * t
                hi = b if b < _INF else mu + 60.0 * math.sqrt(var) + 1.0
                return _gauss_interval_m2(a, hi, mu, var) + _gauss_interval_m2(-hi, -a, mu, var)
        else:
            def kern(t):
                # E[|N|^2; |N| < r] = 2 t d P(chi2_{d+2} <= r^2/(2t))
                hi = 1.0 if b == _INF else special.gammainc(self.dim / 2.0 + 1.0, b * b / (4.0 * t))
                lo = special.gammainc(self.dim / 2.0 + 1.0, a * a / (4.0 * t))
                return 2.0 * t * self.dim * (hi - lo)

        feats = ([0.25 * a * a] if a > 0 else []) + ([0.25 * b * b] if b < _INF else [])
        return self._t_integral(kern, "subordinate second moment", feats)

    def first_moment_between(self, a, b):
        if self.beta == 0.0:
            return np.zeros(self.dim)

        def kern(t):
            mu, var = self.beta * t, 2.0 * t
            hi = b if b < _INF else abs(mu) + 60.0 * math.sqrt(var) + 1.0
            return _gauss_interval_m1(a, hi, mu, var) + _gauss_interval_m1(-hi, -a, mu, var)

        feats = ([0.25 * a * a] if a > 0 else []) + ([0.25 * b * b] if b < _INF else [])
        return np.array([self._t_integral(kern, "subordinate first moment", feats)])

    def ball_mass(self, center, radius, window=(0.0, _INF)):
        c = np.atleast_1d(np.asarray(center, dtype=float))
        big_r = float(np.linalg.norm(c))
        lo, hi = window
        if big_r <= radius and lo <= 0.0:
            return _INF
        if self.dim == 1:
            z = float(c[0])
            # intersect [z - r, z + r] with the radial shell on both signs
            pieces = []
            for side_lo, side_hi in ((lo, hi), (-hi if hi < _INF else -_INF, -lo)):
                a = max(z - radius, side_lo)
                b = min(z + radius, side_hi)
                if b > a:
                    pieces.append((a, b))
            if not pieces:
                return 0.0

            def kern(t):
                mu, var = self.beta * t, 2.0 * t
                return sum(_gauss_interval_mass(a, b, mu, var) for a, b in pieces)
        else:
            if lo > 0.0 or hi < _INF:
                raise ConfigurationError("windowed ball mass is 1-d only for this family")

            def kern(t):
                return float(ncx2.cdf(radius * radius / (2.0 * t), self.dim,
                                      big_r * big_r / (2.0 * t)))

        gap = max(big_r - radius, 0.0)
        feats = [0.25 * gap * gap, 0.25 * (big_r + radius) ** 2]
        return self._t_integral(kern, "subordinate ball mass", feats)

    def exp_tail_envelope(self):
        if self._envelope_rate is None:
            return None
        if self._envelope_cache is None:
            rate = self._envelope_rate
            grid = np.geomspace(1.0, max(2.0, 80.0 / rate), 80)
            vals = np.array([self.density(np.r_[g, np.zeros(self.dim - 1)]) for g in grid])
            c = float(np.max(vals * np.exp(rate * grid)))
            self._envelope_cache = (c, rate)
        return self._envelope_cache

    def sample_between(self, rng, n, a, b):
        if b == _INF:
            hi = max(2.0 * a, 1.0)
            target = 1e-10 * self.mass_between(a, _INF)
            while self.mass_between(hi, _INF) > target:
                hi *= 2.0
            b = hi
        key = (round(math.log(max(a, 1e-300)), 6), round(math.log(b), 6))
        if self.beta == 0.0:
            table = self._tables.get(key)
            if table is None:
                area = sphere_area(self.dim)

                def shell(s):
                    return np.array([area * si ** (self.dim - 1) * self.density(
                        np.r_[si, np.zeros(self.dim - 1)]) for si in np.atleast_1d(s)])

                table = _RadialTable(shell, a, b, n_nodes=800)
                self._tables[key] = table
            radii = table.sample(rng, n)
            return radii[:, None] * _uniform_sphere(rng, n, self.dim)
        # asymmetric 1-d case: two signed tables
        tables = self._tables.get(key)
        if tables is None:
            pos = _RadialTable(lambda s: np.array([self.density(np.r_[si]) for si in np.atleast_1d(s)]), a, b, 800)
            neg = _RadialTable(lambda s: np.array([self.density(np.r_[-si]) for si in np.atleast_1d(s)]), a, b, 800)
            tables = (pos, neg)
            self._tables[key] = tables
        pos, neg = tables
        p_pos = pos.total / (pos.total + neg.total)
        signs = np.where(rng.random(n) < p_pos, 1.0, -1.0)
        out = np.empty(n)
        mask = signs > 0
        out[mask] = pos.sample(rng, int(mask.sum()))
        out[~mask] = -neg.sample(rng, int((~mask).sum()))
        return out[:, None]


class PushforwardLevyMeasure(LevyMeasure):
    """Image of a driver measure under y -> s y for scalar s."""

    def __init__(self, driver: LevyMeasure, scale: float):
        self.driver = driver
        self.scale = float(scale)
        self.dim = driver.dim

    def atoms(self):
        if self.scale == 0.0:
            return []
        return [(self.scale * y, m) for y, m in self.driver.atoms()]

    def mass_between(self, a, b):
        s = abs(self.scale)
        if s == 0.0:
            return 0.0
        return self.driver.mass_between(a / s, b / s if b < _INF else _INF)

    def second_moment_between(self, a, b):
        s = abs(self.scale)
        if s == 0.0:
            return 0.0
        return s * s * self.driver.second_moment_between(a / s, b / s if b < _INF else _INF)

    def first_moment_between(self, a, b):
        s = abs(self.scale)
        if s == 0.0:
            return np.zeros(self.dim)
        return self.scale * self.driver.first_moment_between(a / s, b / s if b < _INF else _INF)

    def ball_mass(self, center, radius, window=(0.0, _INF)):
        s = self.scale
        if s == 0.0:
            return 0.0
        c = np.atleast_1d(np.asarray(center, dtype=float)) / s
        lo, hi = window
        w = (lo / abs(s), hi / abs(s) if hi < _INF else _INF)
        return self.driver.ball_mass(c, radius / abs(s), w)

    def sample_between(self, rng, n, a, b):
        s = abs(self.scale)
        if s == 0.0:
            raise ConfigurationError("cannot sample the image measure of a zero map")
        return self.scale * self.driver.sample_between(rng, n, a / s, b / s if b < _INF else _INF)

    def density(self, y):
        s = self.scale
        if s == 0.0:
            return 0.0
        base = self.driver.density(np.asarray(y, dtype=float) / s)
        if base is None:
            return None
        return base / abs(s) ** self.dim

    def support_upper(self):
        return abs(self.scale) * self.driver.support_upper()

    def exp_tail_envelope(self):
        return None


class ScaledLevyMeasure(LevyMeasure):
    """phi * nu for a positive scalar phi."""

    def __init__(self, base: LevyMeasure, factor: float):
        if factor < 0:
            raise ConfigurationError("measure scale factors must be nonnegative")
        self.base = base
        self.factor = float(factor)
        self.dim = base.dim

    def atoms(self):
        return [(y, self.factor * m) for y, m in self.base.atoms()]

    def mass_between(self, a, b):
        return self.factor * self.base.mass_between(a, b)

    def second_moment_between(self, a, b):
        return self.factor * self.base.second_moment_between(a, b)

    def first_moment_between(self, a, b):
        return self.factor * self.base.first_moment_between(a, b)

    def ball_mass(self, center, radius, window=(0.0, _INF)):
        return self.factor * self.base.ball_mass(center, radius, window)

    def sample_between(self, rng, n, a, b):
        return self.base.sample_between(rng, n, a, b)

    def density(self, y):
        base = self.base.density(y)
        return None if base is None else self.factor * base

    def support_upper(self):
        return self.base.support_upper()

    def exp_tail_envelope(self):
        env = self.base.exp_tail_envelope()
        if env is None:
            return None
        return (self.factor * env[0], env[1])


class RestrictedLevyMeasure(LevyMeasure):
    """nu restricted to the radial shell [lo, hi)."""

    def __init__(self, base: LevyMeasure, lo: float, hi: float):
        self.base = base
        self.lo = float(lo)
        self.hi = float(hi)
        self.dim = base.dim

    def _clip(self, a, b):
        return max(a, self.lo), min(b, self.hi)

    def atoms(self):
        return [(y, m) for y, m in self.base.atoms()
                if self.lo <= np.linalg.norm(y) < self.hi]

    def mass_between(self, a, b):
        a, b = self._clip(a, b)
        return self.base.mass_between(a, b) if b > a else 0.0

    def second_moment_between(self, a, b):
        a, b = self._clip(a, b)
        return self.base.second_moment_between(a, b) if b > a else 0.0

    def first_moment_between(self, a, b):
        a, b = self._clip(a, b)
        if b <= a:
            return np.zeros(self.dim)
        return self.base.first_moment_between(a, b)

    def ball_mass(self, center, radius, window=(0.0, _INF)):
        lo, hi = max(window[0], self.lo), min(window[1], self.hi)
        if hi <= lo:
            return 0.0
        return self.base.ball_mass(center, radius, (lo, hi))

    def sample_between(self, rng, n, a, b):
        a, b = self._clip(a, b)
        if b <= a:
            raise ConfigurationError("restriction shell is empty")
        return self.base.sample_between(rng, n, a, b)

    def density(self, y):
        r = float(np.linalg.norm(np.atleast_1d(np.asarray(y, dtype=float))))
        if not self.lo <= r < self.hi:
            return 0.0
        return self.base.density(y)

    def support_upper(self):
        return min(self.base.support_upper(), self.hi)

    def exp_tail_envelope(self):
        return self.base.exp_tail_envelope()
