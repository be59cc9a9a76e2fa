"""Path simulation: driver increments, Euler stepping, and interlacing.

The interlaced construction splits the jump measure at the state-dependent
cutoff r(x) = max(1, |x|/2) into a small-jump part (below the cutoff) and a
large-jump part.  Large jumps are triggered by a Poisson clock with the
global rate lambda = sup_z nu_l(z, .) and thinned: a tick at state z causes
a jump with probability nu_l(z)/lambda, drawn from the normalized large-jump
law, and is discarded otherwise.  Between ticks the small-jump dynamics are
integrated by an explicit Euler scheme: drift, diffusion, jumps below the
scale ``delta`` folded into the Gaussian term by variance matching, and
jumps in [delta, r(x)) as a compound-Poisson channel re-frozen each step.

Known O(dt) bias sources, absorbed into the acceptance budgets: the clock
ticks act on the last grid state before the arrival (the discrete left
limit), and the cutoff r(x) is frozen at the step's start.

The engine advances all paths of a batch in lockstep from one
counter-based Philox stream, so a run is bitwise reproducible from
(configuration, seed); ``path_generator`` exposes per-index substreams for
callers that parallelize across batches.  The engine is one-dimensional;
increment sampling (``sample_levy_increment``) also covers isotropic
families in higher dimension.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import (ConfigurationError, HypothesisViolationError,
                     IntensityUnderestimateError, NumericalInstabilityError)
from .exponents import EXACT_SAMPLER_FAMILIES, ExponentFamily, levy_triplet
from .levy_measures import (AtomLevyMeasure, LevyMeasure, RestrictedLevyMeasure,
                            ZeroLevyMeasure)
from .symbols import SymbolField

_INF = float("inf")


# ---- reproducible streams ----

def path_generator(seed: int, index: int = 0) -> np.random.Generator:
    """Counter-based substream: Philox jumped by the path/batch index."""
    bits = np.random.Philox(np.random.SeedSequence(seed))
    return np.random.Generator(bits.jumped(index) if index else bits)


def time_grid(horizon: float, dt: float) -> np.ndarray:
    if dt <= 0 or horizon < 0:
        raise ConfigurationError("need dt > 0 and horizon >= 0")
    if horizon == 0.0:
        return np.array([0.0])
    n = max(1, int(math.ceil(horizon / dt - 1e-12)))
    ts = dt * np.arange(n + 1)
    ts[-1] = horizon
    return ts


@dataclass(frozen=True)
class SimulationConfig:
    dt: float = 1e-3
    horizon: float = 1.0
    n_paths: int = 1000
    r_max: float = 1e6
    small_jump_cutoff: float = 1e-3     # delta
    seed: int = 0
    lambda_safety: float = 1.05


# ---- driver increment samplers ----

def _sym_stable_std(alpha: float, n: int, rng) -> np.ndarray:
    """Symmetric stable draws with characteristic function exp(-|xi|^alpha)."""
    if alpha == 2.0:
        return math.sqrt(2.0) * rng.standard_normal(n)
    if alpha == 1.0:
        return np.tan(np.pi * (rng.random(n) - 0.5))
    u = np.pi * (rng.random(n) - 0.5)
    w = rng.exponential(1.0, n)
    return (np.sin(alpha * u) / np.cos(u) ** (1.0 / alpha)
            * (np.cos((1.0 - alpha) * u) / w) ** ((1.0 - alpha) / alpha))


def _one_sided_stable_std(rho: float, n: int, rng) -> np.ndarray:
    """Positive stable draws with Laplace transform exp(-u^rho), rho in (0,1)."""
    u = np.pi * rng.random(n)
    w = rng.exponential(1.0, n)
    a = (np.sin(rho * u) ** rho * np.sin((1.0 - rho) * u) ** (1.0 - rho)
         / np.sin(u)) ** (1.0 / (1.0 - rho))
    return (a / w) ** ((1.0 - rho) / rho)


def sample_increments(family: ExponentFamily, dt: float, n: int, rng,
                      approx_cutoff: float | None = None) -> np.ndarray:
    """(n, d) increments with characteristic function exp(-dt psi(xi)).

    Exact for brownian, isotropic stable and compound Poisson; the remaining
    families use the small-jump Gaussian substitution below ``approx_cutoff``
    plus a compound-Poisson tail and the compensated drift.
    """
    if dt <= 0:
        raise ConfigurationError("increment step must be positive")
    d = family.dim
    f = family.family
    if f == "brownian":
        return math.sqrt(dt) * rng.standard_normal((n, d))
    if f == "isotropic_stable":
        a = family.alpha
        if a == 2.0:
            return math.sqrt(2.0 * dt) * rng.standard_normal((n, d))
        if d == 1:
            return (dt ** (1.0 / a) * _sym_stable_std(a, n, rng))[:, None]
        s = dt ** (2.0 / a) * _one_sided_stable_std(0.5 * a, n, rng)
        return np.sqrt(2.0 * s)[:, None] * rng.standard_normal((n, d))
    if f == "compound_poisson":
        counts = rng.poisson(family.rate * dt, n)
        out = np.zeros((n, d))
        total = int(counts.sum())
        if total:
            locs = np.array([y for y, _ in family.atoms])
            probs = np.array([p for _, p in family.atoms])
            pick = rng.choice(len(locs), size=total, p=probs)
            owners = np.repeat(np.arange(n), counts)
            np.add.at(out, owners, locs[pick])
        return out
    # approximate route for the tempered families
    if approx_cutoff is None:
        raise ConfigurationError(
            f"family {f!r} has no exact sampler; pass approx_cutoff (small-jump "
            "substitution scale) to enable the approximate route")
    delta = float(approx_cutoff)
    b, q, nu = levy_triplet(family)
    if d != 1:
        raise ConfigurationError("approximate increment sampling is 1-d")
    var_small = nu.second_moment_between(0.0, delta)
    comp = nu.first_moment_between(delta, 1.0)[0]
    drift = (b[0] - comp) * dt
    out = drift + math.sqrt((q[0, 0] + var_small) * dt) * rng.standard_normal(n)
    rate = nu.tail_mass(delta)
    counts = rng.poisson(rate * dt, n)
    total = int(counts.sum())
    if total:
        ys = nu.sample_between(rng, total, delta, _INF)[:, 0]
        owners = np.repeat(np.arange(n), counts)
        out = out + np.bincount(owners, weights=ys, minlength=n)
    return out[:, None]


def sample_levy_increment(family: ExponentFamily, dt: float, rng,
                          approx_cutoff: float | None = None) -> np.ndarray:
    """One increment of the driving process over a step of length dt."""
    return sample_increments(family, dt, 1, rng, approx_cutoff)[0]


# ---- jump models: vectorized split-measure queries ----

def cutoff_radius(xs):
    """State-dependent small/large split radius r(x) = max(1, |x|/2)."""
    return np.maximum(1.0, 0.5 * np.abs(xs))


class _JumpModel:
    """Vectorized queries for the state-frozen jump measure (d = 1)."""

    def small_var(self, xs, delta):
        raise NotImplementedError

    def small_rate(self, xs, delta):
        raise NotImplementedError

    def sample_small(self, xs, delta, rng):
        raise NotImplementedError

    def small_compensator(self, xs, delta):
        return np.zeros_like(xs)

    def large_mass(self, xs):
        raise NotImplementedError

    def sample_large(self, xs, rng):
        raise NotImplementedError


class StableLikeJumps(_JumpModel):
    """phi(x) c(alpha(x)) |y|^{-1-alpha(x)} dy in d = 1; closed radial forms."""

    def __init__(self, phi_fn, alpha_fn):
        from .stable_norm import stable_constant_array
        self._c = stable_constant_array
        self.phi = phi_fn
        self.alpha = alpha_fn

    def _k(self, xs):
        a = np.asarray(self.alpha(xs), dtype=float)
        if np.any(a >= 2.0) or np.any(a <= 0.0):
            a = np.clip(a, 1e-6, 2.0 - 1e-9)   # diffusive endpoint handled upstream
        return 2.0 * self._c(a), a

    def small_var(self, xs, delta):
        k, a = self._k(xs)
        return self.phi(xs) * k * delta ** (2.0 - a) / (2.0 - a)

    def small_rate(self, xs, delta):
        k, a = self._k(xs)
        r = cutoff_radius(xs)
        return self.phi(xs) * k * (delta ** (-a) - r ** (-a)) / a

    def sample_small(self, xs, delta, rng):
        _, a = self._k(xs)
        r = cutoff_radius(xs)
        u = rng.random(len(xs))
        lo, hi = delta ** (-a), r ** (-a)
        radii = (lo - u * (lo - hi)) ** (-1.0 / a)
        signs = np.where(rng.random(len(xs)) < 0.5, 1.0, -1.0)
        return signs * radii

    def large_mass(self, xs):
        k, a = self._k(xs)
        return self.phi(xs) * k * cutoff_radius(xs) ** (-a) / a

    def sample_large(self, xs, rng):
        _, a = self._k(xs)
        r = cutoff_radius(xs)
        radii = r * rng.random(len(xs)) ** (-1.0 / a)
        signs = np.where(rng.random(len(xs)) < 0.5, 1.0, -1.0)
        return signs * radii


class _TailTables:
    """Vectorized tail mass / second moment / inverse-tail for one measure."""

    def __init__(self, nu: LevyMeasure, r_lo: float = 1e-6):
        self.nu = nu
        self.atoms = nu.atoms()
        if self.atoms:
            radii = np.array([abs(float(np.atleast_1d(y)[0])) for y, _ in self.atoms])
            masses = np.array([m for _, m in self.atoms])
            order = np.argsort(radii)
            self.atom_radii = radii[order]
            self.atom_masses = masses[order]
            self.atom_locs = np.array([float(np.atleast_1d(self.atoms[i][0])[0])
                                       for i in order])
            self.sym = _symmetric_density(nu)
            return
        self.sym = _symmetric_density(nu)
        hi = 4.0
        total_ref = nu.mass_between(r_lo, _INF)
        while nu.tail_mass(hi) > 1e-12 * total_ref:
            hi *= 2.0
        grid = np.geomspace(r_lo, hi, 600)
        tails = np.array([nu.tail_mass(float(r)) for r in grid])
        tails = np.maximum(tails, 0.0)
        m2 = np.array([nu.second_moment_between(0.0, float(r)) for r in grid])
        self.grid = grid
        self.tails = tails
        self.m2 = m2
        # inverse tail: tails decreasing in r
        keep = np.concatenate([[True], np.diff(tails) < 0])
        self._inv_t = tails[keep][::-1]
        self._inv_r = grid[keep][::-1]

    def tail(self, rs):
        rs = np.asarray(rs, dtype=float)
        if self.atoms:
            idx = np.searchsorted(self.atom_radii, rs, side="left")
            cum = np.concatenate([np.cumsum(self.atom_masses[::-1])[::-1], [0.0]])
            return cum[idx]
        out = np.interp(rs, self.grid, self.tails)
        out[rs > self.grid[-1]] = 0.0
        out[rs < self.grid[0]] = self.tails[0]
        return out

    def second_moment_below(self, rs):
        rs = np.asarray(rs, dtype=float)
        if self.atoms:
            idx = np.searchsorted(self.atom_radii, rs, side="left")
            cum = np.concatenate([[0.0], np.cumsum(self.atom_masses * self.atom_radii ** 2)])
            return cum[idx]
        out = np.interp(rs, self.grid, self.m2)
        out[rs > self.grid[-1]] = self.m2[-1]
        return out

    def sample_radii(self, lo, hi, rng):
        """One radius per entry from the normalized restriction to [lo_i, hi_i)."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if self.atoms:
            # per-entry categorical over eligible atoms (few atoms expected)
            n = len(lo)
            w = np.where((self.atom_radii >= lo[:, None]) & (self.atom_radii < hi[:, None]),
                         self.atom_masses[None, :], 0.0)
            cdf = np.cumsum(w, axis=1)
            tot = cdf[:, -1]
            u = rng.random(n) * tot
            idx = (u[:, None] > cdf).sum(axis=1)
            return self.atom_locs[idx], True   # signed locations
        t_lo = self.tail(lo)
        t_hi = self.tail(hi)
        u = rng.random(len(lo))
        targets = t_hi + u * (t_lo - t_hi)
        radii = np.interp(targets, self._inv_t, self._inv_r)
        return radii, False


def _symmetric_density(nu: LevyMeasure) -> bool:
    beta = getattr(nu, "beta", None)
    if beta is not None and beta != 0.0:
        return False
    base = getattr(nu, "base", None) or getattr(nu, "driver", None)
    if base is not None:
        return _symmetric_density(base)
    return True


class ConstantMeasureJumps(_JumpModel):
    """x-independent jump measure; the split cutoff still varies with x."""

    def __init__(self, nu: LevyMeasure):
        if not _symmetric_density(nu) and not nu.atoms():
            raise ConfigurationError(
                "interlaced simulation of asymmetric jump densities is not supported")
        self.nu = nu
        self.tables = _TailTables(nu)

    def small_var(self, xs, delta):
        return np.full_like(np.asarray(xs, dtype=float),
                            self.nu.second_moment_between(0.0, delta))

    def small_rate(self, xs, delta):
        r = cutoff_radius(xs)
        t = self.tables
        return np.maximum(t.tail(np.full_like(r, delta)) - t.tail(r), 0.0)

    def small_compensator(self, xs, delta):
        c = float(self.nu.first_moment_between(delta, 1.0)[0]) if self.nu.dim == 1 else 0.0
        return np.full_like(np.asarray(xs, dtype=float), c)

    def sample_small(self, xs, delta, rng):
        r = cutoff_radius(xs)
        vals, signed = self.tables.sample_radii(np.full_like(r, delta), r, rng)
        if signed:
            return vals
        signs = np.where(rng.random(len(vals)) < 0.5, 1.0, -1.0)
        return signs * vals

    def large_mass(self, xs):
        return self.tables.tail(cutoff_radius(xs))

    def sample_large(self, xs, rng):
        r = cutoff_radius(xs)
        vals, signed = self.tables.sample_radii(r, np.full_like(r, _INF), rng)
        if signed:
            return vals
        signs = np.where(rng.random(len(vals)) < 0.5, 1.0, -1.0)
        return signs * vals


class PushforwardJumps(_JumpModel):
    """Image of a fixed driver measure under y -> sigma(x) y."""

    def __init__(self, driver_nu: LevyMeasure, sigma_fn):
        self.driver = driver_nu
        self.sigma = sigma_fn
        self.tables = _TailTables(driver_nu)
        self.symmetric = _symmetric_density(driver_nu)

    def _scales(self, xs):
        s = np.asarray(self.sigma(xs), dtype=float)
        return s, np.abs(s)

    def small_var(self, xs, delta):
        s, sa = self._scales(xs)
        out = np.zeros_like(sa)
        mask = sa > 0
        if mask.any():
            out[mask] = s[mask] ** 2 * self.tables.second_moment_below(delta / sa[mask])
        return out

    def small_rate(self, xs, delta):
        s, sa = self._scales(xs)
        out = np.zeros_like(sa)
        mask = sa > 0
        if mask.any():
            r = cutoff_radius(np.asarray(xs)[mask])
            t = self.tables
            out[mask] = np.maximum(t.tail(delta / sa[mask]) - t.tail(r / sa[mask]), 0.0)
        return out

    def small_compensator(self, xs, delta):
        s, sa = self._scales(xs)
        if self.symmetric and not self.driver.atoms():
            return np.zeros_like(sa)
        out = np.zeros_like(sa)
        for i, (si, sai) in enumerate(zip(np.atleast_1d(s), np.atleast_1d(sa))):
            if sai > 0:
                out[i] = si * float(self.driver.first_moment_between(
                    delta / sai, 1.0 / sai)[0])
        return out

    def sample_small(self, xs, delta, rng):
        s, sa = self._scales(xs)
        r = cutoff_radius(xs)
        vals, signed = self.tables.sample_radii(delta / sa, r / sa, rng)
        if not signed:
            vals = vals * np.where(rng.random(len(vals)) < 0.5, 1.0, -1.0)
        return s * vals

    def large_mass(self, xs):
        s, sa = self._scales(xs)
        out = np.zeros_like(sa)
        mask = sa > 0
        if mask.any():
            out[mask] = self.tables.tail(cutoff_radius(np.asarray(xs)[mask]) / sa[mask])
        return out

    def sample_large(self, xs, rng):
        s, sa = self._scales(xs)
        r = cutoff_radius(xs)
        vals, signed = self.tables.sample_radii(r / sa, np.full_like(r, _INF), rng)
        if not signed:
            vals = vals * np.where(rng.random(len(vals)) < 0.5, 1.0, -1.0)
        return s * vals


class ScaledJumps(_JumpModel):
    """phi(x) times a base jump model; laws unchanged, rates scaled."""

    def __init__(self, base: _JumpModel, phi_fn):
        self.base = base
        self.phi = phi_fn

    def small_var(self, xs, delta):
        return self.phi(xs) * self.base.small_var(xs, delta)

    def small_rate(self, xs, delta):
        return self.phi(xs) * self.base.small_rate(xs, delta)

    def small_compensator(self, xs, delta):
        return self.phi(xs) * self.base.small_compensator(xs, delta)

    def sample_small(self, xs, delta, rng):
        return self.base.sample_small(xs, delta, rng)

    def large_mass(self, xs):
        return self.phi(xs) * self.base.large_mass(xs)

    def sample_large(self, xs, rng):
        return self.base.sample_large(xs, rng)


@dataclass(frozen=True)
class SimulationModel:
    drift: object            # (n,) -> (n,)  compensated-form drift b(x)
    diffusion: object        # (n,) -> (n,)  scalar Q(x)
    jumps: _JumpModel | None


def _const_fn(value: float):
    return lambda xs: np.full_like(np.asarray(xs, dtype=float), value)


@lru_cache(maxsize=64)
def build_sim_model(symbol: SymbolField) -> SimulationModel:
    """Vectorized stepping model for a symbol (d = 1); cached per instance."""
    if symbol.dim != 1:
        raise ConfigurationError("the simulation engine is one-dimensional")
    spec = symbol.sim_spec
    if spec is None:
        raise ConfigurationError(
            "symbol carries no simulation structure (built from raw closures); "
            "pass sim_spec to symbol_from_characteristics to enable simulation")
    kind = spec["kind"]

    if kind == "constant":
        b, q, nu = levy_triplet(spec["family"])
        jumps = None if isinstance(nu, ZeroLevyMeasure) else ConstantMeasureJumps(nu)
        return SimulationModel(_const_fn(float(b[0])), _const_fn(float(q[0, 0])), jumps)

    if kind == "raw":
        nu = spec.get("measure")
        jumps = None
        if nu is not None and not isinstance(nu, ZeroLevyMeasure):
            jumps = ConstantMeasureJumps(nu)
        return SimulationModel(spec["drift"], spec["diffusion"], jumps)

    if kind == "sde":
        if spec.get("matrix_mode"):
            raise ConfigurationError("matrix dispersion simulation is not supported in d=1")
        ell, sigma, driver = spec["ell"], spec["sigma"], spec["driver"]
        b_l, q_l, nu_l = levy_triplet(driver)
        b0, q0 = float(b_l[0]), float(q_l[0, 0])

        def drift(xs):
            xs = np.asarray(xs, dtype=float)
            return np.asarray(ell(xs), dtype=float) + np.asarray(sigma(xs), dtype=float) * b0

        def diffusion(xs):
            s = np.asarray(sigma(np.asarray(xs, dtype=float)), dtype=float)
            return s * s * q0

        jumps = None if isinstance(nu_l, ZeroLevyMeasure) else PushforwardJumps(nu_l, sigma)
        return SimulationModel(drift, diffusion, jumps)

    if kind == "stable_like":
        phi, alpha = spec["phi"], spec["alpha"]

        def diffusion(xs):
            a = np.asarray(alpha(np.asarray(xs, dtype=float)), dtype=float)
            return np.where(a >= 2.0, 2.0 * np.asarray(phi(xs), dtype=float), 0.0)

        return SimulationModel(_const_fn(0.0), diffusion, StableLikeJumps(phi, alpha))

    if kind == "scaled":
        base_model = build_sim_model(spec["base"])
        phi = spec["phi"]

        def drift(xs):
            return np.asarray(phi(xs), dtype=float) * base_model.drift(xs)

        def diffusion(xs):
            return np.asarray(phi(xs), dtype=float) * base_model.diffusion(xs)

        jumps = None if base_model.jumps is None else ScaledJumps(base_model.jumps, phi)
        return SimulationModel(drift, diffusion, jumps)

    if kind == "relativistic":
        probes = np.array([-13.7, -2.2, 0.0, 1.3, 8.9])
        k, m, a = (np.asarray(spec[key](probes), dtype=float)
                   for key in ("kappa", "m", "alpha"))
        if np.ptp(k) == 0.0 and np.ptp(m) == 0.0 and np.ptp(a) == 0.0:
            from .exponents import relativistic_stable
            fam = relativistic_stable(float(a[0]), float(m[0]))
            _, _, nu = levy_triplet(fam)
            jumps = ConstantMeasureJumps(nu)
            if float(k[0]) != 1.0:
                jumps = ScaledJumps(jumps, _const_fn(float(k[0])))
            q_diag = 2.0 * float(k[0]) if float(a[0]) == 2.0 else 0.0
            return SimulationModel(_const_fn(0.0), _const_fn(q_diag),
                                   None if float(a[0]) == 2.0 else jumps)
        raise ConfigurationError(
            "simulation of state-dependent relativistic symbols is not supported; "
            "condition checking works, and constant coefficients simulate fine")

    raise ConfigurationError(f"unknown simulation structure {kind!r}")


# ---- intensity of the large-jump clock ----

@dataclass(frozen=True)
class LargeJumpIntensity:
    rate: float          # clock rate, includes the safety factor
    sup_raw: float       # max nu_l(z) over the probe grid
    asymptotic: float    # max over the far tail of the grid
    margin: float        # rate - sup_raw

    def __float__(self):
        return self.rate


def large_jump_intensity(symbol: SymbolField, probe_states=None,
                         safety: float = 1.05) -> LargeJumpIntensity:
    """lambda = sup_z nu(z, {|y| >= 1 v |z|/2}), estimated on a dense grid.

    Raises HypothesisViolationError when the masses grow along the far grid
    (the supremum is then infinite and interlacing is impossible).
    """
    model = build_sim_model(symbol)
    if model.jumps is None:
        return LargeJumpIntensity(0.0, 0.0, 0.0, 0.0)
    if probe_states is None:
        dense = np.linspace(-8.0, 8.0, 161)
        far = np.array([2.0 ** k for k in range(3, 13)])
        probe_states = np.concatenate([dense, far, -far])
    zs = np.asarray(probe_states, dtype=float)
    masses = model.jumps.large_mass(zs)
    far_r = np.abs(zs)
    order = np.argsort(far_r)
    tail_sel = far_r[order] >= 8.0
    if tail_sel.sum() >= 4:
        rr, mm = far_r[order][tail_sel], masses[order][tail_sel]
        good = mm > 0
        if good.sum() >= 4:
            slope = np.polyfit(np.log(rr[good]), np.log(mm[good]), 1)[0]
            if slope > 0.1 and mm[good][-1] > 2.0 * masses.max() :
                raise HypothesisViolationError(
                    f"large-jump mass grows with |z| (slope {slope:.2f}); "
                    "no finite clock rate exists")
    sup_raw = float(masses.max())
    asymptotic = float(masses[np.abs(zs) >= 8.0].max()) if np.any(np.abs(zs) >= 8.0) else 0.0
    rate = safety * sup_raw
    return LargeJumpIntensity(rate, sup_raw, asymptotic, rate - sup_raw)


def split_levy_measure(symbol: SymbolField, x):
    """(small part, large part, cutoff r(x)) of the jump measure frozen at x."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    r = max(1.0, 0.5 * float(np.linalg.norm(x)))
    nu = symbol.characteristics(x).jump
    return (RestrictedLevyMeasure(nu, 0.0, r),
            RestrictedLevyMeasure(nu, r, _INF), r)


def thinning_trials(symbol: SymbolField, lam: float, z, n: int, rng):
    """n independent clock ticks at state z (vectorized thinning kernel).

    Returns (post_states, accepted_mask); raises IntensityUnderestimateError
    when the local large-jump mass exceeds the clock rate.
    """
    model = build_sim_model(symbol)
    zv = float(np.atleast_1d(np.asarray(z, dtype=float))[0])
    post = np.full(n, zv)
    if model.jumps is None:
        return post, np.zeros(n, dtype=bool)
    mass = float(model.jumps.large_mass(np.array([zv]))[0])
    if mass > lam * (1.0 + 1e-9):
        raise IntensityUnderestimateError(
            f"nu_l mass {mass:.6g} at z={z} exceeds the clock rate {lam:.6g}; "
            "re-estimate the intensity on a denser grid")
    if mass <= 0.0:
        return post, np.zeros(n, dtype=bool)
    accepted = rng.random(n) < mass / lam
    k = int(accepted.sum())
    if k:
        post[accepted] = zv + model.jumps.sample_large(np.full(k, zv), rng)
    return post, accepted


def thinning_step(symbol: SymbolField, lam: float, z, rng):
    """One clock tick at state z: jump with probability nu_l(z)/lam."""
    post, accepted = thinning_trials(symbol, lam, z, 1, rng)
    if not accepted[0]:
        return z
    return type(z)(post[0]) if np.ndim(z) == 0 else np.atleast_1d(post[0])


# ---- the batch engine ----

@dataclass
class JumpLog:
    times: np.ndarray = field(default_factory=lambda: np.empty(0))
    path_index: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))
    pre_state: np.ndarray = field(default_factory=lambda: np.empty(0))
    post_state: np.ndarray = field(default_factory=lambda: np.empty(0))
    accepted: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=bool))


@dataclass
class BatchResult:
    times: np.ndarray
    terminal: np.ndarray
    exploded: np.ndarray
    explosion_time: np.ndarray
    min_abs: np.ndarray
    max_abs: np.ndarray
    jump_log: JumpLog
    lam: float
    paths: np.ndarray | None = None      # (T, n) when stored

    @property
    def n_paths(self) -> int:
        return len(self.terminal)

    @property
    def n_accepted(self) -> int:
        return int(self.jump_log.accepted.sum())

    @property
    def n_thinned(self) -> int:
        return int((~self.jump_log.accepted).sum())


@dataclass
class JumpEvent:
    time: float
    pre_state: np.ndarray
    post_state: np.ndarray
    accepted: bool


@dataclass
class PathSample:
    """One trajectory: grid, states, large-jump log, explosion record."""

    times: np.ndarray
    states: np.ndarray               # (T, d)
    jumps: list[JumpEvent]
    exploded: bool
    explosion_time: float | None


def _check_finite(x, step):
    if not np.all(np.isfinite(x)):
        bad = int(np.where(~np.isfinite(x))[0][0])
        raise NumericalInstabilityError(
            f"non-finite state in path {bad} at step {step}")


def run_interlaced_batch(symbol: SymbolField, x0, cfg: SimulationConfig,
                         n_paths: int | None = None, rng=None,
                         lam: float | None = None, store_paths: bool = False,
                         collect_events: bool = True,
                         stop_inside: float | None = None) -> BatchResult:
    """Lockstep interlaced simulation of a batch of paths (d = 1)."""
    model = build_sim_model(symbol)
    n = int(n_paths if n_paths is not None else cfg.n_paths)
    if rng is None:
        rng = path_generator(cfg.seed)
    delta = cfg.small_jump_cutoff
    if lam is None:
        lam = (large_jump_intensity(symbol, safety=cfg.lambda_safety).rate
               if model.jumps is not None else 0.0)
    lam = float(lam)
    times = time_grid(cfg.horizon, cfg.dt)

    x = np.full(n, float(np.atleast_1d(x0)[0])) if np.ndim(x0) == 0 or len(np.atleast_1d(x0)) == 1 \
        else np.asarray(x0, dtype=float).copy()
    if x.shape != (n,):
        raise ConfigurationError(f"x0 shape {np.shape(x0)} incompatible with {n} paths")

    alive = np.ones(n, dtype=bool)
    exploded = np.zeros(n, dtype=bool)
    expl_time = np.full(n, np.nan)
    min_abs = np.abs(x).copy()
    max_abs = np.abs(x).copy()
    if stop_inside is not None:
        alive &= ~(np.abs(x) < stop_inside)

    has_clock = model.jumps is not None and lam > 0.0
    next_arrival = rng.exponential(1.0 / lam, n) if has_clock else None

    ev_t, ev_i, ev_pre, ev_post, ev_acc = [], [], [], [], []
    paths = np.empty((len(times), n)) if store_paths else None
    if store_paths:
        paths[0] = x

    jumps = model.jumps
    for k in range(len(times) - 1):
        t0, t1 = times[k], times[k + 1]
        dt_k = t1 - t0
        if has_clock:
            while True:
                due = alive & (next_arrival <= t1)
                if not due.any():
                    break
                idx = np.where(due)[0]
                z = x[idx]
                mass = jumps.large_mass(z)
                p = mass / lam
                if np.any(p > 1.0 + 1e-9):
                    raise IntensityUnderestimateError(
                        f"nu_l mass {mass.max():.6g} exceeds the clock rate {lam:.6g} "
                        f"at |z| <= {np.abs(z).max():.6g}; re-estimate the intensity")
                u = rng.random(len(idx))
                acc = u < p
                post = z.copy()
                if acc.any():
                    post[acc] = z[acc] + jumps.sample_large(z[acc], rng)
                x[idx] = post
                if collect_events:
                    ev_t.append(next_arrival[idx].copy())
                    ev_i.append(idx.copy())
                    ev_pre.append(z.copy())
                    ev_post.append(post.copy())
                    ev_acc.append(acc.copy())
                min_abs[idx] = np.minimum(min_abs[idx], np.abs(post))
                max_abs[idx] = np.maximum(max_abs[idx], np.abs(post))
                next_arrival[idx] = next_arrival[idx] + rng.exponential(1.0 / lam, len(idx))

        drift = np.asarray(model.drift(x), dtype=float)
        gvar = np.asarray(model.diffusion(x), dtype=float)
        if jumps is not None:
            drift = drift - jumps.small_compensator(x, delta)
            gvar = gvar + jumps.small_var(x, delta)
        noise = math.sqrt(dt_k) * rng.standard_normal(n)
        x_new = x + drift * dt_k + np.sqrt(gvar) * noise
        if jumps is not None:
            rate = jumps.small_rate(x, delta)
            if np.any(rate > 0):
                counts = rng.poisson(rate * dt_k)
                total = int(counts.sum())
                if total:
                    owners = np.repeat(np.arange(n), counts)
                    ys = jumps.sample_small(x[owners], delta, rng)
                    x_new = x_new + np.bincount(owners, weights=ys, minlength=n)
        x = np.where(alive, x_new, x)
        _check_finite(x[alive], k)

        newly = alive & (np.abs(x) > cfg.r_max)
        if newly.any():
            exploded |= newly
            expl_time[newly] = t1
            alive &= ~newly
        if stop_inside is not None:
            alive &= ~(alive & (np.abs(x) < stop_inside))
        upd = alive | newly
        min_abs[upd] = np.minimum(min_abs[upd], np.abs(x[upd]))
        max_abs[upd] = np.maximum(max_abs[upd], np.abs(x[upd]))
        if store_paths:
            paths[k + 1] = x

    log = JumpLog()
    if ev_t:
        log = JumpLog(np.concatenate(ev_t), np.concatenate(ev_i),
                      np.concatenate(ev_pre), np.concatenate(ev_post),
                      np.concatenate(ev_acc))
    return BatchResult(times, x, exploded, expl_time, min_abs, max_abs, log,
                       lam, paths)


def run_euler_batch(ell, sigma, driver: ExponentFamily, x0, cfg: SimulationConfig,
                    n_paths: int | None = None, rng=None,
                    store_paths: bool = False) -> BatchResult:
    """Lockstep explicit Euler for dX = l(X) dt + sigma(X) dL (d = 1)."""
    from .expressions import as_coefficient
    ell_fn = as_coefficient(ell)
    sigma_fn = as_coefficient(sigma)
    n = int(n_paths if n_paths is not None else cfg.n_paths)
    if rng is None:
        rng = path_generator(cfg.seed)
    times = time_grid(cfg.horizon, cfg.dt)
    x = np.full(n, float(np.atleast_1d(x0)[0]))
    alive = np.ones(n, dtype=bool)
    exploded = np.zeros(n, dtype=bool)
    expl_time = np.full(n, np.nan)
    min_abs = np.abs(x).copy()
    max_abs = np.abs(x).copy()
    paths = np.empty((len(times), n)) if store_paths else None
    if store_paths:
        paths[0] = x
    needs_cutoff = driver.family not in EXACT_SAMPLER_FAMILIES
    for k in range(len(times) - 1):
        dt_k = times[k + 1] - times[k]
        incr = sample_increments(driver, dt_k, n, rng,
                                 approx_cutoff=cfg.small_jump_cutoff if needs_cutoff else None)[:, 0]
        drift = np.asarray(ell_fn(x), dtype=float)
        coeff = np.asarray(sigma_fn(x), dtype=float)
        x_new = x + drift * dt_k + coeff * incr
        x = np.where(alive, x_new, x)
        _check_finite(x[alive], k)
        newly = alive & (np.abs(x) > cfg.r_max)
        if newly.any():
            exploded |= newly
            expl_time[newly] = times[k + 1]
            alive &= ~newly
        upd = alive | newly
        min_abs[upd] = np.minimum(min_abs[upd], np.abs(x[upd]))
        max_abs[upd] = np.maximum(max_abs[upd], np.abs(x[upd]))
        if store_paths:
            paths[k + 1] = x
    return BatchResult(times, x, exploded, expl_time, min_abs, max_abs,
                       JumpLog(), 0.0, paths)


def _to_path_sample(batch: BatchResult, index: int = 0) -> PathSample:
    times = batch.times
    states = batch.paths[:, index][:, None]
    exploded = bool(batch.exploded[index])
    expl_t = float(batch.explosion_time[index]) if exploded else None
    if exploded:
        keep = times <= expl_t + 1e-15
        times, states = times[keep], states[keep]
    jumps = []
    log = batch.jump_log
    for j in np.where(log.path_index == index)[0]:
        if expl_t is not None and log.times[j] > expl_t:
            continue
        jumps.append(JumpEvent(float(log.times[j]), np.r_[log.pre_state[j]],
                               np.r_[log.post_state[j]], bool(log.accepted[j])))
    return PathSample(times, states, jumps, exploded, expl_t)


def simulate_sde_euler(ell, sigma, driver: ExponentFamily, x0, horizon: float,
                       dt: float, r_max: float = 1e6, rng=None, seed: int = 0,
                       small_jump_cutoff: float = 1e-3) -> PathSample:
    """One explicit-Euler trajectory of dX = l(X-) dt + sigma(X-) dL."""
    cfg = SimulationConfig(dt=dt, horizon=horizon, n_paths=1, r_max=r_max,
                           small_jump_cutoff=small_jump_cutoff, seed=seed)
    batch = run_euler_batch(ell, sigma, driver, x0, cfg, n_paths=1, rng=rng,
                            store_paths=True)
    return _to_path_sample(batch)


def simulate_interlaced(symbol: SymbolField, x0, horizon: float, dt: float,
                        r_max: float = 1e6, rng=None, seed: int = 0,
                        small_jump_cutoff: float = 1e-3,
                        lam: float | None = None) -> PathSample:
    """One trajectory of the interlaced small/large-jump construction."""
    cfg = SimulationConfig(dt=dt, horizon=horizon, n_paths=1, r_max=r_max,
                           small_jump_cutoff=small_jump_cutoff, seed=seed)
    batch = run_interlaced_batch(symbol, x0, cfg, n_paths=1, rng=rng, lam=lam,
                                 store_paths=True, collect_events=True)
    return _to_path_sample(batch)


# ---- CSV emission ----

def write_paths_csv(stream, batch: BatchResult) -> None:
    """Rows (path_id, t, x_1, event); events: step / jump_accepted /
    jump_thinned / exploded, sorted by path then time."""
    if batch.paths is None:
        raise ConfigurationError("store_paths=True is required for CSV output")
    stream.write("path_id,t,x_1,event\n")
    log = batch.jump_log
    for i in range(batch.n_paths):
        rows = []
        expl_t = batch.explosion_time[i] if batch.exploded[i] else math.inf
        for k, t in enumerate(batch.times):
            if t > expl_t:
                break
            rows.append((float(t), float(batch.paths[k, i]),
                         "exploded" if (batch.exploded[i] and t == expl_t) else "step"))
        for j in np.where(log.path_index == i)[0]:
            if log.times[j] <= expl_t:
                rows.append((float(log.times[j]), float(log.post_state[j]),
                             "jump_accepted" if log.accepted[j] else "jump_thinned"))
        rows.sort(key=lambda r: (r[0], r[2] != "step"))
        for t, v, ev in rows:
            stream.write(f"{i},{t:.10g},{v:.10g},{ev}\n")
