"""Characteristic exponent families for the driving noise.

Each family fixes a continuous negative definite function psi with psi(0)=0,
Hermitian symmetry and Re psi >= 0, together with its drift / diffusion /
jump-measure triplet in the compensated form

    psi(xi) = -i b.xi + (1/2) xi.Q xi
              + int (1 - e^{i y.xi} + i y.xi 1_{(0,1)}(|y|)) nu(dy).

Families
--------
brownian                 psi(xi) = |xi|^2 / 2                    (any d)
isotropic_stable         psi(xi) = |xi|^alpha, alpha in (0, 2]   (any d)
relativistic_stable      psi(xi) = (|xi|^2 + rho^2)^{alpha/2} - rho^alpha
lamperti_stable          psi(xi) = (|xi|^2 + rho)_alpha - (rho)_alpha,
                         (r)_a = Gamma(r + a)/Gamma(r), alpha in (1/2, 1)
truncated_levy           psi(xi) = [ (|xi|^2+rho^2)^{alpha/2}
                                     cos(alpha arctan(|xi|/rho)) - rho^alpha ]
                                   / cos(pi alpha / 2), alpha in (1, 2)
normal_tempered_stable   psi(xi) = (kappa^2 + (xi - i b)^2)^{alpha/2}
                                   - (kappa^2 - b^2)^{alpha/2}
compound_poisson         psi(xi) = rate * sum_j p_j (1 - e^{i y_j xi})

The truncated family carries the 1/cos(pi alpha/2) normalization: without it
the formula goes negative for large |xi| and is not negative definite; with
it the exponent is exactly the one generated by the tempered power-law jump
density c(alpha) e^{-rho|y|} |y|^{-1-alpha}.

Lamperti/truncated/normal-tempered families are one-dimensional.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from .errors import ConfigurationError
from .levy_measures import (
    AtomLevyMeasure,
    LevyMeasure,
    SubordinateBrownianLevyMeasure,
    ZeroLevyMeasure,
    gamma_ratio_subordinator_density,
    isotropic_stable_measure,
    tempered_stable_measure_1d,
    tempered_stable_subordinator_density,
)

EXACT_SAMPLER_FAMILIES = ("brownian", "isotropic_stable", "compound_poisson")


@dataclass(frozen=True)
class ExponentFamily:
    """A parameterized characteristic exponent; immutable and hashable."""

    family: str
    dim: int = 1
    alpha: float | None = None
    rho: float | None = None          # tempering mass
    kappa: float | None = None        # normal-tempered-stable scale
    skew: float | None = None         # normal-tempered-stable drift skew
    rate: float | None = None         # compound-Poisson intensity
    atoms: tuple[tuple[tuple[float, ...], float], ...] | None = None

    def __post_init__(self):
        f, a = self.family, self.alpha
        if self.dim < 1:
            raise ConfigurationError("dimension must be >= 1")
        if f == "brownian":
            return
        if f == "isotropic_stable":
            if a is None or not 0.0 < a <= 2.0:
                raise ConfigurationError(
                    f"isotropic stable index must satisfy 0 < alpha <= 2; got {a}")
        elif f == "relativistic_stable":
            if a is None or not 0.0 < a <= 2.0:
                raise ConfigurationError(
                    f"relativistic stable index must satisfy 0 < alpha <= 2; got {a}")
            if self.rho is None or self.rho <= 0:
                raise ConfigurationError("relativistic family needs tempering mass rho > 0")
        elif f == "lamperti_stable":
            if self.dim != 1:
                raise ConfigurationError("lamperti family is one-dimensional")
            if a is None or not 0.5 < a < 1.0:
                raise ConfigurationError(
                    f"lamperti index must satisfy 1/2 < alpha < 1; got {a}")
            if self.rho is None or self.rho <= 0:
                raise ConfigurationError("lamperti family needs rho > 0")
        elif f == "truncated_levy":
            if self.dim != 1:
                raise ConfigurationError("truncated family is one-dimensional")
            if a is None or not 1.0 < a < 2.0:
                raise ConfigurationError(
                    f"truncated index must satisfy 1 < alpha < 2; got {a}")
            if self.rho is None or self.rho <= 0:
                raise ConfigurationError("truncated family needs rho > 0")
        elif f == "normal_tempered_stable":
            if self.dim != 1:
                raise ConfigurationError("normal tempered stable family is one-dimensional")
            if a is None or not 1.0 < a < 2.0:
                raise ConfigurationError(
                    f"normal tempered stable index must satisfy 1 < alpha < 2; got {a}")
            if self.skew is None or self.skew <= 0:
                raise ConfigurationError("normal tempered stable needs skew > 0")
            if self.kappa is None or abs(self.kappa) <= abs(self.skew):
                raise ConfigurationError(
                    "normal tempered stable needs |kappa| > |skew|")
        elif f == "compound_poisson":
            if self.rate is None or self.rate <= 0:
                raise ConfigurationError("compound Poisson rate must be positive")
            if not self.atoms:
                raise ConfigurationError("compound Poisson needs a jump law (atoms)")
            total = sum(p for _, p in self.atoms)
            if abs(total - 1.0) > 1e-12:
                raise ConfigurationError("compound Poisson atom probabilities must sum to 1")
            for y, p in self.atoms:
                if p <= 0:
                    raise ConfigurationError("atom probabilities must be positive")
                if len(y) != self.dim:
                    raise ConfigurationError("atom dimension mismatch")
                if all(v == 0 for v in y):
                    raise ConfigurationError("jump atoms must sit away from the origin")
        else:
            raise ConfigurationError(f"unknown exponent family {f!r}")


# ---- constructors ----

def brownian(dim: int = 1) -> ExponentFamily:
    return ExponentFamily("brownian", dim=dim)


def isotropic_stable(alpha: float, dim: int = 1) -> ExponentFamily:
    return ExponentFamily("isotropic_stable", dim=dim, alpha=alpha)


def relativistic_stable(alpha: float, rho: float, dim: int = 1) -> ExponentFamily:
    return ExponentFamily("relativistic_stable", dim=dim, alpha=alpha, rho=rho)


def lamperti_stable(alpha: float, rho: float) -> ExponentFamily:
    return ExponentFamily("lamperti_stable", alpha=alpha, rho=rho)


def truncated_levy(alpha: float, rho: float) -> ExponentFamily:
    return ExponentFamily("truncated_levy", alpha=alpha, rho=rho)


def normal_tempered_stable(alpha: float, kappa: float, skew: float) -> ExponentFamily:
    return ExponentFamily("normal_tempered_stable", alpha=alpha, kappa=kappa, skew=skew)


def compound_poisson(rate: float, atoms, dim: int = 1) -> ExponentFamily:
    """atoms: iterable of (location, probability); locations scalars in d=1."""
    packed = []
    for y, p in atoms:
        loc = tuple(float(v) for v in (y if np.ndim(y) else [y]))
        packed.append((loc, float(p)))
    return ExponentFamily("compound_poisson", dim=dim, rate=rate, atoms=tuple(packed))


# ---- evaluation ----

def eval_exponent(family: ExponentFamily, xi) -> complex:
    """psi(xi) for a single frequency xi (scalar in d=1 or length-d vector)."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if xi.shape != (family.dim,):
        raise ConfigurationError(
            f"frequency of dimension {xi.shape} for family of dimension {family.dim}")
    if not np.all(np.isfinite(xi)):
        raise ConfigurationError("frequency must be finite")
    s = float(np.linalg.norm(xi))
    f, a = family.family, family.alpha
    if f == "brownian":
        return complex(0.5 * s * s)
    if f == "isotropic_stable":
        return complex(s ** a)
    if f == "relativistic_stable":
        rho = family.rho
        return complex((s * s + rho * rho) ** (0.5 * a) - rho ** a)
    if f == "lamperti_stable":
        rho = family.rho
        return complex(special.poch(s * s + rho, a) - special.poch(rho, a))
    if f == "truncated_levy":
        rho = family.rho
        raw = (s * s + rho * rho) ** (0.5 * a) * math.cos(a * math.atan(s / rho)) - rho ** a
        return complex(raw / math.cos(0.5 * math.pi * a))
    if f == "normal_tempered_stable":
        kap, b = family.kappa, family.skew
        z = kap * kap + (xi[0] - 1j * b) ** 2
        return complex(z ** (0.5 * a) - (kap * kap - b * b) ** (0.5 * a))
    if f == "compound_poisson":
        out = 0.0 + 0.0j
        for y, p in family.atoms:
            out += p * (1.0 - np.exp(1j * float(np.dot(y, xi))))
        return complex(family.rate * out)
    raise ConfigurationError(f"unknown family {f!r}")


# ---- characteristics ----

@lru_cache(maxsize=None)
def levy_triplet(family: ExponentFamily):
    """(drift b, diffusion Q, jump measure nu) reproducing the exponent."""
    d = family.dim
    f, a = family.family, family.alpha
    zero_b = np.zeros(d)
    zero_q = np.zeros((d, d))
    if f == "brownian":
        return zero_b, np.eye(d), ZeroLevyMeasure(d)
    if f == "isotropic_stable":
        if a == 2.0:
            return zero_b, 2.0 * np.eye(d), ZeroLevyMeasure(d)
        return zero_b, zero_q, isotropic_stable_measure(a, d)
    if f == "relativistic_stable":
        rho = family.rho
        if a == 2.0:
            return zero_b, 2.0 * np.eye(d), ZeroLevyMeasure(d)
        nu = SubordinateBrownianLevyMeasure(
            d, tempered_stable_subordinator_density(0.5 * a, rho * rho),
            t_scale=1.0 / (rho * rho), envelope_rate=0.5 * rho)
        return zero_b, zero_q, nu
    if f == "lamperti_stable":
        rho = family.rho
        nu = SubordinateBrownianLevyMeasure(
            1, gamma_ratio_subordinator_density(a, rho),
            t_scale=1.0 / (rho + a))
        return zero_b, zero_q, nu
    if f == "truncated_levy":
        return zero_b, zero_q, tempered_stable_measure_1d(a, family.rho)
    if f == "normal_tempered_stable":
        kap, bskew = family.kappa, family.skew
        theta = kap * kap - bskew * bskew
        nu = SubordinateBrownianLevyMeasure(
            1, tempered_stable_subordinator_density(0.5 * a, theta),
            t_scale=1.0 / theta, beta=2.0 * bskew)
        drift = nu.first_moment_between(0.0, 1.0)
        return drift, zero_q, nu
    if f == "compound_poisson":
        atoms = [(np.array(y), family.rate * p) for y, p in family.atoms]
        nu = AtomLevyMeasure(atoms, dim=d)
        return nu.first_moment_between(0.0, 1.0), zero_q, nu
    raise ConfigurationError(f"unknown family {f!r}")


def jump_measure(family: ExponentFamily) -> LevyMeasure:
    return levy_triplet(family)[2]
