"""Run configuration: a YAML document with nested sections.

Sections: ``symbol`` (what field to build), ``schedule`` (probe radii and
sample counts for checkers), ``simulation`` (dt, horizon, n_paths, r_max,
delta, seed), ``verify`` (test function, times, grids, epsilon), ``output``.
Coefficients are expression strings evaluated by the expression grammar.
Configs round-trip: parse -> serialize -> parse is the identity on the
normalized document.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import yaml

from .bundle import bundled_symbol
from .checks import ProbeSchedule
from .errors import ConfigurationError
from .exponents import (ExponentFamily, brownian, compound_poisson,
                        isotropic_stable, lamperti_stable,
                        normal_tempered_stable, relativistic_stable,
                        truncated_levy)
from .generator import TestFunction, gaussian_bump, polynomial_times_gaussian, smooth_cutoff
from .simulate import SimulationConfig
from .symbols import (SymbolField, levy_process_symbol, make_sde_symbol,
                      make_relativistic_symbol, make_stable_like_symbol,
                      scale_symbol)

_SECTIONS = ("symbol", "schedule", "simulation", "verify", "output")


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration document (kept as a plain mapping)."""

    data: dict

    def section(self, name: str, required: bool = False) -> dict:
        value = self.data.get(name)
        if value is None:
            if required:
                raise ConfigurationError(f"config section {name!r} is required")
            return {}
        if not isinstance(value, dict):
            raise ConfigurationError(f"config section {name!r} must be a mapping")
        return value


def config_from_dict(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigurationError("config document must be a mapping")
    unknown = set(doc) - set(_SECTIONS)
    if unknown:
        raise ConfigurationError(f"unknown config sections: {sorted(unknown)}")
    if "symbol" not in doc:
        raise ConfigurationError("config section 'symbol' is required")
    cfg = RunConfig(data=doc)
    build_symbol(cfg)          # fail early on malformed declarations
    build_schedule(cfg)
    return cfg


def load_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    return config_from_dict(doc)


def dump_config(cfg: RunConfig) -> str:
    return yaml.safe_dump(cfg.data, sort_keys=True)


# ---- builders ----

def _driver_from_dict(d: dict) -> ExponentFamily:
    if not isinstance(d, dict) or "family" not in d:
        raise ConfigurationError("symbol.driver must be a mapping with a 'family' key")
    fam = d["family"]
    dim = int(d.get("dim", 1))
    try:
        if fam == "brownian":
            return brownian(dim)
        if fam == "isotropic_stable":
            return isotropic_stable(float(d["alpha"]), dim)
        if fam == "relativistic_stable":
            return relativistic_stable(float(d["alpha"]), float(d["rho"]), dim)
        if fam == "lamperti_stable":
            return lamperti_stable(float(d["alpha"]), float(d["rho"]))
        if fam == "truncated_levy":
            return truncated_levy(float(d["alpha"]), float(d["rho"]))
        if fam == "normal_tempered_stable":
            return normal_tempered_stable(float(d["alpha"]), float(d["kappa"]),
                                          float(d["skew"]))
        if fam == "compound_poisson":
            atoms = [(float(y), float(p)) for y, p in d["atoms"]]
            return compound_poisson(float(d["rate"]), atoms, dim)
    except KeyError as exc:
        raise ConfigurationError(f"driver family {fam!r} misses parameter {exc}") from exc
    raise ConfigurationError(f"unknown driver family {fam!r}")


def build_symbol(cfg: RunConfig) -> SymbolField:
    sec = cfg.section("symbol", required=True)
    kind = sec.get("kind")
    dim = int(sec.get("dim", 1))
    try:
        if kind == "bundled":
            return bundled_symbol(sec["name"])
        if kind == "sde":
            return make_sde_symbol(sec.get("drift", 0.0), sec.get("dispersion", 1.0),
                                   _driver_from_dict(sec["driver"]), dim=dim)
        if kind == "levy":
            return levy_process_symbol(_driver_from_dict(sec["driver"]))
        if kind == "stable_like":
            sym = make_stable_like_symbol(sec.get("phi", 1.0), sec["alpha"], dim=dim)
        elif kind == "relativistic":
            sym = make_relativistic_symbol(sec.get("kappa", 1.0), sec["m"],
                                           sec["alpha"], dim=dim)
        else:
            raise ConfigurationError(
                f"symbol.kind must be one of bundled/sde/levy/stable_like/"
                f"relativistic; got {kind!r}")
        if "scale" in sec:
            sym = scale_symbol(sec["scale"], sym)
        return sym
    except KeyError as exc:
        raise ConfigurationError(f"symbol.{exc.args[0]} is required for kind {kind!r}") from exc


def build_schedule(cfg: RunConfig) -> ProbeSchedule:
    sec = cfg.section("schedule")
    kw = {}
    radii = sec.get("radii")
    if isinstance(radii, dict):
        base = float(radii.get("base", 2.0))
        k_max = int(radii.get("k_max", 6))
        kw["radii"] = tuple(base ** k for k in range(k_max + 1))
    elif radii is not None:
        kw["radii"] = tuple(float(r) for r in radii)
    if "directions" in sec:
        kw["n_directions"] = int(sec["directions"])
    if "xi_samples" in sec:
        kw["xi_samples"] = int(sec["xi_samples"])
    return ProbeSchedule(**kw)


def build_sim_config(cfg: RunConfig, seed_override: int | None = None,
                     require_seed: bool = True) -> SimulationConfig:
    sec = cfg.section("simulation")
    seed = seed_override if seed_override is not None else sec.get("seed")
    if require_seed and seed is None:
        raise ConfigurationError(
            "simulation.seed is required (or pass --seed) so runs are reproducible")
    fields = {}
    for key, name in (("dt", "dt"), ("horizon", "horizon"), ("n_paths", "n_paths"),
                      ("r_max", "r_max"), ("delta", "small_jump_cutoff"),
                      ("lambda_safety", "lambda_safety")):
        if key in sec:
            fields[name] = float(sec[key])
    if "n_paths" in fields:
        fields["n_paths"] = int(fields["n_paths"])
    for name in ("dt", "horizon", "r_max", "small_jump_cutoff"):
        if name in fields and fields[name] <= 0 and not (name == "horizon" and fields[name] == 0):
            raise ConfigurationError(f"simulation.{name} must be positive")
    return SimulationConfig(seed=int(seed if seed is not None else 0), **fields)


def build_test_function(cfg: RunConfig) -> TestFunction:
    sec = cfg.section("verify").get("test_function", {"family": "gaussian_bump"})
    fam = sec.get("family", "gaussian_bump")
    if fam == "gaussian_bump":
        return gaussian_bump(height=float(sec.get("height", 1.0)),
                             center=float(sec.get("center", 0.0)),
                             scale=float(sec.get("scale", 1.0)))
    if fam == "polynomial_times_gaussian":
        return polynomial_times_gaussian([float(c) for c in sec.get("coeffs", [1.0])],
                                         scale=float(sec.get("scale", 1.0)))
    if fam == "smooth_cutoff":
        return smooth_cutoff(float(sec.get("rho", 1.0)))
    raise ConfigurationError(f"unknown test function family {fam!r}")
