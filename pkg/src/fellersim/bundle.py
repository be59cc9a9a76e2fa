"""Bundled example symbols used by the test suite and the docs.

Eight fields covering the main regimes: three diffusion-type equations, a
constant and a growing-coefficient stable-like field, the quartic growth
violator (the classic counterexample to boundedness of the small-frequency
sup), a constant relativistic field, and a unit-atom compound Poisson field.
``mapping_violator`` is a ninth, deliberately broken field whose image
measure keeps unit mass on a ball around -x for every x.
"""
from __future__ import annotations

import numpy as np

from .exponents import brownian, compound_poisson, isotropic_stable
from .levy_measures import ZeroLevyMeasure
from .symbols import (SymbolField, levy_process_symbol, make_sde_symbol,
                      make_stable_like_symbol, make_relativistic_symbol,
                      symbol_from_characteristics)

BOUNDARY_PHI = "1 + abs(x)**(1.2 + 0.6/(1+x**2))"
BOUNDARY_ALPHA = "1.2 + 0.6/(1+x**2)"


def _growth_violator() -> SymbolField:
    def q_fn(xs):
        xs = np.asarray(xs, dtype=float)
        return 2.0 * (1.0 + xs ** 4)

    return symbol_from_characteristics(
        drift=lambda x: np.zeros(1),
        diffusion=lambda x: np.array([[2.0 * (1.0 + float(x[0]) ** 4)]]),
        measure=lambda x: ZeroLevyMeasure(1),
        evaluate=lambda x, xi: (1.0 + float(x[0]) ** 4) * float(xi[0]) ** 2,
        provenance="raw", label="growth_violator",
        sim_spec={"kind": "raw", "drift": lambda xs: np.zeros_like(np.asarray(xs, dtype=float)),
                  "diffusion": q_fn, "measure": None})


_FACTORIES = {
    "brownian_sde": lambda: make_sde_symbol(0.0, 1.0, brownian(), label="brownian_sde"),
    "ou_sde": lambda: make_sde_symbol("-x", 1.0, brownian(), label="ou_sde"),
    "linear_dispersion_sde": lambda: make_sde_symbol(0.0, "x", brownian(),
                                                     label="linear_dispersion_sde"),
    "stable_const": lambda: make_stable_like_symbol(1.0, 1.5, label="stable_const"),
    "stable_boundary": lambda: make_stable_like_symbol(BOUNDARY_PHI, BOUNDARY_ALPHA,
                                                       label="stable_boundary"),
    "growth_violator": _growth_violator,
    "relativistic_const": lambda: make_relativistic_symbol(1.0, 1.0, 1.5,
                                                           label="relativistic_const"),
    "cp_unit_atom": lambda: levy_process_symbol(compound_poisson(1.0, [(2.0, 1.0)]),
                                                label="cp_unit_atom"),
    # extra: image measure parked on a ball around -x for every state
    "mapping_violator": lambda: make_sde_symbol(0.0, "1 - x",
                                                compound_poisson(1.0, [(1.0, 1.0)]),
                                                label="mapping_violator"),
    # extra: sde driven by stable noise with growing dispersion
    "stable_dispersion_sde": lambda: make_sde_symbol(0.0, "1 + abs(x)/4",
                                                     isotropic_stable(1.5),
                                                     label="stable_dispersion_sde"),
}

CORE_BUNDLE = ("brownian_sde", "ou_sde", "linear_dispersion_sde", "stable_const",
               "stable_boundary", "growth_violator", "relativistic_const",
               "cp_unit_atom")


def bundled_symbol(name: str) -> SymbolField:
    try:
        return _FACTORIES[name]()
    except KeyError:
        raise KeyError(f"unknown bundled symbol {name!r}; "
                       f"available: {sorted(_FACTORIES)}") from None


def bundled_names() -> tuple[str, ...]:
    return tuple(_FACTORIES)
