"""Numerical audits of the growth, mapping, and boundedness conditions.

Asymptotic statements are probed on a geometric radius grid and decided by
log-log trend fitting (see reports.py).  All checkers return CheckReports;
violations and divergences become report entries, not exceptions.  The one
numeric identity here, ``kernel_identity_residual``, checks by double
quadrature that

    |z|^2 / (1 + |z|^2) = int (1 - cos(eta . z)) g(eta) d eta,
    g(eta) = 1/2 int_0^inf (2 pi r)^{-d/2} exp(-|eta|^2/(2r) - r/2) dr,

the Gaussian-mixture kernel behind the second-moment estimates.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import ConfigurationError, QuadratureError
from .expressions import as_coefficient
from .quadrature import DEFAULT_QUAD, QuadSpec
from .reports import (FAIL, INCONCLUSIVE, PASS, CheckReport, ProbeRecord,
                      aggregate_by_radius, decide_bounded, decide_decay,
                      fit_log_trend, worst_verdict)
from .symbols import SymbolField, direction_sequence

_PROBE_ERRORS = (ConfigurationError, QuadratureError, FloatingPointError,
                 OverflowError, ZeroDivisionError)


@dataclass(frozen=True)
class ProbeSchedule:
    """Geometric radius grid with direction and frequency sample counts."""

    radii: tuple[float, ...] = tuple(2.0 ** k for k in range(7))
    n_directions: int = 2
    xi_samples: int = 4
    head_fraction: float = 0.25
    slope_tol: float = 0.1
    fail_slope: float = 0.3

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        if len(r) < 3 or np.any(r <= 0) or np.any(np.diff(r) <= 0):
            raise ConfigurationError("schedule radii must be >= 3 positive increasing values")
        if self.n_directions < 1:
            raise ConfigurationError("need at least one probe direction")

    @classmethod
    def geometric(cls, k_max: int = 6, base: float = 2.0, **kw) -> "ProbeSchedule":
        return cls(radii=tuple(base ** k for k in range(k_max + 1)), **kw)

    def states(self, dim: int):
        """(radius, direction index, state vector) probes."""
        n_dir = self.n_directions if dim == 1 else max(2, self.n_directions)
        dirs = direction_sequence(dim, n_dir)
        return [(float(r), j, r * dirs[j]) for r in self.radii for j in range(len(dirs))]


def small_ball_sup(symbol: SymbolField, x, radius: float, n_samples: int,
                   real_part_only: bool = False) -> float:
    """Sampled sup of |q(x, .)| over the ball {|xi| <= radius}.

    Samples the boundary sphere and the half-radius sphere; the direction
    sequence is nested, so enlarging ``n_samples`` never lowers the sup.
    """
    dirs = direction_sequence(symbol.dim, max(2, n_samples))
    best = 0.0
    for scale in (radius, 0.5 * radius):
        for u in dirs:
            q = symbol(x, scale * u)
            v = abs(q.real) if real_part_only else abs(q)
            best = max(best, v)
    return best


def check_growth_condition(symbol: SymbolField, sched: ProbeSchedule) -> CheckReport:
    """Is sup_{|xi| <= |x|^{-1}} |q(x, xi)| bounded as |x| grows?"""
    records, failures = [], []
    for radius, j, x in sched.states(symbol.dim):
        try:
            est = small_ball_sup(symbol, x, 1.0 / radius, sched.xi_samples)
        except _PROBE_ERRORS as exc:
            failures.append((radius, j, str(exc)))
            continue
        records.append(ProbeRecord(radius, j, est))
    if failures or not records:
        return CheckReport("growth condition", records, INCONCLUSIVE,
                           detail=f"evaluator failed at {len(failures)} probes: "
                                  f"{failures[:3]}")
    radii, vals = aggregate_by_radius(records)
    fit = fit_log_trend(radii, vals, sched.head_fraction)
    verdict = decide_bounded(fit, sched.slope_tol, sched.fail_slope)
    worst = max(records, key=lambda r: r.estimate)
    return CheckReport("growth condition", records, verdict, slope=fit.slope,
                       fitted_constant=float(np.max(vals)), worst=worst)


_GROWTH_PARTS = (
    ("drift shell bound", 1),             # |b + int_{1<=|y|<|x|/2} y nu| <= c (1+|x|)
    ("diffusion/second-moment bound", 2),  # |Q| + int_{|y|<=|x|/2} |y|^2 nu <= c (1+|x|^2)
    ("large-jump mass bound", 0),          # nu({|y| >= 1 v |x|/2}) <= c
)


def check_characteristics_growth(symbol: SymbolField, sched: ProbeSchedule) -> CheckReport:
    """The three triplet bounds equivalent to the growth condition.

    Each sub-report records the estimate divided by its radius weight
    (1+|x|, 1+|x|^2, 1); the fitted constant is the max ratio beyond the
    first quartile of radii.
    """
    parts: dict[str, list[ProbeRecord]] = {name: [] for name, _ in _GROWTH_PARTS}
    failures = []
    for radius, j, x in sched.states(symbol.dim):
        try:
            view = symbol.characteristics(x)
            nu = view.jump
            half = 0.5 * radius
            m1 = view.drift + nu.first_moment_between(1.0, half)
            est1 = float(np.linalg.norm(m1)) / (1.0 + radius)
            est2 = (float(np.linalg.norm(view.diffusion, 2))
                    + nu.second_moment_between(0.0, half)) / (1.0 + radius * radius)
            est3 = nu.tail_mass(max(1.0, half))
        except _PROBE_ERRORS as exc:
            failures.append((radius, j, str(exc)))
            continue
        parts["drift shell bound"].append(ProbeRecord(radius, j, est1))
        parts["diffusion/second-moment bound"].append(ProbeRecord(radius, j, est2))
        parts["large-jump mass bound"].append(ProbeRecord(radius, j, est3))

    if failures:
        return CheckReport("characteristics growth bounds", [], INCONCLUSIVE,
                           detail=f"quadrature failed at {len(failures)} probes: "
                                  f"{failures[:3]}")

    subs = []
    tail_start = int(len(sched.radii) * sched.head_fraction)
    tail_radii = set(sched.radii[tail_start:])
    for name, _ in _GROWTH_PARTS:
        recs = parts[name]
        radii, vals = aggregate_by_radius(recs)
        fit = fit_log_trend(radii, vals, sched.head_fraction)
        verdict = decide_bounded(fit, sched.slope_tol, sched.fail_slope)
        c_tail = max((r.estimate for r in recs if r.radius in tail_radii), default=0.0)
        c_all = max((r.estimate for r in recs), default=0.0)
        subs.append(CheckReport(name, recs, verdict, slope=fit.slope,
                                fitted_constant=c_tail,
                                worst=max(recs, key=lambda r: r.estimate),
                                detail=f"global constant {c_all:.6g}"))
    verdict = worst_verdict(s.verdict for s in subs)
    return CheckReport("characteristics growth bounds", [], verdict,
                       fitted_constant=max(s.fitted_constant for s in subs),
                       subreports=subs)


def check_growth_equivalence(symbol: SymbolField, sched: ProbeSchedule) -> CheckReport:
    """Consistency meta-check: the symbol-side and triplet-side growth
    verdicts must agree (the two formulations are equivalent)."""
    g = check_growth_condition(symbol, sched)
    c = check_characteristics_growth(symbol, sched)
    if INCONCLUSIVE in (g.verdict, c.verdict):
        verdict, detail = INCONCLUSIVE, "a sub-check was inconclusive"
    elif g.verdict == c.verdict:
        verdict, detail = PASS, f"both sides agree ({g.verdict})"
    else:
        verdict, detail = FAIL, f"symbol side {g.verdict}, triplet side {c.verdict}"
    return CheckReport("growth-condition equivalence", [], verdict, detail=detail,
                       subreports=[g, c])


def check_mapping_property(symbol: SymbolField, sched: ProbeSchedule,
                           r_list) -> CheckReport:
    """Does nu(x, B(-x, r)) tend to zero for every fixed ball radius r?

    Probes where r >= |x| (the ball touches the origin and the mass can be
    infinite) are skipped: the limit statement only constrains distant states.
    A secondary sub-report estimates the sufficient condition
    sup_{|xi| <= |x|^{-1}} |Re q(x, xi)| -> 0.
    """
    if not len(r_list):
        raise ConfigurationError("need at least one ball radius")
    subs = []
    failures = []
    for r_ball in r_list:
        recs = []
        for radius, j, x in sched.states(symbol.dim):
            if radius <= 1.5 * r_ball:
                continue
            try:
                est = symbol.characteristics(x).jump.ball_mass(-x, r_ball)
            except _PROBE_ERRORS as exc:
                failures.append((radius, j, str(exc)))
                continue
            recs.append(ProbeRecord(radius, j, est, {"ball_radius": r_ball}))
        if failures:
            subs.append(CheckReport(f"ball mass at r={r_ball}", recs, INCONCLUSIVE,
                                    detail=f"quadrature failures: {failures[:3]}"))
            continue
        radii, vals = aggregate_by_radius(recs)
        if len(radii) < 3:
            subs.append(CheckReport(f"ball mass at r={r_ball}", recs, INCONCLUSIVE,
                                    detail="not enough usable probes"))
            continue
        fit = fit_log_trend(radii, vals, sched.head_fraction)
        verdict = decide_decay(fit, sched.slope_tol)
        subs.append(CheckReport(f"ball mass at r={r_ball}", recs, verdict,
                                slope=fit.slope,
                                worst=max(recs, key=lambda r: r.estimate)))

    # secondary: the sufficient small-frequency real-part condition
    recs2 = []
    for radius, j, x in sched.states(symbol.dim):
        try:
            est = small_ball_sup(symbol, x, 1.0 / radius, sched.xi_samples,
                                 real_part_only=True)
        except _PROBE_ERRORS:
            continue
        recs2.append(ProbeRecord(radius, j, est))
    if recs2:
        radii2, vals2 = aggregate_by_radius(recs2)
        fit2 = fit_log_trend(radii2, vals2, sched.head_fraction)
        subs.append(CheckReport("sufficient condition: small-frequency real part",
                                recs2, decide_decay(fit2, sched.slope_tol),
                                slope=fit2.slope))

    primary = subs[:len(r_list)]
    verdict = worst_verdict(s.verdict for s in primary)
    return CheckReport("mapping property (far-ball mass decay)", [], verdict,
                       subreports=subs,
                       detail=f"primary over r in {list(r_list)}; "
                              "last sub-report is the sufficient condition")


_LOCBD_HUGE = 1e12


def check_local_boundedness(symbol: SymbolField, compacts, n_points: int = 201) -> CheckReport:
    """Four suprema over centered balls: |q(x,0)|, |b|, |Q|, int min(|y|^2,1) nu."""
    if not len(compacts):
        raise ConfigurationError("need at least one compact radius")
    subs = []
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        for big_r in compacts:
            if symbol.dim == 1:
                xs = [np.array([v]) for v in np.linspace(-big_r, big_r, n_points)]
            else:
                dirs = direction_sequence(symbol.dim, 8)
                xs = [rad * u for rad in np.linspace(0.0, big_r, max(n_points // 8, 3))
                      for u in dirs]
            sups = {"symbol_at_zero": 0.0, "drift": 0.0, "diffusion": 0.0,
                    "jump_moment": 0.0}
            recs, bad = [], None
            for x in xs:
                try:
                    view = symbol.characteristics(x)
                    vals = {
                        "symbol_at_zero": abs(symbol(x, np.zeros(symbol.dim))),
                        "drift": float(np.linalg.norm(view.drift)),
                        "diffusion": float(np.linalg.norm(view.diffusion, 2)),
                        "jump_moment": view.jump.small_large_moment(),
                    }
                except _PROBE_ERRORS as exc:
                    bad = ProbeRecord(float(np.linalg.norm(x)), 0, math.inf,
                                      {"error": str(exc)})
                    break
                for k, v in vals.items():
                    if not math.isfinite(v) or v > _LOCBD_HUGE:
                        bad = ProbeRecord(float(np.linalg.norm(x)), 0,
                                          v if math.isfinite(v) else math.inf,
                                          {"quantity": k})
                        break
                    sups[k] = max(sups[k], v)
                if bad is not None:
                    break
            if bad is not None:
                subs.append(CheckReport(f"compact |x| <= {big_r}", [bad], FAIL,
                                        worst=bad, detail="divergent quantity"))
            else:
                recs = [ProbeRecord(big_r, 0, v, {"quantity": k})
                        for k, v in sups.items()]
                subs.append(CheckReport(f"compact |x| <= {big_r}", recs, PASS,
                                        fitted_constant=max(sups.values())))
    verdict = worst_verdict(s.verdict for s in subs)
    return CheckReport("local boundedness", [], verdict, subreports=subs)


def _mixture_kernel(eta: float, d: int, spec: QuadSpec) -> float:
    """g(eta) = 1/2 int_0^inf (2 pi r)^{-d/2} exp(-|eta|^2/(2r) - r/2) dr."""
    e2 = eta * eta

    def integrand(r):
        return 0.5 * (2.0 * math.pi * r) ** (-0.5 * d) * math.exp(-e2 / (2.0 * r) - 0.5 * r)

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            head, _ = integrate.quad(integrand, 0.0, 1.0, epsabs=1e-13, epsrel=1e-12,
                                     limit=spec.limit)
            tail, _ = integrate.quad(integrand, 1.0, np.inf, epsabs=1e-13, epsrel=1e-12,
                                     limit=spec.limit)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"mixture kernel integral at eta={eta}: {exc}") from exc
    return head + tail


def kernel_identity_residual(z, quad_spec: QuadSpec = DEFAULT_QUAD) -> float:
    """|z|^2/(1+|z|^2) minus its Gaussian-mixture representation, d = 1.

    Both sides are computed independently: the right-hand side by the double
    quadrature (the r-integral inside the kernel, then the eta-integral, with
    the oscillatory part handled by weighted quadrature).
    """
    z = float(np.atleast_1d(np.asarray(z, dtype=float))[0])
    lhs = z * z / (1.0 + z * z)
    if z == 0.0:
        return abs(lhs)
    g = lambda eta: _mixture_kernel(eta, 1, quad_spec)
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            total, _ = integrate.quad(g, 0.0, np.inf, epsabs=1e-11, epsrel=1e-10,
                                      limit=quad_spec.limit)
            osc, _ = integrate.quad(g, 0.0, np.inf, weight="cos", wvar=abs(z),
                                    epsabs=1e-11, epsrel=1e-10, limit=quad_spec.limit)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"kernel identity eta-integral at z={z}: {exc}") from exc
    rhs = 2.0 * (total - osc)
    return abs(lhs - rhs)


def check_relativistic_conditions(kappa, m, alpha, sched: ProbeSchedule) -> CheckReport:
    """Coefficient conditions for relativistic-type symbols.

    Along the schedule (radii >= 1) estimates
    (a) kappa(x) / (|x|^2 m(x)^{2 - alpha(x)})  -- must stay bounded,
    (b) kappa(x) m(x) exp(-|x| m(x) / 4)        -- must tend to zero.
    Computed in log space so fast-growing m never overflows.
    """
    kappa_fn = as_coefficient(kappa)
    m_fn = as_coefficient(m)
    alpha_fn = as_coefficient(alpha)
    recs_a, recs_b = [], []
    for radius, j, x in sched.states(1):
        if radius < 1.0:
            continue
        arg = float(x[0])
        k, mm, a = float(kappa_fn(arg)), float(m_fn(arg)), float(alpha_fn(arg))
        if k <= 0 or mm <= 0:
            raise ConfigurationError(f"kappa, m must be positive at x={arg}")
        log_a = math.log(k) - 2.0 * math.log(radius) - (2.0 - a) * math.log(mm)
        est_a = math.exp(log_a) if log_a < 700 else math.inf
        log_b = math.log(k) + math.log(mm) - radius * mm / 4.0
        est_b = math.exp(log_b) if log_b < 700 else math.inf
        recs_a.append(ProbeRecord(radius, j, est_a))
        recs_b.append(ProbeRecord(radius, j, est_b))

    radii_a, vals_a = aggregate_by_radius(recs_a)
    fit_a = fit_log_trend(radii_a, vals_a, sched.head_fraction)
    sub_a = CheckReport("kappa / (|x|^2 m^{2-alpha}) bounded", recs_a,
                        decide_bounded(fit_a, sched.slope_tol, sched.fail_slope),
                        slope=fit_a.slope,
                        fitted_constant=float(np.max(vals_a)),
                        worst=max(recs_a, key=lambda r: r.estimate))
    radii_b, vals_b = aggregate_by_radius(recs_b)
    fit_b = fit_log_trend(radii_b, vals_b, sched.head_fraction)
    sub_b = CheckReport("kappa m exp(-|x| m / 4) -> 0", recs_b,
                        decide_decay(fit_b, sched.slope_tol), slope=fit_b.slope,
                        worst=max(recs_b, key=lambda r: r.estimate))
    verdict = worst_verdict([sub_a.verdict, sub_b.verdict])
    return CheckReport("relativistic coefficient conditions", [], verdict,
                       subreports=[sub_a, sub_b])
