"""Monte Carlo verification of the semigroup-level conclusions.

Estimates T_t f(x) = E^x f(X_t) by interlaced simulation and checks, at desk
scale with 3-sigma rules, the properties a well-behaved solution must show:
vanishing at infinity of T_t f together with far-start hitting probabilities,
compact containment against the quadratic Lyapunov envelope, agreement of the
difference quotient (T_h f - f)/h with the operator route, continuity at
t = 0, and distributional correctness of the driver samplers through their
empirical characteristic functions.

Paths that explode contribute the value 0 to test statistics (functions
vanishing at infinity extend by 0 to the cemetery state) and are tallied
separately so conservativeness is judged by the explosion count itself.
Hitting and exit extrema are read off the discrete grid; the O(sqrt(dt))
bias is absorbed in the stated tolerances.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .checks import ProbeSchedule, check_growth_condition, check_mapping_property
from .errors import ConfigurationError
from .exponents import ExponentFamily, eval_exponent
from .generator import TestFunction, apply_characteristics, lyapunov_constant
from .reports import FAIL, INCONCLUSIVE, PASS, CheckReport, ProbeRecord, worst_verdict
from .simulate import (SimulationConfig, build_sim_model, large_jump_intensity,
                       path_generator, run_interlaced_batch, sample_increments)
from .symbols import SymbolField


@dataclass(frozen=True)
class SemigroupEstimate:
    """Monte Carlo estimate of T_t f(x) with its sampling error."""

    x: float
    t: float
    fn_label: str
    estimate: float
    std_error: float
    n_paths: int
    n_exploded: int


def _f_values(f: TestFunction, terminal, exploded):
    vals = np.asarray(f.value(terminal), dtype=float)
    vals = np.where(exploded, 0.0, vals)
    return vals


def estimate_semigroup(symbol: SymbolField, f: TestFunction, x, t: float,
                       n_paths: int, cfg: SimulationConfig, rng=None,
                       lam: float | None = None) -> SemigroupEstimate:
    """Mean of f over n interlaced paths started at x and run to time t."""
    if n_paths < 100:
        raise ConfigurationError("semigroup estimation needs n_paths >= 100")
    xv = float(np.atleast_1d(x)[0])
    if t == 0.0:
        return SemigroupEstimate(xv, 0.0, f.label, float(f.value(xv)), 0.0,
                                 n_paths, 0)
    run_cfg = replace(cfg, horizon=t)
    batch = run_interlaced_batch(symbol, xv, run_cfg, n_paths=n_paths, rng=rng,
                                 lam=lam, collect_events=False)
    vals = _f_values(f, batch.terminal, batch.exploded)
    n_exp = int(batch.exploded.sum())
    if n_exp == n_paths:
        warnings.warn("all paths exploded; the estimate is degenerate", stacklevel=2)
    est = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(n_paths))
    return SemigroupEstimate(xv, t, f.label, est, se, n_paths, n_exp)


def _monotone_within(values, ses, slack: float = 3.0) -> bool:
    for a, b, sa, sb in zip(values, values[1:], ses, ses[1:]):
        if b > a + slack * math.hypot(sa, sb):
            return False
    return True


def verify_feller_vanishing(symbol: SymbolField, f: TestFunction, t: float,
                            radius_grid, eps: float, cfg: SimulationConfig,
                            n_paths: int, hit_radius: float = 2.0,
                            schedule: ProbeSchedule | None = None,
                            gate: bool = True, rng=None) -> CheckReport:
    """T_t f and far-start hitting probabilities must decay along the radii.

    Gated on the growth and mapping checks: when they fail the verifier
    refuses to certify and reports the failed precondition instead.
    """
    if gate:
        sched = schedule or ProbeSchedule.geometric(6)
        g = check_growth_condition(symbol, sched)
        m = check_mapping_property(symbol, sched, [hit_radius])
        if g.verdict != PASS or m.verdict != PASS:
            return CheckReport(
                "semigroup vanishing at infinity", [], INCONCLUSIVE,
                detail=f"precondition failed: growth={g.verdict}, mapping={m.verdict}",
                subreports=[g, m])

    lam = large_jump_intensity(symbol).rate if build_sim_model(symbol).jumps else 0.0
    rng = rng or path_generator(cfg.seed)
    run_cfg = replace(cfg, horizon=t)
    recs, f_vals, f_ses, h_vals, h_ses = [], [], [], [], []
    need_n = 0
    for rad in radius_grid:
        batch = run_interlaced_batch(symbol, float(rad), run_cfg, n_paths=n_paths,
                                     rng=rng, lam=lam, collect_events=False)
        vals = _f_values(f, batch.terminal, batch.exploded)
        hits = (batch.min_abs < hit_radius).astype(float)
        est, se = float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(n_paths))
        hest, hse = float(hits.mean()), float(hits.std(ddof=1) / math.sqrt(n_paths))
        recs.append(ProbeRecord(float(rad), 0, est,
                                {"kind": "semigroup", "std_error": se,
                                 "exploded": int(batch.exploded.sum())}))
        recs.append(ProbeRecord(float(rad), 0, hest,
                                {"kind": "hitting", "std_error": hse,
                                 "hit_radius": hit_radius}))
        f_vals.append(est), f_ses.append(se)
        h_vals.append(hest), h_ses.append(hse)
        need_n = max(need_n, math.ceil((3.0 * max(se, hse) * math.sqrt(n_paths)
                                        / max(eps, 1e-12) * 3.0) ** 2))
    worst_se = max(max(f_ses), max(h_ses))
    if worst_se > eps / 3.0:
        return CheckReport("semigroup vanishing at infinity", recs, INCONCLUSIVE,
                           detail=f"standard errors exceed eps/3; need about "
                                  f"{need_n} paths per start")
    ok = (_monotone_within(f_vals, f_ses) and _monotone_within(h_vals, h_ses)
          and f_vals[-1] < eps and h_vals[-1] < eps)
    verdict = PASS if ok else FAIL
    worst = max(recs, key=lambda r: r.estimate)
    return CheckReport("semigroup vanishing at infinity", recs, verdict,
                       worst=worst,
                       detail=f"final semigroup {f_vals[-1]:.4g}, final hitting "
                              f"{h_vals[-1]:.4g}, eps {eps}")


def verify_conservative(symbol: SymbolField, t: float, x_grid, r_grid,
                        cfg: SimulationConfig, n_paths: int,
                        rng=None) -> CheckReport:
    """sup_{x in K} P^x(sup_{s<=t} |X_s| >= R) must fall toward 0 in R and,
    for symbols without a large-jump channel, stay below the quadratic
    Lyapunov envelope e^{Ct} v(x)/v(R)."""
    rng = rng or path_generator(cfg.seed)
    model = build_sim_model(symbol)
    lam = large_jump_intensity(symbol).rate if model.jumps else 0.0
    envelope_binding = lam == 0.0
    rate_c = lyapunov_constant(symbol, "v")
    run_cfg = replace(cfg, horizon=t)
    recs = []
    sup_per_r = np.zeros(len(r_grid))
    ses_per_r = np.zeros(len(r_grid))
    env_violated = None
    total_exploded = 0
    for xv in x_grid:
        batch = run_interlaced_batch(symbol, float(xv), run_cfg, n_paths=n_paths,
                                     rng=rng, lam=lam, collect_events=False)
        total_exploded += int(batch.exploded.sum())
        for j, r in enumerate(r_grid):
            ind = (batch.max_abs >= r).astype(float)
            est = float(ind.mean())
            se = float(ind.std(ddof=1) / math.sqrt(n_paths)) if n_paths > 1 else 0.0
            env = math.exp(rate_c * t) * (xv * xv + 1.0) / (r * r + 1.0)
            recs.append(ProbeRecord(float(r), 0, est,
                                    {"start": float(xv), "std_error": se,
                                     "envelope": env}))
            if est > sup_per_r[j]:
                sup_per_r[j], ses_per_r[j] = est, se
            if envelope_binding and est > env + 3.0 * se:
                env_violated = (xv, r, est, env)
    decayed = _monotone_within(list(sup_per_r), list(ses_per_r)) and \
        sup_per_r[-1] <= max(0.01, 3.0 * ses_per_r[-1])
    ok = decayed and env_violated is None
    detail = (f"Lyapunov rate C={rate_c:.4g}; envelope "
              f"{'binding' if envelope_binding else 'reference only'}; "
              f"exploded paths {total_exploded}")
    if env_violated:
        detail += f"; envelope violated at start={env_violated[0]}, R={env_violated[1]}"
    return CheckReport("compact containment", recs, PASS if ok else FAIL,
                       detail=detail,
                       worst=max(recs, key=lambda r: r.estimate))


def verify_generator_consistency(symbol: SymbolField, f: TestFunction, x_grid,
                                 h: float, n_paths: int, cfg: SimulationConfig,
                                 rng=None, bias_coefficient: float = 25.0) -> CheckReport:
    """(T_h f - f)/h against the operator value, within 3 (SE/h + O(h))."""
    rng = rng or path_generator(cfg.seed)
    recs = []
    verdicts = []
    for xv in x_grid:
        est = estimate_semigroup(symbol, f, xv, h, n_paths, cfg, rng=rng)
        quotient = (est.estimate - float(f.value(float(xv)))) / h
        af = apply_characteristics(symbol, f, np.r_[float(xv)])
        tol = 3.0 * (est.std_error / h + bias_coefficient * h)
        err = abs(quotient - af)
        if est.std_error / h > max(1.0, abs(af)):
            verdicts.append(INCONCLUSIVE)
        else:
            verdicts.append(PASS if err <= tol else FAIL)
        recs.append(ProbeRecord(abs(float(xv)), 0, err,
                                {"quotient": quotient, "operator": af,
                                 "tolerance": tol}))
    verdict = worst_verdict(verdicts)
    if INCONCLUSIVE in verdicts:
        needed = math.ceil(n_paths * 9.0)
        return CheckReport("generator consistency", recs, INCONCLUSIVE,
                           detail=f"difference-quotient noise too large; try about {needed} paths")
    return CheckReport("generator consistency", recs, verdict,
                       worst=max(recs, key=lambda r: r.estimate))


def verify_strong_continuity(symbol: SymbolField, f: TestFunction, x_grid,
                             t_grid, cfg: SimulationConfig, n_paths: int,
                             rng=None) -> CheckReport:
    """|T_t f(x) - f(x)| must shrink as t decreases to 0."""
    rng = rng or path_generator(cfg.seed)
    ts = sorted(float(t) for t in t_grid)          # ascending
    recs = []
    ok = True
    for xv in x_grid:
        fx = float(f.value(float(xv)))
        diffs, ses = [], []
        for t in ts:
            est = estimate_semigroup(symbol, f, xv, t, n_paths, cfg, rng=rng)
            diffs.append(abs(est.estimate - fx))
            ses.append(est.std_error)
            recs.append(ProbeRecord(t, 0, diffs[-1],
                                    {"start": float(xv), "std_error": est.std_error}))
        # reading from large t down to 0 the gap must not grow as t shrinks
        ok = ok and _monotone_within(diffs[::-1], ses[::-1])
        ok = ok and diffs[0] <= 3.0 * ses[0] + 0.05 * max(1.0, abs(fx))
    return CheckReport("strong continuity at t=0", recs, PASS if ok else FAIL,
                       worst=max(recs, key=lambda r: r.estimate))


def empirical_cf_test(family: ExponentFamily, t: float, xi_grid, n: int,
                      rng=None, seed: int = 0, approx_cutoff: float | None = None,
                      extra_tolerance: float = 0.0) -> CheckReport:
    """Empirical characteristic function of increments against exp(-t psi)."""
    rng = rng or path_generator(seed)
    draws = sample_increments(family, t, n, rng, approx_cutoff=approx_cutoff)[:, 0]
    tol = 3.0 / math.sqrt(n) + extra_tolerance
    recs = []
    ok = True
    for xi in xi_grid:
        ecf = complex(np.exp(1j * float(xi) * draws).mean())
        target = complex(np.exp(-t * eval_exponent(family, float(xi))))
        err = abs(ecf - target)
        recs.append(ProbeRecord(abs(float(xi)), 0, err,
                                {"target_re": target.real, "target_im": target.imag,
                                 "tolerance": tol}))
        ok = ok and err <= tol
    return CheckReport(f"empirical characteristic function ({family.family})",
                       recs, PASS if ok else FAIL,
                       worst=max(recs, key=lambda r: r.estimate),
                       detail=f"n={n}, tolerance {tol:.4g}")


def verify_gronwall_bound(symbol: SymbolField, x0: float, inner_radius: float,
                          t: float, cfg: SimulationConfig, n_paths: int,
                          rng=None) -> CheckReport:
    """E^x u(X_{t and tau}) <= e^{Ct} u(x) (1 + 3 rel SE) with u = 1/(1+|x|^2),
    tau the entry time into the inner ball, C the Lyapunov-u rate."""
    rng = rng or path_generator(cfg.seed)
    rate_c = lyapunov_constant(symbol, "u")
    run_cfg = replace(cfg, horizon=t)
    batch = run_interlaced_batch(symbol, x0, run_cfg, n_paths=n_paths, rng=rng,
                                 collect_events=False, stop_inside=inner_radius)
    u_vals = 1.0 / (1.0 + batch.terminal ** 2)
    est = float(u_vals.mean())
    se = float(u_vals.std(ddof=1) / math.sqrt(n_paths))
    bound = math.exp(rate_c * t) / (1.0 + x0 * x0)
    ok = est <= bound * (1.0 + 3.0 * se / max(est, 1e-300))
    rec = ProbeRecord(abs(x0), 0, est, {"bound": bound, "std_error": se,
                                        "rate": rate_c})
    return CheckReport("Gronwall moment envelope (u)", [rec],
                       PASS if ok else FAIL, worst=rec,
                       detail=f"estimate {est:.4g} vs bound {bound:.4g}")


def estimate_two_stage(symbol: SymbolField, f: TestFunction, x, t1: float,
                       t2: float, n_paths: int, cfg: SimulationConfig,
                       rng=None) -> SemigroupEstimate:
    """T_{t1+t2} f(x) estimated by restarting at the time-t1 states."""
    rng = rng or path_generator(cfg.seed)
    lam = large_jump_intensity(symbol).rate if build_sim_model(symbol).jumps else 0.0
    first = run_interlaced_batch(symbol, float(x), replace(cfg, horizon=t1),
                                 n_paths=n_paths, rng=rng, lam=lam,
                                 collect_events=False)
    second = run_interlaced_batch(symbol, first.terminal, replace(cfg, horizon=t2),
                                  n_paths=n_paths, rng=rng, lam=lam,
                                  collect_events=False)
    dead = first.exploded | second.exploded
    vals = _f_values(f, second.terminal, dead)
    return SemigroupEstimate(float(np.atleast_1d(x)[0]), t1 + t2, f.label,
                             float(vals.mean()),
                             float(vals.std(ddof=1) / math.sqrt(n_paths)),
                             n_paths, int(dead.sum()))
