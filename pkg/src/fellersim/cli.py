"""Command-line front end.

Subcommands:

* ``check``      structural validation plus the growth, triplet, mapping,
                 local-boundedness (and, for relativistic declarations,
                 coefficient) audits of the declared symbol.
* ``simulate``   interlaced paths to CSV plus a run summary.
* ``verify``     the statistical bundle: vanishing at infinity, compact
                 containment, generator consistency, one seed for the run.
* ``generator``  (x, A f(x)) pairs as CSV over the configured state grid.

Exit codes: 0 all checks pass, 1 a check failed, 2 inconclusive, 64 usage
or configuration errors.
"""
from __future__ import annotations

import argparse
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import checks as checks_mod
from .checks import (ProbeSchedule, check_characteristics_growth,
                     check_growth_condition, check_local_boundedness,
                     check_mapping_property, check_relativistic_conditions)
from .config import (RunConfig, build_schedule, build_sim_config, build_symbol,
                     build_test_function, load_config)
from .errors import ConfigurationError, HypothesisViolationError
from .expressions import as_coefficient
from .generator import apply_characteristics
from .reports import CheckReport, exit_code, worst_verdict
from .simulate import (large_jump_intensity, build_sim_model,
                       run_interlaced_batch, write_paths_csv)
from .symbols import validate_cndf
from .verify import (verify_conservative, verify_feller_vanishing,
                     verify_generator_consistency)

USAGE_EXIT = 64


def _write_reports(reports: list[CheckReport], out_dir: Path | None, stem: str) -> None:
    text = "\n".join(r.to_text() for r in reports)
    print(text)
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / f"{stem}.txt").write_text(text + "\n", encoding="utf-8")
        payload = [r.to_json_obj() for r in reports]
        (out_dir / f"{stem}.json").write_text(
            json.dumps(payload, indent=2, default=float) + "\n", encoding="utf-8")


def _probe_grid(symbol, sched: ProbeSchedule):
    grid = []
    for radius, _j, x in sched.states(symbol.dim):
        for scale in (0.5 / radius, 1.0 / radius, 1.0, 4.0):
            grid.append((x, scale * np.ones(symbol.dim) / np.sqrt(symbol.dim)))
    return grid


def cmd_check(cfg: RunConfig, out_dir: Path | None) -> int:
    symbol = build_symbol(cfg)
    sched = build_schedule(cfg)
    ver = cfg.section("verify")
    r_list = ver.get("ball_radii", [0.5, 2.0])
    compacts = ver.get("compacts", [10.0])
    reports = [
        validate_cndf(symbol, _probe_grid(symbol, sched)),
        check_growth_condition(symbol, sched),
        check_characteristics_growth(symbol, sched),
        check_mapping_property(symbol, sched, r_list),
        check_local_boundedness(symbol, [float(c) for c in compacts]),
    ]
    sym_sec = cfg.section("symbol")
    if sym_sec.get("kind") == "relativistic":
        reports.append(check_relativistic_conditions(
            as_coefficient(sym_sec.get("kappa", 1.0)),
            as_coefficient(sym_sec["m"]),
            as_coefficient(sym_sec["alpha"]), sched))
    _write_reports(reports, out_dir, "check")
    return exit_code(worst_verdict(r.verdict for r in reports))


def cmd_simulate(cfg: RunConfig, out_dir: Path | None, seed_override,
                 force: bool) -> int:
    symbol = build_symbol(cfg)
    sim_cfg = build_sim_config(cfg, seed_override)
    if not force:
        sched = build_schedule(cfg)
        gate = check_growth_condition(symbol, sched)
        if gate.verdict != "pass":
            print(f"growth condition {gate.verdict}; refusing to simulate "
                  "(--force overrides)")
            return exit_code(gate.verdict)
    sec = cfg.section("simulation")
    x0 = float(sec.get("x0", 0.0))
    try:
        lam = large_jump_intensity(symbol, safety=sim_cfg.lambda_safety).rate \
            if build_sim_model(symbol).jumps else 0.0
        batch = run_interlaced_batch(symbol, x0, sim_cfg, lam=lam,
                                     store_paths=True, collect_events=True)
    except HypothesisViolationError as exc:
        print(f"hypothesis violation: {exc}")
        return 1
    max_csv = int(cfg.section("output").get("max_csv_paths", 100))
    summary = (f"paths={batch.n_paths} horizon={sim_cfg.horizon} dt={sim_cfg.dt} "
               f"lambda={batch.lam:.6g} accepted_jumps={batch.n_accepted} "
               f"thinned_jumps={batch.n_thinned} exploded={int(batch.exploded.sum())}")
    print(summary)
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        buf = io.StringIO()
        trimmed = batch
        if batch.n_paths > max_csv:
            import dataclasses
            keep = slice(0, max_csv)
            log = batch.jump_log
            sel = log.path_index < max_csv
            trimmed = dataclasses.replace(
                batch, terminal=batch.terminal[keep], exploded=batch.exploded[keep],
                explosion_time=batch.explosion_time[keep], min_abs=batch.min_abs[keep],
                max_abs=batch.max_abs[keep], paths=batch.paths[:, keep],
                jump_log=type(log)(log.times[sel], log.path_index[sel],
                                   log.pre_state[sel], log.post_state[sel],
                                   log.accepted[sel]))
        write_paths_csv(buf, trimmed)
        (out_dir / "paths.csv").write_text(buf.getvalue(), encoding="utf-8")
        (out_dir / "simulate_summary.txt").write_text(summary + "\n", encoding="utf-8")
    return 0


def cmd_verify(cfg: RunConfig, out_dir: Path | None, seed_override,
               force: bool) -> int:
    symbol = build_symbol(cfg)
    sim_cfg = build_sim_config(cfg, seed_override)
    if not force:
        gate = check_growth_condition(symbol, build_schedule(cfg))
        if gate.verdict != "pass":
            print(f"growth condition {gate.verdict}; refusing to verify "
                  "(--force overrides)")
            return exit_code(gate.verdict)
    ver = cfg.section("verify")
    f = build_test_function(cfg)
    n_paths = int(ver.get("n_paths", sim_cfg.n_paths))
    t = float(ver.get("t", 0.5))
    eps = float(ver.get("epsilon", 0.01))
    radius_grid = [float(r) for r in ver.get("radius_grid", [5, 10, 20, 40])]
    x_grid = [float(v) for v in ver.get("x_grid", [-1.0, 0.0, 1.0])]
    r_grid = [float(v) for v in ver.get("r_grid", [2.0, 4.0, 8.0, 16.0])]
    h = float(ver.get("h", 1e-3))
    reports = [
        verify_feller_vanishing(symbol, f, t, radius_grid, eps, sim_cfg, n_paths,
                                hit_radius=float(ver.get("hit_radius", 2.0))),
        verify_conservative(symbol, t, x_grid, r_grid, sim_cfg,
                            max(100, n_paths // 2)),
        verify_generator_consistency(symbol, f, x_grid, h,
                                     int(ver.get("n_quotient", max(n_paths, 10000))),
                                     sim_cfg),
    ]
    _write_reports(reports, out_dir, "verify")
    return exit_code(worst_verdict(r.verdict for r in reports))


def cmd_generator(cfg: RunConfig, out_dir: Path | None) -> int:
    symbol = build_symbol(cfg)
    f = build_test_function(cfg)
    x_grid = [float(v) for v in cfg.section("verify").get(
        "x_grid", list(np.linspace(-3, 3, 13)))]
    lines = ["x_1,af"]
    for xv in x_grid:
        af = apply_characteristics(symbol, f, np.r_[xv])
        lines.append(f"{xv:.10g},{af:.10g}")
    text = "\n".join(lines)
    print(text)
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "generator.csv").write_text(text + "\n", encoding="utf-8")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fellersim",
        description="check, simulate, and statistically verify state-dependent "
                    "jump-diffusion symbols")
    parser.add_argument("command", choices=["check", "simulate", "verify", "generator"])
    parser.add_argument("--config", required=True, help="YAML configuration document")
    parser.add_argument("--seed", type=int, default=None,
                        help="override simulation.seed")
    parser.add_argument("--out", default=None, help="directory for reports and CSV")
    parser.add_argument("--force", action="store_true",
                        help="run simulate/verify even when the gate checks fail")
    args = parser.parse_args(argv)

    out_dir = Path(args.out) if args.out else None
    try:
        cfg = load_config(args.config)
        if args.command == "check":
            return cmd_check(cfg, out_dir)
        if args.command == "simulate":
            return cmd_simulate(cfg, out_dir, args.seed, args.force)
        if args.command == "verify":
            return cmd_verify(cfg, out_dir, args.seed, args.force)
        return cmd_generator(cfg, out_dir)
    except (ConfigurationError, FileNotFoundError, KeyError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return USAGE_EXIT


if __name__ == "__main__":
    sys.exit(main())
