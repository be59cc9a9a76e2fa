"""Check reports, log-log trend fitting, and verdict rules.

Limit statements ("bounded as |x| grows", "tends to zero") are decided by
fitting the slope of log(estimate) against log(radius) over the tail of a
geometric radius grid (the head is discarded, since the statements only
constrain large radii).  Verdicts at the boundary are reported as
``inconclusive`` rather than coerced.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

PASS = "pass"
FAIL = "fail"
INCONCLUSIVE = "inconclusive"

_ORDER = {PASS: 0, INCONCLUSIVE: 1, FAIL: 2}


def worst_verdict(verdicts) -> str:
    worst = PASS
    for v in verdicts:
        if _ORDER[v] > _ORDER[worst]:
            worst = v
    return worst


def exit_code(verdict: str) -> int:
    return {PASS: 0, FAIL: 1, INCONCLUSIVE: 2}[verdict]


@dataclass
class ProbeRecord:
    radius: float
    direction_index: int
    estimate: float
    extra: dict = field(default_factory=dict)

    def to_json_obj(self):
        obj = {"radius": self.radius, "direction_index": self.direction_index,
               "estimate": self.estimate}
        if self.extra:
            obj.update(self.extra)
        return obj


@dataclass
class CheckReport:
    condition: str
    records: list[ProbeRecord] = field(default_factory=list)
    verdict: str = INCONCLUSIVE
    slope: float | None = None
    fitted_constant: float | None = None
    worst: ProbeRecord | None = None
    detail: str = ""
    subreports: list["CheckReport"] = field(default_factory=list)

    def to_text(self) -> str:
        lines = [f"[{self.verdict.upper():12s}] {self.condition}"]
        if self.slope is not None:
            lines[0] += f"  slope={self.slope:+.3f}"
        if self.fitted_constant is not None:
            lines[0] += f"  c={self.fitted_constant:.6g}"
        if self.detail:
            lines.append(f"    {self.detail}")
        if self.worst is not None:
            lines.append(f"    worst probe: radius={self.worst.radius:.6g} "
                         f"dir={self.worst.direction_index} "
                         f"estimate={self.worst.estimate:.6g}")
        for sub in self.subreports:
            lines.extend("    " + ln for ln in sub.to_text().splitlines())
        return "\n".join(lines)

    def to_json_obj(self) -> dict:
        return {
            "condition": self.condition,
            "verdict": self.verdict,
            "slope": self.slope,
            "fitted_constant": self.fitted_constant,
            "detail": self.detail,
            "records": [r.to_json_obj() for r in self.records],
            "subreports": [s.to_json_obj() for s in self.subreports],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), indent=2, default=float)


@dataclass(frozen=True)
class TrendFit:
    slope: float | None
    n_used: int
    all_zero: bool
    first: float
    final: float


ZERO_FLOOR = 1e-13


def aggregate_by_radius(records):
    """Max estimate per radius, radii ascending."""
    by_r: dict[float, float] = {}
    for rec in records:
        by_r[rec.radius] = max(by_r.get(rec.radius, -math.inf), rec.estimate)
    radii = sorted(by_r)
    return np.array(radii), np.array([by_r[r] for r in radii])


def fit_log_trend(radii, values, head_fraction: float = 0.25) -> TrendFit:
    """Slope of log(value) vs log(radius) over the tail of the grid.

    The leading ``head_fraction`` of the radii is discarded: asymptotic
    statements say nothing about small radii.
    """
    radii = np.asarray(radii, dtype=float)
    values = np.asarray(values, dtype=float)
    order = np.argsort(radii)
    radii, values = radii[order], values[order]
    first, final = float(values[0]), float(values[-1])
    if not np.all(np.isfinite(values)):
        return TrendFit(slope=math.inf, n_used=0, all_zero=False, first=first, final=final)
    if np.max(np.abs(values)) <= ZERO_FLOOR:
        return TrendFit(slope=None, n_used=len(values), all_zero=True, first=first, final=final)
    start = int(len(radii) * head_fraction)
    start = min(start, len(radii) - 2)
    r, v = radii[start:], values[start:]
    keep = r > 0
    r, v = r[keep], np.maximum(v[keep], np.max(values) * 1e-16)
    if len(r) < 2:
        return TrendFit(slope=None, n_used=len(r), all_zero=False, first=first, final=final)
    slope = float(np.polyfit(np.log(r), np.log(v), 1)[0])
    return TrendFit(slope=slope, n_used=len(r), all_zero=False, first=first, final=final)


def decide_bounded(fit: TrendFit, slope_tol: float = 0.1, fail_slope: float = 0.3) -> str:
    """Verdict for 'estimates stay bounded as the radius grows'."""
    if fit.all_zero:
        return PASS
    if fit.slope is None:
        return INCONCLUSIVE
    if not math.isfinite(fit.slope):
        return FAIL
    if fit.slope <= slope_tol:
        return PASS
    if fit.slope >= fail_slope:
        return FAIL
    return INCONCLUSIVE


def decide_decay(fit: TrendFit, slope_tol: float = 0.1) -> str:
    """Verdict for 'estimates tend to zero as the radius grows'."""
    if fit.all_zero:
        return PASS
    if fit.slope is None:
        return INCONCLUSIVE
    if not math.isfinite(fit.slope):
        return FAIL
    scale = max(abs(fit.first), 1e-300)
    if fit.final <= 1e-10 * max(scale, 1.0):
        return PASS                      # already vanished within noise
    if fit.slope <= -slope_tol:
        return PASS if fit.final <= 0.9 * fit.first else INCONCLUSIVE
    if fit.slope >= slope_tol:
        return FAIL
    # flat trend: a genuine nonzero limit fails, a murky one is inconclusive
    if fit.final >= 0.3 * fit.first:
        return FAIL
    return INCONCLUSIVE


def fitted_constant(values) -> float:
    vals = np.asarray(values, dtype=float)
    return float(np.max(vals)) if len(vals) else 0.0
