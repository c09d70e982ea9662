"""Running checks over seeded samples and writing reports."""

from __future__ import annotations

import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..errors import BigTanError, SolverError
from .checks import CHECKS, REGISTRY, Check, Sample, SampleSpace
from .config import RunConfig

MAX_SKIP_FRACTION = 0.05


@dataclass
class CheckReport:
    name: str
    paper_ref: str
    samples: int
    skipped: int
    max_residual: float
    tolerance: float
    verdict: str
    seconds: float
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def as_dict(self) -> dict:
        return {k: _json_number(v) for k, v in asdict(self).items()}


def _json_number(v):
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    if isinstance(v, dict):
        return {k: _json_number(x) for k, x in v.items()}
    return v


def selected_checks(cfg: RunConfig) -> list[Check]:
    if not cfg.only:
        return list(CHECKS)
    return [REGISTRY[name] for name in cfg.only]


def run_check(check: Check, space: SampleSpace, tolerance: float) -> CheckReport:
    start = time.perf_counter()
    cfg = space.cfg
    worst, skipped = 0.0, 0
    key, threshold = check.witness if check.witness else (None, None)
    lowest = math.inf
    errors: dict[str, int] = {}
    for k in range(cfg.samples):
        sample = Sample(space, k, space.rng(k, check.salt()))
        try:
            res = check.evaluate(sample)
        except SolverError:
            skipped += 1
            continue
        except BigTanError as exc:
            # a geometric failure at a valid sample is a check failure, not a skip
            errors[type(exc).__name__] = errors.get(type(exc).__name__, 0) + 1
            worst = math.inf
            continue
        if key is not None:
            lowest = min(lowest, res[key])
        others = [v for name, v in res.items() if name != key]
        if others:
            worst = max(worst, max(others))
    ran = cfg.samples
    ok = worst <= tolerance and skipped < MAX_SKIP_FRACTION * ran
    detail: dict = {}
    if key is not None:
        detail = {"witness": key, "min_witness": lowest, "threshold": threshold}
        ok = ok and lowest > threshold
    if errors:
        detail["errors"] = errors
    return CheckReport(
        name=check.name,
        paper_ref=check.paper_ref,
        samples=ran - skipped,
        skipped=skipped,
        max_residual=worst,
        tolerance=tolerance,
        verdict="pass" if ok else "fail",
        seconds=time.perf_counter() - start,
        detail=detail,
    )


def run_suite(cfg: RunConfig) -> list[CheckReport]:
    """One report per selected check, in registry order (or filter order)."""
    cfg.validate(REGISTRY)
    space = SampleSpace(cfg)
    reports = []
    for check in selected_checks(cfg):
        tol = cfg.tolerances.get(check.name, check.tolerance_for(cfg.family))
        reports.append(run_check(check, space, tol))
    return reports


def all_passed(reports) -> bool:
    return all(r.passed for r in reports)


def exit_code(reports) -> int:
    return 0 if all_passed(reports) else 1


def report_document(reports, config_echo: dict | None = None) -> dict:
    return {"config_echo": config_echo or {}, "reports": [r.as_dict() for r in reports]}


def render_json(reports, config_echo: dict | None = None) -> str:
    return json.dumps(report_document(reports, config_echo), indent=2) + "\n"


def render_text(reports, config_echo: dict | None = None) -> str:
    header = ("check", "samples", "skipped", "max_residual", "tolerance", "witness", "verdict", "seconds")
    rows = [header]
    for r in reports:
        w = r.detail.get("min_witness")
        wit = "-" if w is None else f"{w:.3g}>{r.detail['threshold']:g}"
        rows.append((r.name, str(r.samples), str(r.skipped), f"{r.max_residual:.3e}",
                     f"{r.tolerance:.1e}", wit, r.verdict.upper(), f"{r.seconds:.2f}"))
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = []
    if config_echo:
        lines.append("config: " + json.dumps(config_echo, sort_keys=True))
    for row in rows:
        lines.append("  ".join(cell.ljust(w) if i == 0 else cell.rjust(w)
                               for i, (cell, w) in enumerate(zip(row, widths))).rstrip())
    n_fail = sum(not r.passed for r in reports)
    lines.append(f"{len(reports) - n_fail}/{len(reports)} checks passed")
    return "\n".join(lines) + "\n"


def emit_report(reports, format: str = "json", path=None, config_echo: dict | None = None) -> int:
    """Write the report (stdout when ``path`` is None) and return the exit code."""
    text = render_json(reports, config_echo) if format == "json" else render_text(reports, config_echo)
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)
    return exit_code(reports)


def verdict_from_document(doc: dict) -> int:
    """Exit code implied by a parsed JSON report."""
    return 0 if all(r["verdict"] == "pass" for r in doc["reports"]) else 1
