"""Execute one configured scenario and write its outputs."""
from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

from .. import __version__
from ..io import write_csv
from . import figures, scenarios
from .config import RunConfig
from .report import CheckRecord, emit_report, evaluate, write_timings
from .tolerances import TOLERANCE_TABLE_VERSION, tolerance

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3
REPORT_NAME = "report.jsonl"
TIMINGS_NAME = "timings.json"


@dataclass
class RunResult:
    records: list[CheckRecord]
    exit_code: int
    out_dir: Path
    files: list[Path]


def execute(cfg: RunConfig, tolerance_scale: float = 1.0) -> tuple[list[CheckRecord], scenarios.Outcome, float]:
    """Run the scenario and evaluate its checks; writes nothing."""
    sc = scenarios.get(cfg.scenario)
    start = time.perf_counter()
    outcome = sc.runner(cfg.parameters, cfg.seed)
    elapsed = time.perf_counter() - start
    records = []
    for c in outcome.checks:
        tol = tolerance(c.check_id, cfg.tolerances)
        rec = evaluate(c.check_id, sc.anchor, c.measured, c.expected, c.rule, tol,
                       tolerance_scale, c.note)
        rec.runtime = elapsed
        records.append(rec)
    return records, outcome, elapsed


def header_for(cfg: RunConfig, tolerance_scale: float) -> dict:
    sc = scenarios.get(cfg.scenario)
    return {"package": "sslab", "version": __version__, "scenario": cfg.scenario,
            "module": sc.module, "seed": cfg.seed, "parameters": cfg.parameters,
            "tolerance_table": TOLERANCE_TABLE_VERSION, "tolerance_scale": float(tolerance_scale)}


def run(cfg: RunConfig, tolerance_scale: float = 1.0) -> RunResult:
    """Execute and then write report, timings, CSV series, figures and artifacts."""
    records, outcome, elapsed = execute(cfg, tolerance_scale)
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    files = [emit_report(records, out / REPORT_NAME, "structured", header_for(cfg, tolerance_scale))]
    files.append(emit_report(records, out / "checks.csv", "csv"))
    write_timings(records, out / TIMINGS_NAME, elapsed)
    files.append(out / TIMINGS_NAME)
    for name, (header, rows) in outcome.series.items():
        if cfg.csv:
            path = out / f"{name}.csv"
            write_csv(path, header, rows)
            files.append(path)
        if cfg.figures:
            fig = figures.render(name, header, rows, out)
            if fig is not None:
                files.append(fig)
    for name, obj in outcome.artifacts.items():
        path = out / f"{name}.json"
        path.write_text(json.dumps(obj) + "\n")
        files.append(path)
    failed = any(r.passed is False for r in records)
    return RunResult(records, EXIT_FAIL if failed else EXIT_OK, out, files)
