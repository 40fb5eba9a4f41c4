"""Command-line runner: ``lab run <config>`` and ``lab report <paths...> [--json]``."""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .config import load_config
from .errors import ConfigurationError, LabError
from .experiments import run_experiments, table_text

SCHEMA_VERSION = 1
SUMMARY_NAME = "summary.json"


def _jsonable(x):
    if hasattr(x, "tolist"):
        return x.tolist()
    if hasattr(x, "item"):
        return x.item()
    raise TypeError(f"not serializable: {type(x).__name__}")


def write_outputs(outcome, experiment, out_dir, wall_time):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name in sorted(outcome.tables):
        header, rows = outcome.tables[name]
        (out_dir / name).write_text(table_text(header, rows))
    summary = {
        "schema_version": SCHEMA_VERSION,
        "experiment": experiment,
        "criteria": [{"id": c.ident, "name": c.name, "passed": bool(c.passed), "detail": c.detail}
                     for c in outcome.criteria],
        "passed": all(c.passed for c in outcome.criteria),
        "tables": sorted(outcome.tables),
        "wall_time": round(wall_time, 3),
    }
    (out_dir / SUMMARY_NAME).write_text(json.dumps(summary, indent=2, sort_keys=True, default=_jsonable) + "\n")
    return summary


def cmd_run(args):
    cfg = load_config(args.config)
    out_dir = args.output or cfg.output
    t0 = time.perf_counter()
    outcome = run_experiments(cfg)
    summary = write_outputs(outcome, cfg.experiment, out_dir, time.perf_counter() - t0)
    for c in outcome.criteria:
        print(c.line())
    print(f"wrote {len(outcome.tables)} tables and {SUMMARY_NAME} to {out_dir}")
    return 0 if summary["passed"] else 1


def load_summary(path):
    p = Path(path)
    if p.is_dir():
        p = p / SUMMARY_NAME
    if not p.is_file():
        raise ConfigurationError(f"no run summary at {path}")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{p}: not a run summary ({exc})") from None
    if not isinstance(data, dict) or "criteria" not in data or "experiment" not in data:
        raise ConfigurationError(f"{p}: not a run summary")
    data["path"] = str(path)
    return data


def report_rows(summaries):
    rows = []
    for s in summaries:
        crit = s["criteria"]
        failed = [str(c["id"]) for c in crit if not c["passed"]]
        rows.append({
            "path": s["path"],
            "experiment": s["experiment"],
            "criteria": " ".join(str(c["id"]) for c in crit),
            "passed": sum(c["passed"] for c in crit),
            "total": len(crit),
            "failed": " ".join(failed) or "-",
            "wall_time": s.get("wall_time", ""),
        })
    return rows


def format_table(rows):
    cols = ["path", "experiment", "criteria", "passed", "total", "failed", "wall_time"]
    cells = [cols] + [[str(r[c]) for c in cols] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(cols))]
    return "\n".join("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() for row in cells)


def cmd_report(args):
    if not args.paths:
        raise ConfigurationError("report needs at least one run directory or summary file")
    summaries = [load_summary(p) for p in args.paths]
    rows = report_rows(summaries)
    if args.json:
        doc = {"schema_version": SCHEMA_VERSION, "runs": rows,
               "criteria": {s["path"]: s["criteria"] for s in summaries}}
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        print(format_table(rows))
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="lab", description="Nodal-domain and restriction experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run the experiments named in a config file")
    r.add_argument("config")
    r.add_argument("--output", help="override the output directory")
    r.set_defaults(func=cmd_run)
    q = sub.add_parser("report", help="merge run summaries into one table")
    q.add_argument("paths", nargs="*")
    q.add_argument("--json", action="store_true")
    q.set_defaults(func=cmd_report)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"lab: error: {exc}", file=sys.stderr)
        return 2
    except LabError as exc:
        print(f"lab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
