"""CSV / JSONL trace export.

Both formats start with one ``#`` comment line carrying the schema version
and run metadata; JSONL holds one object per iteration with the CSV keys.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

from .runner import RunTrace

SCHEMA = "as3cma-trace/1"
COLUMNS = ("trial", "iteration", "fcalls", "F_mt", "sum_p", "subset_size", "tau", "restarts", "outcome")


class ExportError(OSError):
    pass


def _header(traces) -> str:
    meta = {"schema": SCHEMA}
    if traces:
        t = traces[0]
        meta.update(algorithm=t.algorithm, problem=t.problem, budget=t.budget)
    return "# " + " ".join(f"{k}={v}" for k, v in meta.items()) + "\n"


def trace_rows(trace: RunTrace):
    last = len(trace.iteration) - 1
    for i in range(len(trace.iteration)):
        yield {
            "trial": trace.trial,
            "iteration": trace.iteration[i],
            "fcalls": trace.fcalls[i],
            "F_mt": trace.F_mt[i],
            "sum_p": trace.sum_p[i],
            "subset_size": trace.subset_size[i],
            "tau": trace.tau[i],
            "restarts": trace.restarts[i],
            "outcome": trace.outcome.outcome.value if i == last else "Running",
        }


def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def export(traces, fmt: str, path) -> Path:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            fh.write(_header(traces))
            if fmt == "csv":
                writer = csv.DictWriter(fh, fieldnames=COLUMNS)
                writer.writeheader()
                for t in traces:
                    for row in trace_rows(t):
                        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
            elif fmt == "jsonl":
                for t in traces:
                    for row in trace_rows(t):
                        fh.write(json.dumps({k: _json_value(v) for k, v in row.items()}) + "\n")
            else:
                raise ValueError(f"unknown export format {fmt!r}")
    except OSError as exc:
        raise ExportError(f"cannot write {path}: {exc}") from exc
    return path


def read_header(path) -> dict:
    path = Path(path)
    with path.open() as fh:
        first = fh.readline()
    if not first.startswith("#"):
        return {}
    return dict(tok.split("=", 1) for tok in first[1:].split() if "=" in tok)


_INT_KEYS = ("trial", "iteration", "fcalls", "subset_size", "restarts")


def _coerce(row: dict) -> dict:
    out = {}
    for k in COLUMNS:
        v = row[k]
        if k in _INT_KEYS:
            out[k] = int(v)
        elif k == "outcome":
            out[k] = v
        else:
            out[k] = math.nan if v in (None, "", "nan") else float(v)
    return out


def load_rows(path) -> list:
    """Re-read an exported CSV or JSONL file into row dicts."""
    path = Path(path)
    try:
        lines = [ln for ln in path.read_text().splitlines() if ln and not ln.startswith("#")]
    except OSError as exc:
        raise ExportError(f"cannot read {path}: {exc}") from exc
    if not lines:
        return []
    if lines[0].lstrip().startswith("{"):
        return [_coerce(json.loads(ln)) for ln in lines]
    return [_coerce(r) for r in csv.DictReader(lines)]
