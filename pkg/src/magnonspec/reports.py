"""Delimited and JSON result emission with reproducibility metadata."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import scipy

from . import __version__


def fmt_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def provenance(config: dict) -> dict:
    return {
        "tool": "magnonspec",
        "versions": {
            "magnonspec": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "config": {k: config[k] for k in sorted(config)},
    }


def _prepare(path: str | Path) -> Path:
    out = Path(path)
    try:
        if out.parent and not out.parent.exists():
            out.parent.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ValueError(f"cannot create output directory for {out}: {exc}") from exc
    return out


def write_csv(path: str | Path, fieldnames: list[str], rows: list[dict]) -> Path:
    out = _prepare(path)
    lines = [",".join(fieldnames)]
    for row in rows:
        lines.append(",".join(fmt_value(row[name]) for name in fieldnames))
    try:
        out.write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise ValueError(f"cannot write {out}: {exc}") from exc
    return out


def write_json(
    path: str | Path, fieldnames: list[str], rows: list[dict], config: dict
) -> Path:
    out = _prepare(path)
    doc = {
        "provenance": provenance(config),
        "columns": fieldnames,
        "rows": [[_plain(row[name]) for name in fieldnames] for row in rows],
    }
    try:
        out.write_text(json.dumps(doc, indent=1) + "\n")
    except OSError as exc:
        raise ValueError(f"cannot write {out}: {exc}") from exc
    return out


def _plain(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    return str(v)


def emit(
    path: str | Path,
    fieldnames: list[str],
    rows: list[dict],
    config: dict,
    format: str = "csv",
) -> Path:
    """Write rows to path as csv or json; returns the written path."""
    if format == "csv":
        return write_csv(path, fieldnames, rows)
    if format == "json":
        return write_json(path, fieldnames, rows, config)
    raise ValueError(f"unknown output format {format!r}")
