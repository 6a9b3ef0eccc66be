"""Deterministic JSON and RFC 4180 CSV output."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__

OUT_ENV = "LIPSUB_OUT"
DEFAULT_OUT = "lipsub-out"


def default_out_dir() -> str:
    return os.environ.get(OUT_ENV, DEFAULT_OUT)


def to_jsonable(obj):
    """Plain JSON types; infinities and NaN become the strings "inf", "-inf", "nan"."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    if dataclasses.is_dataclass(obj):
        return to_jsonable(dataclasses.asdict(obj))
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def dumps(doc) -> str:
    return json.dumps(to_jsonable(doc), sort_keys=True, indent=2, allow_nan=False) + "\n"


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else _cell(v) for v in row])
    return buf.getvalue()


def _cell(v):
    v = to_jsonable(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, dict)):
        return json.dumps(v, sort_keys=True)
    return v


def metadata(command: str, argv=None) -> dict:
    return {
        "command": command,
        "argv": list(argv) if argv is not None else sys.argv[1:],
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "started": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }


def write_bundle(out_dir, report: dict, tables: dict | None = None, figures: dict | None = None,
                 meta: dict | None = None) -> list[str]:
    """Write ``report.json``, one CSV per table, one SVG per figure and ``metadata.json``.

    ``tables`` maps a file stem to ``(header, rows)``; ``figures`` maps a
    stem to a matplotlib figure.  Returns the written paths.
    """
    from .plotting import save_svg

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    p = out / "report.json"
    p.write_text(dumps(report), encoding="utf-8")
    written.append(str(p))
    for stem, (header, rows) in sorted((tables or {}).items()):
        p = out / f"{stem}.csv"
        p.write_text(csv_text(header, rows), encoding="utf-8", newline="")
        written.append(str(p))
    for stem, fig in sorted((figures or {}).items()):
        p = out / f"{stem}.svg"
        save_svg(fig, p)
        written.append(str(p))
    if meta is not None:
        p = out / "metadata.json"
        p.write_text(dumps(meta), encoding="utf-8")
        written.append(str(p))
    return written
