"""CSV/JSON tables with a resolved-config preamble."""
from __future__ import annotations

import csv
import datetime as _dt
import io as _io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

TIMESTAMP_KEY = "generated"


@dataclass
class Table:
    name: str
    columns: Sequence[str]
    rows: list = field(default_factory=list)


def _fmt(v):
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else ("nan" if math.isnan(v) else ("inf" if v > 0 else "-inf"))
    return str(v)


def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def config_lines(config: dict) -> list[str]:
    return [f"{k}={_fmt(v)}" for k, v in sorted(config.items())]


def timestamp() -> str:
    return _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0).isoformat()


def render_csv(table: Table, config: dict, stamp: str | None = None) -> str:
    buf = _io.StringIO()
    for line in config_lines(config):
        buf.write(f"# {line}\n")
    buf.write(f"# {TIMESTAMP_KEY}={stamp or timestamp()}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def render_json(table: Table, config: dict, stamp: str | None = None) -> str:
    rec = {"config": {k: _json_value(v) for k, v in sorted(config.items())},
           TIMESTAMP_KEY: stamp or timestamp(),
           "columns": list(table.columns),
           "rows": [{c: _json_value(v) for c, v in zip(table.columns, row)} for row in table.rows]}
    return json.dumps(rec, indent=1) + "\n"


def read_config_header(path: str | Path) -> dict:
    """Recover the key=value preamble of a CSV written by render_csv (timestamp dropped)."""
    out = {}
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].strip().partition("=")
            if key != TIMESTAMP_KEY:
                out[key] = value
    return out


def parse_key_values(text: str, origin: str = "config") -> dict:
    """Line-oriented key=value; '#' starts a comment, blank lines are skipped."""
    out = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip() if not raw.lstrip().startswith("#") else ""
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ValueError(f"{origin}:{n}: expected key=value, got {raw!r}")
        out[key.strip()] = value.strip()
    return out
