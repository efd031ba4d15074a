"""CSV/JSON serialization for experiment output.

Every CSV starts with one comment line naming its schema and version, e.g.
``# coopcast:figure2 v1``.  Floats are written with ``repr`` so they
round-trip exactly.
"""

from __future__ import annotations

import csv
import io
import json
import math

SCHEMA_VERSION = 1


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_csv(rows, fields, schema: str) -> str:
    buf = io.StringIO()
    buf.write(f"# coopcast:{schema} v{SCHEMA_VERSION}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        writer.writerow([_fmt(row[f]) for f in fields])
    return buf.getvalue()


def _parse(value: str):
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            pass
    return value


def parse_csv(text: str) -> tuple[str, list[dict]]:
    """Inverse of :func:`render_csv`: returns ``(schema, rows)``."""
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# coopcast:"):
        raise ValueError("missing coopcast schema header")
    schema = lines[0][len("# coopcast:"):].split()[0]
    reader = csv.DictReader(lines[1:])
    return schema, [{k: _parse(v) for k, v in row.items()} for row in reader]


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def render_json(obj) -> str:
    return json.dumps(_json_safe(obj), indent=2, sort_keys=False) + "\n"
