"""Shared CSV/JSON emission with reproducible, byte-stable formatting.

All files may carry a single leading `#` comment line recording the
invocation that produced them; nothing time-dependent is ever written,
so reruns with identical seeds produce byte-identical files.
"""

from __future__ import annotations

import json
import os
import tempfile


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        text = repr(value)
    else:
        text = str(value)
    if any(ch in text for ch in ',"\n'):
        text = '"' + text.replace('"', '""') + '"'
    return text


def records_to_csv_text(records: list[dict], columns: list[str] | None = None) -> str:
    if columns is None:
        columns = list(records[0].keys()) if records else []
    lines = [",".join(columns)]
    for rec in records:
        lines.append(",".join(format_cell(rec.get(col)) for col in columns))
    return "\n".join(lines) + "\n"


def to_json_text(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def atomic_write_text(path, text: str, header_line: str | None = None) -> None:
    """Write text to path atomically (temp file + rename).

    header_line, when given, becomes a leading `# ...` comment.
    """
    path = os.fspath(path)
    body = text
    if header_line is not None:
        body = f"# {header_line}\n{text}"
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(body)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_json_text(path):
    """Load JSON from a file, skipping any leading `#` comment lines."""
    with open(path) as fh:
        lines = fh.readlines()
    start = 0
    while start < len(lines) and lines[start].startswith("#"):
        start += 1
    return json.loads("".join(lines[start:]))
