"""Report files: CSV with fixed float formatting and sorted-key JSON."""

from __future__ import annotations

import csv
import io
import json
import os
from pathlib import Path

from .numerics import sig17
from .reports import _jsonable


def _cell(v) -> list[str]:
    if isinstance(v, complex):
        return [sig17(v.real), sig17(v.imag)]
    if isinstance(v, bool):
        return [str(v).lower()]
    if isinstance(v, (int, float)) or v is None:
        return [sig17(v)]
    if hasattr(v, "dtype"):
        return _cell(v.item())
    return [str(v)]


def csv_text(header: list[str], rows: list) -> str:
    """CSV with '.' decimals and comma separators. Complex cells expand into paired re/im columns."""
    complex_cols = {i for row in rows for i, v in enumerate(row) if isinstance(v, complex)}
    head = []
    for i, h in enumerate(header):
        head += [f"{h}_re", f"{h}_im"] if i in complex_cols else [h]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(head)
    for row in rows:
        out = []
        for i, v in enumerate(row):
            if i in complex_cols and not isinstance(v, complex):
                v = complex(v) if v is not None else complex(float("nan"), float("nan"))
            out += _cell(v)
        w.writerow(out)
    return buf.getvalue()


def json_text(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def write_text(path: Path, text: str, final: bool) -> Path:
    """Write ``text`` to ``path``, or to ``path.partial`` when the run did not succeed."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    target = path if final else path.with_name(path.name + ".partial")
    tmp = target.with_name(target.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, target)
    stale = path.with_name(path.name + ".partial") if final else path
    if stale.exists():
        stale.unlink()
    return target
