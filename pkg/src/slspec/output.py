"""Eigenvalue tables as JSON, CSV or aligned text.

Floats are written with 17 significant digits so that every value reads back
to the same double.  Non-finite values become ``null`` (JSON) or empty cells.
"""

from __future__ import annotations

import csv
import io
import json
import math

BASE_COLUMNS = ("index", "lambda_re", "lambda_im", "mu_re", "mu_im", "residual", "winding")
BOUND_COLUMNS = ("error_bound",)
EXACT_COLUMNS = ("exact_re", "exact_im", "abs_error", "rel_error")


def columns(include_bounds: bool, compare_exact: bool) -> tuple[str, ...]:
    cols = BASE_COLUMNS
    if include_bounds:
        cols += BOUND_COLUMNS
    if compare_exact:
        cols += EXACT_COLUMNS
    return cols


def fmt_float(v: float) -> str:
    return format(float(v), ".17g")


def _scalar(v) -> str:
    if v is None or isinstance(v, bool):
        return json.dumps(v)
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return fmt_float(v) if math.isfinite(v) else "null"
    if isinstance(v, str):
        return json.dumps(v)
    raise TypeError(f"cannot serialize {type(v).__name__}")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """``json.dumps`` with 17-digit floats; keys keep insertion order."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(_scalar(v) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    return _scalar(obj)


def to_json(metadata: dict, rows: list[dict]) -> str:
    return dumps({"metadata": metadata, "eigenvalues": rows}) + "\n"


def to_csv(rows: list[dict], cols: tuple[str, ...]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        out = []
        for c in cols:
            v = r.get(c)
            if v is None or (isinstance(v, float) and not math.isfinite(v)):
                out.append("")
            elif isinstance(v, float):
                out.append(fmt_float(v))
            else:
                out.append(str(v))
        w.writerow(out)
    return buf.getvalue()


def to_text(metadata: dict, rows: list[dict], cols: tuple[str, ...]) -> str:
    lines = [f"problem: {metadata['problem']['name']}  (b = {metadata['problem']['b']:.12g})"]
    s = metadata["sampling"]
    lines.append(f"sampling: N = {s['N']}, m = {s['m']}, theta = {s['theta']:.12g}")
    lines.append(f"eigenvalues found: {len(rows)}")
    head = [c for c in cols if not c.startswith(("mu_", "lambda_"))]
    lines.append("")
    lines.append(f"{'index':>5}  {'lambda':>52}  " + "  ".join(f"{c:>12}" for c in head[1:]))
    for r in rows:
        lam = f"{r['lambda_re']:+.17g} {r['lambda_im']:+.17g}i"
        cells = []
        for c in head[1:]:
            v = r.get(c)
            cells.append(f"{'-':>12}" if v is None else f"{v:>12}" if isinstance(v, int) else f"{v:>12.3e}")
        lines.append(f"{r['index']:>5}  {lam:>52}  " + "  ".join(cells))
    for w in metadata.get("warnings", []):
        lines.append(f"warning: {w}")
    return "\n".join(lines) + "\n"


def render(fmt: str, metadata: dict, rows: list[dict], cols: tuple[str, ...]) -> str:
    if fmt == "json":
        return to_json(metadata, rows)
    if fmt == "csv":
        return to_csv(rows, cols)
    if fmt == "text":
        return to_text(metadata, rows, cols)
    raise ValueError(f"unknown format {fmt!r}")
