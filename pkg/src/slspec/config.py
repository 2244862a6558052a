"""Run configuration: a single JSON document, validated field by field.

    {
      "problem":  {"builtin": "ex3.3"}                       # or {"builtin": "ex3.1", "gamma": 10}
                | {"name": "...", "b": 1.0, "q": "...", "A": [[4 sources], [4 sources]]},
      "sampling": {"N": 40, "m": 10, "theta": null, "table": null},
      "ivp":      {"abs_tol": 1e-14, "rel_tol": 1e-14, "initial_step": null,
                   "min_step": 1e-14, "max_steps": 1000000},
      "search":   {"rect": [re_min, re_max, im_min, im_max], "full_plane": false,
                   "max_depth": 40, "boundary_samples_per_side": 64},
      "output":   {"format": "json", "path": null, "include_bounds": false, "compare_exact": false}
    }

Only ``problem`` and ``search.rect`` are required.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .expr import ExprSyntaxError, parse
from .ivp import IvpConfig
from .problems import Problem, ProblemError, builtin
from .rootfind import SearchRect
from .sampling import SamplingConfig

FORMATS = ("json", "csv", "text")

_SECTIONS = {
    "problem": {"builtin", "gamma", "name", "b", "q", "A"},
    "sampling": {"N", "m", "theta", "table"},
    "ivp": {"abs_tol", "rel_tol", "initial_step", "min_step", "max_steps"},
    "search": {"rect", "full_plane", "max_depth", "boundary_samples_per_side"},
    "output": {"format", "path", "include_bounds", "compare_exact"},
}


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f'field "{field_name}": {message}')
        self.field = field_name


@dataclass(frozen=True)
class OutputOptions:
    format: str = "json"
    path: str | None = None
    include_bounds: bool = False
    compare_exact: bool = False


@dataclass(frozen=True)
class RunConfig:
    problem: Problem
    sampling: SamplingConfig
    rect: SearchRect | None
    full_plane: bool = False
    table_path: str | None = None
    output: OutputOptions = field(default_factory=OutputOptions)


def _number(sec: dict, key: str, where: str, default=None, integer=False, allow_none=False):
    v = sec.get(key, default)
    if v is None and (allow_none or default is None):
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key}", f"expected a number, got {v!r}")
    if integer:
        if int(v) != v:
            raise ConfigError(f"{where}.{key}", f"expected an integer, got {v!r}")
        return int(v)
    if not math.isfinite(v):
        raise ConfigError(f"{where}.{key}", "must be finite")
    return float(v)


def _flag(sec: dict, key: str, where: str) -> bool:
    v = sec.get(key, False)
    if not isinstance(v, bool):
        raise ConfigError(f"{where}.{key}", f"expected true or false, got {v!r}")
    return v


def _section(doc: dict, name: str, required: bool = False) -> dict:
    sec = doc.get(name)
    if sec is None:
        if required:
            raise ConfigError(name, "missing")
        return {}
    if not isinstance(sec, dict):
        raise ConfigError(name, "expected an object")
    unknown = sorted(set(sec) - _SECTIONS[name])
    if unknown:
        raise ConfigError(f"{name}.{unknown[0]}", "unknown field")
    return sec


def _problem(sec: dict) -> Problem:
    if "builtin" in sec:
        extra = sorted(set(sec) - {"builtin", "gamma"})
        if extra:
            raise ConfigError(f"problem.{extra[0]}", "not allowed together with builtin")
        name = sec["builtin"]
        if not isinstance(name, str):
            raise ConfigError("problem.builtin", "expected a string")
        gamma = _number(sec, "gamma", "problem")
        try:
            return builtin(name, gamma=gamma)
        except ExprSyntaxError as exc:
            raise ConfigError("problem.builtin", str(exc)) from exc
        except ProblemError as exc:
            field_name = "problem.gamma" if "truncation" in str(exc) else "problem.builtin"
            raise ConfigError(field_name, str(exc)) from exc
    for key in ("b", "q", "A"):
        if key not in sec:
            raise ConfigError(f"problem.{key}", "missing (give either builtin or b, q and A)")
    b = _number(sec, "b", "problem")
    if b is None:
        raise ConfigError("problem.b", "expected a number")
    q = sec["q"]
    if not isinstance(q, str):
        raise ConfigError("q", "expected an expression string")
    A = sec["A"]
    if not (isinstance(A, list) and len(A) == 2 and all(isinstance(r, list) and len(r) == 4 for r in A)):
        raise ConfigError("A", "expected a 2x4 array of expression strings")
    name = sec.get("name", "inline")
    if not isinstance(name, str):
        raise ConfigError("problem.name", "expected a string")
    try:
        qe = parse(q, "x")
    except ExprSyntaxError as exc:
        raise ConfigError("q", str(exc)) from exc
    rows = []
    for i, row in enumerate(A):
        out = []
        for j, src in enumerate(row):
            if isinstance(src, (int, float)) and not isinstance(src, bool):
                src = repr(src)
            if not isinstance(src, str):
                raise ConfigError(f"A[{i}][{j}]", "expected an expression string")
            try:
                out.append(parse(src, "mu"))
            except ExprSyntaxError as exc:
                raise ConfigError(f"A[{i}][{j}]", str(exc)) from exc
        rows.append(tuple(out))
    try:
        p = Problem(name=name, b=b, q=qe, A=tuple(rows))
    except ProblemError as exc:
        raise ConfigError("problem.b", str(exc)) from exc
    p.check_rank()
    return p


def parse_config(doc) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "expected a JSON object")
    unknown = sorted(set(doc) - set(_SECTIONS))
    if unknown:
        raise ConfigError(unknown[0], "unknown section")
    p = _problem(_section(doc, "problem", required=True))

    iv = _section(doc, "ivp")
    try:
        ivp = IvpConfig(
            abs_tol=_number(iv, "abs_tol", "ivp", 1e-14),
            rel_tol=_number(iv, "rel_tol", "ivp", 1e-14),
            initial_step=_number(iv, "initial_step", "ivp", allow_none=True),
            min_step=_number(iv, "min_step", "ivp", 1e-14),
            max_steps=_number(iv, "max_steps", "ivp", 1_000_000, integer=True),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("ivp", str(exc)) from exc

    sm = _section(doc, "sampling")
    try:
        sampling = SamplingConfig(
            N=_number(sm, "N", "sampling", 40, integer=True),
            m=_number(sm, "m", "sampling", 10, integer=True),
            b=p.b,
            theta=_number(sm, "theta", "sampling", allow_none=True),
            ivp=ivp,
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        where = "sampling.theta" if "theta" in str(exc) else "sampling.N" if "N must" in str(exc) else "sampling.m"
        raise ConfigError(where, str(exc)) from exc
    table = sm.get("table")
    if table is not None and not isinstance(table, str):
        raise ConfigError("sampling.table", "expected a file path")

    se = _section(doc, "search")
    rect = None
    if "rect" in se:
        r = se["rect"]
        if not (isinstance(r, list) and len(r) == 4):
            raise ConfigError("search.rect", "expected [re_min, re_max, im_min, im_max]")
        vals = [_number({"v": v}, "v", "search.rect") for v in r]
        if None in vals:
            raise ConfigError("search.rect", "bounds must be numbers")
        try:
            rect = SearchRect(
                *vals,
                max_depth=_number(se, "max_depth", "search", 40, integer=True),
                boundary_samples_per_side=_number(se, "boundary_samples_per_side", "search", 64, integer=True),
            )
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError("search.rect", str(exc)) from exc

    ou = _section(doc, "output")
    fmt = ou.get("format", "json")
    if fmt not in FORMATS:
        raise ConfigError("output.format", f"expected one of {', '.join(FORMATS)}, got {fmt!r}")
    path = ou.get("path")
    if path is not None and not isinstance(path, str):
        raise ConfigError("output.path", "expected a file path")
    out = OutputOptions(
        format=fmt,
        path=path,
        include_bounds=_flag(ou, "include_bounds", "output"),
        compare_exact=_flag(ou, "compare_exact", "output"),
    )
    if out.compare_exact and p.exact_eigenvalue is None and p.exact_char is None:
        raise ConfigError("output.compare_exact", f"problem {p.name!r} has no exact oracle")
    return RunConfig(
        problem=p,
        sampling=sampling,
        rect=rect,
        full_plane=_flag(se, "full_plane", "search"),
        table_path=table,
        output=out,
    )


def load_config(path: str | Path) -> RunConfig:
    text = Path(path).read_bytes()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<json>", f"{exc.msg} at line {exc.lineno} column {exc.colno}") from exc
    except UnicodeDecodeError as exc:
        raise ConfigError("<json>", f"invalid UTF-8 at byte offset {exc.start}") from exc
    return parse_config(doc)
