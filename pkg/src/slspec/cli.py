"""Command-line front end.

    slspec run   <config.json> [--output PATH] [--format json|csv|text] [--dump-grid PATH] [--verbose]
    slspec table <config.json> [--output PATH] [--verbose]
    slspec list  [--format json|text]

Exit status: 0 on success, 2 when results come with warnings, 1 on a fatal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import BoundError, bound_inputs, derivative_estimate, eigenvalue_error_bound
from .config import ConfigError, RunConfig, load_config
from .output import columns, dumps, fmt_float, render
from .problems import builtin_names
from .rootfind import refine_zero, spectrum
from .sampling import RegularizerSingularityError, SampleTable, build_sample_table, char_function

log = logging.getLogger("slspec")

EXIT_OK, EXIT_FATAL, EXIT_PARTIAL = 0, 1, 2


class CliError(RuntimeError):
    pass


def thread_count() -> int:
    """Worker count from ``SLSPEC_THREADS`` (0 or unset means automatic)."""
    raw = os.environ.get("SLSPEC_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise CliError(f"SLSPEC_THREADS must be a non-negative integer, got {raw!r}") from None
    if n < 0:
        raise CliError(f"SLSPEC_THREADS must be a non-negative integer, got {raw!r}")
    return n or (os.cpu_count() or 1)


# -- table cache -------------------------------------------------------------------

def table_text(t: SampleTable) -> str:
    return dumps(t.to_json_dict()) + "\n"


def _load_table(path: Path, cfg: RunConfig) -> SampleTable | None:
    if not path.exists():
        return None
    try:
        t = SampleTable.from_json_dict(json.loads(path.read_text()))
    except (ValueError, KeyError) as exc:
        raise ConfigError("sampling.table", f"{path}: unreadable table ({exc})") from exc
    want = build_key(cfg)
    have = (t.problem, t.config.to_dict())
    if have != want:
        raise ConfigError("sampling.table", f"{path} was built for a different problem or sampling config")
    return t


def build_key(cfg: RunConfig):
    return (cfg.problem.describe(), cfg.sampling.to_dict())


def get_table(cfg: RunConfig) -> SampleTable:
    path = Path(cfg.table_path) if cfg.table_path else None
    if path is not None:
        t = _load_table(path, cfg)
        if t is not None:
            log.info("loaded sample table from %s", path)
            return t
    t = build_sample_table(cfg.problem, cfg.sampling)
    log.info("built sample table: %d nodes in %.2f s", t.nodes.size, t.build_metadata["wall_time"])
    if path is not None:
        path.write_text(table_text(t))
        log.info("cached sample table at %s", path)
    return t


# -- run ---------------------------------------------------------------------------

def _exact_lambda(p, mu: complex, lam: complex) -> complex:
    if p.exact_eigenvalue is not None:
        kmax = int(2 * math.sqrt(abs(lam))) + 10
        cands = [p.exact_spectrum(k) for k in range(1, kmax + 1)]
        return min(cands, key=lambda z: abs(z - lam))

    def f(z):
        return np.array([p.exact_char(complex(v)) for v in np.ravel(z)])

    ev = refine_zero(f, mu)
    return ev.mu * ev.mu


def _error_bound(bi, p, t, ev) -> float | None:
    def f(z):
        return char_function(p, t, z)

    try:
        radius = 1e-2 * (1 + abs(ev.mu))
        d = derivative_estimate(f, ev.mu, ev.winding, radius=radius)
        return eigenvalue_error_bound(bi, ev.mu, ev.winding, d)
    except (BoundError, RegularizerSingularityError) as exc:
        log.info("no error bound at mu=%s: %s", ev.mu, exc)
        return None


def run_pipeline(cfg: RunConfig):
    """Returns ``(metadata, rows, columns, warnings, table)``."""
    if cfg.rect is None:
        raise ConfigError("search.rect", "missing")
    p = cfg.problem
    t0 = time.perf_counter()
    t = get_table(cfg)
    res = spectrum(p, t.config, cfg.rect, full_plane=cfg.full_plane, table=t)
    warnings = list(res.warnings)
    log.info("root search: %d eigenvalue(s), %d subdivision(s) in %.2f s",
             len(res), res.localize.subdivisions if res.localize else 0, time.perf_counter() - t0)

    out = cfg.output
    bi = None
    if out.include_bounds:
        bi = bound_inputs(p, t)
        log.info("calibrated beta4 = %.3e (calibrated, not certified)", bi.beta4)

    rows = []
    for i, ev in enumerate(res.eigenvalues, start=1):
        row = {
            "index": i,
            "lambda_re": ev.lam.real, "lambda_im": ev.lam.imag,
            "mu_re": ev.mu.real, "mu_im": ev.mu.imag,
            "residual": ev.residual, "winding": ev.winding,
        }
        if out.include_bounds:
            row["error_bound"] = _error_bound(bi, p, t, ev)
        if out.compare_exact:
            ex = _exact_lambda(p, ev.mu, ev.lam)
            err = abs(ev.lam - ex)
            row.update(exact_re=ex.real, exact_im=ex.imag, abs_error=err,
                       rel_error=err / abs(ex) if ex != 0 else None)
        rows.append(row)

    metadata = {
        "slspec_version": __version__,
        "problem": p.describe(),
        "sampling": t.config.to_dict(),
        "search": {
            "requested_rect": list(cfg.rect.bounds),
            "searched_rect": list(res.rect.bounds),
            "full_plane": cfg.full_plane,
            "max_depth": cfg.rect.max_depth,
            "boundary_samples_per_side": cfg.rect.boundary_samples_per_side,
        },
        "count": len(rows),
        "partial": bool(warnings),
        "warnings": warnings,
        "columns": list(columns(out.include_bounds, out.compare_exact)),
    }
    if bi is not None:
        metadata["bounds"] = {
            "beta3": bi.beta3.tolist(),
            "beta4": bi.beta4,
            "label": "calibrated, not certified",
        }
    return metadata, rows, columns(out.include_bounds, out.compare_exact), warnings, t


def dump_grid(path: str, cfg: RunConfig, t: SampleTable, size: int) -> None:
    """``|B_N|`` on a ``size x size`` grid over the search rectangle, as CSV."""
    re_min, re_max, im_min, im_max = cfg.rect.bounds
    re = np.linspace(re_min, re_max, size)
    im = np.linspace(im_min, im_max, size)
    mu = (re[None, :] + 1j * im[:, None]).ravel()
    reg_ok = np.ones(mu.size, dtype=bool)
    vals = np.full(mu.size, np.nan)
    try:
        vals = np.abs(char_function(cfg.problem, t, mu))
    except RegularizerSingularityError:
        for j, z in enumerate(mu):
            try:
                vals[j] = abs(char_function(cfg.problem, t, z))
            except RegularizerSingularityError:
                reg_ok[j] = False
    with open(path, "w") as fh:
        fh.write("mu_re,mu_im,abs_B_N\n")
        for z, v, ok in zip(mu, vals, reg_ok):
            fh.write(f"{fmt_float(z.real)},{fmt_float(z.imag)},{fmt_float(v) if ok else ''}\n")


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    fmt = args.format or cfg.output.format
    path = args.output or cfg.output.path
    metadata, rows, cols, warnings, t = run_pipeline(cfg)
    _emit(render(fmt, metadata, rows, cols), path)
    if args.dump_grid:
        dump_grid(args.dump_grid, cfg, t, args.grid_size)
    for w in warnings:
        print(f"slspec: warning: {w}", file=sys.stderr)
    return EXIT_PARTIAL if warnings else EXIT_OK


def cmd_table(args) -> int:
    cfg = load_config(args.config)
    path = args.output or cfg.table_path
    t0 = time.perf_counter()
    t = build_sample_table(cfg.problem, cfg.sampling)
    elapsed = time.perf_counter() - t0
    _emit(table_text(t), path)
    print(f"nodes: {t.nodes.size}  build time: {elapsed:.3f} s", file=sys.stderr)
    return EXIT_OK


def cmd_list(args) -> int:
    names = builtin_names()
    if args.format == "json":
        sys.stdout.write(dumps(names) + "\n")
    else:
        width = max(len(n) for n in names)
        for n, doc in names.items():
            print(f"{n:<{width}}  {doc}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS,
                        help="progress and timings on stderr")

    ap = argparse.ArgumentParser(prog="slspec", description=__doc__.splitlines()[0] if __doc__ else None,
                                 parents=[common])
    ap.add_argument("--version", action="version", version=f"slspec {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", parents=[common], help="compute eigenvalues for a config file")
    r.add_argument("config")
    r.add_argument("-o", "--output", help="write the table here instead of stdout")
    r.add_argument("-f", "--format", choices=("json", "csv", "text"), help="overrides output.format")
    r.add_argument("--dump-grid", metavar="PATH", help="also write |B_N| on a grid over the search rectangle (CSV)")
    r.add_argument("--grid-size", type=int, default=64, help="points per axis for --dump-grid (default 64)")
    r.set_defaults(func=cmd_run)

    t = sub.add_parser("table", parents=[common], help="build and save the sample table")
    t.add_argument("config")
    t.add_argument("-o", "--output", help="table file (default: sampling.table, else stdout)")
    t.set_defaults(func=cmd_table)

    ls = sub.add_parser("list", parents=[common], help="list built-in problems")
    ls.add_argument("-f", "--format", choices=("json", "text"), default="text")
    ls.set_defaults(func=cmd_list)
    return ap


def _provenance(exc: BaseException) -> str:
    mod = type(exc).__module__
    return mod.rsplit(".", 1)[-1] if mod.startswith("slspec") else type(exc).__name__


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.ERROR,
                        format="slspec: %(message)s", stream=sys.stderr, force=True)
    try:
        workers = thread_count()
        log.info("workers: %d (numpy-vectorized; no thread pool)", workers)
        if getattr(args, "grid_size", 2) < 2:
            raise CliError("--grid-size must be at least 2")
        return args.func(args)
    except ConfigError as exc:
        print(f"slspec: config error: {exc}", file=sys.stderr)
    except OSError as exc:
        print(f"slspec: error: {exc}", file=sys.stderr)
    except (ValueError, RuntimeError, ArithmeticError) as exc:
        print(f"slspec: {_provenance(exc)} error: {exc}", file=sys.stderr)
    return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
