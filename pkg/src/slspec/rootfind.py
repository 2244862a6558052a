"""Zero localization by the argument principle, Newton/Muller refinement, and the spectrum driver."""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .sampling import (
    RegularizerSingularityError,
    SampleTable,
    SamplingConfig,
    build_sample_table,
    char_function,
    char_function_direct,
)

__all__ = [
    "SearchRect",
    "Eigenvalue",
    "Box",
    "LocalizeResult",
    "SpectrumResult",
    "RootFindError",
    "ZeroOnBoundaryError",
    "PhaseResolutionError",
    "winding_number",
    "localize_zeros",
    "refine_zero",
    "spectrum",
]

log = logging.getLogger(__name__)

MAX_SIDE_SAMPLES = 2**16
EMIT_DIAMETER = 1e-3
# split slightly off-centre so that symmetric problems do not put zeros on edges
_SPLIT = (0.5 + 1 / 997, 0.5 - 1 / 1009, 0.5 + 1 / 89)


class RootFindError(RuntimeError):
    pass


class ZeroOnBoundaryError(RootFindError):
    pass


class PhaseResolutionError(RootFindError):
    pass


@dataclass(frozen=True)
class SearchRect:
    re_min: float
    re_max: float
    im_min: float
    im_max: float
    max_depth: int = 40
    boundary_samples_per_side: int = 64

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValueError(f"degenerate search rectangle {self.bounds}")
        if self.max_depth < 1 or self.boundary_samples_per_side < 4:
            raise ValueError("max_depth must be >= 1 and boundary_samples_per_side >= 4")

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        return (self.re_min, self.re_max, self.im_min, self.im_max)

    @property
    def diameter(self) -> float:
        return math.hypot(self.re_max - self.re_min, self.im_max - self.im_min)

    @property
    def center(self) -> complex:
        return complex((self.re_min + self.re_max) / 2, (self.im_min + self.im_max) / 2)

    def contains(self, z: complex, pad: float = 0.0) -> bool:
        return (self.re_min - pad <= z.real <= self.re_max + pad
                and self.im_min - pad <= z.imag <= self.im_max + pad)

    def with_bounds(self, re_min, re_max, im_min, im_max) -> "SearchRect":
        return replace(self, re_min=re_min, re_max=re_max, im_min=im_min, im_max=im_max)

    def nudged(self, spacing: float, delta: float) -> "SearchRect":
        """Push edges outward until the boundary keeps ``delta`` away from ``k * spacing``, ``k != 0``."""
        r = self
        for _ in range(8):
            moved = False
            for g in _guard_points(r.re_min - 2 * delta, r.re_max + 2 * delta, spacing):
                re_span = r.re_min - delta < g < r.re_max + delta
                if re_span and abs(r.im_min) < delta:
                    r, moved = r.with_bounds(r.re_min, r.re_max, -2 * delta if r.im_min <= 0 else r.im_min - 2 * delta, r.im_max), True
                if re_span and abs(r.im_max) < delta:
                    r, moved = r.with_bounds(r.re_min, r.re_max, r.im_min, 2 * delta if r.im_max >= 0 else r.im_max + 2 * delta), True
                im_span = r.im_min - delta < 0 < r.im_max + delta
                if im_span and abs(r.re_min - g) < delta:
                    r, moved = r.with_bounds(g - 2 * delta, r.re_max, r.im_min, r.im_max), True
                if im_span and abs(r.re_max - g) < delta:
                    r, moved = r.with_bounds(r.re_min, g + 2 * delta, r.im_min, r.im_max), True
            if not moved:
                break
        return r


def _guard_points(lo: float, hi: float, spacing: float) -> list[float]:
    if not (spacing > 0 and math.isfinite(spacing)):
        return []
    k0 = math.ceil(lo / spacing)
    k1 = math.floor(hi / spacing)
    return [k * spacing for k in range(k0, k1 + 1) if k != 0]


@dataclass
class Eigenvalue:
    mu: complex
    lam: complex
    residual: float
    winding: int
    newton_iters: int
    converged: bool = True
    scale: float = float("nan")
    direct_residual: float | None = None
    error_bound: float | None = None

    @property
    def lambda_(self) -> complex:
        return self.lam


@dataclass(frozen=True)
class Box:
    rect: SearchRect
    winding: int


@dataclass
class LocalizeResult:
    boxes: list[Box]
    unresolved: list[Box] = field(default_factory=list)
    excluded: list[SearchRect] = field(default_factory=list)
    subdivisions: int = 0
    additivity_failures: int = 0
    warnings: list[str] = field(default_factory=list)

    def __iter__(self):
        return iter(self.boxes)

    def __len__(self):
        return len(self.boxes)


# -- argument principle ------------------------------------------------------------

def _side_points(a: complex, b: complex, n: int) -> np.ndarray:
    return a + (b - a) * np.linspace(0.0, 1.0, n + 1)


def _corners(rect: SearchRect) -> list[complex]:
    return [
        complex(rect.re_min, rect.im_min),
        complex(rect.re_max, rect.im_min),
        complex(rect.re_max, rect.im_max),
        complex(rect.re_min, rect.im_max),
    ]


def boundary_values(f: Callable, rect: SearchRect, n: int | None = None) -> np.ndarray:
    n = n or rect.boundary_samples_per_side
    c = _corners(rect)
    pts = np.concatenate([_side_points(c[i], c[(i + 1) % 4], n)[:-1] for i in range(4)])
    return np.asarray(f(pts), dtype=complex)


def winding_number(f: Callable, rect: SearchRect, samples_per_side: int | None = None) -> int:
    """Number of zeros (with multiplicity) of ``f`` inside ``rect``, for ``f`` analytic and pole-free there.

    ``f`` must accept an array of points.  Each side is sampled until every
    consecutive phase increment is below ``pi/2``.
    """
    n0 = samples_per_side or rect.boundary_samples_per_side
    c = _corners(rect)
    sides = []
    for i in range(4):
        n = n0
        while True:
            pts = _side_points(c[i], c[(i + 1) % 4], n)
            vals = np.asarray(f(pts), dtype=complex)
            if not np.isfinite(vals).all():
                raise RootFindError(f"non-finite function value on the boundary of {rect.bounds}")
            if np.any(vals == 0):
                raise ZeroOnBoundaryError(f"f vanishes on the boundary of {rect.bounds}")
            with np.errstate(all="ignore"):
                dphi = np.angle(vals[1:] / vals[:-1])
            coarse = np.abs(dphi) >= math.pi / 2
            if not coarse.any():
                break
            if n >= MAX_SIDE_SAMPLES:
                # a few isolated half-turn jumps that survive refinement mark a zero on the side
                if coarse.sum() <= 4 and np.all(np.abs(dphi[coarse]) > 0.9 * math.pi):
                    raise ZeroOnBoundaryError(f"f vanishes on side {i} of {rect.bounds}")
                raise PhaseResolutionError(
                    f"phase not resolved with {n} samples on side {i} of {rect.bounds}"
                )
            n *= 2
        sides.append((vals, dphi))
    mags = np.concatenate([np.abs(v) for v, _ in sides])
    scale = float(np.median(mags))
    if scale == 0 or mags.min() < 1e-13 * scale:
        raise ZeroOnBoundaryError(f"f vanishes on the boundary of {rect.bounds}")
    total = sum(float(d.sum()) for _, d in sides) / (2 * math.pi)
    w = round(total)
    if abs(total - w) > 0.1:
        raise PhaseResolutionError(f"winding {total:.3f} is not close to an integer on {rect.bounds}")
    return int(w)


def _split(rect: SearchRect, frac: float) -> list[SearchRect]:
    xm = rect.re_min + frac * (rect.re_max - rect.re_min)
    ym = rect.im_min + frac * (rect.im_max - rect.im_min)
    return [
        rect.with_bounds(rect.re_min, xm, rect.im_min, ym),
        rect.with_bounds(xm, rect.re_max, rect.im_min, ym),
        rect.with_bounds(xm, rect.re_max, ym, rect.im_max),
        rect.with_bounds(rect.re_min, xm, ym, rect.im_max),
    ]


def localize_zeros(
    f: Callable,
    rect: SearchRect,
    guard_points: Sequence[complex] = (),
    emit_diameter: float = EMIT_DIAMETER,
) -> LocalizeResult:
    """Recursive quadrisection of ``rect`` down to boxes of diameter below ``emit_diameter``.

    Boxes containing a point of ``guard_points`` (poles of ``f``), or on whose
    boundary ``f`` cannot be evaluated, are split without being counted and
    dropped once they are smaller than ``emit_diameter``.
    """
    guards = [complex(g) for g in guard_points]
    res = LocalizeResult(boxes=[])

    def guarded(r: SearchRect) -> bool:
        return any(r.contains(g) for g in guards)

    def count(r: SearchRect) -> int | None:
        if guarded(r):
            return None
        try:
            return winding_number(f, r)
        except RegularizerSingularityError:
            return None

    def children_of(r: SearchRect, w: int | None):
        last = None
        for frac in _SPLIT:
            kids = _split(r, frac)
            try:
                counts = [count(k) for k in kids]
            except ZeroOnBoundaryError as exc:
                last = exc
                continue
            res.subdivisions += 1
            if w is not None and None not in counts and sum(counts) != w:
                # additivity violated: resample more finely before accepting
                fine = [winding_number(f, k, 4 * r.boundary_samples_per_side) for k in kids]
                if sum(fine) != w:
                    res.additivity_failures += 1
                    res.warnings.append(
                        f"winding additivity violated on {r.bounds}: parent {w}, children {fine}"
                    )
                counts = fine
            return list(zip(kids, counts))
        raise last

    root = count(rect)
    stack = [(rect, root, 0)]
    while stack:
        r, w, depth = stack.pop()
        if w == 0:
            continue
        if r.diameter < emit_diameter:
            if w is None:
                res.excluded.append(r)
            else:
                res.boxes.append(Box(r, w))
            continue
        if depth >= rect.max_depth:
            if w is None:
                res.excluded.append(r)
            else:
                res.unresolved.append(Box(r, w))
                res.warnings.append(f"unresolved cluster of {w} zeros in {r.bounds}")
            continue
        try:
            kids = children_of(r, w)
        except RootFindError as exc:
            res.warnings.append(f"box {r.bounds} abandoned: {exc}")
            if w is not None:
                res.unresolved.append(Box(r, w))
            continue
        for k, kw in reversed(kids):
            stack.append((k, kw, depth + 1))
    if res.excluded:
        res.warnings.append(f"{len(res.excluded)} box(es) inside regularizer guard zones were skipped")
    res.boxes.sort(key=lambda b: (b.rect.center.real, b.rect.center.imag))
    return res


# -- refinement --------------------------------------------------------------------

def _f1(f: Callable, z: complex) -> complex:
    return complex(np.asarray(f(np.array([z])))[0])


def _muller(f: Callable, z0: complex, z1: complex, z2: complex, max_iter: int):
    f0, f1, f2 = _f1(f, z0), _f1(f, z1), _f1(f, z2)
    for it in range(1, max_iter + 1):
        h1, h2 = z1 - z0, z2 - z1
        d1, d2 = (f1 - f0) / h1, (f2 - f1) / h2
        a = (d2 - d1) / (h2 + h1)
        bb = a * h2 + d2
        disc = cmath.sqrt(bb * bb - 4 * f2 * a)
        den = bb + disc if abs(bb + disc) >= abs(bb - disc) else bb - disc
        if den == 0:
            return z2, it, False
        dz = -2 * f2 / den
        z0, z1, z2 = z1, z2, z2 + dz
        f0, f1, f2 = f1, f2, _f1(f, z2)
        if abs(dz) < 1e-13 * (1 + abs(z2)) or f2 == 0:
            return z2, it, True
    return z2, max_iter, False


def refine_zero(f: Callable, mu0: complex, winding: int = 1, max_iter: int = 60) -> Eigenvalue:
    """Multiplicity-aware Newton from ``mu0`` with a central-difference derivative.

    Switches to Muller's method when ``|f|`` fails to decrease for five
    consecutive steps.  Non-convergence is flagged, not raised.
    """
    w = max(1, int(winding))
    mu = complex(mu0)
    fm = _f1(f, mu)
    best_mu, best_f = mu, abs(fm)
    stall = 0
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        if fm == 0:
            converged = True
            break
        h = 1e-7 * (1 + abs(mu))
        vals = np.asarray(f(np.array([mu + h, mu - h])), dtype=complex)
        d = (vals[0] - vals[1]) / (2 * h)
        if d == 0 or not cmath.isfinite(d):
            break
        step = w * fm / d
        mu = mu - step
        f_new = _f1(f, mu)
        stall = stall + 1 if abs(f_new) >= abs(fm) else 0
        fm = f_new
        if abs(fm) < best_f:
            best_mu, best_f = mu, abs(fm)
        if abs(step) < 1e-13 * (1 + abs(mu)):
            converged = True
            break
        if stall >= 5:
            break
    if not converged:
        delta = 1e-4 * (1 + abs(best_mu))
        z, extra, converged = _muller(f, best_mu - delta, best_mu + delta, best_mu, max_iter)
        it += extra
        fz = abs(_f1(f, z))
        if fz <= best_f or converged:
            mu, fm = z, fz
        else:
            mu, fm = best_mu, best_f
    return Eigenvalue(
        mu=mu, lam=mu * mu, residual=float(abs(fm)), winding=w,
        newton_iters=it, converged=converged,
    )


# -- driver ------------------------------------------------------------------------

@dataclass
class SpectrumResult:
    eigenvalues: list[Eigenvalue]
    warnings: list[str]
    table: SampleTable
    rect: SearchRect
    localize: LocalizeResult | None = None

    def __iter__(self):
        return iter(self.eigenvalues)

    def __len__(self):
        return len(self.eigenvalues)

    def __getitem__(self, i):
        return self.eigenvalues[i]

    @property
    def partial(self) -> bool:
        return bool(self.warnings)


def _close(a: complex, b: complex, tol: float = 1e-8) -> bool:
    return abs(a - b) < tol * (1 + abs(a))


def spectrum(
    p,
    cfg: SamplingConfig,
    rect: SearchRect,
    full_plane: bool = False,
    table: SampleTable | None = None,
    residual_tol: float = 1e-8,
    direct_residuals: bool = True,
) -> SpectrumResult:
    """Eigenvalues ``lambda = mu^2`` whose roots ``mu`` of ``B_N`` lie in ``rect``.

    Without ``full_plane`` the rectangle is clipped to ``Re mu >= 0`` (less a
    small margin so zeros on the imaginary axis stay inside).
    """
    if table is None:
        table = build_sample_table(p, cfg)
    cfg = table.config
    warnings: list[str] = []

    def f(mu):
        return char_function(p, table, mu)

    r = rect
    if not full_plane and r.re_min < 0:
        margin = min(1e-2, 1e-2 * (r.re_max - max(r.re_min, 0.0)))
        if r.re_max <= 0:
            raise ValueError("search rectangle lies in Re mu < 0; pass full_plane=True")
        r = r.with_bounds(-margin, r.re_max, r.im_min, r.im_max)
    spacing = math.pi / cfg.theta
    r = r.nudged(spacing, 1e-6 * spacing)
    guards = _guard_points(r.re_min, r.re_max, spacing) if r.im_min <= 0 <= r.im_max else []

    loc = None
    for frac_shift in (0.0, 1 / 1013, -1 / 887):
        shifted = r
        if frac_shift:
            dx = frac_shift * (r.re_max - r.re_min)
            shifted = r.with_bounds(r.re_min - abs(dx), r.re_max + abs(dx), r.im_min - abs(dx), r.im_max + abs(dx))
        try:
            loc = localize_zeros(f, shifted, guard_points=guards)
            r = shifted
            break
        except ZeroOnBoundaryError as exc:
            warnings.append(f"search rectangle adjusted: {exc}")
    if loc is None:
        raise RootFindError("could not place the search rectangle off the zeros of B_N")
    warnings.extend(loc.warnings)

    found: list[Eigenvalue] = []
    for box in loc.boxes:
        ev = refine_zero(f, box.rect.center, box.winding)
        ev.scale = float(np.median(np.abs(boundary_values(f, box.rect, 16))))
        if not ev.converged:
            warnings.append(f"refinement did not converge near mu={box.rect.center:.12g}")
        if not box.rect.contains(ev.mu, pad=box.rect.diameter):
            warnings.append(f"refined root {ev.mu:.12g} left its box {box.rect.bounds}")
        if ev.residual > residual_tol * ev.scale:
            warnings.append(f"residual {ev.residual:.3g} above tolerance at mu={ev.mu:.12g}")
        found.append(ev)

    merged: list[Eigenvalue] = []
    for ev in found:
        if any(_close(o.mu, ev.mu) for o in merged):
            continue
        twin = next((o for o in merged if _close(o.lam, ev.lam)), None)
        if twin is not None:
            continue
        merged.append(ev)

    if direct_residuals and merged:
        vals = np.atleast_1d(char_function_direct(p, np.array([e.mu for e in merged]), cfg.ivp))
        for e, v in zip(merged, vals):
            e.direct_residual = float(abs(v))

    merged.sort(key=lambda e: (abs(e.lam), e.lam.real, e.lam.imag))
    for w in warnings:
        log.warning(w)
    return SpectrumResult(eigenvalues=merged, warnings=warnings, table=table, rect=r, localize=loc)
