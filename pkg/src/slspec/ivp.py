"""Base initial-value problems solved with an adaptive Runge-Kutta-Fehlberg 4(5) pair.

The two base solutions of ``-y'' + q(x) y = mu^2 y`` start from
``(y, y') = (1, 0)`` and ``(0, 1)`` at ``x = 0``.  They are advanced together as
one four-component complex state so they share step points and error control.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .expr import Expr, ExprEvalError

__all__ = [
    "IvpConfig",
    "BaseSolution",
    "IvpError",
    "StepUnderflowError",
    "MaxStepsError",
    "PotentialEvalError",
    "rkf45_integrate",
    "solve_base_pair",
    "solve_base_pairs",
    "RKF45_C",
    "RKF45_A",
    "RKF45_B4",
    "RKF45_B5",
]

# Fehlberg's original coefficients.
RKF45_C = (0.0, 1 / 4, 3 / 8, 12 / 13, 1.0, 1 / 2)
RKF45_A = (
    (),
    (1 / 4,),
    (3 / 32, 9 / 32),
    (1932 / 2197, -7200 / 2197, 7296 / 2197),
    (439 / 216, -8.0, 3680 / 513, -845 / 4104),
    (-8 / 27, 2.0, -3544 / 2565, 1859 / 4104, -11 / 40),
)
RKF45_B4 = (25 / 216, 0.0, 1408 / 2565, 2197 / 4104, -1 / 5, 0.0)
RKF45_B5 = (16 / 135, 0.0, 6656 / 12825, 28561 / 56430, -9 / 50, 2 / 55)
# B5 - B4, the embedded error estimate weights
_E = tuple(b5 - b4 for b5, b4 in zip(RKF45_B5, RKF45_B4))


class IvpError(RuntimeError):
    """Raised when an initial-value solve cannot be completed."""


class StepUnderflowError(IvpError):
    pass


class MaxStepsError(IvpError):
    pass


class PotentialEvalError(IvpError):
    pass


@dataclass(frozen=True)
class IvpConfig:
    abs_tol: float = 1e-14
    rel_tol: float = 1e-14
    initial_step: float | None = None  # None means span/100
    min_step: float = 1e-14
    max_steps: int = 1_000_000

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")
        if not self.min_step > 0:
            raise ValueError("min_step must be positive")
        if self.initial_step is not None and not self.initial_step > self.min_step:
            raise ValueError("initial_step must exceed min_step")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")

    def first_step(self, span: float) -> float:
        h = span / 100 if self.initial_step is None else self.initial_step
        if h > span:
            raise ValueError("initial_step must not exceed the integration span")
        return h


@dataclass(frozen=True)
class BaseSolution:
    """Endpoint data of the two base solutions at ``x = b``."""

    yc_end: complex
    yc_prime_end: complex
    ys_end: complex
    ys_prime_end: complex
    steps_taken: int
    max_est_local_error: float

    @property
    def wronskian(self) -> complex:
        return self.yc_end * self.ys_prime_end - self.yc_prime_end * self.ys_end

    def quadruple(self) -> tuple[complex, complex, complex, complex]:
        """``(y_c, y_s, y_c', y_s')`` at the endpoint."""
        return (self.yc_end, self.ys_end, self.yc_prime_end, self.ys_prime_end)


def _integrate(f, x0, y0, x_end: float, cfg: IvpConfig, propagate: int = 5):
    """Advance independent lanes ``y0[:, j]`` from ``x0[j]`` to ``x_end``.

    The 5th-order solution is propagated by default (local extrapolation);
    the step controller still uses the embedded 4(5) difference.

    Every lane keeps its own step size and acceptance decision, so the result
    per lane is what a separate solve would give.  Finished lanes idle with
    ``h = 0``.
    """
    B = np.array(RKF45_B5 if propagate == 5 else RKF45_B4)
    E = np.array(_E)
    A = [np.array(a) for a in RKF45_A]
    y = np.array(y0, dtype=complex)
    x = np.array(x0, dtype=float)
    n, lanes = y.shape
    K = np.empty((6, n, lanes), dtype=complex)
    K2 = K.reshape(6, n * lanes)
    h = np.full(lanes, cfg.first_step(x_end - float(x.min())))
    steps = np.zeros(lanes, dtype=np.int64)
    max_err = np.zeros(lanes)
    eps = 1e-15 * max(1.0, abs(x_end))
    done = (x_end - x) <= eps
    h[done] = 0.0
    while not done.all():
        if steps.max() >= cfg.max_steps:
            bad = int(np.argmax(steps))
            raise MaxStepsError(f"exceeded {cfg.max_steps} steps at x={x[bad]!r}")
        remaining = x_end - x
        last = (h >= remaining) | (remaining - h <= eps)
        h = np.where(last, remaining, h)
        h[done] = 0.0
        K[0] = f(x, y)
        for s in range(1, 6):
            K[s] = f(x + RKF45_C[s] * h, y + h * (A[s] @ K2[:s]).reshape(n, lanes))
        err = np.abs(h * (E @ K2).reshape(n, lanes)).max(axis=0)
        if not np.isfinite(err).all():
            bad = int(np.flatnonzero(~np.isfinite(err))[0])
            raise StepUnderflowError(f"non-finite error estimate at x={x[bad]!r}")
        tol = np.maximum(cfg.abs_tol, cfg.rel_tol * np.abs(y).max(axis=0))
        ok = (err <= tol) & ~done
        if ok.any():
            y = np.where(ok, y + h * (B @ K2).reshape(n, lanes), y)
            x = np.where(ok & last, x_end, np.where(ok, x + h, x))
            steps += ok
            max_err = np.where(ok, np.maximum(max_err, err), max_err)
        with np.errstate(divide="ignore"):
            factor = np.where(err == 0.0, 5.0, 0.84 * (tol / err) ** 0.25)
        h = h * np.clip(factor, 0.1, 5.0)
        done = (x_end - x) <= eps
        h[done] = 0.0
        under = ~done & (h < cfg.min_step)
        if under.any():
            bad = int(np.flatnonzero(under)[0])
            raise StepUnderflowError(f"step size fell below {cfg.min_step!r} at x={x[bad]!r}")
    return y, steps, max_err


def rkf45_integrate(
    f: Callable[[float, np.ndarray], Sequence[complex]],
    y0: Sequence[complex],
    span: tuple[float, float],
    cfg: IvpConfig | None = None,
) -> np.ndarray:
    """Integrate ``y' = f(x, y)`` over ``span`` and return the state at its end.

    A step is accepted when the embedded error estimate (max-norm) is at most
    ``max(abs_tol, rel_tol * |y|_max)``; the step factor is clamped to
    ``[0.1, 5]`` and the last step lands exactly on ``span[1]``.
    """
    cfg = cfg or IvpConfig()
    x0, x1 = float(span[0]), float(span[1])
    if not x1 > x0:
        raise ValueError("span must be increasing")
    y0 = np.asarray(y0, dtype=complex).reshape(-1, 1)

    def g(x, y):
        return np.asarray(f(float(x[0]), y[:, 0]), dtype=complex).reshape(-1, 1)

    y, _, _ = _integrate(g, np.array([x0]), y0, x1, cfg)
    return y[:, 0]


def solve_base_pairs(
    q: Expr, b: float, mus: Sequence[complex], cfg: IvpConfig | None = None
) -> list[BaseSolution]:
    """Solve the base pair independently for each value in ``mus``.

    The solves are advanced side by side in one array pass, but each keeps
    its own step sequence.
    """
    cfg = cfg or IvpConfig()
    b = float(b)
    if not b > 0:
        raise ValueError("interval length b must be positive")
    mus = np.atleast_1d(np.asarray(mus, dtype=complex))
    if mus.size == 0:
        return []
    mu2 = mus**2
    lanes = mus.size

    x0 = 0.0
    try:
        q0 = _potential(q, np.zeros(1))[0]
    except PotentialEvalError:
        q0 = None
    if q0 is None:
        # q singular at the left end: one Euler micro-step from the exact
        # initial data, using q at the new point.
        x0 = 1e-10 * b
        w0 = _potential(q, np.full(1, x0))[0] - mu2
        y0 = np.array([np.ones(lanes), x0 * w0, np.full(lanes, x0), np.ones(lanes)], dtype=complex)
    else:
        y0 = np.array([np.ones(lanes), np.zeros(lanes), np.zeros(lanes), np.ones(lanes)], dtype=complex)

    if q.is_constant:
        w = q0 - mu2

        def f(x, s):
            return np.array([s[1], w * s[0], s[3], w * s[2]])
    else:
        def f(x, s):
            w = _potential(q, x) - mu2
            return np.array([s[1], w * s[0], s[3], w * s[2]])

    y, steps, max_err = _integrate(f, np.full(lanes, x0), y0, b, cfg)
    bad = ~np.isfinite(y).all(axis=0)
    if bad.any():
        raise IvpError(f"non-finite endpoint value for mu={complex(mus[bad][0])!r}")
    return [
        BaseSolution(
            yc_end=complex(y[0, j]),
            yc_prime_end=complex(y[1, j]),
            ys_end=complex(y[2, j]),
            ys_prime_end=complex(y[3, j]),
            steps_taken=int(steps[j]),
            max_est_local_error=float(max_err[j]),
        )
        for j in range(lanes)
    ]


def solve_base_pair(q: Expr, b: float, mu: complex, cfg: IvpConfig | None = None) -> BaseSolution:
    """Endpoint values of both base solutions at ``x = b`` for spectral parameter ``mu``."""
    return solve_base_pairs(q, b, [mu], cfg)[0]


def _potential(q: Expr, x: np.ndarray) -> np.ndarray:
    try:
        return q.eval_array(x)
    except ExprEvalError as exc:
        raise PotentialEvalError(f"potential evaluation failed at x={exc.binding!r}") from None
