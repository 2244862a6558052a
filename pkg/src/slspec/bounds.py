"""A-posteriori error bounds, evaluated as diagnostics.

None of these gate results.  ``beta3`` is estimated from the samples and
``beta4`` is calibrated against direct solves, so the values are calibrated
estimates, not certified bounds.

The estimates are stated for the unit interval.  A problem on ``[0, b]`` is
evaluated in the rescaled variable ``mu~ = b mu`` (so ``sigma~ = sigma / b``),
where its regularized functions are ``h~_11 = h_11``, ``h~_12 = h_12 / b``,
``h~_21 = b h_21`` and ``h~_22 = h_22``.  For complex ``mu`` the square-root
terms ``sqrt(N pi / sigma~ -+ mu~)`` use ``|mu~|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .sampling import (
    GUARD_EPS,
    RegularizerSingularityError,
    SampleTable,
    SamplingConfig,
    char_function,
    char_function_direct,
    sinc_reg,
)

__all__ = [
    "BETA0",
    "BoundInputs",
    "BoundError",
    "estimate_beta3",
    "fit_beta2",
    "calibrate_beta4",
    "bound_inputs",
    "truncation_bound",
    "char_bound",
    "eigenvalue_error_bound",
    "derivative_estimate",
]

BETA0 = 1.72  # |sin z / z| <= BETA0 e^{|Im z|} / (1 + |z|)
BETA4_SAFETY = 2.0  # margin on the fitted beta4


class BoundError(ValueError):
    pass


@dataclass(frozen=True)
class BoundInputs:
    config: SamplingConfig
    beta3: np.ndarray  # shape (2, 2)
    beta4: float | None = None
    beta0: float = BETA0

    def __post_init__(self):
        b3 = np.asarray(self.beta3, dtype=float)
        if b3.shape != (2, 2) or not np.all(np.isfinite(b3)) or np.any(b3 < 0):
            raise BoundError("beta3 must be a finite nonnegative 2x2 array")
        object.__setattr__(self, "beta3", b3)
        if self.beta0 != BETA0:
            raise BoundError("beta0 is fixed at 1.72")


def fit_beta2(t: SampleTable, first: int = 5) -> np.ndarray:
    """Envelope constant ``beta2`` in ``|h_kl(mu_j)| <= beta2 / (1 + theta mu_j)^m``, from the first nodes."""
    cfg = t.config
    env = (1 + cfg.theta * t.nodes[:first]) ** cfg.m
    return np.max(np.abs(t.h[..., :first]) * env, axis=-1)


def estimate_beta3(t: SampleTable) -> np.ndarray:
    """``|| mu^(m-1) h_kl ||_2`` over the real line.

    Inside the sampled range the band-limited Plancherel sum
    ``(pi/sigma) sum_j |g(mu_j)|^2`` is used; beyond ``mu_N`` the envelope
    ``beta2 / (1 + theta mu)^m`` (``beta2`` fitted on all nodes) supplies the tail.
    """
    cfg = t.config
    m, theta, b = cfg.m, cfg.theta, cfg.b
    mu = t.nodes
    g2 = np.abs(mu ** (m - 1) * t.h) ** 2
    inner = (math.pi / cfg.sigma) * (g2[..., 0] + 2 * g2[..., 1:].sum(axis=-1))
    beta2 = np.max(np.abs(t.h) * (1 + theta * mu) ** m, axis=-1)

    def tail_density(x):
        return x ** (2 * (m - 1)) / (1 + theta * x) ** (2 * m)

    tail, _ = integrate.quad(tail_density, mu[-1], np.inf, limit=200)
    total = inner + 2 * beta2**2 * tail
    # to the rescaled variable
    return np.sqrt(total * b ** (2 * m - 1)) * _rescale(b)


def _rescale(b: float) -> np.ndarray:
    """Factors taking ``h_kl`` to ``h~_kl`` of the unit-interval problem."""
    return np.array([[1.0, 1.0 / b], [b, 1.0]])


def _common(cfg: SamplingConfig, mu: complex) -> float:
    """Everything in the truncation estimate except ``beta`` and ``|sin mu|``."""
    N, m, b = cfg.N, cfg.m, cfg.b
    sigma = cfg.sigma / b
    edge = N * math.pi / sigma
    r = b * abs(mu)
    if not r < edge:
        raise BoundError(f"|mu|={abs(mu):.6g} is outside the sampled range N pi / sigma = {edge / b:.6g}")
    lead = 1.0 / (math.pi * (math.pi / sigma) ** (m - 1) * math.sqrt(1 - 4.0 ** (-m + 1)))
    roots = 1 / math.sqrt(edge - r) + 1 / math.sqrt(edge + r)
    return lead * roots / (N + 1) ** (m - 1)


def truncation_bound(bi: BoundInputs, mu: complex, k: int | None = None, l: int | None = None) -> float:
    """Truncation estimate for ``|h_kl - h_kl^[N]|`` at ``mu``; max over ``k, l`` unless given."""
    mu = complex(mu)
    b = bi.config.b
    # bound for h~_kl, taken back to h_kl
    per = bi.beta3 / _rescale(b)
    beta3 = per.max() if k is None else per[k - 1, l - 1]
    return float(abs(np.sin(b * mu)) * beta3 * _common(bi.config, mu))


def char_bound(bi: BoundInputs, mu: complex) -> float:
    """Calibrated estimate of ``|B(mu) - B_N(mu)|``."""
    if bi.beta4 is None:
        raise BoundError("beta4 has not been calibrated")
    mu = complex(mu)
    cfg = bi.config
    reg = abs(sinc_reg(cfg.theta, cfg.m, mu))
    if reg < GUARD_EPS:
        raise RegularizerSingularityError(mu)
    return float(abs(np.sin(cfg.b * mu)) * bi.beta4 * _common(cfg, mu) / reg)


def eigenvalue_error_bound(bi: BoundInputs, mu_N: complex, n: int, inf_deriv: float) -> float:
    """Estimate of ``|mu_N - mu_exact|`` for a zero of multiplicity ``n``.

    ``inf_deriv`` is a lower bound for the size of the high derivative of
    ``B`` near ``mu_N``; the factorial uses ``m`` and the root uses ``n``.
    """
    if int(n) != n or n < 1:
        raise BoundError(f"multiplicity must be a positive integer, got {n!r}")
    if not (inf_deriv > 0 and math.isfinite(inf_deriv)):
        raise BoundError(f"inf_deriv must be positive and finite, got {inf_deriv!r}")
    if bi.beta4 is None:
        raise BoundError("beta4 has not been calibrated")
    cfg = bi.config
    mu_N = complex(mu_N)
    reg = abs(sinc_reg(cfg.theta, cfg.m, mu_N))
    if reg < GUARD_EPS:
        raise RegularizerSingularityError(mu_N)
    inner = (math.factorial(cfg.m) / inf_deriv) * abs(np.sin(cfg.b * mu_N)) * bi.beta4 * _common(cfg, mu_N) / reg
    return float(inner ** (1.0 / n))


def derivative_estimate(f, mu: complex, n: int, radius: float = 1e-2, points: int = 64) -> float:
    """``|f^(n)(mu)|`` by the Cauchy integral on a circle (trapezoid rule)."""
    phi = 2 * math.pi * np.arange(points) / points
    z = radius * np.exp(1j * phi)
    vals = np.asarray(f(mu + z), dtype=complex)
    coef = np.mean(vals * np.exp(-1j * n * phi)) / radius**n
    return float(abs(coef) * math.factorial(n))


def calibration_points(cfg: SamplingConfig, count: int = 16, imag=(0.25, 0.5, 0.75, 1.0)) -> np.ndarray:
    """Node midpoints over the lower half of the sampled range, lifted off the real axis.

    The real axis is avoided: ``sin(b mu)`` vanishes there and the ratio is meaningless.
    """
    step = math.pi / cfg.sigma
    js = np.unique(np.linspace(0, cfg.N // 2 - 1, count).round().astype(int))
    re = (js + 0.5) * step
    ims = np.concatenate([np.asarray(imag, dtype=float), -np.asarray(imag, dtype=float)])
    return (re[:, None] + 1j * ims[None, :]).ravel()


def calibrate_beta4(p, t: SampleTable, points=None, safety: float = BETA4_SAFETY) -> float:
    """``safety`` times the largest ratio ``|B - B_N| / (bound with beta4 = 1)`` over calibration points."""
    cfg = t.config
    pts = calibration_points(cfg) if points is None else np.asarray(points, dtype=complex)
    direct = np.atleast_1d(char_function_direct(p, pts, cfg.ivp))
    approx = np.atleast_1d(char_function(p, t, pts))
    unit = BoundInputs(cfg, np.zeros((2, 2)), beta4=1.0)
    ratios = [abs(d - a) / char_bound(unit, z) for z, d, a in zip(pts, direct, approx)]
    return float(safety * max(ratios))


def bound_inputs(p, t: SampleTable, calibrate: bool = True) -> BoundInputs:
    beta4 = calibrate_beta4(p, t) if calibrate else None
    return BoundInputs(t.config, estimate_beta3(t), beta4=beta4)
