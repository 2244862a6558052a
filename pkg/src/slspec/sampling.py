"""Regularized sampling of the base solutions and the approximate characteristic function.

The four functions

    h11 = s(mu) (y_c(b, mu)  - cos(b mu))
    h12 = s(mu) (y_s(b, mu)  - sin(b mu) / mu)
    h21 = s(mu) (y_c'(b, mu) + mu sin(b mu))
    h22 = s(mu) (y_s'(b, mu) - cos(b mu))

with ``s(mu) = (sin(theta mu) / (theta mu))^m`` are entire of exponential type
``sigma = b + m theta`` and square integrable on the real line, so a truncated
cardinal series through the nodes ``j pi / sigma`` recovers them anywhere in
the complex plane.  All four are even in ``mu``; only ``j >= 0`` is stored.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .ivp import IvpConfig, IvpError, solve_base_pairs

__all__ = [
    "SamplingConfig",
    "SampleTable",
    "SamplingError",
    "RegularizerSingularityError",
    "sinc_reg",
    "build_sample_table",
    "eval_h",
    "eval_h_all",
    "reconstruct_endpoint",
    "char_function",
    "char_function_direct",
    "char_from_endpoints",
    "NODE_EPS",
    "GUARD_EPS",
]

NODE_EPS = 1e-9
GUARD_EPS = 1e-12


class SamplingError(RuntimeError):
    pass


class RegularizerSingularityError(SamplingError):
    def __init__(self, mu):
        super().__init__(f"mu={mu!r} lies in the guard zone of a zero of the regularizer")
        self.mu = mu


@dataclass(frozen=True)
class SamplingConfig:
    N: int = 40
    m: int = 10
    b: float = 1.0
    theta: float | None = None
    ivp: IvpConfig = field(default_factory=IvpConfig)

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 2:
            raise ValueError(f"m must be an integer >= 2, got {self.m!r}")
        if int(self.N) != self.N or self.N <= self.m:
            raise ValueError(f"N must be an integer > m, got N={self.N!r}, m={self.m!r}")
        if not self.b > 0:
            raise ValueError("b must be positive")
        if self.theta is None:
            object.__setattr__(self, "theta", self.b / (self.N - self.m))
        elif not self.theta > 0:
            raise ValueError("theta must be positive")

    @property
    def sigma(self) -> float:
        return self.b + self.m * self.theta

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.N + 1) * (math.pi / self.sigma)

    @property
    def guard_points(self) -> float:
        """Spacing ``pi / theta`` of the real zeros of the regularizer."""
        return math.pi / self.theta

    def to_dict(self) -> dict:
        ivp = self.ivp
        return {
            "N": self.N, "m": self.m, "b": self.b, "theta": self.theta, "sigma": self.sigma,
            "ivp": {
                "abs_tol": ivp.abs_tol, "rel_tol": ivp.rel_tol, "initial_step": ivp.initial_step,
                "min_step": ivp.min_step, "max_steps": ivp.max_steps,
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SamplingConfig":
        return cls(N=int(d["N"]), m=int(d["m"]), b=float(d["b"]), theta=float(d["theta"]),
                   ivp=IvpConfig(**d.get("ivp", {})))


def sinc_reg(theta: float, m: int, mu):
    """``(sin(theta mu) / (theta mu))^m`` with the removable singularity filled in."""
    z = theta * np.asarray(mu, dtype=complex)
    small = np.abs(z) < 1e-4
    with np.errstate(all="ignore"):
        s = np.where(small, 1.0, np.sin(z) / np.where(small, 1.0, z))
    z2 = z * z
    s = np.where(small, 1 - z2 / 6 + z2 * z2 / 120, s)
    out = s**m
    return complex(out) if out.ndim == 0 else out


def _sin_over(b: float, mu: np.ndarray) -> np.ndarray:
    """``sin(b mu) / mu`` with value ``b`` at zero."""
    zero = mu == 0
    with np.errstate(all="ignore"):
        r = np.sin(b * mu) / np.where(zero, 1.0, mu)
    return np.where(zero, b, r)


@dataclass(frozen=True, eq=False)
class SampleTable:
    """Samples ``h[k-1, l-1, j] = h_kl(mu_j)`` at ``mu_j = j pi / sigma``, ``j = 0..N``."""

    config: SamplingConfig
    nodes: np.ndarray
    h: np.ndarray
    problem: dict = field(default_factory=dict)
    build_metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        h = np.array(self.h, dtype=complex)
        if h.shape != (2, 2, self.config.N + 1) or nodes.shape != (self.config.N + 1,):
            raise ValueError("table shape does not match its configuration")
        nodes.flags.writeable = False
        h.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "h", h)
        # mirrored nodes -N..N, used by the cardinal series
        full_nodes = np.concatenate([-nodes[:0:-1], nodes])
        full_h = np.concatenate([h[..., :0:-1], h], axis=-1)
        full_nodes.flags.writeable = False
        full_h.flags.writeable = False
        object.__setattr__(self, "_full_nodes", full_nodes)
        object.__setattr__(self, "_full_h", full_h)

    def to_json_dict(self) -> dict:
        return {
            "format": "slspec-sample-table/1",
            "problem": self.problem,
            "config": self.config.to_dict(),
            "nodes": [float(v) for v in self.nodes],
            "h": [[[[float(v.real), float(v.imag)] for v in self.h[k, l]] for l in range(2)] for k in range(2)],
            "build_metadata": {"ivp_steps": list(self.build_metadata.get("ivp_steps", []))},
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "SampleTable":
        if d.get("format") != "slspec-sample-table/1":
            raise ValueError("not a sample table document")
        h = np.array(d["h"], dtype=float)
        return cls(
            config=SamplingConfig.from_dict(d["config"]),
            nodes=np.array(d["nodes"], dtype=float),
            h=h[..., 0] + 1j * h[..., 1],
            problem=d.get("problem", {}),
            build_metadata=dict(d.get("build_metadata", {})),
        )


def build_sample_table(p, cfg: SamplingConfig) -> SampleTable:
    """Solve the base pair at every node ``mu_j`` and store the regularized differences."""
    if abs(cfg.b - p.b) > 1e-15 * max(1.0, p.b):
        raise ValueError(f"sampling config has b={cfg.b!r} but the problem has b={p.b!r}")
    t0 = time.perf_counter()
    mu = cfg.nodes
    try:
        sols = solve_base_pairs(p.q, p.b, mu, cfg.ivp)
    except IvpError as exc:
        # locate the failing node
        for j, mu_j in enumerate(mu):
            try:
                solve_base_pairs(p.q, p.b, [mu_j], cfg.ivp)
            except IvpError as exc_j:
                raise SamplingError(f"IVP failed at node j={j} (mu={complex(mu_j):.17g}): {exc_j}") from exc_j
        raise SamplingError(f"IVP failed while building the table: {exc}") from exc
    yc = np.array([s.yc_end for s in sols])
    ycp = np.array([s.yc_prime_end for s in sols])
    ys = np.array([s.ys_end for s in sols])
    ysp = np.array([s.ys_prime_end for s in sols])
    b = p.b
    reg = sinc_reg(cfg.theta, cfg.m, mu)
    cos_b = np.cos(b * mu)
    h = np.empty((2, 2, mu.size), dtype=complex)
    h[0, 0] = reg * (yc - cos_b)
    h[0, 1] = reg * (ys - _sin_over(b, mu))
    h[1, 0] = reg * (ycp + mu * np.sin(b * mu))
    h[1, 1] = reg * (ysp - cos_b)
    return SampleTable(
        config=cfg,
        nodes=mu,
        h=h,
        problem=p.describe(),
        build_metadata={
            "ivp_steps": [s.steps_taken for s in sols],
            "wall_time": time.perf_counter() - t0,
        },
    )


def eval_h_all(t: SampleTable, mu) -> np.ndarray:
    """All four truncated cardinal series at ``mu``; shape ``(2, 2) + shape(mu)``."""
    mu = np.asarray(mu, dtype=complex)
    flat = mu.reshape(-1)
    sigma = t.config.sigma
    z = sigma * (flat[:, None] - t._full_nodes[None, :])
    hit = np.abs(z) < NODE_EPS
    zs = np.where(hit, 1.0, z)
    kernel = np.where(hit, 1.0, np.sin(zs) / zs)
    out = np.einsum("klj,pj->klp", t._full_h, kernel)
    rows = np.flatnonzero(hit.any(axis=1))
    if rows.size:
        cols = np.argmax(hit[rows], axis=1)
        out[:, :, rows] = t._full_h[:, :, cols]
    return out.reshape((2, 2) + mu.shape)


def eval_h(t: SampleTable, k: int, l: int, mu):
    """``h_kl^[N](mu)`` for ``k, l`` in ``{1, 2}``."""
    if k not in (1, 2) or l not in (1, 2):
        raise ValueError("k and l must be 1 or 2")
    out = eval_h_all(t, mu)[k - 1, l - 1]
    return complex(out) if out.ndim == 0 else out


def reconstruct_endpoint(t: SampleTable, mu):
    """Approximate ``(y_c, y_s, y_c', y_s')`` at ``x = b`` from the table."""
    cfg = t.config
    mu_arr = np.asarray(mu, dtype=complex)
    reg = np.asarray(sinc_reg(cfg.theta, cfg.m, mu_arr))
    bad = np.abs(reg) < GUARD_EPS
    if bad.any():
        raise RegularizerSingularityError(complex(mu_arr[bad][0]) if mu_arr.ndim else complex(mu_arr))
    h = eval_h_all(t, mu_arr)
    b = cfg.b
    cos_b = np.cos(b * mu_arr)
    yc = h[0, 0] / reg + cos_b
    ys = h[0, 1] / reg + _sin_over(b, mu_arr)
    ycp = h[1, 0] / reg - mu_arr * np.sin(b * mu_arr)
    ysp = h[1, 1] / reg + cos_b
    if mu_arr.ndim == 0:
        return complex(yc), complex(ys), complex(ycp), complex(ysp)
    return yc, ys, ycp, ysp


def char_from_endpoints(A: np.ndarray, yc, ys, ycp, ysp):
    """``det(A w1 | A w2)`` with ``w1 = (1, 0, yc, yc')``, ``w2 = (0, 1, ys, ys')``."""
    aw1 = A[:, 0] + A[:, 2] * yc + A[:, 3] * ycp
    aw2 = A[:, 1] + A[:, 2] * ys + A[:, 3] * ysp
    return aw1[0] * aw2[1] - aw1[1] * aw2[0]


def char_function(p, t: SampleTable, mu):
    """Approximate characteristic function ``B_N(mu)`` from the sample table."""
    mu_arr = np.asarray(mu, dtype=complex)
    ends = reconstruct_endpoint(t, mu_arr)
    out = char_from_endpoints(p.boundary_matrix(mu_arr), *ends)
    return complex(out) if np.ndim(out) == 0 else out


def char_function_direct(p, mu, cfg: IvpConfig | None = None):
    """``B(mu)`` from direct base-pair solves at each (complex) ``mu``; no sampling."""
    mu_arr = np.asarray(mu, dtype=complex)
    flat = mu_arr.reshape(-1)
    sols = solve_base_pairs(p.q, p.b, flat, cfg)
    ends = [np.array([getattr(s, f) for s in sols]) for f in ("yc_end", "ys_end", "yc_prime_end", "ys_prime_end")]
    out = char_from_endpoints(p.boundary_matrix(flat), *ends).reshape(mu_arr.shape)
    return complex(out) if out.ndim == 0 else out
