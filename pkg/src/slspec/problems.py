"""Problem data model and the built-in problem registry."""

from __future__ import annotations

import cmath
import math
import re
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .bessel import bessel_j
from .expr import Expr, parse

__all__ = [
    "Problem",
    "ProblemError",
    "builtin",
    "builtin_names",
    "exact_char_ex34",
]


class ProblemError(ValueError):
    pass


@dataclass(frozen=True)
class Problem:
    """``-y'' + q(x) y = mu^2 y`` on ``[0, b]`` with ``A(mu) (y(0), y'(0), y(b), y'(b))^T = 0``."""

    name: str
    b: float
    q: Expr
    A: tuple[tuple[Expr, ...], ...]
    exact_eigenvalue: Callable[[int], complex] | None = field(default=None, compare=False)
    exact_char: Callable[[complex], complex] | None = field(default=None, compare=False)

    def __post_init__(self):
        if not (math.isfinite(self.b) and self.b > 0):
            raise ProblemError(f"interval length must be positive, got {self.b!r}")
        if self.q.free_var != "x":
            raise ProblemError("potential must be an expression in x")
        if len(self.A) != 2 or any(len(row) != 4 for row in self.A):
            raise ProblemError("boundary matrix must be 2x4")
        if any(e.free_var != "mu" for row in self.A for e in row):
            raise ProblemError("boundary entries must be expressions in mu")

    @classmethod
    def from_sources(
        cls,
        name: str,
        b: float,
        q: str,
        A: Sequence[Sequence[str]],
        check_rank: bool = True,
        **oracles,
    ) -> "Problem":
        rows = tuple(tuple(parse(str(s), "mu") for s in row) for row in A)
        p = cls(name=name, b=float(b), q=parse(str(q), "x"), A=rows, **oracles)
        if check_rank:
            p.check_rank()
        return p

    def boundary_matrix(self, mu) -> np.ndarray:
        """Entries ``a_kl(mu)``, shape ``(2, 4) + shape(mu)``."""
        mu = np.asarray(mu, dtype=complex)
        return np.array([[e.eval(mu) for e in row] for row in self.A])

    def check_rank(self, samples: int = 16, seed: int = 0) -> bool:
        rng = np.random.default_rng(seed)
        mus = rng.uniform(-10, 10, samples) + 1j * rng.uniform(-3, 3, samples)
        mats = self.boundary_matrix(mus)
        for j in range(samples):
            if np.linalg.matrix_rank(mats[..., j]) < 2:
                warnings.warn(
                    f"boundary matrix of {self.name!r} is rank deficient at mu={mus[j]:.6g}",
                    stacklevel=2,
                )
                return False
        return True

    def exact_spectrum(self, k: int) -> complex:
        """Closed-form ``lambda_k`` (``k >= 1``), when the problem has one."""
        if self.exact_eigenvalue is None:
            raise ProblemError(f"{self.name!r} has no closed-form spectrum")
        if k < 1:
            raise ValueError("eigenvalue index starts at 1")
        return complex(self.exact_eigenvalue(k))

    def describe(self) -> dict:
        return {
            "name": self.name,
            "b": self.b,
            "q": self.q.source,
            "A": [[e.source for e in row] for row in self.A],
        }


def exact_char_ex34(mu: complex) -> complex:
    """Bessel-determinant characteristic function of the ``e^{2ix}`` problem.

    Uses ``J'_nu = (J_{nu-1} - J_{nu+1}) / 2`` at both ``nu = mu`` and ``nu = -mu``.
    It equals ``-2 sin(pi mu) / pi`` times ``1 + mu y_c(1, mu)``.
    """
    mu = complex(mu)
    if mu.imag == 0 and mu.real == round(mu.real):
        raise ProblemError("integer order: J_mu and J_-mu are linearly dependent")
    t = cmath.exp(1j)
    a11 = bessel_j(mu, 1) + mu * bessel_j(mu, t)
    a12 = bessel_j(-mu, 1) + mu * bessel_j(-mu, t)
    a21 = (bessel_j(mu - 1, 1) - bessel_j(mu + 1, 1)) / 2
    a22 = (bessel_j(-mu - 1, 1) - bessel_j(-mu + 1, 1)) / 2
    return a11 * a22 - a12 * a21


_DIRICHLET = (("1", "0", "0", "0"), ("0", "0", "1", "0"))
_JOST = (("1", "0", "0", "0"), ("0", "0", "-i*mu", "1"))


def _ex31(gamma: float = 10.0) -> Problem:
    return Problem.from_sources("ex3.1", gamma, "10*i*sin(x)*exp(-x)", _JOST)


def _ex32(gamma: float = 10.0) -> Problem:
    return Problem.from_sources("ex3.2", gamma, "10*i*exp(-x)", _JOST)


def _ex33() -> Problem:
    return Problem.from_sources(
        "ex3.3", math.pi, "3-2*i", _DIRICHLET,
        exact_eigenvalue=lambda k: k * k + 3 - 2j,
    )


def _ex34() -> Problem:
    return Problem.from_sources(
        "ex3.4", 1.0, "exp(2*i*x)", (("1", "0", "mu", "0"), ("0", "1", "0", "0")),
        exact_char=exact_char_ex34,
    )


def _dirichlet_const(c_source: str) -> Problem:
    c_expr = parse(c_source, "x")
    if not c_expr.is_constant:
        raise ProblemError(f"dirichlet-const needs a constant, got {c_source!r}")
    c = c_expr.eval(0)
    return Problem.from_sources(
        f"dirichlet-const({c_source})", 1.0, f"({c_source})", _DIRICHLET,
        exact_eigenvalue=lambda k: (k * math.pi) ** 2 + c,
    )


_REGISTRY = {
    "ex3.1": (_ex31, "q = 10i sin(x) e^-x on [0, gamma], y(0)=0, y'(gamma) = i mu y(gamma)"),
    "ex3.2": (_ex32, "q = 10i e^-x on [0, gamma], y(0)=0, y'(gamma) = i mu y(gamma)"),
    "ex3.3": (_ex33, "q = 3-2i on [0, pi], Dirichlet; lambda_k = k^2 + 3 - 2i"),
    "ex3.4": (_ex34, "q = e^{2ix} on [0, 1], y(0) + mu y(1) = 0, y'(0) = 0; Bessel oracle"),
    "dirichlet-const(c)": (None, "q = c on [0, 1], Dirichlet; lambda_k = k^2 pi^2 + c"),
}

_DIRICHLET_RE = re.compile(r"^dirichlet-const\((.+)\)$")


def builtin_names() -> dict[str, str]:
    return {name: doc for name, (_, doc) in _REGISTRY.items()}


def builtin(name: str, gamma: float | None = None) -> Problem:
    """Look up a built-in problem; ``gamma`` sets the truncation point of ex3.1/ex3.2."""
    m = _DIRICHLET_RE.match(name)
    if m:
        return _dirichlet_const(m.group(1))
    if name not in _REGISTRY or _REGISTRY[name][0] is None:
        raise ProblemError(f"unknown problem {name!r}; known: {', '.join(_REGISTRY)}")
    factory = _REGISTRY[name][0]
    if gamma is not None:
        if name not in ("ex3.1", "ex3.2"):
            raise ProblemError(f"{name!r} has no truncation parameter")
        return factory(float(gamma))
    return factory()
