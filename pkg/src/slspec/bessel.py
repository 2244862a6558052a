"""Bessel functions of the first kind for complex order, by power series.

Only the small-argument regime (``|z| <= 50``) is supported.  The complex
gamma function uses the Lanczos approximation with ``g = 7`` and nine
coefficients.
"""

from __future__ import annotations

import cmath
import math

__all__ = ["gamma", "rgamma", "bessel_j", "BesselError"]

_G = 7
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

_MAX_TERMS = 200
_MAX_ABS_Z = 50.0


class BesselError(ArithmeticError):
    pass


def _is_nonpositive_integer(z: complex) -> bool:
    return z.imag == 0 and z.real <= 0 and z.real == math.floor(z.real)


def _sinpi(z: complex) -> complex:
    """``sin(pi z)``, accurate next to the integers (the reduction ``z - n`` is exact)."""
    n = round(z.real)
    s = cmath.sin(cmath.pi * complex(z.real - n, z.imag))
    return -s if n % 2 else s


def gamma(z: complex) -> complex:
    z = complex(z)
    if _is_nonpositive_integer(z):
        raise BesselError(f"gamma has a pole at {z!r}")
    if z.real < 0.5:
        return cmath.pi / (_sinpi(z) * gamma(1 - z))
    z -= 1
    x = _LANCZOS[0]
    for i in range(1, _G + 2):
        x += _LANCZOS[i] / (z + i)
    t = z + _G + 0.5
    return cmath.sqrt(2 * cmath.pi) * t ** (z + 0.5) * cmath.exp(-t) * x


def rgamma(z: complex) -> complex:
    """``1/gamma(z)``, equal to zero at the poles."""
    z = complex(z)
    if _is_nonpositive_integer(z):
        return 0j
    if z.real < 0.5:
        return _sinpi(z) * gamma(1 - z) / cmath.pi
    return 1 / gamma(z)


def bessel_j(nu: complex, z: complex, max_terms: int = _MAX_TERMS) -> complex:
    """``J_nu(z)`` from the ascending series, principal branch of ``(z/2)^nu``.

    >>> round(bessel_j(0, 1).real, 10)
    0.7651976866
    """
    nu = complex(nu)
    z = complex(z)
    if abs(z) > _MAX_ABS_Z:
        raise BesselError(f"|z|={abs(z):.3g} is outside the series regime")
    if z == 0:
        if nu == 0:
            return 1 + 0j
        if nu.real > 0:
            return 0j
        raise BesselError("J_nu(0) is unbounded for Re(nu) <= 0, nu != 0")
    # First term with nonzero 1/gamma(nu + k + 1); earlier terms vanish.
    k0 = 0
    while _is_nonpositive_integer(nu + k0 + 1):
        k0 += 1
    half = z / 2
    term = (
        (-1) ** k0
        * cmath.exp((2 * k0 + nu) * cmath.log(half))
        * rgamma(nu + k0 + 1)
        / math.factorial(k0)
    )
    # terms are kept and summed exactly at the end; near zeros of J the
    # series cancels and plain accumulation costs a digit
    re, im = [term.real], [term.imag]
    total = term
    w = -half * half
    for k in range(k0 + 1, k0 + max_terms):
        term = term * w / (k * (nu + k))
        re.append(term.real)
        im.append(term.imag)
        total += term
        # past the peak of the terms and below working precision
        if (abs(w) < abs(k * (nu + k)) and abs(term) <= 1e-17 * abs(total)) or (total == 0 and term == 0):
            return complex(math.fsum(re), math.fsum(im))
    raise BesselError(f"series for J_{nu}({z}) did not converge in {max_terms} terms")
