"""Reference computations shared by several test modules."""

import cmath
import math

import numpy as np

from slspec.bessel import rgamma


def direct_h(p, cfg, s, mu):
    """Regularized h_kl from a direct solve, written out independently of the sampling module."""
    reg = (cmath.sin(cfg.theta * mu) / (cfg.theta * mu)) ** cfg.m
    b = p.b
    return reg * np.array([
        [s.yc_end - cmath.cos(mu * b), s.ys_end - cmath.sin(mu * b) / mu],
        [s.yc_prime_end + mu * cmath.sin(mu * b), s.ys_prime_end - cmath.cos(mu * b)],
    ])


def abs_series(nu, z):
    """Sum of the moduli of the ascending-series terms of J_nu(z).

    This is the natural size for rounding errors of the series: near a zero
    of J the value itself is tiny while the terms are not.
    """
    h = abs(z) / 2
    lead = abs(cmath.exp(nu * cmath.log(z / 2)))
    total, k = 0.0, 0
    while True:
        t = h ** (2 * k) / math.factorial(k) * abs(rgamma(nu + k + 1))
        total += t
        if k > h and 0 < total and t <= 1e-17 * total:
            return lead * total
        k += 1
