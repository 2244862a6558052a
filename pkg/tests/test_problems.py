import cmath
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slspec.bessel import BesselError, bessel_j, gamma, rgamma
from slspec.ivp import solve_base_pair
from slspec.problems import Problem, ProblemError, builtin, builtin_names, exact_char_ex34
from slspec.rootfind import refine_zero

from helpers import abs_series

# first five eigenvalues of ex3.4, reference values
EX34_REFERENCE = [
    4.9685430929323576 + 0.3906545895360696j,
    20.60271034889337 + 0.75023252353154j,
    64.14038244804547 + 0.68422837531133j,
    119.34792168887388 + 0.71497240479401j,
    202.31443747778734 + 0.70057212586525j,
]


# -- gamma and J_nu ----------------------------------------------------------------

def test_gamma_values():
    # reference values from an independent arbitrary-precision evaluation
    assert abs(gamma(0.5 + 2j) - (0.089855176706431636 - 0.060493760292887568j)) < 1e-15
    assert abs(gamma(-1.5 + 0.5j) - (0.93791666278788505 + 0.34920566814780487j)) < 1e-14
    assert abs(gamma(5) - 24) < 1e-12
    assert abs(gamma(0.5) - math.sqrt(math.pi)) < 1e-14


def test_rgamma_at_poles():
    for k in range(0, 5):
        assert rgamma(-k) == 0


def test_half_integer_order():
    want = math.sqrt(2 / math.pi) * math.sin(1.0)
    assert abs(bessel_j(0.5, 1) - want) < 1e-15
    assert abs(bessel_j(0.5, 1) - 0.6713967071) < 1e-10


def test_j0_at_one():
    assert abs(bessel_j(0, 1) - 0.7651976866) < 1e-10
    assert abs(bessel_j(0, 1) - 0.76519768655796655) < 1e-15


@pytest.mark.parametrize("nu,z,want", [
    (1 + 1j, cmath.exp(1j), 0.23853648403975703 - 0.071009947721994744j),
    (0.3 + 0.2j, 2 - 1j, 0.65293705511385659 + 0.74784492348575495j),
    (-2.5 + 0.7j, 0.4 + 3j, -0.45809412707584734 + 0.36824825306774167j),
])
def test_complex_order_values(nu, z, want):
    assert abs(bessel_j(nu, z) - want) < 1e-14 * max(1, abs(want))


def test_term_count_self_consistency():
    z = cmath.exp(1j)
    a = bessel_j(1 + 1j, z, max_terms=64)
    b = bessel_j(1 + 1j, z, max_terms=128)
    assert abs(a - b) < 1e-15


def test_negative_integer_order():
    # J_{-n} = (-1)^n J_n
    for n in range(1, 4):
        assert abs(bessel_j(-n, 1.3) - (-1) ** n * bessel_j(n, 1.3)) < 1e-15


@pytest.mark.parametrize("nu", [-1.9999999999999991, -3 + 1e-13, -5 - 2e-15, -1 + 1e-15j])
def test_order_next_to_negative_integer(nu):
    mpmath = pytest.importorskip("mpmath")
    want = complex(mpmath.besselj(mpmath.mpc(nu), 1.3))
    assert abs(bessel_j(nu, 1.3) - want) <= 1e-14 * max(1.0, abs(want))
    assert abs(rgamma(nu) - complex(mpmath.rgamma(mpmath.mpc(nu)))) <= 1e-14 * abs(complex(mpmath.rgamma(mpmath.mpc(nu))))


def test_out_of_regime():
    with pytest.raises(BesselError):
        bessel_j(0.5, 60)


# orders on a 2^-20 grid, so nu - 1 and nu + 1 are exact; near the integers
# a one-ulp change of order moves J by far more than 1e-13
DYADIC = 2.0**-20


@given(
    st.integers(-8 * 2**20, 8 * 2**20), st.integers(-3 * 2**20, 3 * 2**20),
    st.floats(0.2, 6), st.floats(-math.pi + 0.1, math.pi - 0.1),
)
@settings(max_examples=200, deadline=None)
def test_three_term_recurrence(nr, ni, r, phi):
    nu = complex(nr * DYADIC, ni * DYADIC)
    z = cmath.rect(r, phi)
    lhs = bessel_j(nu - 1, z) + bessel_j(nu + 1, z)
    rhs = (2 * nu / z) * bessel_j(nu, z)
    # relative to the series terms: next to a zero of J no double-precision value is relatively accurate
    scale = max(abs_series(nu - 1, z), abs_series(nu + 1, z), abs(2 * nu / z) * abs_series(nu, z))
    assert abs(lhs - rhs) <= 1e-13 * scale


def test_recurrence_against_mpmath():
    mpmath = pytest.importorskip("mpmath")
    rng = np.random.default_rng(3)
    for _ in range(20):
        nu = complex(rng.uniform(-6, 6), rng.uniform(-2, 2))
        z = complex(rng.uniform(-4, 4), rng.uniform(-4, 4))
        want = complex(mpmath.besselj(nu, z))
        assert abs(bessel_j(nu, z) - want) <= 1e-13 * max(1.0, abs(want))


# -- registry ---------------------------------------------------------------------

def test_registry_names():
    names = builtin_names()
    for n in ("ex3.1", "ex3.2", "ex3.3", "ex3.4", "dirichlet-const(c)"):
        assert n in names


def test_ex33_exact_spectrum():
    assert builtin("ex3.3").exact_spectrum(1) == 4 - 2j


def test_dirichlet_const_spectrum():
    p = builtin("dirichlet-const(0)")
    assert p.exact_spectrum(2) == pytest.approx(4 * math.pi**2)
    q = builtin("dirichlet-const(2-i)")
    assert q.exact_spectrum(1) == pytest.approx(math.pi**2 + 2 - 1j)


def test_jost_row():
    p = builtin("ex3.1")
    A = p.boundary_matrix(2)
    assert np.allclose(A[1], [0, 0, -2j, 1])
    assert np.allclose(A[0], [1, 0, 0, 0])


def test_gamma_parameter():
    assert builtin("ex3.2", gamma=12).b == 12
    assert builtin("ex3.1").b == 10
    with pytest.raises(ProblemError):
        builtin("ex3.3", gamma=5)


def test_unknown_name():
    with pytest.raises(ProblemError, match="unknown problem"):
        builtin("ex9.9")
    with pytest.raises(ProblemError):
        builtin("dirichlet-const(x)")


def test_problem_invariants():
    with pytest.raises(ProblemError):
        Problem.from_sources("bad", 0, "0", (("1", "0", "0", "0"), ("0", "0", "1", "0")))
    with pytest.raises(ProblemError):
        Problem.from_sources("bad", 1, "0", (("1", "0", "0"), ("0", "0", "1")))


def test_rank_warning():
    with pytest.warns(UserWarning, match="rank deficient"):
        Problem.from_sources("flat", 1, "0", (("1", "0", "0", "0"), ("2", "0", "0", "0")))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        builtin("ex3.4")


def test_exact_spectrum_missing():
    with pytest.raises(ProblemError):
        builtin("ex3.1").exact_spectrum(1)


# -- exact characteristic function of ex3.4 ------------------------------------------

@pytest.mark.parametrize("lam", EX34_REFERENCE[:2])
def test_exact_char_vanishes_at_table_values(lam):
    assert abs(exact_char_ex34(cmath.sqrt(lam))) < 1e-10


def test_exact_char_generic_point():
    assert abs(exact_char_ex34(0.5)) > 1e-3


def test_exact_char_integer_order():
    with pytest.raises(ProblemError):
        exact_char_ex34(2)


def test_exact_char_roots_match_table():
    def f(z):
        return np.array([exact_char_ex34(complex(v)) for v in np.ravel(z)])

    for lam in EX34_REFERENCE:
        ev = refine_zero(f, cmath.sqrt(lam) * (1 + 1e-6))
        assert abs(ev.mu**2 - lam) <= 1e-12 * abs(lam)


@pytest.mark.parametrize("mu", [0.5, 1.3 + 0.4j, 2.2 - 0.7j, 3.7 + 0.1j])
def test_exact_char_identity(mu):
    # the Bessel determinant is -2 sin(pi mu)/pi times the direct characteristic function
    p = builtin("ex3.4")
    s = solve_base_pair(p.q, p.b, mu)
    direct = 1 + mu * s.yc_end
    w = -2 * cmath.sin(math.pi * mu) / math.pi
    assert abs(exact_char_ex34(mu) - w * direct) < 1e-11 * max(1, abs(w * direct))
