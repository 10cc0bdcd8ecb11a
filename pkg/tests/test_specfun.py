import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from todastokes import specfun
from todastokes.errors import OverlapMismatch, ParameterOutOfScope
from todastokes.specfun import (
    CoverComplex,
    asymptotic_a,
    aux_hg_coefficient,
    bessel_I,
    bessel_K,
    continue_K,
    continue_K_from_pair,
    digamma,
    euler_gamma,
    gauss_2F1,
    hyp_taylor_coefficient,
    identity_suite,
    laplace_identity_sides,
    overlap_discrepancy,
    rising,
    rising_factorial_identity,
    two_step_monodromy,
)


def test_I0_values():
    assert bessel_I(0, 0) == 1
    assert abs(bessel_I(0, 1.0) - 1.2660658777520082) < 1e-15


def test_I_generating_function():
    for t in np.exp(1j * np.array([0.3, 1.7, -2.4])):
        total = sum(t ** n * bessel_I(n, 1.0) for n in range(-25, 26))
        assert abs(total - cmath.exp(0.5 * (t + 1 / t))) < 1e-12


@pytest.mark.parametrize("n", [0, 1, 3, 7])
@pytest.mark.parametrize("z", [0.4, 2.5 + 1j, 20 - 5j, 45 + 3j, -12 + 2j])
def test_I_against_mpmath(n, z):
    want = complex(mpmath.besseli(n, z))
    assert abs(bessel_I(n, z) - want) < 1e-12 * abs(want)


def test_K0_value():
    assert abs(bessel_K(0, 1.0) - 0.42102443824070834) < 1e-15


@pytest.mark.parametrize("n", [0, 1, 2, 5, 12])
@pytest.mark.parametrize("z", [0.3 + 0.1j, 1.9, 2.1 - 0.4j, 6 + 2j, 30j + 1, 60])
def test_K_principal_against_mpmath(n, z):
    want = complex(mpmath.besselk(n, z))
    assert abs(bessel_K(n, z) - want) < 1e-12 * abs(want)


@pytest.mark.parametrize("n", [0, 1, 2])
@pytest.mark.parametrize("arg", [2.5, -2.5, 4.0, 7.0, -5.0])
@pytest.mark.parametrize("r", [0.8, 3.0, 9.0])
def test_K_other_sheets(n, arg, r):
    z = CoverComplex(r, arg)
    m = round(arg / math.pi)
    z0 = CoverComplex(r, arg - m * math.pi).value
    want = complex(mpmath.besselk(n, z0)) * (-1) ** (m * n) - (-1) ** (n * (m - 1)) * m * math.pi * 1j * complex(
        mpmath.besseli(n, z0))
    assert abs(bessel_K(n, z) - want) < 1e-11 * abs(want)


def test_K0_monodromy_one_step():
    z = 1.3 + 0.4j
    lhs = bessel_K(0, CoverComplex.from_complex(z).rotate(math.pi))
    assert abs(lhs - (bessel_K(0, z) - math.pi * 1j * bessel_I(0, z))) < 1e-13


@pytest.mark.parametrize("n", [0, 1, 4])
def test_K_two_step_and_pair(n):
    z = CoverComplex(2.7, 0.5)
    assert two_step_monodromy(n, z) < 1e-11
    kz, kpi = bessel_K(n, z), bessel_K(n, z.rotate(math.pi))
    for m in (2, 3, -1):
        a = continue_K_from_pair(n, kz, kpi, m)
        b = continue_K(n, z.value, m, kz)
        assert abs(a - b) < 1e-11 * abs(b)


@pytest.mark.parametrize("n", range(6))
def test_K_regimes_overlap(n):
    for r in (1.6, 2.0, 2.4):
        for t in (-1.5, 0.0, 1.5):
            assert overlap_discrepancy(n, CoverComplex(r, t)) < 1e-12
    assert bessel_K(n, CoverComplex(1.9, 0.3), check_overlap=True) != 0


def test_overlap_mismatch(monkeypatch):
    monkeypatch.setattr(specfun, "_k_right_half", lambda n, z: 2.0 * complex(mpmath.besselk(n, z)))
    with pytest.raises(OverlapMismatch):
        bessel_K(0, CoverComplex(1.9, 0.2), check_overlap=True)


@settings(max_examples=40, deadline=None)
@given(
    st.integers(min_value=1, max_value=6),
    st.floats(min_value=0.2, max_value=30.0),
    st.floats(min_value=-7.0, max_value=7.0),
)
def test_K_recurrence_on_cover(n, r, arg):
    z = CoverComplex(r, arg)
    lhs = bessel_K(n + 1, z) - bessel_K(n - 1, z)
    rhs = 2 * n / z.value * bessel_K(n, z)
    assert abs(lhs - rhs) <= 1e-10 * max(abs(bessel_K(n + 1, z)), abs(rhs))


@settings(max_examples=50, deadline=None)
@given(st.floats(0.1, 10), st.floats(-20, 20), st.floats(0.1, 10), st.floats(-20, 20))
def test_cover_arithmetic(r1, a1, r2, a2):
    x, y = CoverComplex(r1, a1), CoverComplex(r2, a2)
    assert abs((x * y).arg - (a1 + a2)) < 1e-12
    assert abs((x / y).arg - (a1 - a2)) < 1e-12
    assert abs((x * y).value - x.value * y.value) < 1e-10 * r1 * r2
    assert abs(x.turn(1).arg - a1 - 2 * math.pi) < 1e-12


def test_asymptotic_leading_coefficient():
    assert asymptotic_a(3, 0) == 1
    assert asymptotic_a(0, 1) == -1 / 8


def test_2F1_basic():
    assert gauss_2F1(0.3, 0.7, 1.2, 0) == 1
    z = 0.6
    a = gauss_2F1(0.5, 0.5, 1.0, z, "series")
    b = gauss_2F1(0.5, 0.5, 1.0, z, "connection")
    assert abs(a - b) < 1e-10
    assert abs(a - complex(mpmath.hyp2f1(0.5, 0.5, 1.0, z))) < 1e-14


@pytest.mark.parametrize("n", range(4))
@pytest.mark.parametrize("z", [0.5 + 0.1j, 0.95, 0.9 + 0.3j, 1.6 - 0.2j])
def test_2F1_connection_against_mpmath(n, z):
    want = complex(mpmath.hyp2f1(0.5 - n, 0.5 + n, 1, z))
    assert abs(gauss_2F1(0.5 - n, 0.5 + n, 1, z) - want) < 1e-12 * abs(want)


def test_2F1_out_of_scope():
    with pytest.raises(ParameterOutOfScope):
        gauss_2F1(0.5, 0.5, 1.5, 0.9, "connection")
    with pytest.raises(ParameterOutOfScope):
        gauss_2F1(0.5, 0.5, 1.0, 1.5, "series")


def test_digamma():
    assert digamma(1) == -euler_gamma()
    assert abs(euler_gamma() - float(mpmath.euler)) < 1e-15
    for z in (0.3, 2.5 + 1j, -2.5 + 0.1j, 20):
        assert abs(digamma(z) - complex(mpmath.digamma(z))) < 1e-13
    assert abs(specfun.digamma_series(2.5) - digamma(2.5)) < 1e-5


def test_identity_examples():
    assert rising(3, 2) == 12
    assert 4 ** 2 * rising(0.5, 2) == 12
    assert all(rising_factorial_identity(k) for k in range(21))
    assert abs(aux_hg_coefficient(0, 1) - 1 / 16) < 1e-17
    assert abs(hyp_taylor_coefficient(0, 1) - 1 / 16) < 1e-17


@pytest.mark.parametrize("omega", [0.7, 2 * cmath.exp(0.6j), 1.5 * cmath.exp(-2.5j)])
def test_laplace_identity_baseline(omega):
    lhs, rhs = laplace_identity_sides(0.5, omega)
    assert abs(lhs - rhs) < 1e-8 * abs(rhs)


def test_identity_suite_green():
    recs = identity_suite()
    assert len(recs) == 4
    for r in recs:
        assert r.passed, r.to_json()
