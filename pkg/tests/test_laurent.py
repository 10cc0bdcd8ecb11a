import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from todastokes.errors import UnderResolved
from todastokes.laurent import LaurentSeries, TruncationParams, close, exp, mul, reciprocal

N = 8


def series(terms, n=N):
    return LaurentSeries.from_dict(terms, n)


@pytest.fixture
def f():
    return series({1: 1.0, 0: 2.0, -1: 3.0})


def test_project_geq(f):
    assert np.allclose(f.project("geq", 1).coeffs, series({1: 1.0}).coeffs)


def test_project_single(f):
    assert f.project("single", 0) == 2.0


def test_project_leq(f):
    assert np.allclose(f.project("leq", 0).coeffs, series({0: 2.0, -1: 3.0}).coeffs)


def test_project_bad_mode(f):
    with pytest.raises(ValueError):
        f.project("middle", 0)


@pytest.mark.parametrize(
    "a, b, want",
    [
        ({1: 1.0}, {-1: 1.0}, {0: 1.0}),
        ({0: 1.0, 1: 1.0}, {0: 1.0, 1: -1.0}, {0: 1.0, 2: -1.0}),
    ],
)
def test_mul_examples(a, b, want):
    assert np.allclose((series(a) * series(b)).coeffs, series(want).coeffs)


def test_mul_identity(rng):
    c = rng.normal(size=2 * N + 1) + 1j * rng.normal(size=2 * N + 1)
    g = LaurentSeries(c)
    assert np.allclose((g * LaurentSeries.constant(1.0, N)).coeffs, c)


def test_mul_spill_recorded_and_strict():
    a = series({N: 1.0})
    prod = mul(a, a)
    assert prod.spill > 0 and prod.under_resolved
    with pytest.raises(UnderResolved):
        mul(a, a, strict=True)


def test_derivative_and_contour_mean():
    assert np.allclose(series({2: 1.0}).derivative().coeffs, series({1: 2.0}).coeffs)
    assert series({1: 1.0, 0: 5.0, -1: 1.0}).contour_mean() == 5.0
    assert (series({-1: 1.0}) * series({1: 1.0, 0: 1.0})).contour_mean() == 1.0


def test_grid_roundtrip_and_evaluation(rng):
    c = rng.normal(size=2 * N + 1) + 1j * rng.normal(size=2 * N + 1)
    g = LaurentSeries(c)
    back = LaurentSeries.from_values(g.values(64), N)
    assert np.allclose(back.coeffs, c, atol=1e-13)
    z = 0.9 * np.exp(0.7j)
    direct = sum(ck * z ** k for k, ck in zip(range(-N, N + 1), c))
    assert abs(g(z) - direct) < 1e-12


def test_reciprocal_and_exp():
    g = series({0: 2.0, 1: 0.5}, 24)
    r = reciprocal(g)
    assert close((g * r).coeffs, series({0: 1.0}, 24).coeffs, 1e-12)
    e = exp(series({-1: 1.0}, 24))
    k = np.arange(0, 20)
    from math import factorial

    assert np.allclose([e.coef(-int(j)) for j in k], [1 / factorial(int(j)) for j in k], atol=1e-14)


def test_truncation_params_validate():
    with pytest.raises(ValueError):
        TruncationParams(N=32, M=64)
    assert TruncationParams().N == 32 and TruncationParams().M == 256


def test_json_roundtrip(f):
    g = LaurentSeries.from_json(f.to_json())
    assert np.array_equal(g.coeffs, f.coeffs)


coef = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)


@settings(max_examples=40, deadline=None)
@given(st.lists(coef, min_size=7, max_size=7), st.lists(coef, min_size=7, max_size=7))
def test_mul_commutes_and_matches_grid(a, b):
    fa = LaurentSeries.from_dict({k - 3: v for k, v in enumerate(a)}, 16)
    fb = LaurentSeries.from_dict({k - 3: v for k, v in enumerate(b)}, 16)
    p1, p2 = fa * fb, fb * fa
    assert np.allclose(p1.coeffs, p2.coeffs)
    grid = LaurentSeries.from_values(fa.values(128) * fb.values(128), 16)
    assert close(p1.coeffs, grid.coeffs, 1e-12)
    assert p1.spill == 0
