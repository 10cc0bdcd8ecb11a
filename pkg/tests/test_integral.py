import cmath
import math

import numpy as np
import pytest

from todastokes.canonical import canonical_value, du_p_value, sigma_at
from todastokes.dubrovin import dubrovin_residual, formal_continuous
from todastokes.errors import (
    AntiStokesDirection,
    BranchAmbiguity,
    DegenerateSaddle,
    QuadratureNotConverged,
)
from todastokes.integral import (
    asymptotic_coeffs_residue,
    bessel_closed_forms,
    circle_mean,
    dominant_index,
    dy_functional,
    dy_representative,
    dy_sigma,
    incompleteness_witness,
    saddle_coeffs,
    saddle_coeffs_for,
    saddle_for,
    slope_test,
    taylor_at,
    y_sigma,
)
from todastokes.laurent import LaurentSeries
from todastokes.manifold import TangentTriple, metric, random_triple
from todastokes.resurgence import phi_coefficient
from todastokes.specfun import CoverComplex, bessel_I

N = 32
P_VALUES = [1.0, 1j, cmath.exp(1j * math.pi / 5)]


def _i0_series(x, terms=60):
    return sum((x / 2) ** (2 * k) / math.factorial(k) ** 2 for k in range(terms))


def test_dy_on_unit_vector_is_bessel(pt_half):
    s = complex(sigma_at(pt_half, 1.0))
    val = dy_sigma(pt_half, s, 2.0, TangentTriple.unit(N))
    assert abs(val - math.sqrt(2) * _i0_series(2.0)) < 1e-10


@pytest.mark.parametrize("p", P_VALUES)
def test_bessel_closed_forms(pt_half, p):
    s = complex(sigma_at(pt_half, p))
    z = CoverComplex(2.0, 0.3)
    mh = list(range(-8, 9)) + ["v", "u"]
    cf = bessel_closed_forms(pt_half, p, z, mh)
    for m in mh:
        quad = dy_sigma(pt_half, s, z, TangentTriple.basis(m, N))
        assert abs(quad - cf[m]) <= 1e-10 * max(1.0, abs(cf[m]))


def test_monodromy_antisymmetric(pt_half, rng):
    X = random_triple(rng, N)
    s = complex(sigma_at(pt_half, 1j))
    z = CoverComplex(1.5, 0.7)
    assert abs(dy_sigma(pt_half, s, z.turn(1), X) + dy_sigma(pt_half, s, z, X)) < 1e-10
    assert abs(y_sigma(pt_half, s, z.turn(1)) + y_sigma(pt_half, s, z)) < 1e-10


@pytest.mark.parametrize("zeta", [CoverComplex(3.0, 0.4), CoverComplex(2.0, 2.0)])
def test_dubrovin_residual_dy(pt_half, zeta, rng):
    X = random_triple(rng, N)
    s = complex(sigma_at(pt_half, 1.0))
    r, scale = dubrovin_residual(pt_half, dy_functional(pt_half, s), zeta, X, return_scale=True)
    assert abs(r) < 1e-6 * scale


def test_dubrovin_residual_dy_perturbed(pt_pert, rng):
    X = random_triple(rng, pt_pert.N)
    s = complex(sigma_at(pt_pert, cmath.exp(0.5j)))
    r, scale = dubrovin_residual(pt_pert, dy_functional(pt_pert, s), CoverComplex(1.5, -0.6), X, return_scale=True)
    assert abs(r) < 1e-6 * scale


def test_representative(pt_half, rng):
    s = complex(sigma_at(pt_half, cmath.exp(0.3j)))
    z = CoverComplex(1.2, 0.5)
    Z = dy_representative(pt_half, s, z)
    for _ in range(3):
        X = random_triple(rng, N)
        assert abs(metric(pt_half, Z, X) - dy_sigma(pt_half, s, z, X)) < 1e-8
    assert abs(Z.Xu - dy_sigma(pt_half, s, z, TangentTriple.unit(N))) < 1e-10
    assert abs(Z.Xv - dy_sigma(pt_half, s, z, TangentTriple.basis("u", N))) < 1e-10


def test_incompleteness_witness(pt_half):
    W = incompleteness_witness(pt_half, 2.0)
    assert W.max_abs() > 0.5
    for p in np.exp(2j * np.pi * np.arange(6) / 6):
        s = complex(sigma_at(pt_half, p))
        assert abs(dy_sigma(pt_half, s, CoverComplex(2.0, 0.0), W)) < 1e-8


def test_gaussian_calibration():
    f = LaurentSeries.monomial(2, 4)
    g = LaurentSeries.constant(1.0, 4)
    tangent = 1j
    d = saddle_coeffs(f, g, 0.0, 4, 0.0, tangent)
    assert abs(d[0] / tangent - math.sqrt(math.pi)) < 1e-12
    assert max(abs(x) for x in d[1:]) < 1e-12


def test_degenerate_saddle():
    with pytest.raises(DegenerateSaddle):
        saddle_coeffs(LaurentSeries.monomial(3, 4), LaurentSeries.constant(1.0, 4), 0.0, 2)
    with pytest.raises(DegenerateSaddle):
        saddle_coeffs(LaurentSeries.monomial(2, 4), LaurentSeries.constant(1.0, 4), 0.5, 2)


def test_taylor_at_exact_vs_sampled():
    f = LaurentSeries.from_dict({2: 1.0, -1: 0.5, 0: 2.0}, 4)
    a = taylor_at(f, 1.3, 5)
    b = taylor_at(lambda z: f(z), 1.3, 5)
    assert np.allclose(a, b, atol=1e-12)


@pytest.mark.parametrize("p", P_VALUES)
def test_leading_coefficient_is_du_p(pt_half, p, rng):
    X = random_triple(rng, N)
    sd = saddle_for(pt_half, "p", p)
    arg = float(np.angle(p / pt_half.e_u))
    d0 = saddle_coeffs_for(pt_half, sd, X, 0, arg)[0]
    want = 0.5 * np.sqrt(p / pt_half.e_u) / math.sqrt(math.pi) * du_p_value(pt_half, p, X)
    assert abs(d0 - want) < 1e-12 * abs(want)


@pytest.mark.parametrize("m", [-3, 0, 1, 4])
def test_coefficients_match_phi(pt_half, m):
    p = cmath.exp(0.4j)
    s = complex(sigma_at(pt_half, p))
    sd = saddle_for(pt_half, "p", p)
    arg = float(np.angle(p / pt_half.e_u))
    d = saddle_coeffs_for(pt_half, sd, TangentTriple.basis(m, N), 6, arg)
    f = s * p ** m if m >= 1 else (s - 1) * p ** m
    for k in range(7):
        want = 0.5 * np.sqrt(p / pt_half.e_u) * f * phi_coefficient(p, abs(m), k, pt_half.e_u)
        assert abs(d[k] - want) < 1e-8 * abs(want)


@pytest.mark.parametrize("p", P_VALUES)
def test_routes_agree_and_match_formal(pt_half, p, rng):
    X = random_triple(rng, N, 4)
    sd = saddle_for(pt_half, "p", p)
    arg = float(np.angle(p / pt_half.e_u))
    a = saddle_coeffs_for(pt_half, sd, X, 4, arg)
    b = asymptotic_coeffs_residue(pt_half, sd, 4, X, arg)
    sol = formal_continuous(pt_half, p, 4, "bessel")
    pref = 0.5 * np.sqrt(p / pt_half.e_u) / math.sqrt(math.pi)
    for k in range(5):
        assert abs(a[k] - b[k]) < 1e-8 * abs(a[k])
        assert abs(a[k] - pref * sol.terms[k](X)) < 1e-8 * abs(a[k])


def test_discrete_saddle_routes(pt_four, rng):
    from todastokes.canonical import find_critical_set

    crit = find_critical_set(pt_four)
    X = random_triple(rng, N, 3)
    for c in crit.outer:
        sd = saddle_for(pt_four, "outer", crit_point=c)
        arg = 0.3
        a = saddle_coeffs_for(pt_four, sd, X, 3, arg)
        b = asymptotic_coeffs_residue(pt_four, sd, 3, X, arg)
        for k in range(4):
            assert abs(a[k] - b[k]) < 1e-8 * max(abs(a[k]), 1e-300)


def test_residue_branch_ambiguity(pt_half, rng):
    sd = saddle_for(pt_half, "p", 1.0)
    with pytest.raises(BranchAmbiguity):
        asymptotic_coeffs_residue(pt_half, sd, 2, TangentTriple.unit(N), 0.0, radius=1.5)


def test_large_zeta_quadrature(pt_half):
    p = 1.0
    sd = saddle_for(pt_half, "p", p)
    z = CoverComplex(50.0, 0.0)
    X = TangentTriple.unit(N)
    d0 = saddle_coeffs_for(pt_half, sd, X, 0, 0.0)[0]
    val = dy_sigma(pt_half, sd.sigma, z, X, tol=1e-14) * np.exp(-z.value * sd.value)
    assert abs(val - d0) < 1e-2 * abs(d0)


@pytest.mark.parametrize("K", [2, 3])
def test_slope(pt_half, K, rng):
    X = random_triple(rng, N, 3)
    slope, _, _ = slope_test(pt_half, cmath.exp(0.2j), X, K)
    assert abs(slope + K + 1) < 0.3


def test_dominant_index_and_anti_stokes(pt_half):
    vals = [canonical_value(pt_half, 1.0), canonical_value(pt_half, -1.0)]
    assert dominant_index(vals, 1.0) == 0
    assert dominant_index(vals, -1.0) == 1
    with pytest.raises(AntiStokesDirection):
        dominant_index(vals, 1j)


def test_quadrature_not_converged():
    rng = np.random.default_rng(0)
    with pytest.raises(QuadratureNotConverged):
        circle_mean(lambda nd: rng.normal(size=nd.size), 64)


def test_bessel_I_generating_oracle():
    # the same I_m that the closed forms rely on
    t = cmath.exp(0.7j)
    total = sum(t ** n * bessel_I(n, 1.0) for n in range(-25, 26))
    assert abs(total - cmath.exp(0.5 * (t + 1 / t))) < 1e-12
