import cmath

import numpy as np
import pytest

from todastokes.canonical import (
    PsiData,
    WeakFunctional,
    canonical_spectrum,
    canonical_value,
    du_p_functional,
    du_p_value,
    eigen_residuals,
    find_critical_set,
    key_lemma_residual,
    metric_canonical,
    psi_forward,
    psi_inverse,
    representative_residual,
    sigma_at,
    sigma_curve,
)
from todastokes.errors import DegenerateCritical
from todastokes.laurent import LaurentSeries, unit_nodes
from todastokes.manifold import ManifoldPoint, TangentTriple, apply_U, metric, random_triple

N = 32


def test_sigma_curve_special(pt_half):
    want = LaurentSeries.from_dict({0: 1.0, -2: 0.5}, N)
    assert np.max(np.abs((sigma_curve(pt_half) - want).coeffs)) < 1e-14
    assert abs(sigma_at(pt_half, 1.0) - 1.5) < 1e-15


def test_sigma_nondegenerate(pt_half):
    assert np.min(np.abs(pt_half.grid(sigma_curve(pt_half).derivative()))) > 0.5


@pytest.mark.parametrize("v, p, want", [(0.0, 1.0, 1.0), (2.0, 1j, 2 - 1j)])
def test_canonical_value(v, p, want):
    pt = ManifoldPoint.special(v, 0.5)
    assert abs(canonical_value(pt, p) - want) < 1e-14
    assert abs(canonical_value(pt, p) - (v + 2 * 0.5 / p)) < 1e-14


def test_canonical_value_derivative(pt_pert):
    p, h = cmath.exp(0.4j), 1e-5
    fd = (canonical_value(pt_pert, p + h) - canonical_value(pt_pert, p - h)) / (2 * h)
    s1 = (sigma_at(pt_pert, p + h) - sigma_at(pt_pert, p - h)) / (2 * h)
    assert abs(fd - s1 * pt_pert.w(p)) < 1e-8


def test_critical_set_e_u_4(pt_four):
    crit = find_critical_set(pt_four)
    assert crit.nbar == 0 and crit.n == 2
    assert sorted(round(c.z.imag, 12) for c in crit.outer) == [-2.0, 2.0]
    for c in crit.outer:
        assert abs(c.value - (-pt_four.lam(c.z))) < 1e-13
    assert sorted(round(c.value.imag, 12) for c in crit.outer) == [-4.0, 4.0]


def test_critical_set_empty(pt_half):
    crit = find_critical_set(pt_half)
    assert crit.n == 0 and crit.nbar == 0


def test_degenerate_critical():
    # lambda' = (1 - 2/z)^2 (1 + 4/z) has a double root at z = 2
    a, e_u = 2.0, 0.5
    w = LaurentSeries.from_dict({1: 1.0, -1: 3 * a * a + e_u, -2: -a ** 3}, N)
    pt = ManifoldPoint(w, 0.0, cmath.log(e_u))
    with pytest.raises(DegenerateCritical):
        find_critical_set(pt)


def test_du_p_formula(pt_half, rng):
    X = random_triple(rng, N)
    p = cmath.exp(0.9j)
    e_u = pt_half.e_u
    want = e_u / p ** 2 * X.W(p) + X.W.geq(1)(p) + X.Xv + e_u / p * X.Xu
    assert abs(du_p_value(pt_half, p, X) - want) < 1e-13
    wf = du_p_functional(pt_half, p)
    assert isinstance(wf, WeakFunctional)
    assert abs(wf(X) - want) < 1e-12
    assert abs(du_p_value(pt_half, p, TangentTriple.unit(N)) - 1) < 1e-15


def test_eigen_du_i(pt_four, rng):
    crit = find_critical_set(pt_four)
    X = random_triple(rng, N)
    rp, ri, rj = eigen_residuals(pt_four, crit, X, unit_nodes(64))
    assert max(rp, ri, rj) < 1e-9 * X.max_abs()
    for c in crit.outer:
        assert representative_residual(pt_four, c, X) < 1e-9


@pytest.mark.parametrize("which", ["pt_half", "pt_four", "pt_pert"])
def test_psi_roundtrip_and_diagonal(which, request, rng):
    pt = request.getfixturevalue(which)
    crit = find_critical_set(pt)
    X = random_triple(rng, pt.N)
    d = psi_forward(pt, X, crit)
    assert (psi_inverse(pt, crit, d) - X).max_abs() < 1e-8
    up, ui, ub = canonical_spectrum(pt, crit)
    assert (psi_forward(pt, apply_U(pt, X), crit) - d.scaled(up, ui, ub)).max_abs() < 1e-8 * d.max_abs()


def test_psi_of_unit(pt_half):
    d = psi_forward(pt_half, TangentTriple.unit(N), find_critical_set(pt_half))
    assert np.max(np.abs(d.Y - 1)) < 1e-14


def test_metric_canonical(pt_four, rng):
    crit = find_critical_set(pt_four)
    X, Y = random_triple(rng, N), random_triple(rng, N)
    lhs = metric_canonical(pt_four, crit, psi_forward(pt_four, X, crit), psi_forward(pt_four, Y, crit))
    assert abs(lhs - metric(pt_four, X, Y)) < 1e-8 * abs(lhs)


def test_metric_cross_slot_and_discrete_diagonal(pt_four):
    crit = find_critical_set(pt_four)
    M, n = pt_four.M, crit.n
    cont = PsiData(pt_four.grid(LaurentSeries.from_dict({0: 1.0, 1: 0.5, -2: 0.3}, N)), np.zeros(n, complex),
                   np.zeros(0, complex))
    disc = [PsiData(np.zeros(M, complex), np.eye(n, dtype=complex)[i], np.zeros(0, complex)) for i in range(n)]
    Xc = psi_inverse(pt_four, crit, cont)
    Xd = [psi_inverse(pt_four, crit, d) for d in disc]
    for X in Xd:
        assert abs(metric(pt_four, Xc, X)) < 1e-10
    for i, c in enumerate(crit.outer):
        for j in range(n):
            want = -1 / (c.z ** 2 * c.second_derivative) if i == j else 0.0
            assert abs(metric(pt_four, Xd[i], Xd[j]) - want) < 1e-10
            assert abs(metric_canonical(pt_four, crit, disc[i], disc[j]) - want) < 1e-14


@pytest.mark.parametrize("X", [TangentTriple.unit(N), TangentTriple.basis("u", N)])
def test_key_lemma_special_vectors(pt_pert, X):
    X = X.resize(pt_pert.N)
    assert key_lemma_residual(pt_pert, 0.3 + 0.2j, X).sup_norm() < 1e-12


def test_key_lemma_random(pt_pert, rng):
    for _ in range(3):
        X = random_triple(rng, pt_pert.N)
        s = complex(rng.normal(), rng.normal())
        assert key_lemma_residual(pt_pert, s, X).sup_norm() < 1e-9 * X.norm()
