"""The Dubrovin equation on cotangent functionals and its formal solutions at zeta = oo.

A solution xi(zeta) satisfies d/dzeta <xi, X> = <xi, (U - V/zeta) X> for all
test vectors X. Formal solutions e^{zeta u} sum_k r^k zeta^-k satisfy

    <r^{k+1}, (u - U) X> = <r^k, (k - V) X>.

For the continuous family at the special point the recursion is solved with
an explicit left inverse A_p of u_p - U. For the discrete family it is solved
in canonical coordinates where U is diagonal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .canonical import (
    PsiData,
    WeakFunctional,
    canonical_spectrum,
    canonical_value,
    du_i_representative,
    du_p_functional,
    dubar_j_representative,
    find_critical_set,
    psi_forward,
    psi_inverse,
    sigma_at,
)
from .errors import SolvabilityFailure, StepTooLarge
from .laurent import LaurentSeries
from .manifold import TangentTriple, apply_U, apply_V, metric, random_triple
from .specfun import CoverComplex, gen_binomial

DEFAULT_K = 8


# ---------------------------------------------------------------------------
# residual of the equation


def _functional_value(xi, zeta, X):
    val = xi(zeta)
    return complex(val(X)) if callable(val) else complex(val)


def zeta_derivative(func, zeta, h=None, tol=1e-6):
    """Richardson-extrapolated central difference of func on the cover.

    Returns (derivative, disagreement) where disagreement is the difference
    between the extrapolated value and the finer central difference.
    """
    zeta = CoverComplex.lift(zeta)
    h = h if h is not None else 1e-3 * zeta.modulus

    def central(step):
        return (func(zeta.nudge(step)) - func(zeta.nudge(-step))) / (2 * step)

    d1 = central(h)
    d2 = central(h / 2)
    rich = (4 * d2 - d1) / 3
    return rich, abs(rich - d2)


def dubrovin_residual(pt, xi, zeta, X, tol=1e-6, h=None, return_scale=False):
    """d/dzeta <xi, X> - <xi, (U - V/zeta) X>.

    ``xi(zeta)`` must return either a callable on triples (for example a
    WeakFunctional) or be a two-argument function ``xi(zeta, X)``.
    """
    zeta = CoverComplex.lift(zeta)
    try:
        xi(zeta)(X)
        value = lambda z, Y: _functional_value(xi, z, Y)  # noqa: E731
    except TypeError:
        value = lambda z, Y: complex(xi(z, Y))  # noqa: E731
    UX = apply_U(pt, X)
    VX = apply_V(pt, X)
    deriv, gap = zeta_derivative(lambda z: value(z, X), zeta, h)
    a = value(zeta, UX)
    b = value(zeta, VX) / zeta.value
    scale = abs(deriv) + abs(a) + abs(b) + 1e-300
    if gap > 10 * tol * scale:
        raise StepTooLarge(f"finite-difference extrapolation gap {gap:.3e} at scale {scale:.3e}")
    res = deriv - a + b
    return (res, scale) if return_scale else res


# ---------------------------------------------------------------------------
# coefficient-space matrices on the window [-N, N] plus (v, u)


def triple_to_vector(X, N):
    W = X.W.resize(N)
    return np.concatenate([W.coeffs, [X.Xv, X.Xu]])


def vector_to_triple(vec, N):
    return TangentTriple(LaurentSeries(vec[:2 * N + 1]), vec[2 * N + 1], vec[2 * N + 2])


def functional_vector(r):
    return r.vector()


def vector_functional(vec, N):
    return WeakFunctional(vec[:2 * N + 1], vec[2 * N + 1], vec[2 * N + 2])


def operator_matrix(op, N):
    """Matrix of a linear map on triples, columns indexed like triple_to_vector."""
    cols = []
    for m in list(range(-N, N + 1)) + ["v", "u"]:
        cols.append(triple_to_vector(op(TangentTriple.basis(m, N)), N))
    return np.array(cols).T


def _difference_quotient(Xc, p, N):
    """Coefficients of p z (X(z) - X(p)) / (z - p), computed exactly term by term."""
    out = np.zeros(2 * N + 1, dtype=complex)
    for k in range(-N, N + 1):
        c = Xc[k + N]
        if c == 0 or k == 0:
            continue
        if k > 0:
            # (z^k - p^k)/(z - p) = sum_{j<k} z^j p^{k-1-j}
            for j in range(k):
                out[j + 1 + N] += c * p ** (k - 1 - j) * p
        else:
            n = -k
            # (z^-n - p^-n)/(z - p) = -sum_{j<n} z^j p^{n-1-j} / (z^n p^n)
            for j in range(n):
                out[j - n + 1 + N] += -c * p ** (n - 1 - j) / p ** n * p
    return out


def left_inverse_Ap(pt, p, X):
    """A_p X at the special point, the left inverse of u_p - U with A_p(e) = 0."""
    N = pt.N
    e_u = pt.e_u
    W = X.W.resize(N)
    Xp = complex(W(p))
    D = _difference_quotient(W.coeffs, p, N)
    return TangentTriple(
        LaurentSeries(0.5 / e_u * D),
        -0.5 * (Xp / p + X.Xu),
        -0.5 / e_u * Xp,
    )


def Ap_matrix(pt, p):
    return operator_matrix(lambda X: left_inverse_Ap(pt, p, X), pt.N)


def V_matrix(pt):
    return operator_matrix(lambda X: apply_V(pt, X), pt.N)


def U_matrix(pt):
    return operator_matrix(lambda X: apply_U(pt, X), pt.N)


# ---------------------------------------------------------------------------
# formal solutions


@dataclass
class FormalDubrovinSolution:
    """e^{zeta u} sum_k r^k zeta^-k with r^k stored as weak functionals."""

    u_value: complex
    terms: list
    free_constants: list = field(default_factory=list)
    family: str = "continuous"
    label: str = ""
    representatives: list = field(default_factory=list)

    @property
    def K(self):
        return len(self.terms) - 1

    def partial_sum(self, zeta, X, K=None):
        """e^{-zeta u} times the truncated expansion, evaluated on X."""
        K = self.K if K is None else K
        z = complex(zeta)
        return sum(self.terms[k](X) * z ** (-k) for k in range(K + 1))

    def normalization(self):
        """<r^k, e> for the unit vector field e = (0, 1, 0)."""
        return [r.cv for r in self.terms]

    def to_json(self):
        enc = lambda c: [float(complex(c).real), float(complex(c).imag)]  # noqa: E731
        return {
            "family": self.family,
            "label": self.label,
            "u_value": enc(self.u_value),
            "free_constants": [enc(a) for a in self.free_constants],
            "terms": [r.to_json() for r in self.terms],
        }


def bessel_phi(m, k, p, e_u):
    """k-th coefficient of the Bessel-type series phi^m_p: binom(m+k-1/2, 2k)(p/e^u)^k / Gamma(1/2-k)."""
    return gen_binomial(m + k - 0.5, 2 * k) * (p / e_u) ** k / math.gamma(0.5 - k)


def bessel_constants(pt, p, K):
    """The Bessel-matching free constants a^k = <r^k, e>, k = 1..K."""
    return [math.sqrt(math.pi) * bessel_phi(0, k, p, pt.e_u) for k in range(1, K + 1)]


def bessel_terms(pt, p, K, N=None):
    """Coefficients of the asymptotic expansion of the integral solution (closed form)."""
    N = N if N is not None else pt.N
    e_u = pt.e_u
    s = complex(sigma_at(pt, p))
    rp = math.sqrt(math.pi)
    out = []
    for k in range(K + 1):
        c = []
        for m in range(-N, N + 1):
            f = s if m >= 1 else s - 1
            c.append(rp * bessel_phi(m, k, p, e_u) * f * p ** m)
        out.append(WeakFunctional(np.array(c), rp * bessel_phi(0, k, p, e_u), e_u / p * rp * bessel_phi(1, k, p, e_u)))
    return out


def formal_continuous(pt, p, K=DEFAULT_K, constants=None):
    """Formal solution with exponent u_p at the special point.

    ``constants`` are a^1..a^K; None means all zero. The string "bessel"
    selects the constants that reproduce the integral solutions.
    """
    N = pt.N
    p = complex(p)
    if constants is None:
        constants = [0j] * K
    elif isinstance(constants, str):
        if constants != "bessel":
            raise ValueError(f"unknown preset {constants!r}")
        constants = bessel_constants(pt, p, K)
    constants = [complex(a) for a in constants]
    if len(constants) != K:
        raise ValueError("need exactly K free constants")
    A = Ap_matrix(pt, p)
    V = V_matrix(pt)
    I = np.eye(2 * N + 3)
    du = du_p_functional(pt, p)
    du_vec = functional_vector(du)
    r = du_vec
    terms = [du]
    for k in range(K):
        r = r @ (k * I - V) @ A + constants[k] * du_vec
        terms.append(vector_functional(r, N))
    return FormalDubrovinSolution(
        complex(canonical_value(pt, p)), terms, constants, "continuous", f"p={p:.6g}"
    )


def _psi_V(pt, crit, data):
    return psi_forward(pt, apply_V(pt, psi_inverse(pt, crit, data)), crit)


def _slot(data, which, idx):
    return data.Yi[idx] if which == "outer" else data.Ybar[idx]


def _unit_data(pt, crit, which, idx, value):
    Y = np.zeros(pt.M, dtype=complex)
    Yi = np.zeros(crit.n, dtype=complex)
    Ybar = np.zeros(crit.nbar, dtype=complex)
    (Yi if which == "outer" else Ybar)[idx] = value
    return PsiData(Y, Yi, Ybar)


def _particular(data, ui, up, uo, ubar, which, idx, t):
    Yi = data.Yi.copy()
    Ybar = data.Ybar.copy()
    P_Y = data.Y / (ui - up)
    for j in range(Yi.size):
        Yi[j] = t if (which == "outer" and j == idx) else Yi[j] / (ui - uo[j])
    for j in range(Ybar.size):
        Ybar[j] = t if (which == "inner" and j == idx) else Ybar[j] / (ui - ubar[j])
    return PsiData(P_Y, Yi, Ybar)


def formal_discrete(pt, which="outer", index=0, K=2, crit=None, solvability_tol=1e-8,
                    uniqueness_probe=1.0):
    """Formal solution attached to a discrete canonical coordinate.

    The recursion (u_i - U) Y^{k+1} = (k + V) Y^k is solved in canonical
    coordinates. The kernel constant of each step is fixed by solvability
    of the next one, and the step is repeated with a shifted kernel
    component to confirm that this constant does not depend on it.
    """
    crit = crit if crit is not None else find_critical_set(pt)
    pts = crit.outer if which == "outer" else crit.inner
    if index >= len(pts):
        raise ValueError(f"no {which} critical point with index {index}")
    c = pts[index]
    up, uo, ubar = canonical_spectrum(pt, crit)
    ui = c.value
    # Psi of du_i (resp. dubar_j): a single nonzero slot
    rep = du_i_representative(pt, c) if which == "outer" else dubar_j_representative(pt, c)
    Y0 = psi_forward(pt, rep, crit)
    y0 = _slot(Y0, which, index)
    Y0 = _unit_data(pt, crit, which, index, y0)
    Ys = [Y0]
    consts = []
    for k in range(K):
        R = _psi_V(pt, crit, Ys[k]) + Ys[k] * k
        scale = max(R.max_abs(), 1.0)
        if abs(_slot(R, which, index)) > solvability_tol * scale:
            raise SolvabilityFailure(
                f"kernel component {abs(_slot(R, which, index)):.3e} at step {k}"
            )
        nxt = []
        for t in (0.0, uniqueness_probe):
            P = _particular(R, ui, up, uo, ubar, which, index, t)
            S = _psi_V(pt, crit, P) + P * (k + 1)
            a = -_slot(S, which, index) / ((k + 1) * y0)
            nxt.append((P + Y0 * a, a))
        (Ynext, a), (Yalt, _) = nxt
        drift = abs(_slot(Ynext, which, index) - _slot(Yalt, which, index))
        if drift > 1e-8 * max(1.0, abs(_slot(Ynext, which, index))):
            raise SolvabilityFailure(f"kernel constant not unique at step {k} (drift {drift:.3e})")
        Ys.append(Ynext)
        consts.append(_slot(Ynext, which, index) / y0)
    reps = [psi_inverse(pt, crit, Y) for Y in Ys]
    reps[0] = rep
    terms = [WeakFunctional.from_representative(pt, Z) for Z in reps]
    return FormalDubrovinSolution(complex(ui), terms, consts, which, f"{which}[{index}]", reps)


# ---------------------------------------------------------------------------
# recursion residuals


def recursion_residuals(pt, sol, rng=None, batch=8, degree=4):
    """Max over a random batch of |<r^{k+1},(u-U)X> - <r^k,(k-V)X>| / scale, per k."""
    rng = rng if rng is not None else np.random.default_rng(0)
    N = pt.N
    Xs = [random_triple(rng, N, degree) for _ in range(batch)]
    UXs = [apply_U(pt, X) for X in Xs]
    VXs = [apply_V(pt, X) for X in Xs]
    use_rep = bool(sol.representatives)

    def pair(k, Y):
        if use_rep:
            return metric(pt, sol.representatives[k], Y)
        return sol.terms[k](Y)

    out = []
    for k in range(sol.K):
        worst = 0.0
        for X, UX, VX in zip(Xs, UXs, VXs):
            lhs = sol.u_value * pair(k + 1, X) - pair(k + 1, UX)
            rhs = k * pair(k, X) - pair(k, VX)
            scale = max(1.0, abs(lhs), abs(rhs), sol.terms[k + 1].max_abs(), sol.terms[k].max_abs())
            worst = max(worst, abs(lhs - rhs) / scale)
        out.append(worst)
    return out


def representability_residual(pt, sol, rng=None, batch=8, degree=4):
    """max |eta(Z^k, X) - <r^k, X>| over a random batch."""
    rng = rng if rng is not None else np.random.default_rng(1)
    worst = 0.0
    for _ in range(batch):
        X = random_triple(rng, pt.N, degree)
        for Z, r in zip(sol.representatives, sol.terms):
            worst = max(worst, abs(metric(pt, Z, X) - r(X)))
    return worst


def left_inverse_residual(pt, p, rng=None, batch=8, degree=4):
    """max |A_p (u_p - U) X - X| and |A_p e| over a random batch."""
    rng = rng if rng is not None else np.random.default_rng(2)
    up = complex(canonical_value(pt, p))
    worst = 0.0
    for _ in range(batch):
        X = random_triple(rng, pt.N, degree)
        Y = X * up - apply_U(pt, X)
        worst = max(worst, (left_inverse_Ap(pt, p, Y) - X).max_abs())
    unit = left_inverse_Ap(pt, p, TangentTriple.unit(pt.N)).max_abs()
    return worst, unit
