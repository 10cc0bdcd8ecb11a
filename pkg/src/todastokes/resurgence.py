"""Borel resummation at the special point, the functionals ds_p and Stokes data.

The formal integral solution at p has coefficients built from the Gevrey-1
series phi^m_p(zeta) = sum_k binom(m+k-1/2, 2k) (p/(zeta e^u))^k / Gamma(1/2-k).
Its Borel transform is a Gauss hypergeometric function with a logarithmic
singularity at 4 e^u / p, and the Laplace resummation along a ray is a
K-Bessel function on the universal cover. The resummed functionals are

    <ds_p(zeta), e_m> = (1/(i pi)) f_m(p) e^{zeta v} zeta^{1/2} K_m(x),
    x = e^{i pi} 2 zeta e^u / p  (a point of the cover),

with f_m = (e^u/p^2 + 1) p^m for m >= 1, (e^u/p^2) p^m for m <= 0, and the
e_v, e_u coefficients using K_0 and (e^u/p) K_1. Everything multivalued is
tracked through unwrapped arguments of zeta, p and e^u.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .canonical import WeakFunctional, canonical_value, sigma_at
from .errors import (
    ConditionViolation,
    IllConditioned,
    OutOfSector,
    RankDeficient,
    StokesRay,
)
from .specfun import (
    CoverComplex,
    bessel_I,
    bessel_K,
    digamma,
    euler_gamma,
    gauss_2F1,
    gen_binomial,
)

SQRT_PI = math.sqrt(math.pi)
DEFAULT_M_MAX = 12


def _unit(arg):
    return complex(math.cos(arg), math.sin(arg))


def _enc(c):
    c = complex(c)
    return [c.real, c.imag]


# ---------------------------------------------------------------------------
# Gevrey series and Borel transform


@dataclass
class GevreySeries:
    """Coefficients a_0..a_K of sum a_k zeta^-k with a Gevrey-1 growth constant."""

    coeffs: np.ndarray
    growth_certificate: float = field(default=0.0)

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if not self.growth_certificate:
            self.growth_certificate = gevrey_constant(self.coeffs)

    @property
    def K(self):
        return self.coeffs.size - 1

    def __call__(self, zeta, K=None):
        K = self.K if K is None else K
        z = complex(zeta)
        return complex(sum(self.coeffs[k] * z ** (-k) for k in range(K + 1)))


def gevrey_constant(coeffs):
    """Smallest C with |a_k| <= C^k k! for 1 <= k <= K."""
    c = 0.0
    for k in range(1, len(coeffs)):
        b = abs(coeffs[k]) / math.factorial(k)
        if b > 0:
            c = max(c, b ** (1.0 / k))
    return c


def phi_coefficient(p, m, k, e_u):
    return gen_binomial(m + k - 0.5, 2 * k) * (p / e_u) ** k / math.gamma(0.5 - k)


def phi_series(p, m, K, e_u):
    """phi^m_p truncated at order K (K <= 170 so that k! stays finite)."""
    p = complex(p)
    return GevreySeries(np.array([phi_coefficient(p, m, k, e_u) for k in range(K + 1)]))


def borel(series):
    """b_k = a_k / k!."""
    return np.array([a / math.factorial(k) for k, a in enumerate(series.coeffs)])


def borel_coefficients_direct(p, m, K, e_u):
    """b_k = binom(-1/2, k) binom(m+k-1/2, 2k) (p/e^u)^k / sqrt(pi), usable for large k."""
    out = []
    for k in range(K + 1):
        out.append(gen_binomial(-0.5, k) * gen_binomial(m + k - 0.5, 2 * k) * (p / e_u) ** k / SQRT_PI)
    return np.array(out, dtype=complex)


def hypergeometric_taylor(a, b, c, K, scale=1.0):
    """Taylor coefficients of 2F1(a, b; c; scale * chi) in chi."""
    out = [1.0 + 0j]
    for k in range(K):
        out.append(out[-1] * (a + k) * (b + k) / ((c + k) * (k + 1)) * scale)
    return np.array(out)


def borel_closed_form(p, m, chi, e_u):
    """(1/sqrt(pi)) 2F1(1/2-m, 1/2+m; 1; p chi / (4 e^u))."""
    z = complex(p) * complex(chi) / (4 * complex(e_u))
    return gauss_2F1(0.5 - m, 0.5 + m, 1.0, z) / SQRT_PI


def root_test_radius(b, k_min=None):
    """Radius of convergence from a fit log|b_k| = A + alpha log k - k log R."""
    b = np.asarray(b)
    K = b.size - 1
    k_min = k_min if k_min is not None else max(2, K // 3)
    k = np.arange(k_min, K + 1)
    mag = np.abs(b[k_min:])
    keep = mag > 0
    k, mag = k[keep], mag[keep]
    A = np.column_stack([np.ones_like(k, dtype=float), np.log(k), -k.astype(float)])
    coef, *_ = np.linalg.lstsq(A, np.log(mag), rcond=None)
    return float(math.exp(coef[2]))


# ---------------------------------------------------------------------------
# Laplace resummation along a ray and the closed form


def stokes_direction(arg_e_u, arg_p):
    return arg_e_u - arg_p


def in_half_plane(zeta_arg, theta):
    """zeta in Pi_theta: -theta - pi/2 < arg zeta < -theta + pi/2 (mod 2 pi)."""
    d = (zeta_arg + theta + math.pi) % (2 * math.pi) - math.pi
    return abs(d) < math.pi / 2


def laplace_ray(p_arg, m, theta, zeta, e_u, arg_e_u=None, tol=1e-6):
    """zeta int_{e^{i theta} R+} phi-hat(chi) e^{-zeta chi} d chi by quadrature."""
    zeta = CoverComplex.lift(zeta)
    e_u = complex(e_u)
    arg_e_u = float(np.angle(e_u)) if arg_e_u is None else arg_e_u
    st = stokes_direction(arg_e_u, p_arg)
    d = (theta - st + math.pi) % (2 * math.pi) - math.pi
    if abs(d) < tol:
        raise StokesRay(f"theta = {theta} is a Stokes direction")
    if not in_half_plane(zeta.arg, theta):
        raise OutOfSector(f"zeta with arg {zeta.arg} is not in the half-plane of theta = {theta}")
    direction = mpmath.expj(theta)
    p = mpmath.expj(p_arg)
    zc = mpmath.mpc(zeta.value)
    w = direction * p / (4 * mpmath.mpc(e_u))
    a, b = 0.5 - m, 0.5 + m

    def integrand(t):
        return mpmath.hyp2f1(a, b, 1, w * t) * mpmath.exp(-zc * direction * t)

    sing = abs(4 * e_u)
    decay = 1.0 / max(float(mpmath.re(zc * direction)), 1e-12)
    pts = sorted({0.0, sing, sing + 4 * decay, sing + 40 * decay})
    val = mpmath.quad(integrand, pts + [mpmath.inf])
    return complex(zc * direction * val / mpmath.sqrt(mpmath.pi))


def _x_point(zeta, p_arg, e_u, arg_e_u):
    """x = e^{i pi} 2 zeta e^u / p on the cover."""
    zeta = CoverComplex.lift(zeta)
    return CoverComplex(2 * zeta.modulus * abs(e_u), zeta.arg + arg_e_u - p_arg + math.pi)


def resummed_closed_form(p_arg, m, zeta, e_u, arg_e_u=None):
    """(2/(i pi)) sqrt(e^u/p) e^{-2 zeta e^u/p} zeta^{1/2} K_m(-2 zeta e^u/p) on the cover.

    Equal to (1/pi) sqrt(2x) e^x K_m(x) with x as in the module docstring.
    """
    e_u = complex(e_u)
    arg_e_u = float(np.angle(e_u)) if arg_e_u is None else arg_e_u
    x = _x_point(zeta, p_arg, e_u, arg_e_u)
    return complex(x.scale(2.0).power(0.5) * np.exp(x.value) * bessel_K(m, x) / math.pi)


def ray_lift(zeta, theta, p_arg, arg_e_u):
    """The point of the cover at which the closed form equals the ray resummation at theta.

    The ray at theta represents the branch with theta taken in
    (theta_St, theta_St + 2 pi) and arg zeta in (-theta - pi/2, -theta + pi/2).
    """
    zeta = CoverComplex.lift(zeta)
    st = stokes_direction(arg_e_u, p_arg)
    th = st + (theta - st) % (2 * math.pi)
    centre = -th
    k = round((centre - zeta.arg) / (2 * math.pi))
    return zeta.turn(k)


def lateral_jump(p_arg, m, zeta, e_u, eps=1e-3, arg_e_u=None):
    """(ray at theta_St + eps) - (ray at theta_St - eps) and 2i(-1)^{m+1} e^{-4 zeta e^u/p} s_{theta_St}(phi_{-p})."""
    zeta = CoverComplex.lift(zeta)
    e_u = complex(e_u)
    arg_e_u = float(np.angle(e_u)) if arg_e_u is None else arg_e_u
    st = stokes_direction(arg_e_u, p_arg)
    zc = zeta.value
    lhs = laplace_ray(p_arg, m, st + eps, zc, e_u, arg_e_u) - laplace_ray(p_arg, m, st - eps, zc, e_u, arg_e_u)
    p = _unit(p_arg)
    other = laplace_ray(p_arg - math.pi, m, st, zc, e_u, arg_e_u)
    rhs = 2j * (-1) ** (m + 1) * np.exp(-4 * zc * e_u / p) * other
    return lhs, rhs


# ---------------------------------------------------------------------------
# the resummed functionals


@dataclass
class ResummedFunctional:
    """ds_p(zeta) on the window |m| <= m_max plus e_v, e_u."""

    p_arg: float
    zeta: CoverComplex
    coeffs: WeakFunctional
    growth_flag: bool = False

    @property
    def p(self):
        return _unit(self.p_arg)

    def __call__(self, X):
        return self.coeffs(X)

    def coef(self, mhat):
        return self.coeffs.coef(mhat)

    def to_json(self):
        return {
            "p_arg": self.p_arg,
            "zeta": [self.zeta.modulus, self.zeta.arg],
            "coeffs": self.coeffs.to_json(),
            "growth_flag": self.growth_flag,
        }


def _require_special(pt):
    if abs(pt.e_u) >= 1:
        raise ConditionViolation("the resummed functionals are defined for |e^u| < 1")


def ds_coefficient(pt, p_arg, zeta, mhat):
    zeta = CoverComplex.lift(zeta)
    e_u = pt.e_u
    p = _unit(p_arg)
    x = _x_point(zeta, p_arg, e_u, pt.u.imag)
    pref = np.exp(zeta.value * pt.v) * zeta.power(0.5) / (1j * math.pi)
    if mhat == "v":
        return complex(pref * bessel_K(0, x))
    if mhat == "u":
        return complex(pref * e_u / p * bessel_K(1, x))
    m = int(mhat)
    f = (e_u / p ** 2 + 1) if m >= 1 else e_u / p ** 2
    return complex(pref * f * p ** m * bessel_K(abs(m), x))


def ds_p(pt, p_arg, zeta, m_max=DEFAULT_M_MAX):
    """The resummed weak functional ds_p(zeta); p is given by its unwrapped argument."""
    _require_special(pt)
    zeta = CoverComplex.lift(zeta)
    c = np.array([ds_coefficient(pt, p_arg, zeta, m) for m in range(-m_max, m_max + 1)])
    wf = WeakFunctional(c, ds_coefficient(pt, p_arg, zeta, "v"), ds_coefficient(pt, p_arg, zeta, "u"))
    mags = np.abs(c)
    growth = bool(mags[-1] > mags[m_max] and mags[0] > mags[m_max])
    return ResummedFunctional(float(p_arg), zeta, wf, growth)


def ds_functional(pt, p_arg, m_max=DEFAULT_M_MAX):
    """zeta -> ds_p(zeta), the form expected by dubrovin_residual."""
    return lambda zeta: ds_p(pt, p_arg, zeta, m_max)


def _max_rel(a, b):
    a, b = a.coeffs.vector(), b.coeffs.vector() if hasattr(b, "coeffs") else b
    scale = np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))
    return float(np.max(np.abs(a - b) / scale))


def monodromy_residuals(pt, p_arg, zeta, m_max=DEFAULT_M_MAX):
    """Residuals of ds_p(zeta e^{2 pi i}) = ds_p - 2 ds_{-p} and ds_{-p}(zeta e^{-2 pi i}) = ds_{-p} - 2 ds_p."""
    zeta = CoverComplex.lift(zeta)
    a = ds_p(pt, p_arg, zeta, m_max).coeffs.vector()
    b = ds_p(pt, p_arg - math.pi, zeta, m_max).coeffs.vector()
    a2 = ds_p(pt, p_arg, zeta.turn(1), m_max).coeffs.vector()
    b2 = ds_p(pt, p_arg - math.pi, zeta.turn(-1), m_max).coeffs.vector()

    def rel(x, y):
        return float(np.max(np.abs(x - y) / np.maximum(1.0, np.abs(y))))

    return rel(a2, a - 2 * b), rel(b2, b - 2 * a)


def dy_difference_residual(pt, p_arg, zeta, m_range=8):
    """max over |m| <= m_range, v, u of |<dy_sigma(p), e> - <ds_p - ds_{-p}, e>| (relative)."""
    from .integral import bessel_closed_forms

    zeta = CoverComplex.lift(zeta)
    p = _unit(p_arg)
    mh = list(range(-m_range, m_range + 1)) + ["v", "u"]
    dy = bessel_closed_forms(pt, p, zeta, mh)
    worst = 0.0
    for m in mh:
        diff = ds_coefficient(pt, p_arg, zeta, m) - ds_coefficient(pt, p_arg - math.pi, zeta, m)
        worst = max(worst, abs(diff - dy[m]) / max(1.0, abs(dy[m])))
    return worst


# ---------------------------------------------------------------------------
# completeness


@dataclass
class RankReport:
    rows: int
    cols: int
    rank: int
    singular_values: list
    full_rank: bool

    def to_json(self):
        return {
            "rows": self.rows,
            "cols": self.cols,
            "rank": self.rank,
            "singular_values": [float(s) for s in self.singular_values],
            "full_rank": self.full_rank,
        }


def _mhats(m_max):
    return list(range(-m_max, m_max + 1)) + ["v", "u"]


def completeness_matrix(pt, zeta, P, m_max, phi0=0.0):
    args = phi0 + 2 * math.pi * np.arange(P) / P
    return np.array([[ds_coefficient(pt, a, zeta, m) for m in _mhats(m_max)] for a in args])


def completeness_probe(pt, zeta, P=16, m_max=3, phi0=0.0, rel=1e-10):
    """Numerical rank of [<ds_{p_j}(zeta), e_mhat>] over a p-grid of one period."""
    _require_special(pt)
    A = completeness_matrix(pt, zeta, P, m_max, phi0)
    s = np.linalg.svd(A, compute_uv=False)
    rank = int(np.sum(s > rel * s[0]))
    cols = 2 * m_max + 3
    rep = RankReport(P, cols, rank, list(s), rank == cols)
    if rank < cols:
        raise RankDeficient(f"rank {rank} < {cols} with P = {P}")
    return rep


def _k_expansion(n, c, j, kmax=40):
    """p^j K_n(x) with x/2 = c/p, as (A, B) coefficient dicts in p: A + log(x/2) B."""
    A, B = {}, {}

    def add(d, power, val):
        d[power] = d.get(power, 0j) + val

    for k in range(n):
        add(A, j - (2 * k - n), 0.5 * math.factorial(n - k - 1) / math.factorial(k) * (-1) ** k * c ** (2 * k - n))
    sign_log = (-1) ** (n + 1)
    sign_reg = 0.5 * (-1) ** n
    gam = euler_gamma()
    for k in range(kmax):
        e = n + 2 * k
        term = c ** e / (math.factorial(k) * math.factorial(n + k))
        add(B, j - e, sign_log * term)
        psi = (-gam + sum(1.0 / i for i in range(1, k + 1))) + (-gam + sum(1.0 / i for i in range(1, n + k + 1)))
        add(A, j - e, sign_reg * psi * term)
    return A, B


def column_expansion(pt, c, mhat):
    """Analytic (A, B) expansions in p of i pi e^{-zeta v} zeta^{-1/2} <ds_p, e_mhat>."""
    e_u = pt.e_u
    if mhat == "v":
        return _k_expansion(0, c, 0)
    if mhat == "u":
        A, B = _k_expansion(1, c, -1)
        return {k: e_u * v for k, v in A.items()}, {k: e_u * v for k, v in B.items()}
    m = int(mhat)
    if m >= 1:
        A1, B1 = _k_expansion(m, c, m)
        A2, B2 = _k_expansion(m, c, m - 2)
        A = {k: A1.get(k, 0) + e_u * A2.get(k, 0) for k in set(A1) | set(A2)}
        B = {k: B1.get(k, 0) + e_u * B2.get(k, 0) for k in set(B1) | set(B2)}
        return A, B
    A, B = _k_expansion(-m, c, m - 2)
    return {k: e_u * v for k, v in A.items()}, {k: e_u * v for k, v in B.items()}


def sampled_log_parts(pt, zeta, values_fn, P=64, phi0=0.0):
    """Split G(p) = A(p) + log(x/2) B(p) from samples on two consecutive sheets of arg p.

    Returns Laurent coefficient dicts of A and B in p (powers |n| < P/2).
    """
    zeta = CoverComplex.lift(zeta)
    args = phi0 + 2 * math.pi * np.arange(P) / P
    G = np.array([values_fn(a) for a in args])
    G2 = np.array([values_fn(a + 2 * math.pi) for a in args])
    B = (G - G2) / (2j * math.pi)
    L = np.array([
        complex(math.log(zeta.modulus * abs(pt.e_u)), zeta.arg + pt.u.imag - a + math.pi) for a in args
    ])
    A = G - L * B
    p = np.exp(1j * args)
    powers = range(-(P // 2) + 1, P // 2)
    Ac = {n: complex(np.mean(A * p ** (-n))) for n in powers}
    Bc = {n: complex(np.mean(B * p ** (-n))) for n in powers}
    return Ac, Bc


def triangular_reconstruct(pt, zeta, values_fn, r, s, P=64, phi0=0.0):
    """Recover (X_{-s}..X_r, X_v, X_u) from p -> <ds_p(zeta), X> in the proof's extraction order."""
    zeta = CoverComplex.lift(zeta)
    scale = 1j * math.pi * np.exp(-zeta.value * pt.v) * zeta.power(-0.5)
    Ac, Bc = sampled_log_parts(pt, zeta, lambda a: scale * values_fn(a), P, phi0)
    c = -zeta.value * pt.e_u
    e_u = pt.e_u
    sol = {}

    def subtract(mhat, val):
        A, B = column_expansion(pt, c, mhat)
        for k, v in A.items():
            if k in Ac:
                Ac[k] -= val * v
        for k, v in B.items():
            if k in Bc:
                Bc[k] -= val * v

    for k in range(r, 0, -1):
        pivot = 0.5 * c ** (-k) * math.factorial(k - 1)
        sol[k] = Ac[2 * k] / pivot
        subtract(k, sol[k])
    sol["v"] = Bc[0] / -1.0
    subtract("v", sol["v"])
    sol["u"] = Ac[0] / (e_u / (2 * c))
    subtract("u", sol["u"])
    for j in range(0, s + 1):
        pivot = e_u * (-1) ** (j + 1) * c ** j / math.factorial(j)
        sol[-j] = Bc[-2 * j - 2] / pivot
        subtract(-j, sol[-j])
    return sol


def reconstruct_triple(pt, zeta, X, r, s, P=64, m_max=None):
    """Reconstruct X from samples of <ds_p(zeta), X>; returns (dict, max error)."""
    m_max = m_max if m_max is not None else max(r, s)

    def values_fn(a):
        return ds_p(pt, a, zeta, m_max)(X)

    sol = triangular_reconstruct(pt, zeta, values_fn, r, s, P)
    err = max(abs(sol["v"] - X.Xv), abs(sol["u"] - X.Xu))
    for k in range(-s, r + 1):
        err = max(err, abs(sol[k] - X.W.coef(k)))
    return sol, float(err)


# ---------------------------------------------------------------------------
# Stokes matrices


S_PLUS_EXPECTED = np.array([[1, -2], [0, 1]], dtype=complex)
S_MINUS_EXPECTED = np.array([[1, 0], [-2, 1]], dtype=complex)


@dataclass
class StokesResult:
    S_plus: np.ndarray
    S_minus: np.ndarray
    max_entry_error: float
    transpose_error: float
    monodromy_error: float
    theta_in_range: bool
    stokes_line_ok: bool
    condition: float

    def to_json(self):
        enc = lambda M: [[_enc(x) for x in row] for row in M]  # noqa: E731
        return {
            "S_plus": enc(self.S_plus),
            "S_minus": enc(self.S_minus),
            "max_entry_error": self.max_entry_error,
            "transpose_error": self.transpose_error,
            "monodromy_error": self.monodromy_error,
            "theta_in_range": self.theta_in_range,
            "stokes_line_ok": self.stokes_line_ok,
            "condition": self.condition,
        }


def theta_zero(pt, p_arg):
    return math.pi + pt.u.imag - p_arg


def theta_admissible(pt, p_arg, theta):
    """theta in (-theta_0 - pi/2, -theta_0 + pi/2) modulo 2 pi."""
    t0 = theta_zero(pt, p_arg)
    d = (theta + t0 + math.pi) % (2 * math.pi) - math.pi
    return abs(d) < math.pi / 2


def _solve_S(R, L, cond_limit=1e10):
    cond = float(np.linalg.cond(R))
    if not np.isfinite(cond) or cond > cond_limit:
        raise IllConditioned(f"Y_right columns are numerically parallel (cond {cond:.3e})")
    S, *_ = np.linalg.lstsq(R, L, rcond=None)
    return S, cond


def _pair_rows(pt, p_arg, zl, zr, zl_minus, m_max):
    mh = _mhats(m_max)
    R = np.array([[ds_coefficient(pt, p_arg, zr, m), ds_coefficient(pt, p_arg - math.pi, zr, m)] for m in mh])
    L = np.array([[ds_coefficient(pt, p_arg, zl, m), ds_coefficient(pt, p_arg - math.pi, zl_minus, m)] for m in mh])
    return R, L


def stokes_pair(pt, p_arg=0.0, theta=None, eps=0.1, zeta_abs=5.0, m_max=4, offsets=None):
    """Stokes matrices S_+ and S_- of the pair (ds_p, ds_{-p}) across the line of argument theta.

    On Pi_+ both sides are evaluated at the same lift (arg theta + delta). On
    Pi_- the left solution uses arg theta + pi + delta and the right one the
    lift theta - pi + delta of the same complex number.
    """
    _require_special(pt)
    theta = -theta_zero(pt, p_arg) if theta is None else theta
    offsets = offsets if offsets is not None else (0.5 * eps, -0.5 * eps)
    Rp, Lp, Rm, Lm = [], [], [], []
    stokes_ok = True
    for d in offsets:
        z_plus = CoverComplex(zeta_abs, theta + d)
        R, L = _pair_rows(pt, p_arg, z_plus, z_plus, z_plus.turn(-1), m_max)
        Rp.append(R)
        Lp.append(L)
        z_left = CoverComplex(zeta_abs, theta + math.pi + d)
        z_right = CoverComplex(zeta_abs, theta - math.pi + d)
        R, L = _pair_rows(pt, p_arg, z_left, z_right, z_left.turn(-1), m_max)
        Rm.append(R)
        Lm.append(L)
        for z in (z_plus, z_left):
            stokes_ok &= _dominance_consistent(pt, p_arg, z)
    S_plus, c1 = _solve_S(np.vstack(Rp), np.vstack(Lp))
    S_minus, c2 = _solve_S(np.vstack(Rm), np.vstack(Lm))
    err = float(max(np.max(np.abs(S_plus - S_PLUS_EXPECTED)), np.max(np.abs(S_minus - S_MINUS_EXPECTED))))
    transpose = float(np.max(np.abs(S_plus.T - S_minus)))
    mono = monodromy_matrix(pt, p_arg, CoverComplex(zeta_abs, theta + offsets[0]), m_max)
    mono_err = float(np.max(np.abs(mono - S_minus @ np.linalg.inv(S_plus))))
    return StokesResult(
        S_plus, S_minus, err, transpose, mono_err, theta_admissible(pt, p_arg, theta), stokes_ok, max(c1, c2)
    )


def monodromy_matrix(pt, p_arg, zeta, m_max=4):
    """Matrix T with (ds_p, ds_{-p})(zeta e^{2 pi i}) = (ds_p, ds_{-p})(zeta) T."""
    zeta = CoverComplex.lift(zeta)
    mh = _mhats(m_max)
    R = np.array([[ds_coefficient(pt, p_arg, zeta, m), ds_coefficient(pt, p_arg - math.pi, zeta, m)] for m in mh])
    z2 = zeta.turn(1)
    L = np.array([[ds_coefficient(pt, p_arg, z2, m), ds_coefficient(pt, p_arg - math.pi, z2, m)] for m in mh])
    T, *_ = np.linalg.lstsq(R, L, rcond=None)
    return T


def _dominance_consistent(pt, p_arg, zeta):
    """Re(zeta u_p) > Re(zeta u_{-p}) exactly when arg zeta is in (-theta_0 + pi/2, -theta_0 + 3 pi/2)."""
    zeta = CoverComplex.lift(zeta)
    p = _unit(p_arg)
    zc = zeta.value
    gap = (zc * (pt.v + 2 * pt.e_u / p)).real - (zc * (pt.v - 2 * pt.e_u / p)).real
    t0 = theta_zero(pt, p_arg)
    d = (zeta.arg + t0 - math.pi + math.pi) % (2 * math.pi) - math.pi
    predicted = abs(d) < math.pi / 2
    return (gap > 0) == predicted or abs(gap) < 1e-12


def stokes_line_ratios(pt, p_arg, zeta_arg, radii):
    """|<ds_p, e_0>| / |<ds_{-p}, e_0>| along a ray."""
    out = []
    for r in radii:
        z = CoverComplex(r, zeta_arg)
        out.append(abs(ds_coefficient(pt, p_arg, z, 0)) / abs(ds_coefficient(pt, p_arg - math.pi, z, 0)))
    return np.array(out)


@dataclass
class FamilyReport:
    p_args: list
    chi: list
    residual_plus: float
    residual_minus: float
    identity_residual: float
    kernel_pairs_plus: list
    kernel_pairs_minus: list

    def to_json(self):
        return {
            "p_args": [float(a) for a in self.p_args],
            "chi": [int(c) for c in self.chi],
            "residual_plus": self.residual_plus,
            "residual_minus": self.residual_minus,
            "identity_residual": self.identity_residual,
            "kernel_pairs_plus": self.kernel_pairs_plus,
            "kernel_pairs_minus": self.kernel_pairs_minus,
        }


def stokes_family(pt, theta=0.0, P=32, zeta_abs=5.0, eps=0.1, m_max=4):
    """Left and right families on a p-grid and the kernels relating them on Pi_+ and Pi_-."""
    _require_special(pt)
    if P % 2:
        raise ValueError("the p-grid needs an even number of points")
    ae = pt.u.imag
    args = [ae + theta - math.pi / 2 + 2 * math.pi * (j + 0.5) / P for j in range(P)]
    half = P // 2
    chi = [1 if j >= half else 0 for j in range(P)]
    delta = 0.5 * eps
    mh = _mhats(m_max)

    def vec(a, z):
        return np.array([ds_coefficient(pt, a, z, m) for m in mh])

    def rel(x, y):
        return float(np.max(np.abs(x - y) / np.maximum(1.0, np.abs(y))))

    z_plus = CoverComplex(zeta_abs, theta + delta)
    z_left = CoverComplex(zeta_abs, theta + math.pi + delta)
    z_right = CoverComplex(zeta_abs, theta - math.pi + delta)
    right_plus = [vec(a, z_plus) for a in args]
    right_minus = [vec(a, z_right) for a in args]
    res_p = res_m = ident = 0.0
    pairs_p, pairs_m = [], []
    for j, a in enumerate(args):
        left_p = vec(a, z_plus) if chi[j] else vec(a, z_plus.turn(-1))
        left_m = vec(a, z_left) if chi[j] else vec(a, z_left.turn(-1))
        pred_p = right_plus[j] - (0 if chi[j] else 2 * right_plus[j + half])
        pred_m = right_minus[j] - (2 * right_minus[j - half] if chi[j] else 0)
        res_p = max(res_p, rel(left_p, pred_p))
        res_m = max(res_m, rel(left_m, pred_m))
        if chi[j]:
            ident = max(ident, rel(left_p, right_plus[j]))
        else:
            ident = max(ident, rel(left_m, right_minus[j]))
        pairs_p.append([j, j, 1])
        pairs_m.append([j, j, 1])
        if not chi[j]:
            pairs_p.append([j, j + half, -2])
        else:
            pairs_m.append([j, j - half, -2])
    return FamilyReport(args, chi, res_p, res_m, ident, pairs_p, pairs_m)


def kernel_transpose_ok(report):
    """(S_+)_{pq} = (S_-)_{qp} on the recorded index pairs."""
    plus = {(a, b): w for a, b, w in report.kernel_pairs_plus}
    minus = {(a, b): w for a, b, w in report.kernel_pairs_minus}
    return plus == {(b, a): w for (a, b), w in minus.items()}


# ---------------------------------------------------------------------------
# asymptotics of the resummation


def resummation_slope(p_arg, m, K, e_u, zeta_arg=None, radii=None, arg_e_u=None):
    """Slope of log|s(phi) - partial sum| against log|zeta| over |zeta| in [20, 80]."""
    e_u = complex(e_u)
    arg_e_u = float(np.angle(e_u)) if arg_e_u is None else arg_e_u
    radii = np.geomspace(20.0, 80.0, 9) if radii is None else np.asarray(radii)
    if zeta_arg is None:
        zeta_arg = p_arg - arg_e_u - math.pi
    series = phi_series(_unit(p_arg), m, K, e_u)
    err = []
    for r in radii:
        z = CoverComplex(r, zeta_arg)
        err.append(abs(resummed_closed_form(p_arg, m, z, e_u, arg_e_u) - series(z.value)))
    err = np.array(err)
    return float(np.polyfit(np.log(radii), np.log(err), 1)[0]), radii, err
