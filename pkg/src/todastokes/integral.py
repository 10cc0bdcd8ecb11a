"""Contour-integral solutions y_sigma, dy_sigma and their large-zeta expansions.

    y_sigma(zeta)        = zeta^{-1/2} (1/2 pi i) \\oint e^{zeta lambda_sigma(z)} dz/z
    <dy_sigma(zeta), X>  = zeta^{1/2}  (1/2 pi i) \\oint e^{zeta lambda_sigma(z)} <d lambda_sigma(z), X> dz/z

The contour integrals are trapezoid sums on a circle (spectrally accurate for
these entire-in-annulus integrands) with doubling until converged. The
expansion at zeta = oo is computed twice: by the saddle-point lemma applied
to exact local Taylor data, and by residue integrals on a small circle
around the critical point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .canonical import canonical_value, dlambda_sigma, sigma_at
from .errors import AntiStokesDirection, BranchAmbiguity, DegenerateSaddle, QuadratureNotConverged
from .laurent import LaurentSeries, unit_nodes
from .manifold import TangentTriple
from .specfun import CoverComplex, bessel_I

QUAD_TOL = 1e-10
MAX_NODES = 1 << 16


# ---------------------------------------------------------------------------
# quadrature


def _series_on_circle(f, nodes, radius):
    if radius == 1.0 and nodes.size >= 2 * f.N + 1:
        return f.values(nodes.size)
    return f(radius * nodes)


def _initial_nodes(pt, lam_s, zeta, radius):
    """Enough nodes for the Fourier tail of e^{zeta lambda_sigma} to drop below rounding."""
    spread = abs(complex(zeta)) * float(np.sum(np.abs(lam_s.coeffs) * radius ** lam_s.degrees().astype(float)))
    M = max(pt.M, 64)
    while M < 2.5 * spread + 4 * lam_s.N + 64:
        M *= 2
    return M


def circle_mean(sample, M0, tol=QUAD_TOL):
    """Trapezoid mean of sample(nodes) over the circle, doubling until stable.

    Returns (value, M, scale) where scale is the mean modulus of the integrand.
    """
    M = M0
    prev = None
    while M <= MAX_NODES:
        vals = sample(unit_nodes(M))
        val = complex(np.mean(vals))
        scale = float(np.mean(np.abs(vals))) + 1e-300
        if prev is not None and abs(val - prev) <= tol * max(abs(val), scale * 1e-6):
            return val, M, scale
        prev = val
        M *= 2
    raise QuadratureNotConverged(f"no convergence up to {MAX_NODES} nodes")


@dataclass
class IntegralSolutionEval:
    sigma: complex
    zeta: CoverComplex
    value: complex
    nodes: int
    scale: float


def _sigma_series(pt, s):
    return pt.lambda_sigma(s)


def y_sigma(pt, s, zeta, radius=1.0, tol=QUAD_TOL):
    zeta = CoverComplex.lift(zeta)
    lam_s = _sigma_series(pt, s)
    zc = zeta.value
    M0 = _initial_nodes(pt, lam_s, zc, radius)
    val, M, scale = circle_mean(lambda nd: np.exp(zc * _series_on_circle(lam_s, nd, radius)), M0, tol)
    return val * zeta.power(-0.5)


def dy_sigma_eval(pt, s, zeta, X, radius=1.0, tol=QUAD_TOL):
    zeta = CoverComplex.lift(zeta)
    lam_s = _sigma_series(pt, s)
    dl = dlambda_sigma(pt, s, X)
    zc = zeta.value
    M0 = _initial_nodes(pt, lam_s, zc, radius)

    def sample(nd):
        return np.exp(zc * _series_on_circle(lam_s, nd, radius)) * _series_on_circle(dl, nd, radius)

    val, M, scale = circle_mean(sample, M0, tol)
    half = zeta.power(0.5)
    return IntegralSolutionEval(complex(s), zeta, val * half, M, scale * abs(half))


def dy_sigma(pt, s, zeta, X, radius=1.0, tol=QUAD_TOL):
    """<dy_sigma(zeta), X> by contour quadrature."""
    return dy_sigma_eval(pt, s, zeta, X, radius, tol).value


def dy_functional(pt, s):
    """zeta -> (X -> <dy_sigma(zeta), X>), the form expected by dubrovin_residual."""
    return lambda zeta: (lambda X: dy_sigma(pt, s, zeta, X))


def dy_representative(pt, s, zeta):
    """Triple Z with eta(Z, X) = <dy_sigma(zeta), X> for all test X."""
    zeta = CoverComplex.lift(zeta)
    zc = zeta.value
    half = zeta.power(0.5)
    lam_s = _sigma_series(pt, s)
    M = max(pt.M, _initial_nodes(pt, lam_s, zc, 1.0))
    nodes = unit_nodes(M)
    E_vals = np.exp(zc * lam_s.values(M))
    E = LaurentSeries.from_values(E_vals, pt.N)
    q_vals = pt.q.values(M)
    first = half * (s * q_vals * E_vals - q_vals * E.geq(0).values(M))
    W = LaurentSeries.from_values(first, pt.N)
    Xv = half * complex(np.mean(E_vals * pt.e_u / nodes))
    Xu = half * complex(np.mean(E_vals))
    return TangentTriple(W, Xv, Xu)


# ---------------------------------------------------------------------------
# closed forms at the special point


def bessel_closed_forms(pt, p, zeta, mhats):
    """<dy_sigma(p), e_mhat> at the special point, from I_m(2 zeta e^u / p)."""
    zeta = CoverComplex.lift(zeta)
    zc = zeta.value
    e_u, v = pt.e_u, pt.v
    x = 2 * zc * e_u / p
    pref = zeta.power(0.5) * np.exp(zc * v)
    out = {}
    for m in mhats:
        if m == "v":
            out[m] = pref * bessel_I(0, x)
        elif m == "u":
            out[m] = e_u / p * pref * bessel_I(1, x)
        elif m >= 1:
            out[m] = (e_u / p ** 2 + 1) * pref * p ** m * bessel_I(m, x)
        else:
            out[m] = e_u / p ** 2 * pref * p ** m * bessel_I(abs(m), x)
    return out


def incompleteness_witness(pt, zeta):
    """The zeta-dependent vector ((1 - e^{-zeta e^u/z}) z, 0, -1)."""
    zc = complex(zeta)
    N = pt.N
    terms = {}
    term = 1.0 + 0j
    # -z sum_{k>=1} (-zeta e^u)^k z^-k / k!
    for k in range(1, N + 3):
        term = term * (-zc * pt.e_u) / k
        terms[1 - k] = -term
    W = LaurentSeries.from_dict(terms, N)
    return TangentTriple(W, 0j, -1.0 + 0j)


# ---------------------------------------------------------------------------
# local series algebra


def taylor_at(f, z0, order, radius=None):
    """Taylor coefficients f_0..f_order at z0.

    Exact binomial expansion for a LaurentSeries; otherwise FFT of samples on
    a circle of the given radius around z0.
    """
    z0 = complex(z0)
    out = np.zeros(order + 1, dtype=complex)
    if isinstance(f, LaurentSeries):
        for k, c in zip(f.degrees(), f.coeffs):
            if c == 0:
                continue
            k = int(k)
            # (z0 + t)^k = sum_j binom(k, j) z0^{k-j} t^j
            b = 1.0
            for j in range(order + 1):
                if k >= 0 and j > k:
                    break
                out[j] += c * b * z0 ** (k - j)
                b = b * (k - j) / (j + 1)
        return out
    radius = radius if radius is not None else 0.25 * max(abs(z0), 1e-3)
    M = max(64, 4 * order + 8)
    nodes = unit_nodes(M)
    vals = np.asarray(f(z0 + radius * nodes), dtype=complex)
    a = np.fft.fft(vals) / M
    return a[: order + 1] / radius ** np.arange(order + 1)


def series_mul(a, b):
    n = min(a.size, b.size)
    return np.convolve(a[:n], b[:n])[:n]


def series_power(a, alpha):
    """(a_0 + a_1 t + ...)^alpha with a_0 != 0 (principal power of a_0)."""
    n = a.size
    out = np.zeros(n, dtype=complex)
    out[0] = complex(a[0]) ** alpha
    for k in range(1, n):
        s = 0j
        for j in range(1, k + 1):
            s += ((alpha + 1) * j - k) * a[j] * out[k - j]
        out[k] = s / (k * a[0])
    return out


def saddle_branch(c, zeta_arg, tangent):
    """c^{1/2} fixed by the path tangent: i sqrt(-zeta c tau^2) / (zeta^{1/2} tau)."""
    zh = complex(math.cos(zeta_arg / 2), math.sin(zeta_arg / 2))
    zeta_dir = zh * zh
    w = -zeta_dir * c * tangent ** 2
    if abs(w.imag) < 1e-12 * abs(w) and w.real < 0:
        raise BranchAmbiguity("zeta lies on a direction where the path is not of steepest descent")
    return 1j * np.sqrt(w) / (zh * tangent)


def saddle_coeffs(f, g, zp, n_max, zeta_arg=0.0, tangent=None, floor=1e-10):
    """Coefficients d_0..d_nmax of zeta^{1/2} int e^{zeta f} g dz ~ e^{zeta f(zp)} sum d_n zeta^-n.

    d_n = i (-1)^n Gamma(n+1/2) c^{-n-1/2} [t^{2n}] g(zp+t) (1+h(t))^{-n-1/2}
    where f(zp+t) - f(zp) = c t^2 (1 + h(t)).
    """
    zp = complex(zp)
    tangent = complex(tangent) if tangent is not None else 1j * zp / abs(zp) if zp != 0 else 1j
    order = 2 * n_max + 2
    F = taylor_at(f, zp, order + 1)
    G = taylor_at(g, zp, order)
    if abs(F[1]) > 1e-8 * max(1.0, np.max(np.abs(F))):
        raise DegenerateSaddle(f"f'({zp}) = {F[1]} is not zero")
    c = F[2]
    if abs(c) < floor:
        raise DegenerateSaddle(f"f''({zp}) vanishes")
    one_h = F[2:] / c
    ch = saddle_branch(c, zeta_arg, tangent)
    out = []
    for n in range(n_max + 1):
        P = series_power(one_h[: 2 * n + 1], -n - 0.5)
        coef = series_mul(G[: 2 * n + 1], P)[2 * n]
        out.append(1j * (-1) ** n * math.gamma(n + 0.5) * ch ** (-2 * n - 1) * coef)
    return out


# ---------------------------------------------------------------------------
# asymptotic coefficients as residues


@dataclass
class SaddleData:
    family: str
    z: complex
    value: complex
    sigma: complex
    tangent: complex


def saddle_for(pt, family, p=None, crit_point=None):
    """Critical point data for family 'p' (sigma(p), z = p), 'outer' (sigma = 0) or 'inner' (sigma = 1)."""
    if family == "p":
        p = complex(p)
        return SaddleData("p", p, complex(canonical_value(pt, p)), complex(sigma_at(pt, p)), 1j * p)
    if family == "outer":
        return SaddleData("outer", crit_point.z, crit_point.value, 0j, 1j * crit_point.z / abs(crit_point.z))
    if family == "inner":
        return SaddleData("inner", crit_point.z, crit_point.value, 1.0 + 0j, 1j * crit_point.z / abs(crit_point.z))
    raise ValueError(f"unknown family {family!r}")


def saddle_coeffs_for(pt, sd, X, k_max, zeta_arg=0.0):
    """Saddle-lemma route for the expansion of <dy_sigma, X> around one critical point."""
    lam_s = pt.lambda_sigma(sd.sigma)
    dl = dlambda_sigma(pt, sd.sigma, X)
    # g = dl / (2 pi i z) as an exact Laurent series, so its Taylor data is exact too
    g = dl.resize(dl.N + 1).shift(-1) * (1 / (2j * math.pi))
    return saddle_coeffs(lam_s, g, sd.z, k_max, zeta_arg, sd.tangent)


def asymptotic_coeffs_residue(pt, sd, k_max, X, zeta_arg=0.0, radius=None, nodes=1024):
    """(1/(2 Gamma(1/2-k))) (1/2 pi i) \\oint <d lambda_sigma, X> / (lambda_sigma - u)^{k+1/2} dz/z.

    The fractional power is c^{k+1/2} t^{2k+1} (1+h)^{k+1/2} with the principal
    power of 1+h, valid while |h| < 1 on the small circle.
    """
    lam_s = pt.lambda_sigma(sd.sigma)
    dl = dlambda_sigma(pt, sd.sigma, X)
    F = taylor_at(lam_s, sd.z, 3)
    c = F[2]
    if abs(c) < 1e-10:
        raise DegenerateSaddle(f"second derivative vanishes at {sd.z}")
    ch = saddle_branch(c, zeta_arg, sd.tangent)
    radius = radius if radius is not None else 0.4 * abs(sd.z)
    t = radius * unit_nodes(nodes)
    z = sd.z + t
    f0 = complex(lam_s(sd.z))
    one_h = (lam_s(z) - f0) / (c * t * t)
    if np.max(np.abs(one_h - 1)) >= 0.9:
        raise BranchAmbiguity("local inversion does not converge on the residue circle")
    G = dl(z) / z
    out = []
    for k in range(k_max + 1):
        denom = ch ** (2 * k + 1) * t ** (2 * k + 1) * one_h ** (k + 0.5)
        contour = complex(np.mean(G / denom * t))
        out.append(contour / (2 * math.gamma(0.5 - k)))
    return out


# ---------------------------------------------------------------------------
# sectors and the slope test


def dominant_index(values, zeta, margin=1e-8):
    """Index of the exponential e^{zeta u} that dominates at zeta."""
    zc = complex(zeta)
    re = np.array([(zc * complex(u)).real for u in values])
    order = np.argsort(re)[::-1]
    if len(values) > 1 and re[order[0]] - re[order[1]] <= margin * max(1.0, abs(zc)):
        raise AntiStokesDirection(f"zeta = {zc} lies on an anti-Stokes line")
    return int(order[0])


def asymptotic_errors(pt, p, X, coeffs, zetas):
    """|e^{-zeta u_p} <dy_sigma(zeta), X> - sum_k coeffs[k] zeta^-k| along the given zetas."""
    sd = saddle_for(pt, "p", p)
    out = []
    for zeta in zetas:
        zeta = CoverComplex.lift(zeta)
        zc = zeta.value
        val = dy_sigma(pt, sd.sigma, zeta, X, tol=1e-14) * np.exp(-zc * sd.value)
        part = sum(c * zc ** (-k) for k, c in enumerate(coeffs))
        out.append(abs(val - part))
    return np.array(out)


def slope_test(pt, p, X, K, radii=None, n_max=None):
    """Log-log slope of the truncation error over |zeta| in [20, 80] on the ray where zeta e^u/p > 0."""
    radii = np.geomspace(20.0, 80.0, 9) if radii is None else np.asarray(radii)
    sd = saddle_for(pt, "p", p)
    arg = float(np.angle(p / pt.e_u))
    coeffs = saddle_coeffs_for(pt, sd, X, K, arg)
    zetas = [CoverComplex(r, arg) for r in radii]
    err = asymptotic_errors(pt, p, X, coeffs, zetas)
    slope = float(np.polyfit(np.log(radii), np.log(err), 1)[0])
    return slope, radii, err
