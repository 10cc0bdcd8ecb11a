"""Modified Bessel functions on the universal cover of C*, 2F1 and digamma.

Points of the cover are :class:`CoverComplex` values that carry an unwrapped
argument. K_n is evaluated from its logarithmic expansion at the origin with
the unwrapped logarithm for small |z|, and for larger |z| on the half plane
|arg z| <= pi/2 from the exact Laplace-type integral whose termwise
expansion is the large-z asymptotic series (or from that series itself when
|z| is so large that optimal truncation is below rounding). Other sheets are
reached with the monodromy relation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.special import roots_genlaguerre, loggamma

from .errors import OverlapMismatch, ParameterOutOfScope

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# the universal cover


@dataclass(frozen=True)
class CoverComplex:
    """A nonzero complex number with an unwrapped argument."""

    modulus: float
    arg: float

    def __post_init__(self):
        if not self.modulus > 0:
            raise ValueError("modulus must be positive")
        object.__setattr__(self, "modulus", float(self.modulus))
        object.__setattr__(self, "arg", float(self.arg))

    @classmethod
    def polar(cls, r, theta):
        return cls(r, theta)

    @classmethod
    def from_complex(cls, z, near=None):
        """Lift z; the argument is principal, or the lift closest to ``near``."""
        z = complex(z)
        a = math.atan2(z.imag, z.real)
        if near is not None:
            a += TWO_PI * round((near - a) / TWO_PI)
        return cls(abs(z), a)

    @classmethod
    def lift(cls, z):
        if isinstance(z, CoverComplex):
            return z
        return cls.from_complex(z)

    @property
    def value(self):
        return self.modulus * complex(math.cos(self.arg), math.sin(self.arg))

    def __complex__(self):
        return self.value

    def __mul__(self, other):
        o = CoverComplex.lift(other)
        return CoverComplex(self.modulus * o.modulus, self.arg + o.arg)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = CoverComplex.lift(other)
        return CoverComplex(self.modulus / o.modulus, self.arg - o.arg)

    def inverse(self):
        return CoverComplex(1.0 / self.modulus, -self.arg)

    def scale(self, r):
        """Multiply by a positive real."""
        return CoverComplex(self.modulus * r, self.arg)

    def rotate(self, phi):
        """Multiply by e^{i phi} on the cover."""
        return CoverComplex(self.modulus, self.arg + phi)

    def turn(self, k=1):
        """Multiply by e^{2 pi i k}."""
        return self.rotate(TWO_PI * k)

    def power(self, a):
        return self.modulus ** a * complex(math.cos(a * self.arg), math.sin(a * self.arg)) if isinstance(
            a, (int, float)
        ) else complex(np.exp(a * self.log()))

    def sqrt(self):
        return self.power(0.5)

    def log(self):
        return complex(math.log(self.modulus), self.arg)

    def nudge(self, h):
        """The point z + h reached continuously from z (|h| < |z|)."""
        ratio = 1.0 + complex(h) / self.value
        return self * CoverComplex.from_complex(ratio)

    def __repr__(self):
        return f"CoverComplex({self.modulus:.6g} e^(i {self.arg:.6g}))"


# ---------------------------------------------------------------------------
# Euler's constant and digamma

_BERNOULLI = [
    Fraction(1, 6), Fraction(-1, 30), Fraction(1, 42), Fraction(-1, 30),
    Fraction(5, 66), Fraction(-691, 2730), Fraction(7, 6), Fraction(-3617, 510),
]


@lru_cache(maxsize=None)
def euler_gamma():
    """lim (H_n - log n), with the Euler-Maclaurin tail added at n = 100."""
    n = 100
    h = math.fsum(1.0 / k for k in range(1, n + 1))
    tail = -1.0 / (2 * n)
    for k, b in enumerate(_BERNOULLI, start=1):
        tail += float(b) / (2 * k * n ** (2 * k))
    return h - math.log(n) + tail


def digamma(z):
    """psi(z): upward recurrence to Re z >= 12 then the Euler-Maclaurin tail."""
    z = complex(z)
    if z.imag == 0 and z.real <= 0 and z.real == math.floor(z.real):
        raise ValueError("digamma has a pole at non-positive integers")
    if z == 1:
        return complex(-euler_gamma())
    acc = 0j
    while z.real < 12:
        acc -= 1.0 / z
        z += 1
    s = np.log(z) - 1.0 / (2 * z)
    zz = z * z
    zp = zz
    for k, b in enumerate(_BERNOULLI, start=1):
        s -= float(b) / (2 * k * zp)
        zp *= zz
    return complex(s + acc)


def digamma_series(z, terms=200000):
    """Direct (slow) partial sums of the defining series, for cross-checks."""
    k = np.arange(1, terms + 1, dtype=float)
    s = np.sum(1.0 / k - 1.0 / (k + z - 1))
    # tail of sum (1/k - 1/(k+z-1)) ~ (z-1)/terms
    return complex(s + (z - 1) / (terms + 0.5) - euler_gamma())


# ---------------------------------------------------------------------------
# I_n

I_SERIES_RADIUS = 30.0


def _i_series(n, z):
    half = z / 2.0
    term = half ** n / math.factorial(n)
    total = term
    q = half * half
    k = 0
    while True:
        k += 1
        term = term * q / (k * (n + k))
        total += term
        if abs(term) <= 1e-17 * abs(total) and k > 2:
            break
        if k > 2000:
            break
    return total


def asymptotic_a(n, k):
    """a_k(n) = prod_{j<=k} (4n^2 - (2j-1)^2) / (k! 8^k)."""
    num = 1.0
    for j in range(1, k + 1):
        num *= 4 * n * n - (2 * j - 1) ** 2
    return num / (math.factorial(k) * 8 ** k)


def _asym_sum(n, z, sign, kmax=200):
    """sum_k sign^k a_k(n) z^-k with optimal truncation."""
    total = 1.0 + 0j
    term = 1.0 + 0j
    prev = float("inf")
    for k in range(1, kmax):
        term = term * sign * (4 * n * n - (2 * k - 1) ** 2) / (8 * k * z)
        if abs(term) > prev:
            break
        total += term
        prev = abs(term)
        if abs(term) < 1e-18 * abs(total):
            break
    return total


def _i_asymptotic(n, z):
    if z.real < 0:
        return (-1) ** n * _i_asymptotic(n, -z)
    root = np.sqrt(2 * np.pi * z)
    main = np.exp(z) / root * _asym_sum(n, z, -1)
    sub_sign = 1j if z.imag >= 0 else -1j
    sub = sub_sign * (-1) ** n * np.exp(-z) / root * _asym_sum(n, z, 1)
    return main + sub


def bessel_I(n, z):
    """I_n(z) for integer n (I_{-n} = I_n)."""
    n = abs(int(n))
    z = complex(z)
    if z == 0:
        return 1.0 + 0j if n == 0 else 0j
    if abs(z) <= I_SERIES_RADIUS:
        return complex(_i_series(n, z))
    return complex(_i_asymptotic(n, z))


# ---------------------------------------------------------------------------
# K_n

K_SERIES_RADIUS = 2.0
K_OVERLAP = 0.2
_LAGUERRE_NODES = 120


def k_asymptotic_radius(n):
    return max(40.0, float(n * n))


def _k_log_series(n, z):
    """Logarithmic expansion at the origin; the logarithm is taken on the cover."""
    zc = z.value
    half = zc / 2.0
    log_half = z.log() - math.log(2.0)
    s1 = 0j
    if n > 0:
        q = -half * half
        term = 1.0 + 0j
        for k in range(n):
            s1 += math.factorial(n - k - 1) / math.factorial(k) * term
            term *= q
        s1 *= 0.5 * half ** (-n)
    In = _i_series(n, zc)
    s2 = (-1) ** (n + 1) * log_half * In
    gam = euler_gamma()
    # psi(k+1) + psi(n+k+1) built incrementally
    psi_a = -gam
    psi_b = -gam + sum(1.0 / j for j in range(1, n + 1))
    term = half ** n / math.factorial(n)
    q = half * half
    s3 = 0j
    k = 0
    while True:
        s3 += (psi_a + psi_b) * term
        k += 1
        psi_a += 1.0 / k
        psi_b += 1.0 / (n + k)
        term = term * q / (k * (n + k))
        if abs(term) * (abs(psi_a) + abs(psi_b)) <= 1e-18 * max(abs(s3), 1e-300) and k > 2:
            break
        if k > 2000:
            break
    s3 *= 0.5 * (-1) ** n
    return s1 + s2 + s3


@lru_cache(maxsize=None)
def _laguerre(n):
    x, w = roots_genlaguerre(_LAGUERRE_NODES, n - 0.5)
    return x, w


def _k_laplace(n, z):
    """K_n(z) = sqrt(pi/2z) e^{-z} / Gamma(n+1/2) int_0^inf e^{-t} t^{n-1/2} (1 + t/2z)^{n-1/2} dt."""
    x, w = _laguerre(n)
    integral = np.sum(w * (1.0 + x / (2.0 * z)) ** (n - 0.5))
    return np.sqrt(np.pi / (2.0 * z)) * np.exp(-z) * integral / math.gamma(n + 0.5)


def _k_asymptotic(n, z):
    return np.sqrt(np.pi / (2.0 * z)) * np.exp(-z) * _asym_sum(n, z, 1)


def _k_right_half(n, z):
    """K_n on |arg z| <= pi/2, |z| > series radius; z is a plain complex."""
    if abs(z) >= k_asymptotic_radius(n):
        return complex(_k_asymptotic(n, z))
    return complex(_k_laplace(n, z))


def bessel_K(n, z, check_overlap=False):
    """K_n on the universal cover; ``z`` is a CoverComplex (plain complex -> principal sheet)."""
    n = abs(int(n))
    z = CoverComplex.lift(z)
    if z.modulus <= K_SERIES_RADIUS:
        val = complex(_k_log_series(n, z))
        if check_overlap and z.modulus >= (1 - K_OVERLAP) * K_SERIES_RADIUS:
            _compare_regimes(n, z, val)
        return val
    m = round(z.arg / math.pi)
    base = CoverComplex(z.modulus, z.arg - m * math.pi)
    k0 = _k_right_half(n, base.value)
    if check_overlap and z.modulus <= (1 + K_OVERLAP) * K_SERIES_RADIUS:
        _compare_regimes(n, base, k0)
    if m == 0:
        return k0
    return continue_K(n, base.value, m, k0)


def continue_K(n, z, m, k_at_z=None):
    """K_n(z e^{m pi i}) from K_n(z) and I_n(z)."""
    if k_at_z is None:
        k_at_z = bessel_K(n, z)
    sign_a = -1 if (m * n) % 2 else 1
    sign_b = -1 if (n * (m - 1)) % 2 else 1
    return sign_a * k_at_z - sign_b * m * math.pi * 1j * bessel_I(n, z)


def continue_K_from_pair(n, k_z, k_z_pi, m):
    """K_n(z e^{m pi i}) from K_n(z) and K_n(z e^{pi i})."""
    s1 = -1 if (n * (m - 1)) % 2 else 1
    s2 = -1 if (n * m) % 2 else 1
    return s1 * m * k_z_pi - s2 * (m - 1) * k_z


def _compare_regimes(n, z, val):
    """Both regimes at a point of the overlap band (principal half plane)."""
    base_arg = z.arg - round(z.arg / math.pi) * math.pi
    zp = CoverComplex(z.modulus, base_arg)
    a = complex(_k_log_series(n, zp))
    b = complex(_k_right_half(n, zp.value))
    if abs(a - b) > 1e-9 * max(abs(a), abs(b)):
        raise OverlapMismatch(f"K_{n} regimes disagree at {zp}: {a} vs {b}")
    return abs(a - b) / max(abs(a), abs(b))


def overlap_discrepancy(n, z):
    """Relative difference of the two K_n regimes at z on the principal half plane."""
    z = CoverComplex.lift(z)
    a = complex(_k_log_series(n, z))
    b = complex(_k_right_half(n, z.value))
    return abs(a - b) / max(abs(a), abs(b))


# ---------------------------------------------------------------------------
# Gauss hypergeometric function


def _poch_ratio_series(a, b, c, z, tol=1e-17, kmax=20000):
    total = 1.0 + 0j
    term = 1.0 + 0j
    small = 0
    for k in range(kmax):
        term = term * (a + k) * (b + k) / ((c + k) * (k + 1)) * z
        total += term
        if abs(term) <= tol * abs(total):
            small += 1
            if small >= 2:
                break
        else:
            small = 0
    return total


def _rgamma(x):
    """1/Gamma(x), zero at the poles."""
    x = complex(x)
    if x.imag == 0 and x.real <= 0 and x.real == math.floor(x.real):
        return 0j
    return complex(np.exp(-loggamma(x)))


def hyp2f1_log_connection(a, b, z):
    """2F1(a, b; a+b; z) expanded around z = 1 (logarithmic case)."""
    a, b, z = complex(a), complex(b), complex(z)
    w = 1.0 - z
    pref = complex(np.exp(loggamma(a + b))) * _rgamma(a) * _rgamma(b)
    log_w = np.log(w)
    total = 0j
    coef = 1.0 + 0j  # (a)_k (b)_k / k!^2
    psi1 = -euler_gamma()
    psia = digamma(a) if _rgamma(a) != 0 else None
    psib = digamma(b) if _rgamma(b) != 0 else None
    wk = 1.0 + 0j
    small = 0
    for k in range(20000):
        if psia is None or psib is None:
            raise ParameterOutOfScope("a or b at a pole of Gamma")
        term = coef * (2 * psi1 - psia - psib - log_w) * wk
        total += term
        if abs(term) <= 1e-17 * abs(total):
            small += 1
            if small >= 2:
                break
        else:
            small = 0
        coef = coef * (a + k) * (b + k) / ((k + 1) ** 2)
        psi1 += 1.0 / (k + 1)
        psia += 1.0 / (a + k)
        psib += 1.0 / (b + k)
        wk *= w
    return complex(pref * total)


def gauss_2F1(a, b, c, z, regime="auto"):
    """2F1(a, b; c; z) from the power series (|z| < 1) or the connection at z = 1."""
    z = complex(z)
    if regime == "auto":
        regime = "series" if abs(z) <= 0.75 or abs(1 - z) >= 1 else "connection"
    if regime == "series":
        if abs(z) >= 1:
            raise ParameterOutOfScope("series regime needs |z| < 1")
        return complex(_poch_ratio_series(complex(a), complex(b), complex(c), z))
    if regime == "connection":
        if abs(complex(c) - complex(a) - complex(b)) > 1e-14:
            raise ParameterOutOfScope("connection regime implemented for c = a + b only")
        if abs(1 - z) >= 1:
            raise ParameterOutOfScope("connection regime needs |1 - z| < 1")
        return hyp2f1_log_connection(a, b, z)
    raise ValueError(f"unknown regime {regime!r}")


# ---------------------------------------------------------------------------
# combinatorial helpers


def rising(x, k):
    out = 1
    for j in range(k):
        out = out * (x + j)
    return out


def gen_binomial(x, k):
    """binom(x, k) for real or complex x and integer k >= 0."""
    out = 1.0
    for j in range(k):
        out *= (x - j) / (j + 1)
    return out


def rgamma_half_minus(k):
    """1/Gamma(1/2 - k) for integer k >= 0."""
    return 1.0 / math.gamma(0.5 - k)


# ---------------------------------------------------------------------------
# identity suite


def rising_factorial_identity(k):
    """(k+1)^{(k)} = 4^k (1/2)^{(k)}, compared as integers after scaling by 2^k."""
    lhs = rising(k + 1, k)
    odd = 1
    for j in range(k):
        odd *= 2 * j + 1
    return lhs == 2 ** k * odd


def aux_hg_coefficient(m, k):
    """binom(-1/2, k) binom(m+k-1/2, 2k)."""
    return gen_binomial(-0.5, k) * gen_binomial(m + k - 0.5, 2 * k)


def hyp_taylor_coefficient(m, k):
    """[z^k] 2F1(1/2-m, 1/2+m; 1; z/4)."""
    a, b = 0.5 - m, 0.5 + m
    return rising(a, k) * rising(b, k) / math.factorial(k) ** 2 / 4 ** k


def laplace_identity_sides(a, omega, q=1.0):
    """Both sides of int_0^oo 2F1(a, 1-a; 1; -omega x) e^{-q x} dx = q^{-1/2} e^{y} K_{a-1/2}(y) / sqrt(pi omega), y = q/(2 omega)."""
    import mpmath

    omega = complex(omega)
    f = lambda x: mpmath.hyp2f1(a, 1 - a, 1, -omega * x) * mpmath.exp(-q * x)  # noqa: E731
    lhs = complex(mpmath.quad(f, [0, 1, 10, mpmath.inf]))
    nu = a - 0.5
    if abs(nu - round(nu)) > 1e-14:
        raise ParameterOutOfScope("only integer order K is implemented")
    y = q / (2 * omega)
    rhs = complex(q ** -0.5 / np.sqrt(np.pi * omega) * np.exp(y) * bessel_K(int(round(nu)), y))
    return lhs, rhs


def monodromy_roundtrip(n, z, m):
    """|K(z e^{m pi i} e^{-m pi i}) - K(z)| going through the continuation twice."""
    z = CoverComplex.lift(z)
    k0 = bessel_K(n, z)
    km = bessel_K(n, z.rotate(m * math.pi))
    # K(w e^{-m pi i}) from K(w) and I(w) with w = z e^{m pi i}
    w = z.rotate(m * math.pi)
    sign_a = -1 if ((-m) * n) % 2 else 1
    sign_b = -1 if (n * (-m - 1)) % 2 else 1
    back = sign_a * km - sign_b * (-m) * math.pi * 1j * bessel_I(n, w.value)
    return abs(back - k0) / max(abs(k0), 1e-300)


def two_step_monodromy(n, z):
    """K(z e^{2 pi i}) from one m = 2 step against two m = 1 steps."""
    z = CoverComplex.lift(z)
    direct = continue_K(n, z.value, 2, bessel_K(n, z))
    one = continue_K(n, z.value, 1, bessel_K(n, z))
    w = z.rotate(math.pi)
    two = continue_K(n, w.value, 1, one)
    return abs(direct - two) / max(abs(direct), 1e-300)


@dataclass
class IdentityRecord:
    name: str
    measured: float
    tolerance: float

    @property
    def passed(self):
        return bool(self.measured <= self.tolerance)

    def to_json(self):
        return {"name": self.name, "measured": self.measured, "tolerance": self.tolerance, "pass": self.passed}


def identity_suite(k_max=30, m_max=5, laplace=True):
    """The supporting special-function identities, one record per family."""
    recs = []
    bad = [k for k in range(21) if not rising_factorial_identity(k)]
    recs.append(IdentityRecord("rising factorial (k+1)^(k) = 4^k (1/2)^(k), k <= 20", float(len(bad)), 0.0))
    worst = 0.0
    for m in range(m_max + 1):
        for k in range(k_max + 1):
            a, b = aux_hg_coefficient(m, k), hyp_taylor_coefficient(m, k)
            worst = max(worst, abs(a - b) / max(abs(b), 1e-300))
    recs.append(IdentityRecord("binomial sums match 2F1 Taylor coefficients", worst, 1e-12))
    worst = 0.0
    for n in range(4):
        for z in (CoverComplex(0.7, 0.4), CoverComplex(3.0, -1.1), CoverComplex(12.0, 2.0)):
            for m in (1, 2, 3, -1):
                worst = max(worst, monodromy_roundtrip(n, z, m))
            worst = max(worst, two_step_monodromy(n, z))
    recs.append(IdentityRecord("K monodromy: m then -m, and m = 2 against two steps", worst, 1e-11))
    if laplace:
        worst = 0.0
        cases = ((0, 0.5), (0, complex(0.3, -1.0)), (1, 2.0 * complex(math.cos(0.6), math.sin(0.6))), (2, 1.5))
        for m, omega in cases:
            lhs, rhs = laplace_identity_sides(0.5 - m, omega)
            worst = max(worst, abs(lhs - rhs) / abs(rhs))
        recs.append(IdentityRecord("Laplace transform of 2F1(a, 1-a; 1; -omega x)", worst, 1e-8))
    return recs
