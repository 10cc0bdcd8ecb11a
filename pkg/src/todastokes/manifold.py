"""Points of the manifold, tangent triples, metric, product and the operators U, V.

A point is stored in w-coordinates (w(z), v, u) with u a chosen logarithm of
e^u. Tangent vectors are triples (W(z), X_v, X_u); the pair form (X, Xbar) is
available through :meth:`TangentTriple.to_pair`.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import T1Violation, T2Violation
from .laurent import LaurentSeries, TruncationParams, unit_nodes

FLOOR = 1e-6


@dataclass(frozen=True, eq=False)
class TangentTriple:
    """Tangent vector (W(z), X_v, X_u)."""

    W: LaurentSeries
    Xv: complex = 0j
    Xu: complex = 0j

    @property
    def N(self):
        return self.W.N

    @classmethod
    def zero(cls, N):
        return cls(LaurentSeries.zeros(N), 0j, 0j)

    @classmethod
    def unit(cls, N):
        """The unit vector field e = (0, 1, 0)."""
        return cls(LaurentSeries.zeros(N), 1.0 + 0j, 0j)

    @classmethod
    def basis(cls, mhat, N):
        """Test basis vector e_m (integer m), e_v ('v') or e_u ('u')."""
        if mhat == "v":
            return cls(LaurentSeries.zeros(N), 1.0 + 0j, 0j)
        if mhat == "u":
            return cls(LaurentSeries.zeros(N), 0j, 1.0 + 0j)
        return cls(LaurentSeries.monomial(int(mhat), N), 0j, 0j)

    @classmethod
    def from_pair(cls, X, Xbar, e_u):
        W = X + Xbar
        return cls(W, Xbar.coef(0), Xbar.coef(-1) / e_u)

    def to_pair(self, e_u):
        N = self.N
        tail = LaurentSeries.from_dict({0: self.Xv, -1: e_u * self.Xu}, N)
        return self.W.leq(0) - tail, self.W.geq(1) + tail

    def pair_first(self, e_u):
        return self.to_pair(e_u)[0]

    def __add__(self, o):
        return TangentTriple(self.W + o.W, self.Xv + o.Xv, self.Xu + o.Xu)

    def __sub__(self, o):
        return TangentTriple(self.W - o.W, self.Xv - o.Xv, self.Xu - o.Xu)

    def __neg__(self):
        return TangentTriple(-self.W, -self.Xv, -self.Xu)

    def __mul__(self, c):
        c = complex(c)
        return TangentTriple(self.W * c, self.Xv * c, self.Xu * c)

    __rmul__ = __mul__

    def resize(self, N):
        return TangentTriple(self.W.resize(N), self.Xv, self.Xu)

    def norm(self):
        return float(np.sqrt(np.sum(np.abs(self.W.coeffs) ** 2) + abs(self.Xv) ** 2 + abs(self.Xu) ** 2))

    def max_abs(self):
        return max(self.W.max_abs(), abs(self.Xv), abs(self.Xu))

    @property
    def spill(self):
        return self.W.spill

    def to_json(self):
        return {
            "W": self.W.to_json(),
            "Xv": [self.Xv.real, self.Xv.imag],
            "Xu": [self.Xu.real, self.Xu.imag],
        }


def random_triple(rng, N, degree=4, scale=1.0):
    """Random Laurent-polynomial triple with W supported on |k| <= degree."""
    terms = {
        k: scale * complex(rng.normal(), rng.normal())
        for k in range(-degree, degree + 1)
    }
    Xv, Xu = scale * complex(rng.normal(), rng.normal()), scale * complex(rng.normal(), rng.normal())
    return TangentTriple(LaurentSeries.from_dict(terms, N), Xv, Xu)


@dataclass(frozen=True, eq=False)
class ManifoldPoint:
    """A point in w-coordinates; ``u`` is the recorded branch of log e^u."""

    w: LaurentSeries
    v: complex
    u: complex
    params: TruncationParams = field(default_factory=TruncationParams)

    def __post_init__(self):
        if self.w.N != self.params.N:
            object.__setattr__(self, "w", self.w.resize(self.params.N))
        object.__setattr__(self, "v", complex(self.v))
        object.__setattr__(self, "u", complex(self.u))

    # constructors ---------------------------------------------------------

    @classmethod
    def special(cls, v=0.0, e_u=0.5, params=None):
        """The two-parameter family lambda = z - v - e^u/z, lambdabar = v + e^u/z."""
        params = params or TruncationParams()
        if e_u == 0:
            raise T1Violation("e^u must be nonzero")
        w = LaurentSeries.monomial(1, params.N)
        return cls(w, complex(v), cmath.log(complex(e_u)), params)

    @classmethod
    def from_lambdas(cls, lam, lambar, params=None, u=None):
        params = params or TruncationParams()
        lam = lam.resize(params.N)
        lambar = lambar.resize(params.N)
        if abs(lam.coef(1) - 1) > 1e-12 or np.any(np.abs(lam.coeffs[params.N + 2:]) > 0):
            raise ValueError("lambda must be z plus non-positive powers")
        if np.any(np.abs(lambar.coeffs[:params.N - 1]) > 0):
            raise ValueError("lambdabar must only contain powers >= -1")
        e_u = lambar.coef(-1)
        if e_u == 0:
            raise T1Violation("leading coefficient of lambdabar vanishes")
        if u is None:
            u = cmath.log(e_u)
        elif abs(cmath.exp(u) - e_u) > 1e-12 * abs(e_u):
            raise ValueError("u is not a logarithm of the z^-1 coefficient of lambdabar")
        return cls(lam + lambar, lambar.coef(0), u, params)

    @classmethod
    def from_json(cls, data, params=None):
        params = params or TruncationParams()
        if "lambda" in data:
            return cls.from_lambdas(
                LaurentSeries.from_json(data["lambda"]),
                LaurentSeries.from_json(data["lambdabar"]),
                params,
            )
        v = complex(*data["v"])
        u = complex(*data["u"])
        return cls(LaurentSeries.from_json(data["w"]), v, u, params)

    def to_json(self):
        return {"w": self.w.to_json(), "v": [self.v.real, self.v.imag], "u": [self.u.real, self.u.imag]}

    def with_params(self, params):
        return ManifoldPoint(self.w.resize(params.N), self.v, self.u, params)

    # derived data ---------------------------------------------------------

    @property
    def N(self):
        return self.params.N

    @property
    def M(self):
        return self.params.M

    @cached_property
    def e_u(self):
        return cmath.exp(self.u)

    @cached_property
    def lam(self):
        N = self.N
        return self.w.leq(0) + LaurentSeries.from_dict({1: 1.0, 0: -self.v, -1: -self.e_u}, N)

    @cached_property
    def lambar(self):
        N = self.N
        return self.w.geq(1) + LaurentSeries.from_dict({1: -1.0, 0: self.v, -1: self.e_u}, N)

    def to_w_coords(self):
        return self.w, self.v, self.u

    @cached_property
    def dw(self):
        return self.w.derivative()

    @cached_property
    def q(self):
        """z w'(z)."""
        return self.w.z_derivative()

    @cached_property
    def nodes(self):
        return unit_nodes(self.M)

    def grid(self, f):
        return f.values(self.M)

    def from_grid(self, values):
        return LaurentSeries.from_values(values, self.N)

    @cached_property
    def q_grid(self):
        return self.grid(self.q)

    def require_t2(self):
        if np.min(np.abs(self.q_grid)) < FLOOR:
            raise T2Violation("w' vanishes on the unit circle")

    def over_q(self, f):
        """f / (z w') re-expanded on the grid."""
        self.require_t2()
        return self.from_grid(self.grid(f) / self.q_grid)

    @cached_property
    def sigma(self):
        """sigma(z) = lambda'/(lambda' + lambdabar') = lambda'/w'."""
        self.require_t2()
        return self.from_grid(self.grid(self.lam.derivative()) / self.grid(self.dw))

    def lambda_sigma(self, s):
        return s * self.lambar + (s - 1) * self.lam

    def euler_field(self):
        return TangentTriple(self.w - self.q, self.v, 2.0 + 0j)


# metric and product ---------------------------------------------------------


def metric(pt, X, Y):
    """eta(X, Y) with the z-part integrated against the triples' first slots."""
    pt.require_t2()
    vals = pt.grid(X.W) * pt.grid(Y.W) / pt.q_grid
    return complex(np.mean(vals)) + X.Xv * Y.Xu + X.Xu * Y.Xv


def product(pt, X, Y):
    N = pt.N
    e_u = pt.e_u
    q = pt.q
    Xs, Ys = X.W.resize(N), Y.W.resize(N)
    Yt = pt.over_q(Ys)
    zinv = LaurentSeries.monomial(-1, N)
    inner = (
        Ys.gt(0)
        - q.gt(0) * Yt
        + Yt.shift(1)
        + (zinv * e_u) * (Yt + Y.Xu)
        + Y.Xv
    )
    outer = (
        (Xs.gt(0) * Yt).lt(0)
        - (Xs.leq(0) * Yt).geq(0)
        + (zinv * (e_u * X.Xu)) * (Yt + Y.Xu)
        + Yt * X.Xv
    )
    first = Xs * inner + q * outer
    second = (e_u * (Xs + q * X.Xu) * (Yt + Y.Xu)).coef(1) - e_u * X.Xu * Y.Xu + X.Xv * Y.Xv
    third = (Xs * Yt).coef(0) + X.Xu * Y.Xv + X.Xv * Y.Xu
    return TangentTriple(first, second, third)


def apply_U(pt, X):
    """Multiplication by the Euler field via the expanded closed formula."""
    N = pt.N
    e_u, v = pt.e_u, pt.v
    q = pt.q
    Xs = X.W.resize(N)
    Xt = pt.over_q(Xs)
    a = pt.w - q
    zinv = LaurentSeries.monomial(-1, N)
    first = a * (
        Xs.gt(0)
        - q.gt(0) * Xt
        + Xt.shift(1)
        + (zinv * e_u) * (Xt + X.Xu)
        + X.Xv
    ) + q * (
        (a.gt(0) * Xt).lt(0)
        - (a.leq(0) * Xt).geq(0)
        + (zinv * (2 * e_u)) * (Xt + X.Xu)
        + Xt * v
    )
    second = (e_u * (pt.w + q) * (Xt + X.Xu)).coef(1) - 2 * e_u * X.Xu + v * X.Xv
    third = (a * Xt).coef(0) + 2 * X.Xv + v * X.Xu
    return TangentTriple(first, second, third)


def apply_U_product(pt, X):
    """Multiplication by the Euler field through the general product."""
    return product(pt, pt.euler_field(), X)


def apply_V(pt, X):
    Xs = X.W.resize(pt.N)
    ratio = pt.from_grid(pt.grid(Xs) * pt.grid(pt.w) / pt.q_grid)
    return TangentTriple(-0.5 * Xs + ratio.z_derivative(), -0.5 * X.Xv, 0.5 * X.Xu)


# admissibility --------------------------------------------------------------


@dataclass
class ConditionReport:
    t1: bool
    t2: bool
    t3: bool
    t4: bool
    t5: bool
    e_u_abs: float
    min_dw: float
    winding: int
    simple: bool
    min_dsigma: float
    min_dlam: float
    min_dlambar: float

    @property
    def all_pass(self):
        return self.t1 and self.t2 and self.t3 and self.t4 and self.t5

    def as_dict(self):
        d = dict(self.__dict__)
        d["all_pass"] = self.all_pass
        return d


def _winding_number(vals):
    dphi = np.angle(np.roll(vals, -1) / vals)
    return int(round(float(np.sum(dphi)) / (2 * np.pi)))


def _is_simple(vals):
    """Pairwise segment intersection test on the closed polygon."""
    P = np.column_stack([vals.real, vals.imag])
    Q = np.roll(P, -1, axis=0)
    n = len(P)
    d = Q - P
    for i in range(n):
        j = np.arange(i + 2, n)
        if i == 0:
            j = j[j != n - 1]
        if j.size == 0:
            continue
        r = d[i]
        s = d[j]
        qp = P[j] - P[i]
        denom = r[0] * s[:, 1] - r[1] * s[:, 0]
        ok = np.abs(denom) > 1e-15
        t = np.where(ok, (qp[:, 0] * s[:, 1] - qp[:, 1] * s[:, 0]) / np.where(ok, denom, 1), -1)
        uu = np.where(ok, (qp[:, 0] * r[1] - qp[:, 1] * r[0]) / np.where(ok, denom, 1), -1)
        if np.any(ok & (t >= 0) & (t <= 1) & (uu >= 0) & (uu <= 1)):
            return False
    return True


def check_conditions(pt, floor=FLOOR):
    """Margins for the admissibility conditions on the quadrature grid."""
    e_u_abs = abs(pt.e_u)
    dw = np.abs(pt.grid(pt.dw))
    wv = pt.grid(pt.w)
    winding = _winding_number(wv)
    simple = _is_simple(wv)
    dlam = np.abs(pt.grid(pt.lam.derivative()))
    dlambar = np.abs(pt.grid(pt.lambar.derivative()))
    if np.min(dw) >= floor:
        sig = pt.from_grid(pt.grid(pt.lam.derivative()) / pt.grid(pt.dw))
        min_dsigma = float(np.min(np.abs(pt.grid(sig.derivative()))))
    else:
        min_dsigma = 0.0
    return ConditionReport(
        t1=e_u_abs > 0,
        t2=float(np.min(dw)) >= floor,
        t3=winding == 1 and simple,
        t4=min_dsigma >= floor,
        t5=float(np.min(dlam)) >= floor and float(np.min(dlambar)) >= floor,
        e_u_abs=e_u_abs,
        min_dw=float(np.min(dw)),
        winding=winding,
        simple=simple,
        min_dsigma=min_dsigma,
        min_dlam=float(np.min(dlam)),
        min_dlambar=float(np.min(dlambar)),
    )


def perturbed_point(params=None, v=0.0, e_u=0.02):
    """w = z + 0.1 z^2 + 0.2 + 0.3/z with chosen (v, e^u)."""
    params = params or TruncationParams(N=64, M=512)
    w = LaurentSeries.from_dict({2: 0.1, 1: 1.0, 0: 0.2, -1: 0.3}, params.N)
    return ManifoldPoint(w, v, cmath.log(e_u), params)
