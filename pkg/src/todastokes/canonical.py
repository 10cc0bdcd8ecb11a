"""Canonical coordinates: the sigma-curve, critical values, eigen-functionals and Psi.

The continuous canonical coordinate attached to p on the unit circle is
u_p = lambda_sigma(p) with sigma = sigma(p). Discrete ones come from the
critical points of lambda outside the disc (u_i = -lambda(z_i)) and of
lambdabar inside it (ubar_j = lambdabar(zbar_j)).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BoundaryRoot, DegenerateCritical
from .laurent import LaurentSeries
from .manifold import FLOOR, TangentTriple, apply_U, metric

BOUNDARY_MARGIN = 1e-8


# weak functionals -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class WeakFunctional:
    """Cotangent element given by its values on e_m (|m| <= N), e_v and e_u."""

    coeffs: np.ndarray
    cv: complex = 0j
    cu: complex = 0j

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex).copy()
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "cv", complex(self.cv))
        object.__setattr__(self, "cu", complex(self.cu))

    @property
    def N(self):
        return (self.coeffs.size - 1) // 2

    @classmethod
    def zero(cls, N):
        return cls(np.zeros(2 * N + 1, dtype=complex))

    @classmethod
    def from_callable(cls, func, N):
        """Build from a linear map on triples by evaluating on the test basis."""
        c = [func(TangentTriple.basis(m, N)) for m in range(-N, N + 1)]
        return cls(np.array(c), func(TangentTriple.basis("v", N)), func(TangentTriple.basis("u", N)))

    @classmethod
    def from_representative(cls, pt, Z, N=None):
        """The functional eta(Z, .) restricted to the test basis."""
        N = N if N is not None else pt.N
        Zt = pt.over_q(Z.W.resize(pt.N)).resize(max(N, pt.N))
        c = np.array([Zt.coef(-m) for m in range(-N, N + 1)])
        return cls(c, Z.Xu, Z.Xv)

    def coef(self, mhat):
        if mhat == "v":
            return self.cv
        if mhat == "u":
            return self.cu
        m = int(mhat)
        return complex(self.coeffs[m + self.N]) if abs(m) <= self.N else 0j

    def __call__(self, X):
        W = X.W
        if W.N > self.N:
            outside = np.concatenate([W.coeffs[:W.N - self.N], W.coeffs[W.N + self.N + 1:]])
            if np.any(np.abs(outside) > 1e-12 * (1.0 + W.max_abs())):
                raise ValueError("test vector leaves the functional's window")
            W = W.resize(self.N)
        c = self.coeffs if W.N == self.N else self.coeffs[self.N - W.N:self.N + W.N + 1]
        return complex(np.dot(c, W.coeffs) + self.cv * X.Xv + self.cu * X.Xu)

    def __add__(self, o):
        return WeakFunctional(self.coeffs + o.coeffs, self.cv + o.cv, self.cu + o.cu)

    def __sub__(self, o):
        return self + o * (-1)

    def __mul__(self, c):
        c = complex(c)
        return WeakFunctional(self.coeffs * c, self.cv * c, self.cu * c)

    __rmul__ = __mul__

    def max_abs(self):
        return max(float(np.max(np.abs(self.coeffs))), abs(self.cv), abs(self.cu))

    def vector(self):
        return np.concatenate([self.coeffs, [self.cv, self.cu]])

    def to_json(self):
        return {
            "N": self.N,
            "coeffs": [[float(c.real), float(c.imag)] for c in self.coeffs],
            "v": [self.cv.real, self.cv.imag],
            "u": [self.cu.real, self.cu.imag],
        }


# sigma curve and continuous coordinates -------------------------------------


def sigma_curve(pt):
    return pt.sigma


def sigma_at(pt, p):
    p = np.asarray(p, dtype=complex)
    return pt.lam.derivative()(p) / pt.dw(p)


def canonical_value(pt, p):
    """u_p = lambda_sigma(p) with sigma = sigma(p)."""
    s = sigma_at(pt, p)
    return s * pt.lambar(p) + (s - 1) * pt.lam(p)


def dlambda_sigma(pt, s, X):
    """<d lambda_sigma(z), X> as a series in z (s may be a series or scalar)."""
    N = pt.N
    W = X.W.resize(N)
    tail = LaurentSeries.from_dict({0: X.Xv, -1: pt.e_u * X.Xu}, N)
    return (s - 1) * W + W.geq(1) + tail


def du_p_value(pt, p, X):
    """<du_p, X> = (sigma(p) - 1) W(p) + W_{>=1}(p) + X_v + e^u X_u / p."""
    p = np.asarray(p, dtype=complex)
    W = X.W
    s = sigma_at(pt, p)
    return (s - 1) * W(p) + W.geq(1)(p) + X.Xv + pt.e_u * X.Xu / p


def du_p_functional(pt, p, N=None):
    N = N if N is not None else pt.N
    s = complex(sigma_at(pt, p))
    m = np.arange(-N, N + 1)
    c = np.where(m >= 1, s, s - 1) * p ** m.astype(float)
    return WeakFunctional(c, 1.0, pt.e_u / p)


# critical points -------------------------------------------------------------


@dataclass
class CriticalPoint:
    z: complex
    value: complex
    second_derivative: complex

    @property
    def margin(self):
        return abs(self.second_derivative)


@dataclass
class CriticalSet:
    outer: list = field(default_factory=list)
    inner: list = field(default_factory=list)

    @property
    def n(self):
        return len(self.outer)

    @property
    def nbar(self):
        return len(self.inner)

    def to_json(self):
        def enc(c):
            return {
                "z": [c.z.real, c.z.imag],
                "value": [c.value.real, c.value.imag],
                "second_derivative_abs": c.margin,
            }

        return {"outer": [enc(c) for c in self.outer], "inner": [enc(c) for c in self.inner]}


def _laurent_roots(f, tol=1e-14):
    """Roots in C* of a Laurent polynomial via the companion matrix."""
    c = f.coeffs
    big = np.max(np.abs(c))
    nz = np.nonzero(np.abs(c) > tol * big)[0]
    lo, hi = nz[0], nz[-1]
    poly = c[lo:hi + 1][::-1]  # highest degree first
    if poly.size < 2:
        return np.array([], dtype=complex)
    return np.roots(poly)


def _polish(df, d2f, z, iters=50):
    for _ in range(iters):
        step = df(z) / d2f(z)
        z = z - step
        if abs(step) < 1e-16 * max(1.0, abs(z)):
            break
    return z


def find_critical_set(pt, floor=FLOOR):
    """Critical points of lambda outside and of lambdabar inside the unit disc."""
    dl, d2l = pt.lam.derivative(), pt.lam.derivative().derivative()
    dlb, d2lb = pt.lambar.derivative(), pt.lambar.derivative().derivative()
    crit = CriticalSet()
    for df, d2f, outside, sink, sign, func in (
        (dl, d2l, True, crit.outer, -1.0, pt.lam),
        (dlb, d2lb, False, crit.inner, 1.0, pt.lambar),
    ):
        for r in _laurent_roots(df):
            if abs(abs(r) - 1.0) < BOUNDARY_MARGIN:
                raise BoundaryRoot(f"critical point {r} on the unit circle")
            if (abs(r) > 1.0) != outside:
                continue
            second = d2f(r)
            if abs(second) < floor:
                raise DegenerateCritical(f"degenerate critical point near {r}")
            z = _polish(df, d2f, r)
            if abs(df(z)) > 1e-10:
                raise DegenerateCritical(f"Newton polish failed at {r}")
            sink.append(CriticalPoint(complex(z), complex(sign * func(z)), complex(d2f(z))))
    crit.outer.sort(key=lambda c: (np.angle(c.z), abs(c.z)))
    crit.inner.sort(key=lambda c: (np.angle(c.z), abs(c.z)))
    return crit


def coincident_values(crit, pt, tol=1e-8):
    """Pairs of discrete canonical values that coincide with each other or with the curve."""
    vals = [c.value for c in crit.outer + crit.inner]
    hits = []
    for a in range(len(vals)):
        for b in range(a + 1, len(vals)):
            if abs(vals[a] - vals[b]) < tol:
                hits.append((a, b))
    up = canonical_value(pt, pt.nodes)
    for a, val in enumerate(vals):
        if np.min(np.abs(up - val)) < tol:
            hits.append((a, "continuous"))
    return hits


# representatives of du_i, dubar_j ------------------------------------------


def _pole_representative(pt, z0):
    """(z w' z0/(z - z0), e^u/z0, 1)."""
    nodes = pt.nodes
    vals = pt.q_grid * z0 / (nodes - z0)
    return TangentTriple(pt.from_grid(vals), pt.e_u / z0, 1.0 + 0j)


def du_i_representative(pt, c):
    return _pole_representative(pt, c.z)


def dubar_j_representative(pt, c):
    return _pole_representative(pt, c.z)


def du_i_value(pt, c, X):
    """<du_i, X> = -X(z_i) with X the pair-form first component."""
    return -complex(X.pair_first(pt.e_u)(c.z))


def dubar_j_value(pt, c, X):
    """<dubar_j, X> = Xbar(zbar_j)."""
    return complex(X.to_pair(pt.e_u)[1](c.z))


def eigen_functionals(pt, crit=None, p=None):
    crit = crit if crit is not None else find_critical_set(pt)
    p = pt.nodes if p is None else np.asarray(p)
    return (
        [du_p_functional(pt, pk) for pk in p],
        [du_i_representative(pt, c) for c in crit.outer],
        [dubar_j_representative(pt, c) for c in crit.inner],
    )


# Psi and its inverse ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PsiData:
    """(Y(p) on the p-grid, Y_i, Ybar_j)."""

    Y: np.ndarray
    Yi: np.ndarray
    Ybar: np.ndarray

    def __add__(self, o):
        return PsiData(self.Y + o.Y, self.Yi + o.Yi, self.Ybar + o.Ybar)

    def __sub__(self, o):
        return PsiData(self.Y - o.Y, self.Yi - o.Yi, self.Ybar - o.Ybar)

    def __mul__(self, c):
        return PsiData(self.Y * c, self.Yi * c, self.Ybar * c)

    __rmul__ = __mul__

    def max_abs(self):
        parts = [np.max(np.abs(self.Y))]
        if self.Yi.size:
            parts.append(np.max(np.abs(self.Yi)))
        if self.Ybar.size:
            parts.append(np.max(np.abs(self.Ybar)))
        return float(max(parts))

    def scaled(self, up, ui, ubar):
        return PsiData(self.Y * up, self.Yi * ui, self.Ybar * ubar)

    def to_json(self):
        enc = lambda a: [[float(x.real), float(x.imag)] for x in a]  # noqa: E731
        return {"Y": enc(self.Y), "Yi": enc(self.Yi), "Ybar": enc(self.Ybar)}


def psi_forward(pt, X, crit):
    Y = du_p_value(pt, pt.nodes, X)
    Yi = np.array([du_i_value(pt, c, X) for c in crit.outer], dtype=complex)
    Ybar = np.array([dubar_j_value(pt, c, X) for c in crit.inner], dtype=complex)
    return PsiData(np.asarray(Y, dtype=complex), Yi, Ybar)


def _mu(pt, crit, data, p):
    mu = np.zeros_like(p)
    for c, y in zip(crit.outer, data.Yi):
        mu = mu + y / (c.z * c.second_derivative) * p / (c.z - p)
    for c, y in zip(crit.inner, data.Ybar):
        mu = mu - y / (c.z * c.second_derivative) * p / (c.z - p)
    return mu


def psi_inverse(pt, crit, data):
    p = pt.nodes
    dl = pt.grid(pt.lam.derivative())
    dlb = pt.grid(pt.lambar.derivative())
    g = (dl + dlb) / (dl * dlb)
    gY = pt.from_grid(g * data.Y)
    mu = _mu(pt, crit, data, p)
    Xbar = dlb * (mu + pt.grid(gY.geq(1)))
    X = -dl * (-mu + pt.grid(gY.leq(0)))
    return TangentTriple.from_pair(pt.from_grid(X), pt.from_grid(Xbar), pt.e_u)


def canonical_spectrum(pt, crit):
    up = canonical_value(pt, pt.nodes)
    ui = np.array([c.value for c in crit.outer], dtype=complex)
    ubar = np.array([c.value for c in crit.inner], dtype=complex)
    return up, ui, ubar


def metric_canonical(pt, crit, A, B):
    p = pt.nodes
    dl = pt.grid(pt.lam.derivative())
    dlb = pt.grid(pt.lambar.derivative())
    dw = pt.grid(pt.dw)
    val = -np.mean(dw / (dl * dlb) * A.Y * B.Y / p)
    for c, a, b in zip(crit.outer, A.Yi, B.Yi):
        val -= a * b / (c.z ** 2 * c.second_derivative)
    for c, a, b in zip(crit.inner, A.Ybar, B.Ybar):
        val += a * b / (c.z ** 2 * c.second_derivative)
    return complex(val)


# key lemma ------------------------------------------------------------------


def key_lemma_residual(pt, s, X):
    """E(z) minus z lambda_sigma'(z) [((1 - w/(z w')) X)_0 - X_v]."""
    N = pt.N
    W = X.W.resize(N)
    lam_s = pt.lambda_sigma(s)
    zdl = lam_s.z_derivative()
    wX = pt.over_q(W * pt.w)
    aux = TangentTriple(wX, 0j, -X.Xu)
    E = (
        dlambda_sigma(pt, s, apply_U(pt, X))
        - lam_s * dlambda_sigma(pt, s, X)
        + zdl * dlambda_sigma(pt, s, aux)
    )
    scalar = (W - wX).coef(0) - X.Xv
    return E - zdl * scalar


# residual helpers -------------------------------------------------------------


def eigen_residuals(pt, crit, X, p=None):
    """Max residuals of the generalized eigen-equations of du_p, du_i, dubar_j."""
    UX = apply_U(pt, X)
    p = pt.nodes if p is None else np.asarray(p, dtype=complex)
    up = canonical_value(pt, p)
    rp = np.abs(du_p_value(pt, p, UX) - up * du_p_value(pt, p, X))
    ri = [abs(du_i_value(pt, c, UX) - c.value * du_i_value(pt, c, X)) for c in crit.outer]
    rj = [abs(dubar_j_value(pt, c, UX) - c.value * dubar_j_value(pt, c, X)) for c in crit.inner]
    return float(np.max(rp)), max(ri, default=0.0), max(rj, default=0.0)


def representative_residual(pt, c, X, outer=True):
    rep = _pole_representative(pt, c.z)
    direct = du_i_value(pt, c, X) if outer else dubar_j_value(pt, c, X)
    return abs(metric(pt, rep, X) - direct)
