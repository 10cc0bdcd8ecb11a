"""Truncated Laurent series on an annulus around the unit circle.

A series is stored by its coefficients c_k for k in [-N, N]. Pointwise
operations that are not polynomial (division, exponentials) go through
values on M equispaced nodes of |z| = 1 and a discrete Fourier transform
back to coefficients. Mass that falls outside the window is recorded as
``spill`` so that callers can tell a resolved result from a truncated one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import UnderResolved

SPILL_THRESHOLD = 1e-10


def close(a, b, tol):
    """Mixed absolute/relative comparison |a-b| <= tol (1 + max(|a|, |b|))."""
    a = np.asarray(a)
    b = np.asarray(b)
    scale = 1.0 + np.maximum(np.abs(a), np.abs(b))
    return bool(np.all(np.abs(a - b) <= tol * scale))


@dataclass(frozen=True)
class TruncationParams:
    """Truncation order N, quadrature size M and default tolerance."""

    N: int = 32
    M: int = 256
    tol: float = 1e-10

    def __post_init__(self):
        if self.N < 0:
            raise ValueError("N must be non-negative")
        if self.M < 4 * self.N + 1:
            raise ValueError(f"M={self.M} must be at least 4N+1={4 * self.N + 1}")
        if not self.tol > 0:
            raise ValueError("tol must be positive")

    def nodes(self):
        return unit_nodes(self.M)


def unit_nodes(M):
    return np.exp(2j * np.pi * np.arange(M) / M)


def _relative_spill(kept, dropped):
    if dropped.size == 0:
        return 0.0
    d = float(np.max(np.abs(dropped)))
    if d == 0.0:
        return 0.0
    k = float(np.max(np.abs(kept))) if kept.size else 0.0
    return d / max(k, 1e-300)


@dataclass(frozen=True, eq=False)
class LaurentSeries:
    """Coefficients ``coeffs[k + N]`` of z^k for k = -N..N."""

    coeffs: np.ndarray
    spill: float = field(default=0.0)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 1 or c.size % 2 != 1:
            raise ValueError("coefficient vector must have odd length 2N+1")
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    # construction ---------------------------------------------------------

    @property
    def N(self) -> int:
        return (self.coeffs.size - 1) // 2

    @classmethod
    def zeros(cls, N):
        return cls(np.zeros(2 * N + 1, dtype=complex))

    @classmethod
    def constant(cls, c, N):
        return cls.from_dict({0: c}, N)

    @classmethod
    def monomial(cls, k, N, c=1.0):
        return cls.from_dict({k: c}, N)

    @classmethod
    def from_dict(cls, terms, N):
        c = np.zeros(2 * N + 1, dtype=complex)
        spill = 0.0
        for k, val in terms.items():
            if abs(k) > N:
                spill = max(spill, abs(val))
                continue
            c[k + N] += val
        if spill:
            spill /= max(float(np.max(np.abs(c))), 1e-300)
        return cls(c, spill)

    @classmethod
    def from_values(cls, values, N):
        """Re-expand samples on the M-th roots of unity, keeping |k| <= N."""
        values = np.asarray(values, dtype=complex)
        M = values.size
        if M < 2 * N + 1:
            raise ValueError("need at least 2N+1 samples")
        a = np.fft.fft(values) / M
        idx = np.arange(-N, N + 1) % M
        kept = a[idx]
        mask = np.ones(M, dtype=bool)
        mask[idx] = False
        return cls(kept, _relative_spill(kept, a[mask]))

    @classmethod
    def from_function(cls, func, N, M=None):
        M = M or 8 * N + 8
        return cls.from_values(func(unit_nodes(M)), N)

    # access ---------------------------------------------------------------

    def coef(self, k):
        if abs(k) > self.N:
            return 0j
        return complex(self.coeffs[k + self.N])

    def degrees(self):
        return np.arange(-self.N, self.N + 1)

    def edge_ratio(self):
        m = float(np.max(np.abs(self.coeffs)))
        if m == 0.0:
            return 0.0
        return max(abs(self.coeffs[0]), abs(self.coeffs[-1])) / m

    def is_resolved(self, threshold=SPILL_THRESHOLD):
        return self.spill <= threshold and self.edge_ratio() <= threshold

    @property
    def under_resolved(self):
        return not self.is_resolved()

    def resize(self, N):
        """Zero-pad or truncate to order N (truncation records spill)."""
        if N == self.N:
            return self
        if N > self.N:
            c = np.zeros(2 * N + 1, dtype=complex)
            c[N - self.N:N + self.N + 1] = self.coeffs
            return LaurentSeries(c, self.spill)
        kept = self.coeffs[self.N - N:self.N + N + 1]
        dropped = np.concatenate([self.coeffs[:self.N - N], self.coeffs[self.N + N + 1:]])
        return LaurentSeries(kept, max(self.spill, _relative_spill(kept, dropped)))

    # projections ----------------------------------------------------------

    def _masked(self, keep):
        c = np.where(keep, self.coeffs, 0)
        return LaurentSeries(c, self.spill)

    def geq(self, p):
        return self._masked(self.degrees() >= p)

    def leq(self, p):
        return self._masked(self.degrees() <= p)

    def gt(self, p):
        return self.geq(p + 1)

    def lt(self, p):
        return self.leq(p - 1)

    def project(self, mode, p):
        """``mode`` is 'geq', 'leq' or 'single'."""
        if mode == "geq":
            return self.geq(p)
        if mode == "leq":
            return self.leq(p)
        if mode == "single":
            return self.coef(p)
        raise ValueError(f"unknown projection mode {mode!r}")

    # arithmetic -----------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, LaurentSeries):
            if other.N != self.N:
                other = other.resize(self.N)
            return other
        return LaurentSeries.constant(complex(other), self.N)

    def __add__(self, other):
        o = self._coerce(other)
        return LaurentSeries(self.coeffs + o.coeffs, max(self.spill, o.spill))

    __radd__ = __add__

    def __neg__(self):
        return LaurentSeries(-self.coeffs, self.spill)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, LaurentSeries):
            return mul(self, other)
        return LaurentSeries(self.coeffs * complex(other), self.spill)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, LaurentSeries):
            return divide(self, other)
        return LaurentSeries(self.coeffs / complex(other), self.spill)

    def shift(self, k):
        """Multiply by z^k."""
        N = self.N
        c = np.zeros(2 * N + 1, dtype=complex)
        dropped = []
        for j, val in zip(self.degrees(), self.coeffs):
            t = j + k
            if abs(t) <= N:
                c[t + N] = val
            elif val != 0:
                dropped.append(val)
        return LaurentSeries(c, max(self.spill, _relative_spill(c, np.array(dropped))))

    def derivative(self):
        k = self.degrees()
        return LaurentSeries(k * self.coeffs, self.spill).shift(-1)

    def z_derivative(self):
        """z d/dz, which keeps the window."""
        return LaurentSeries(self.degrees() * self.coeffs, self.spill)

    def conj_reflect(self):
        return LaurentSeries(self.coeffs[::-1], self.spill)

    # evaluation -----------------------------------------------------------

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        N = self.N
        pos = np.zeros_like(z)
        for c in self.coeffs[:N:-1]:
            pos = pos * z + c
        neg = np.zeros_like(z)
        inv = 1.0 / z
        for c in self.coeffs[:N]:
            neg = neg * inv + c
        out = pos * z + neg * inv + self.coeffs[N]
        return out if out.ndim else complex(out)

    def values(self, M):
        """Samples on the M-th roots of unity (requires M >= 2N+1)."""
        if M < 2 * self.N + 1:
            raise ValueError("M too small for this series")
        a = np.zeros(M, dtype=complex)
        a[self.degrees() % M] = self.coeffs
        return np.fft.ifft(a) * M

    def contour_mean(self):
        """(1/2 pi i) \\oint f(z) dz/z, i.e. the z^0 coefficient."""
        return self.coef(0)

    def quadrature_mean(self, M):
        return complex(np.mean(self.values(M)))

    def sup_norm(self, M=None):
        M = M or 4 * self.N + 4
        return float(np.max(np.abs(self.values(M))))

    def max_abs(self):
        return float(np.max(np.abs(self.coeffs)))

    # serialization --------------------------------------------------------

    def to_json(self):
        return {"N": self.N, "coeffs": [[float(c.real), float(c.imag)] for c in self.coeffs]}

    @classmethod
    def from_json(cls, data):
        N = int(data["N"])
        c = np.array([complex(a, b) for a, b in data["coeffs"]])
        if c.size != 2 * N + 1:
            raise ValueError("coefficient list does not match N")
        return cls(c)

    def __repr__(self):
        nz = [(int(k), c) for k, c in zip(self.degrees(), self.coeffs) if abs(c) > 1e-14]
        body = " + ".join(f"({c:.6g})z^{k}" for k, c in nz[:8])
        more = " + ..." if len(nz) > 8 else ""
        return f"LaurentSeries(N={self.N}: {body or '0'}{more})"


def mul(f, g, strict=False, threshold=SPILL_THRESHOLD):
    """Convolution truncated to [-N, N]; spill is recorded, or raised when strict."""
    if f.N != g.N:
        N = max(f.N, g.N)
        f, g = f.resize(N), g.resize(N)
    N = f.N
    full = np.convolve(f.coeffs, g.coeffs)  # degrees -2N..2N
    kept = full[N:3 * N + 1]
    dropped = np.concatenate([full[:N], full[3 * N + 1:]])
    spill = max(f.spill, g.spill, _relative_spill(kept, dropped))
    if strict and spill > threshold:
        raise UnderResolved(f"product spill {spill:.3e} exceeds {threshold:.1e}")
    return LaurentSeries(kept, spill)


def grid_apply(func, *series, N=None, M=None):
    """Apply a pointwise function to series values on the grid and re-expand."""
    N = N if N is not None else max(s.N for s in series)
    M = M or max(8 * N, 256)
    vals = [s.values(M) for s in series]
    out = LaurentSeries.from_values(func(*vals), N)
    return LaurentSeries(out.coeffs, max([out.spill] + [s.spill for s in series]))


def divide(f, g, M=None):
    return grid_apply(lambda a, b: a / b, f, g, M=M)


def reciprocal(g, M=None):
    return grid_apply(lambda b: 1.0 / b, g, M=M)


def exp(f, scale=1.0, M=None):
    return grid_apply(lambda a: np.exp(scale * a), f, M=M)
