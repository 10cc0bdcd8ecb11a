"""Run configuration, verification suites and machine-readable reports.

A run is described by a :class:`RunConfig` (read from a key=value file or
built directly). :func:`run_suite` executes the selected suites and returns a
:class:`Report` whose records carry {name, paper_ref, measured, tolerance,
pass}. ``paper_ref`` is a short description of the identity being checked,
or "plumbing". Reports are deterministic: fixed iteration order, seeded
random vectors and no timestamps.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import platform
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigInvalid, MissingSeries
from .laurent import LaurentSeries, TruncationParams, unit_nodes
from .manifold import ManifoldPoint

SCHEMA = "toda-stokes-report/1"
SUITES = ("spectrum", "metric", "formal", "integral", "resurgence", "stokes", "specfun-selftest")
PLOTS = ("slopes", "sector-map", "p-grid")
_INT_KEYS = ("N", "M", "jobs", "seed")
_KNOWN_KEYS = ("N", "M", "tol", "point", "suites", "out", "jobs", "seed")


# ---------------------------------------------------------------------------
# configuration


@dataclass
class RunConfig:
    truncation: TruncationParams = field(default_factory=TruncationParams)
    point: str = "special:0,0.5"
    suites: tuple = SUITES
    tolerances: dict = field(default_factory=dict)
    out: str | None = None
    jobs: int = 1
    seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self):
        if isinstance(self.suites, str):
            self.suites = tuple(s.strip() for s in self.suites.split(",") if s.strip())
        self.suites = tuple(self.suites)
        if not self.suites:
            raise ConfigInvalid("empty suite selection")
        unknown = [s for s in self.suites if s not in SUITES]
        if unknown:
            raise ConfigInvalid(f"unknown suites {unknown}; choose from {list(SUITES)}")
        if not isinstance(self.jobs, int) or self.jobs < 1:
            raise ConfigInvalid("jobs must be a positive integer")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigInvalid("seed must be a non-negative integer")
        for k, v in self.tolerances.items():
            if not (isinstance(v, (int, float)) and v >= 0 and math.isfinite(v)):
                raise ConfigInvalid(f"tolerance override {k} must be a non-negative number")
        parse_point(self.point, self.truncation)

    @classmethod
    def from_mapping(cls, d):
        d = dict(d)
        unknown = [k for k in d if k not in _KNOWN_KEYS and not k.startswith("tol.")]
        if unknown:
            raise ConfigInvalid(f"unknown configuration keys {unknown}")
        try:
            for k in _INT_KEYS:
                if k in d:
                    d[k] = int(d[k])
            tols = {k[4:]: float(v) for k, v in d.items() if k.startswith("tol.")}
            trunc = TruncationParams(
                N=d.get("N", 32), M=d.get("M", 256), tol=float(d.get("tol", 1e-10))
            )
        except (TypeError, ValueError) as exc:
            raise ConfigInvalid(str(exc)) from exc
        return cls(
            truncation=trunc,
            point=d.get("point", "special:0,0.5"),
            suites=d.get("suites", SUITES),
            tolerances=tols,
            out=d.get("out"),
            jobs=d.get("jobs", 1),
            seed=d.get("seed", 0),
        )

    @classmethod
    def from_file(cls, path, overrides=None):
        return cls.from_mapping({**read_key_values(path), **(overrides or {})})

    def to_json(self):
        t = self.truncation
        return {
            "N": t.N,
            "M": t.M,
            "tol": t.tol,
            "point": self.point,
            "suites": list(self.suites),
            "tolerances": dict(sorted(self.tolerances.items())),
            "jobs": self.jobs,
            "seed": self.seed,
        }


def read_key_values(path):
    """Parse a key=value file; blank lines and '#' comments are ignored."""
    out = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc
    for n, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        # record names such as "formal.bessel_terms[p=1]" carry '=' inside brackets
        m = re.match(r"((?:[^=\[]|\[[^\]]*\])+)=(.*)$", line)
        if m is None:
            raise ConfigInvalid(f"{path}:{n}: expected key=value")
        out[m.group(1).strip()] = m.group(2).strip()
    return out


def parse_point(spec, params):
    """'special:v,e_u' or the path of a JSON point file."""
    if spec.startswith("special:"):
        try:
            v, e_u = (complex(x.strip().replace("i", "j")) for x in spec[8:].split(","))
        except ValueError as exc:
            raise ConfigInvalid(f"bad preset {spec!r}; expected special:v,e_u") from exc
        if e_u == 0:
            raise ConfigInvalid("e^u must be nonzero")
        return ManifoldPoint.special(v, e_u, params)
    if not os.path.exists(spec):
        raise ConfigInvalid(f"point file {spec!r} not found")
    try:
        with open(spec) as fh:
            return ManifoldPoint.from_json(json.load(fh), params)
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigInvalid(f"bad point file {spec!r}: {exc}") from exc


def is_special(pt):
    return bool(np.max(np.abs((pt.w - LaurentSeries.monomial(1, pt.N)).coeffs)) == 0)


# ---------------------------------------------------------------------------
# records


def _finite(x):
    x = float(x)
    return x if math.isfinite(x) else None


class _Recorder:
    def __init__(self, suite, tolerances):
        self.suite = suite
        self.tolerances = tolerances
        self.records = []
        self.data = {}
        self.series = {}

    def add(self, name, paper_ref, measured, tolerance):
        name = f"{self.suite}.{name}"
        tol = float(self.tolerances.get(name, tolerance))
        m = _finite(measured)
        ok = m is not None and m <= tol
        self.records.append({"name": name, "paper_ref": paper_ref, "measured": m, "tolerance": tol, "pass": ok})

    def fail(self, name, paper_ref, exc):
        self.records.append({
            "name": f"{self.suite}.{name}",
            "paper_ref": paper_ref,
            "measured": None,
            "tolerance": None,
            "pass": False,
            "error": f"{type(exc).__name__}: {exc}",
        })


def _rng(seed, suite):
    return np.random.default_rng([seed, SUITES.index(suite)])


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


# ---------------------------------------------------------------------------
# suites


def _suite_spectrum(pt, rec, rng, n_random=5):
    from .canonical import (
        canonical_spectrum,
        find_critical_set,
        eigen_residuals,
        key_lemma_residual,
        psi_forward,
        psi_inverse,
        representative_residual,
    )
    from .manifold import apply_U, random_triple

    crit = find_critical_set(pt)
    rec.data["critical_set"] = crit.to_json()
    up, ui, ub = canonical_spectrum(pt, crit)
    e = [0.0, 0.0, 0.0]
    rt = rt2 = diag = kl = rep = 0.0
    for _ in range(n_random):
        X = random_triple(rng, pt.N)
        e = [max(a, b / X.max_abs()) for a, b in zip(e, eigen_residuals(pt, crit, X, unit_nodes(64)))]
        d = psi_forward(pt, X, crit)
        back = psi_inverse(pt, crit, d)
        rt = max(rt, (back - X).max_abs() / X.max_abs())
        rt2 = max(rt2, (psi_forward(pt, back, crit) - d).max_abs() / d.max_abs())
        diag = max(diag, (psi_forward(pt, apply_U(pt, X), crit) - d.scaled(up, ui, ub)).max_abs() / d.max_abs())
        s = complex(rng.normal(), rng.normal())
        kl = max(kl, key_lemma_residual(pt, s, X).sup_norm() / X.norm())
        for c in crit.outer:
            rep = max(rep, representative_residual(pt, c, X, True) / X.max_abs())
        for c in crit.inner:
            rep = max(rep, representative_residual(pt, c, X, False) / X.max_abs())
    rec.add("eigen_du_p", "eigen-equation of du_p on 64 grid points", e[0], 1e-9)
    rec.add("eigen_du_i", "eigen-equation of du_i at outer critical points", e[1], 1e-9)
    rec.add("eigen_dubar_j", "eigen-equation of dubar_j at inner critical points", e[2], 1e-9)
    rec.add("psi_inverse_psi", "Psi^-1 after Psi is the identity", rt, 1e-8)
    rec.add("psi_psi_inverse", "Psi after Psi^-1 is the identity", rt2, 1e-8)
    rec.add("psi_diagonalizes_U", "Psi U Psi^-1 is diagonal with the canonical values", diag, 1e-8)
    rec.add("key_lemma", "key lemma for d lambda_sigma of U X", kl, 1e-9)
    rec.add("pole_representatives", "metric representatives of du_i and dubar_j", rep, 1e-9)


def _suite_metric(pt, rec, rng, n_random=5):
    from .canonical import find_critical_set, metric_canonical, psi_forward, psi_inverse, PsiData
    from .manifold import (
        TangentTriple,
        apply_U,
        apply_U_product,
        apply_V,
        check_conditions,
        metric,
        product,
        random_triple,
    )

    cond = check_conditions(pt)
    rec.data["conditions"] = cond.as_dict()
    rec.add("conditions", "admissibility conditions T1-T5 (failures counted)", 0.0 if cond.all_pass else 1.0, 0.0)
    N = pt.N
    comm = assoc = unit = compat = uform = vskew = usym = 0.0
    crit = find_critical_set(pt)
    diag = 0.0
    for _ in range(n_random):
        X, Y, Z = (random_triple(rng, N) for _ in range(3))
        XY = product(pt, X, Y)
        comm = max(comm, (XY - product(pt, Y, X)).max_abs() / XY.max_abs())
        a = product(pt, XY, Z)
        b = product(pt, X, product(pt, Y, Z))
        assoc = max(assoc, (a - b).max_abs() / a.max_abs())
        unit = max(unit, (product(pt, TangentTriple.unit(N), X) - X).max_abs() / X.max_abs())
        f1 = metric(pt, XY, Z)
        compat = max(compat, _rel(f1, metric(pt, X, product(pt, Y, Z))))
        U1 = apply_U(pt, X)
        uform = max(uform, (U1 - apply_U_product(pt, X)).max_abs() / U1.max_abs())
        scale = abs(metric(pt, X, Y)) + 1.0
        usym = max(usym, abs(metric(pt, U1, Y) - metric(pt, X, apply_U(pt, Y))) / scale)
        vskew = max(vskew, abs(metric(pt, apply_V(pt, X), Y) + metric(pt, X, apply_V(pt, Y))) / scale)
        m2 = metric(pt, X, Y)
        diag = max(diag, _rel(metric_canonical(pt, crit, psi_forward(pt, X, crit), psi_forward(pt, Y, crit)), m2))
    rec.add("commutativity", "product is commutative", comm, 1e-9)
    rec.add("associativity", "product is associative", assoc, 1e-9)
    rec.add("unit", "e = (0, 1, 0) is the unit", unit, 1e-9)
    rec.add("frobenius_compatibility", "eta(X o Y, Z) = eta(X, Y o Z)", compat, 1e-9)
    rec.add("euler_product", "closed formula for U agrees with E o X", uform, 1e-9)
    rec.add("U_selfadjoint", "U is self-adjoint for eta", usym, 1e-9)
    rec.add("V_skew", "V is skew-adjoint for eta", vskew, 1e-9)
    rec.add("canonical_metric", "eta in canonical coordinates is diagonal and equals eta", diag, 1e-8)
    # cross-slot zeros between Psi-data supported on disjoint slots
    n, nb, M = crit.n, crit.nbar, pt.M
    blocks = []
    rng_y = rng.normal(size=M) + 1j * rng.normal(size=M)
    smooth = pt.grid(pt.from_grid(rng_y).resize(4))
    blocks.append(PsiData(smooth, np.zeros(n, complex), np.zeros(nb, complex)))
    for i in range(n):
        blocks.append(PsiData(np.zeros(M, complex), np.eye(n, dtype=complex)[i], np.zeros(nb, complex)))
    for j in range(nb):
        blocks.append(PsiData(np.zeros(M, complex), np.zeros(n, complex), np.eye(nb, dtype=complex)[j]))
    if len(blocks) > 1:
        tri = [psi_inverse(pt, crit, b) for b in blocks]
        cross = max(
            abs(metric(pt, tri[a], tri[b])) for a in range(len(tri)) for b in range(a + 1, len(tri))
        )
        rec.add("cross_slot_zeros", "eta vanishes between distinct canonical slots", cross, 1e-10)


def _suite_formal(pt, rec, rng):
    from .canonical import find_critical_set
    from .dubrovin import (
        bessel_terms,
        formal_continuous,
        formal_discrete,
        left_inverse_residual,
        recursion_residuals,
    )

    ps = {"1": 1.0, "i": 1j, "exp(i pi/5)": complex(math.cos(math.pi / 5), math.sin(math.pi / 5))}
    for label, p in ps.items():
        inv, unit = left_inverse_residual(pt, p, rng)
        rec.add(f"left_inverse[p={label}]", "A_p is a left inverse of u_p - U", inv, 1e-9)
        rec.add(f"left_inverse_kills_unit[p={label}]", "A_p annihilates the unit field", unit, 1e-9)
        sol = formal_continuous(pt, p, 8)
        rec.add(f"continuous_recursion[p={label}]", "continuous formal recursion, K = 8",
                max(recursion_residuals(pt, sol, rng)), 1e-9)
        if is_special(pt):
            sol = formal_continuous(pt, p, 8, "bessel")
            bt = bessel_terms(pt, p, 8)
            err = max((a - b).max_abs() / max(1.0, b.max_abs()) for a, b in zip(sol.terms, bt))
            rec.add(f"bessel_terms[p={label}]", "formal solution with Bessel constants in closed form", err, 1e-9)
    crit = find_critical_set(pt)
    for which, pts in (("outer", crit.outer), ("inner", crit.inner)):
        for idx in range(len(pts)):
            sol = formal_discrete(pt, which, idx, 8, crit=crit)
            rec.add(f"discrete_recursion[{which}={idx}]", "discrete formal recursion, K = 8",
                    max(recursion_residuals(pt, sol, rng)), 1e-9)


def _suite_integral(pt, rec, rng):
    from .canonical import canonical_value, sigma_at
    from .dubrovin import dubrovin_residual
    from .integral import (
        bessel_closed_forms,
        dominant_index,
        dy_functional,
        dy_sigma,
        incompleteness_witness,
        asymptotic_coeffs_residue,
        saddle_coeffs,
        saddle_coeffs_for,
        saddle_for,
        slope_test,
    )
    from .errors import AntiStokesDirection
    from .manifold import TangentTriple, random_triple
    from .resurgence import phi_coefficient
    from .specfun import CoverComplex

    f = LaurentSeries.monomial(2, 4)
    g = LaurentSeries.constant(1.0, 4)
    gauss = saddle_coeffs(f, g, 0.0, 3, 0.0, 1j)
    err = max(abs(gauss[0] - 1j * math.sqrt(math.pi)), *(abs(c) for c in gauss[1:]))
    rec.add("gaussian_calibration", "saddle lemma on e^{zeta z^2}", err, 1e-12)
    rec.data["saddle_normalization"] = {
        "gaussian_d0": "i sqrt(pi) along tangent i (sqrt(pi) per unit tangent)",
        "d_n": "sqrt(p / e^u) / (2 sqrt(pi)) * r^k(X)",
        "d_n_on_e_m": "(1/2) sqrt(p / e^u) f_m phi_k^|m|(p), f_m = sigma p^m (m >= 1), (sigma - 1) p^m (m <= 0)",
    }

    p = 1.0
    s = complex(sigma_at(pt, p))
    X = random_triple(rng, pt.N, 4)
    worst = 0.0
    for z in (CoverComplex(3.0, 0.4), CoverComplex(2.0, 2.0)):
        r, sc = dubrovin_residual(pt, dy_functional(pt, s), z, X, return_scale=True)
        worst = max(worst, abs(r) / sc)
    rec.add("dubrovin_dy", "dy_sigma solves the deformed flatness equation on two rays", worst, 1e-6)

    W = incompleteness_witness(pt, 2.0)
    rec.add("incompleteness_witness", "nonzero vector annihilated by dy_sigma(p) for all p",
            max(abs(dy_sigma(pt, complex(sigma_at(pt, q)), CoverComplex(2.0, 0.0), W)) for q in unit_nodes(8)),
            1e-8)

    sd = saddle_for(pt, "p", p)
    arg = float(np.angle(p / pt.e_u))
    a = saddle_coeffs_for(pt, sd, X, 4, arg)
    b = asymptotic_coeffs_residue(pt, sd, 4, X, arg)
    rec.add("saddle_vs_residue", "two routes to the asymptotic coefficients", max(_rel(x, y) for x, y in zip(b, a)), 1e-8)

    z_far = CoverComplex(50.0, arg)
    worst = 0.0
    for m in (0, "v"):
        E = TangentTriple.basis(m, pt.N)
        d0 = saddle_coeffs_for(pt, sd, E, 0, arg)[0]
        val = dy_sigma(pt, s, z_far, E, tol=1e-14) * np.exp(-z_far.value * sd.value)
        worst = max(worst, _rel(val, d0))
    rec.add("leading_coefficient_quadrature", "d_0 against e^{-zeta u_p} dy on e_0, e_v at |zeta| = 50", worst, 1e-2)

    if is_special(pt):
        zz = CoverComplex(2.0, 0.3)
        worst = 0.0
        for q in (1.0, 1j, complex(math.cos(math.pi / 5), math.sin(math.pi / 5))):
            sq = complex(sigma_at(pt, q))
            mh = list(range(-8, 9)) + ["v", "u"]
            cf = bessel_closed_forms(pt, q, zz, mh)
            for m in mh:
                quad = dy_sigma(pt, sq, zz, TangentTriple.basis(m, pt.N))
                worst = max(worst, abs(quad - cf[m]) / max(1.0, abs(cf[m])))
        rec.add("bessel_closed_forms", "dy_sigma on e_m (|m| <= 8), e_v, e_u through I_m", worst, 1e-10)
        worst = 0.0
        pref = 0.5 * np.sqrt(p / pt.e_u)
        for m in (-2, 0, 1, 3):
            dn = saddle_coeffs_for(pt, sd, TangentTriple.basis(m, pt.N), 4, arg)
            fm = s * p ** m if m >= 1 else (s - 1) * p ** m
            for k in range(5):
                want = pref * fm * phi_coefficient(p, abs(m), k, pt.e_u)
                worst = max(worst, _rel(dn[k], want))
        rec.add("d_n_vs_phi", "asymptotic coefficients d_n against phi_p^m, n <= 4", worst, 1e-8)

    slopes = {}
    for K in (2, 3):
        slope, radii, errs = slope_test(pt, p, X, K)
        slopes[K] = (radii, errs)
        rec.add(f"asymptotic_slope[K={K}]", f"truncation error slope is -(K+1) (|slope + {K + 1}|)",
                abs(slope + K + 1), 0.3)
    rec.series["slopes"] = {
        "columns": ["log_abs_zeta", "log_error_K2", "log_error_K3"],
        "rows": [[float(np.log(r)), float(np.log(e2)), float(np.log(e3))]
                 for r, e2, e3 in zip(slopes[2][0], slopes[2][1], slopes[3][1])],
    }
    values = [complex(canonical_value(pt, 1.0)), complex(canonical_value(pt, -1.0))]
    rows = []
    for t in np.linspace(-math.pi, math.pi, 72, endpoint=False):
        try:
            idx = dominant_index(values, complex(math.cos(t), math.sin(t)))
        except AntiStokesDirection:
            idx = -1
        rows.append([float(t), idx])
    rec.series["sector-map"] = {"columns": ["arg_zeta", "dominant_index"], "rows": rows}


def _suite_resurgence(pt, rec, rng):
    from .dubrovin import dubrovin_residual
    from .manifold import random_triple
    from .resurgence import (
        borel_coefficients_direct,
        completeness_probe,
        ds_coefficient,
        ds_functional,
        dy_difference_residual,
        hypergeometric_taylor,
        lateral_jump,
        laplace_ray,
        monodromy_residuals,
        phi_series,
        borel,
        reconstruct_triple,
        resummation_slope,
        resummed_closed_form,
        root_test_radius,
        SQRT_PI,
    )
    from .specfun import CoverComplex

    if not is_special(pt):
        raise ValueError("the resurgence suite needs a special point (w = z)")
    E = pt.e_u
    worst = 0.0
    for m in range(6):
        direct = borel_coefficients_direct(1.0, m, 30, E)
        hyp = hypergeometric_taylor(0.5 - m, 0.5 + m, 1.0, 30, 1.0 / (4 * E)) / SQRT_PI
        via = borel(phi_series(1.0, m, 30, E))
        worst = max(worst, max(_rel(x, y) for x, y in zip(direct, hyp)), max(_rel(x, y) for x, y in zip(via, hyp)))
    rec.add("borel_coefficients", "Borel transform of phi is a 2F1 (k <= 30, m <= 5)", worst, 1e-12)
    b = borel_coefficients_direct(1.0, 0, 150, E)
    rec.add("borel_radius", "Borel singularity at 4 e^u / p (relative error of the root test)",
            _rel(root_test_radius(b), abs(4 * E)), 1e-2)

    worst = 0.0
    for m in (0, 2):
        zc = CoverComplex(3.0, -math.pi / 4)
        r = laplace_ray(0.0, m, math.pi / 2, zc.value, E)
        worst = max(worst, _rel(r, resummed_closed_form(0.0, m, zc, E)))
    rec.add("ray_vs_closed_form", "Laplace integral along a ray equals the K-Bessel closed form", worst, 1e-8)
    worst = 0.0
    for m in (0, 1):
        lhs, rhs = lateral_jump(0.0, m, CoverComplex(2.0, 0.3), E)
        worst = max(worst, _rel(lhs, -rhs))
    rec.add("lateral_jump", "lateral Borel sums differ by 2i(-1)^m e^{-4 zeta e^u/p} s(phi_{-p}) at eps = 1e-3",
            worst, 1e-6)
    slope, _, _ = resummation_slope(0.0, 1, 2, E)
    rec.add("resummation_slope[K=2]", "resummed function has the formal series as asymptotics (|slope + 3|)",
            abs(slope + 3), 0.3)

    worst = 0.0
    for pa, z in ((0.0, CoverComplex(2.0, math.pi / 6)), (0.7, CoverComplex(3.0, -1.0))):
        worst = max(worst, *monodromy_residuals(pt, pa, z))
    rec.add("ds_monodromy", "ds_p(zeta e^{2 pi i}) = ds_p - 2 ds_{-p} and its partner", worst, 1e-10)
    worst = max(dy_difference_residual(pt, 0.0, CoverComplex(2.0, math.pi / 6)),
                dy_difference_residual(pt, 1.3, CoverComplex(4.0, 2.5)))
    rec.add("dy_is_ds_difference", "dy_sigma(p) = ds_p - ds_{-p}", worst, 1e-10)
    X = random_triple(rng, pt.N, 4)
    r, sc = dubrovin_residual(pt, ds_functional(pt, 0.4), CoverComplex(2.0, 0.3), X, return_scale=True)
    rec.add("dubrovin_ds", "ds_p solves the deformed flatness equation", abs(r) / sc, 1e-6)

    rep = completeness_probe(pt, 2.0, 16, 3)
    rec.data["completeness"] = rep.to_json()
    rec.add("completeness_rank", "columns of <ds_p, e_m> have full rank (deficiency)", rep.cols - rep.rank, 0)
    X = random_triple(rng, pt.N, 3)
    rec.add("reconstruction", "triangular reconstruction of X from p -> <ds_p, X>",
            reconstruct_triple(pt, 2.0, X, 3, 3)[1], 1e-6)

    zeta = CoverComplex(2.0, 0.3)
    mh = list(range(-3, 4)) + ["v", "u"]
    rows = []
    for j in range(16):
        a = 2 * math.pi * j / 16
        row = [a]
        for m in mh:
            c = ds_coefficient(pt, a, zeta, m)
            row += [c.real, c.imag]
        rows.append(row)
    cols = ["arg_p"] + [f"{part}_{m}" for m in mh for part in ("re", "im")]
    rec.series["p-grid"] = {"columns": cols, "rows": rows}


def _suite_stokes(pt, rec, rng):
    from .resurgence import kernel_transpose_ok, stokes_family, stokes_pair

    if not is_special(pt):
        raise ValueError("the Stokes suite needs a special point (w = z)")
    S = stokes_pair(pt, 0.0)
    rec.data["stokes_pair"] = S.to_json()
    rec.add("S_pm_max_entry_error", "S_- = [[1,0],[-2,1]] and S_+ = [[1,-2],[0,1]]", S.max_entry_error, 1e-10)
    rec.add("S_transpose", "S_+ transposed equals S_-", S.transpose_error, 1e-10)
    rec.add("S_monodromy", "S_- S_+^-1 is the monodromy of (ds_p, ds_-p)", S.monodromy_error, 1e-10)
    rec.add("stokes_line_dominance", "dominance switches across the Stokes line (violations)",
            0.0 if S.stokes_line_ok else 1.0, 0.0)
    F = stokes_family(pt, 0.0, 32)
    rec.add("family_kernel_plus", "left family = right family times S_+ kernel on a 32-point p-grid",
            F.residual_plus, 1e-10)
    rec.add("family_kernel_minus", "left family = right family times S_- kernel on a 32-point p-grid",
            F.residual_minus, 1e-10)
    rec.add("family_kernel_transpose", "S_+ and S_- kernels are transposes (violations)",
            0.0 if kernel_transpose_ok(F) else 1.0, 0.0)


def _suite_specfun(pt, rec, rng):
    from .specfun import CoverComplex, gauss_2F1, hyp2f1_log_connection, identity_suite, overlap_discrepancy

    ids = ("rising_factorial", "binomial_vs_2F1", "K_monodromy", "laplace_identity")
    for key, r in zip(ids, identity_suite()):
        rec.add(key, r.name, r.measured, r.tolerance)
    worst = max(overlap_discrepancy(n, CoverComplex(rr, t)) for n in range(4) for rr in (1.6, 2.4) for t in (-1.0, 1.0))
    rec.add("K_overlap", "K_n series and Laplace regimes agree in their overlap", worst, 1e-12)
    worst = 0.0
    for n in range(4):
        for z in (0.5 + 0.1j, 0.6, 0.55 - 0.3j):
            worst = max(worst, _rel(hyp2f1_log_connection(0.5 - n, 0.5 + n, z), gauss_2F1(0.5 - n, 0.5 + n, 1.0, z, "series")))
    rec.add("2F1_lens", "2F1 series and logarithmic connection formula agree", worst, 1e-12)


_SUITE_FUNCS = {
    "spectrum": _suite_spectrum,
    "metric": _suite_metric,
    "formal": _suite_formal,
    "integral": _suite_integral,
    "resurgence": _suite_resurgence,
    "stokes": _suite_stokes,
    "specfun-selftest": _suite_specfun,
}


def _run_one(config, suite):
    rec = _Recorder(suite, config.tolerances)
    try:
        pt = parse_point(config.point, config.truncation)
        _SUITE_FUNCS[suite](pt, rec, _rng(config.seed, suite))
    except Exception as exc:  # suite errors become failing records
        rec.fail("error", "plumbing", exc)
    return {"records": rec.records, "data": rec.data, "series": rec.series}


# ---------------------------------------------------------------------------
# reports


@dataclass
class Report:
    config: dict
    records: list
    data: dict
    series: dict
    environment: dict

    @property
    def passed(self):
        return all(r["pass"] for r in self.records)

    @property
    def exit_code(self):
        return 0 if self.passed else 1

    def to_json(self):
        return {
            "schema": SCHEMA,
            "environment": self.environment,
            "config": self.config,
            "records": self.records,
            "data": self.data,
            "series": self.series,
            "summary": {
                "total": len(self.records),
                "failed": sum(not r["pass"] for r in self.records),
                "pass": self.passed,
            },
        }

    def dumps(self):
        return json.dumps(self.to_json(), indent=2, allow_nan=False) + "\n"

    def summary_table(self):
        w = max([len(r["name"]) for r in self.records] + [4])
        lines = [f"{'name':<{w}}  {'measured':>12}  {'tolerance':>10}  result"]
        for r in self.records:
            m = "error" if r["measured"] is None else f"{r['measured']:.3e}"
            t = "-" if r["tolerance"] is None else f"{r['tolerance']:.1e}"
            lines.append(f"{r['name']:<{w}}  {m:>12}  {t:>10}  {'PASS' if r['pass'] else 'FAIL'}")
            if "error" in r:
                lines.append(f"    {r['error']}")
        lines.append(f"{sum(r['pass'] for r in self.records)}/{len(self.records)} records pass")
        return "\n".join(lines) + "\n"

    def write(self, out_dir):
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "report.json"), "w") as fh:
            fh.write(self.dumps())
        with open(os.path.join(out_dir, "summary.txt"), "w") as fh:
            fh.write(self.summary_table())


def environment_stamp():
    import mpmath
    import scipy

    from . import __version__

    return {
        "package": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "mpmath": mpmath.__version__,
    }


def run_suite(config):
    """Run the configured suites and assemble an ordered report."""
    if not isinstance(config, RunConfig):
        raise ConfigInvalid("run_suite expects a RunConfig")
    config.validate()
    if config.jobs > 1 and len(config.suites) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as ex:
            results = list(ex.map(_run_one, [config] * len(config.suites), config.suites))
    else:
        results = [_run_one(config, s) for s in config.suites]
    records, data, series = [], {}, {}
    for suite, res in zip(config.suites, results):
        records += res["records"]
        if res["data"]:
            data[suite] = res["data"]
        series.update(res["series"])
    report = Report(config.to_json(), records, data, series, environment_stamp())
    if config.out:
        report.write(config.out)
    return report


def emit_plot_data(report, which):
    """CSV text for one of the plot series ('slopes', 'sector-map', 'p-grid')."""
    series = report.series if isinstance(report, Report) else report.get("series", {})
    if which not in PLOTS:
        raise MissingSeries(f"unknown series {which!r}; choose from {list(PLOTS)}")
    if which not in series:
        raise MissingSeries(f"report has no {which!r} series; run the suite that produces it")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(series[which]["columns"])
    for row in series[which]["rows"]:
        w.writerow([repr(float(x)) if isinstance(x, float) else x for x in row])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# single-evaluation outputs for the integral and stokes subcommands


def _pair(c):
    c = complex(c)
    return [c.real, c.imag]


def parse_sigma(spec, pt):
    """'p:ANGLE' selects sigma(e^{i ANGLE}) and its saddle; anything else is a complex sigma."""
    from .integral import saddle_for

    spec = str(spec).strip()
    if spec.startswith("p:"):
        try:
            p = complex(np.exp(1j * float(spec[2:])))
        except ValueError as exc:
            raise ConfigInvalid(f"bad sigma {spec!r}; expected p:ANGLE or a complex number") from exc
        sd = saddle_for(pt, "p", p)
        return sd.sigma, sd
    try:
        return complex(spec.replace("i", "j")), None
    except ValueError as exc:
        raise ConfigInvalid(f"bad sigma {spec!r}; expected p:ANGLE or a complex number") from exc


def integral_rows(pt, sigma="p:0", zeta_arg=None, radii=None, k_max=3, vector="0"):
    """<dy_sigma(zeta), e_vector> along a ray with the asymptotic partial sums.

    Partial sums e^{zeta u_p} sum_{k<=K} d_k zeta^-k (K = 0..k_max) and the
    log-log slopes of |e^{-zeta u_p} value - sum| are given when sigma = sigma(p) is selected
    by 'p:ANGLE'; otherwise they are null.
    """
    from .integral import dy_sigma, saddle_coeffs_for
    from .manifold import TangentTriple
    from .specfun import CoverComplex

    s, sd = parse_sigma(sigma, pt)
    try:
        X = TangentTriple.basis(vector if vector in ("v", "u") else int(vector), pt.N)
    except (ValueError, IndexError) as exc:
        raise ConfigInvalid(f"bad basis vector {vector!r}") from exc
    if zeta_arg is None:
        zeta_arg = float(np.angle(sd.z / pt.e_u)) if sd is not None else 0.0
    radii = np.geomspace(20.0, 80.0, 9) if radii is None else np.asarray(radii, float)
    if k_max < 0 or np.any(radii <= 0):
        raise ConfigInvalid("k-max must be >= 0 and radii positive")
    coeffs = saddle_coeffs_for(pt, sd, X, k_max, zeta_arg) if sd is not None else None
    rows, errs = [], []
    for r in radii:
        z = CoverComplex(float(r), zeta_arg)
        val = dy_sigma(pt, s, z, X, tol=1e-14)
        row = {"zeta": _pair(z.value), "value": _pair(val), "asymptotic_partial_sums": None}
        if coeffs is not None:
            lead = np.exp(z.value * sd.value)
            scaled = np.cumsum([c * z.value ** (-k) for k, c in enumerate(coeffs)])
            row["asymptotic_partial_sums"] = [_pair(x) for x in scaled * lead]
            errs.append(np.abs(val / lead - scaled))
        rows.append(row)
    slopes = None
    if coeffs is not None and len(radii) > 1:
        E = np.array(errs)
        slopes = {str(K): float(np.polyfit(np.log(radii), np.log(E[:, K]), 1)[0]) for K in range(k_max + 1)}
    return {"sigma": _pair(s), "zeta_arg": zeta_arg, "vector": str(vector), "rows": rows, "slopes": slopes}


def stokes_summary(pt, p_arg=0.0, theta=None, eps=0.1, zeta_abs=5.0):
    """S_+, S_- across the line of argument theta and the kernel pairs of the 32-point family."""
    from .resurgence import stokes_family, stokes_pair

    S = stokes_pair(pt, p_arg, theta, eps, zeta_abs)
    F = stokes_family(pt, 0.0 if theta is None else theta, 32, zeta_abs, eps)
    return {
        "S_plus": [[_pair(x) for x in row] for row in S.S_plus],
        "S_minus": [[_pair(x) for x in row] for row in S.S_minus],
        "max_entry_error": S.max_entry_error,
        "theta_in_range": S.theta_in_range,
        "kernel_pairs": {"plus": F.kernel_pairs_plus, "minus": F.kernel_pairs_minus},
    }
