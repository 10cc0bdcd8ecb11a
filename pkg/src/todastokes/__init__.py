"""Numerical verification toolkit for the Frobenius manifold of the 2D Toda hierarchy.

Modules: laurent (truncated Laurent series), manifold (points, product,
metric), canonical (canonical coordinates and Psi), dubrovin (formal
solutions of the deformed flatness equation), integral (contour-integral
solutions and their asymptotics), specfun (Bessel, 2F1 on the cover),
resurgence (Borel resummation and Stokes data) and report/cli.
"""

__version__ = "0.1.0"
