"""Numerical toolkit for infinitesimal bendings of surfaces in R^3.

Infinitesimal isometric deformations (f, g) of surfaces in R^3 are studied
through totally isotropic immersions into the (4,4)-quadric.  Everything is
differentiated exactly with truncated Taylor jets (:mod:`darboux.jets`).
"""

__version__ = "0.1.0"

from . import errors, jets, linalg, octonion, quadric, surfaces  # noqa: F401
