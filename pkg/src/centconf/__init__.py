"""Planar N-body central configurations for homogeneous potentials A >= 2.

Library layout:

* ``core``      -- objective f, gradient, Hessian, finite differences, spectra
* ``polygon``   -- exact block spectra of the regular N-gon, bifurcation exponents
* ``search``    -- multi-start discovery, classification, multiplicities
* ``collinear`` -- the unique collinear configuration per mass ordering
* ``morse``     -- integer Morse/Poincare polynomial bookkeeping
* ``rigor``     -- interval arithmetic, exclusion and full-rank certificates
* ``cli``       -- the ``centconf`` command-line tool
"""

__version__ = "0.1.0"

from .core import (
    CollisionError,
    Configuration,
    ConvergenceError,
    PotentialModel,
    SpectrumResult,
    gradient_f,
    hessian_f,
    moment_of_inertia,
    mutual_distance,
    objective_f,
    potential_energy,
    symmetric_eigenvalues,
)
from .morse import IntPolynomial, morse_consistency, morse_polynomial, poincare_polynomial
from .polygon import (
    PolygonSpectrum,
    block_diagonals,
    eigenvalue_pair,
    find_bifurcation,
    pade_estimate,
    polygon_morse_index,
    polygon_radius,
    polygon_spectrum,
    unit_polygon_distance,
    vortex_closed_forms,
)
from .search import CriticalPoint, SurveyResult, classify, refine, survey

__all__ = [
    "CollisionError",
    "Configuration",
    "ConvergenceError",
    "CriticalPoint",
    "IntPolynomial",
    "PolygonSpectrum",
    "PotentialModel",
    "SpectrumResult",
    "SurveyResult",
    "block_diagonals",
    "classify",
    "eigenvalue_pair",
    "find_bifurcation",
    "gradient_f",
    "hessian_f",
    "moment_of_inertia",
    "morse_consistency",
    "morse_polynomial",
    "mutual_distance",
    "objective_f",
    "pade_estimate",
    "poincare_polynomial",
    "polygon_morse_index",
    "polygon_radius",
    "polygon_spectrum",
    "potential_energy",
    "refine",
    "survey",
    "symmetric_eigenvalues",
    "unit_polygon_distance",
    "vortex_closed_forms",
]
