"""Exact confidence radii for zero-mean Gaussian errors in 1, 2 and 3 dimensions.

Typical use::

    from confradius import CovarianceMatrix, radius
    radius(CovarianceMatrix([[4.0, 0.0], [0.0, 1.0]]), 0.95)
"""
from confradius.approx import ComparisonReport, chi2_factor, compare, diagonal_sum_radius, radius
from confradius.eigen import CovarianceMatrix, EigenSpectrum, ShapeRatios, decompose, ratios
from confradius.exact import (
    FactorResult,
    Method,
    factor,
    factor_1d,
    factor_2d,
    factor_3d,
    factor_3d_equal_sigma,
    prob,
    prob_1d,
    prob_2d,
    prob_3d,
)

__all__ = [
    "ComparisonReport",
    "CovarianceMatrix",
    "EigenSpectrum",
    "FactorResult",
    "Method",
    "ShapeRatios",
    "chi2_factor",
    "compare",
    "decompose",
    "diagonal_sum_radius",
    "factor",
    "factor_1d",
    "factor_2d",
    "factor_3d",
    "factor_3d_equal_sigma",
    "prob",
    "prob_1d",
    "prob_2d",
    "prob_3d",
    "radius",
    "ratios",
]
__version__ = "0.1.0"
