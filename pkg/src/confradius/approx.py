"""The two conventional shortcuts and how much they overestimate.

* chi-squared: pretend every principal sigma equals the largest one, so the
  squared radius is chi-squared with ``dim`` degrees of freedom.
* diagonal sum: scale ``sqrt(trace(cov))`` by the 1D factor (the HDOP/PDOP
  style computation).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from confradius.eigen import CovarianceMatrix, ShapeRatios, decompose, ratios
from confradius.errors import DimensionMismatch
from confradius.exact import (
    FactorResult,
    Method,
    chi2_2d_value,
    factor,
    factor_1d,
    factor_3d_equal_sigma,
)
from confradius.special import validate_probability


@dataclass(frozen=True)
class ComparisonReport:
    """Exact factor next to both approximations, all in units of sigma_x.

    ``diagonal_sum`` is the diagonal-sum *radius* divided by sigma_x so it
    can be compared with the factors directly. Overestimations are signed
    fractions (``approx / exact - 1``), never clamped: below roughly 79 %
    confidence the diagonal sum can fall short of the exact radius.
    """

    exact: FactorResult
    chi_sq: FactorResult
    diagonal_sum: float
    sigma_x: float

    @property
    def overestimation_chi_sq(self) -> float:
        return self.chi_sq.factor / self.exact.factor - 1.0

    @property
    def overestimation_diagonal(self) -> float:
        return self.diagonal_sum / self.exact.factor - 1.0


def chi2_factor(dim: int, confidence: float) -> FactorResult:
    """Equal-sigma factor for 2 or 3 degrees of freedom (2.447 / 2.795 at 95 %)."""
    p = validate_probability(confidence)
    if dim == 2:
        return FactorResult(chi2_2d_value(p), Method.CHI_SQUARED, p, ShapeRatios.planar(1.0))
    if dim == 3:
        f = factor_3d_equal_sigma(p).factor
        return FactorResult(f, Method.CHI_SQUARED, p, ShapeRatios.spatial(1.0, 1.0))
    raise DimensionMismatch(f"chi-squared approximation needs dim 2 or 3, got {dim!r}")


def diagonal_sum_radius(cov: CovarianceMatrix, confidence: float) -> float:
    """``factor_1d(p) * sqrt(trace(cov))`` in the covariance's length units."""
    return factor_1d(confidence).factor * math.sqrt(cov.trace)


def radius(cov: CovarianceMatrix, confidence: float, method: str = "exact") -> float:
    """Confidence radius in the covariance's length units.

    ``method`` is one of ``"exact"``, ``"chisq"`` or ``"diagonal"``.
    """
    p = validate_probability(confidence)
    if method == "diagonal":
        return diagonal_sum_radius(cov, p)
    spectrum = decompose(cov)
    if method == "exact":
        f = factor(ratios(spectrum), p).factor
    elif method == "chisq":
        f = factor_1d(p).factor if cov.dim == 1 else chi2_factor(cov.dim, p).factor
    else:
        raise ValueError(f"unknown method {method!r}")
    return spectrum.sigma_x * f


def compare(cov: CovarianceMatrix, confidence: float) -> ComparisonReport:
    """Run the exact method and both approximations on ``cov``."""
    p = validate_probability(confidence)
    if cov.dim not in (2, 3):
        raise DimensionMismatch("comparison is defined for 2D and 3D covariances")
    spectrum = decompose(cov)
    exact = factor(ratios(spectrum), p)
    chi = chi2_factor(cov.dim, p)
    diag = diagonal_sum_radius(cov, p) / spectrum.sigma_x
    return ComparisonReport(exact=exact, chi_sq=chi, diagonal_sum=diag, sigma_x=spectrum.sigma_x)


def compare_shape(shape: ShapeRatios, confidence: float) -> ComparisonReport:
    """Same as :func:`compare` for a unit-sigma_x covariance with the given shape."""
    cov = CovarianceMatrix.diagonal([s * s for s in shape.unit_sigmas()])
    return compare(cov, confidence)
