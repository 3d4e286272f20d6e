"""Exact confidence factors for principal-axis Gaussian errors.

For a zero-mean Gaussian error with principal standard deviations
``sigma_x >= sigma_y (>= sigma_z)``, the probability of lying inside the
interval/circle/sphere of radius ``e`` depends only on ``e / sigma_x`` and
the shape ratios. The functions here evaluate that probability and invert it
to the *factor* ``e / sigma_x`` for a requested confidence level.

Probabilities are evaluated through their complement (the tail mass outside
the ball), so they stay accurate when the confidence is close to one:

* 2D: ``1 - p = (2/pi) * int_0^{pi/2} exp(-X^2 / (2 (cos^2 t + r^2 sin^2 t))) dt``
  with ``X = e / sigma_x``. This is the angular integral of the elliptical
  tail after the substitution ``tan(phi) = r tan(t)``, which removes the
  ``1/r`` spike of the plain polar form.
* 3D: ``1 - p = (2/pi) * int int sin(theta) Q(X^2 / (2 B)) dphi dtheta`` over
  one octant, where ``Q`` is the regularized upper incomplete gamma at 3/2
  (the radial integral done in closed form) and
  ``B = sin^2(theta) (cos^2(phi) + m^2 sin^2(phi)) + n^2 cos^2(theta)``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from confradius.eigen import ShapeRatios
from confradius.errors import DimensionMismatch, DomainError
from confradius.special import (
    DEFAULT_QUADRATURE,
    GAMMA_3HALF,
    QuadratureSpec,
    erf_inv,
    find_root,
    integrate,
    integrate_rows,
    lower_incomplete_gamma_3half,
    upper_gamma_3half_regularized,
    validate_probability,
)

# Ratios below this are treated as exactly zero and the dimension is reduced.
DEGENERATE_RATIO = 1e-6
ROOT_TOL = 1e-9
_BRACKET_PAD = 1e-7
_SQRT2 = math.sqrt(2.0)
_HALF_PI = 0.5 * math.pi


class Method(str, enum.Enum):
    EXACT_1D = "exact-1d"
    EXACT_2D = "exact-2d"
    EXACT_3D = "exact-3d"
    CHI_SQUARED = "chi-squared"
    DIAGONAL_SUM = "diagonal-sum"


@dataclass(frozen=True)
class FactorResult:
    """A dimensionless multiplier on sigma_x and how it was obtained."""

    factor: float
    method: Method
    confidence: float
    ratios: ShapeRatios


def _check_radius(e: float) -> float:
    e = float(e)
    if not e >= 0.0:
        raise DomainError(f"radius factor must be >= 0, got {e!r}")
    return e


def _check_ratio(value: float, name: str) -> float:
    value = float(value)
    if not (0.0 <= value <= 1.0):
        raise DomainError(f"ratio {name} must lie in [0, 1], got {value!r}")
    return value


# ---------------------------------------------------------------------------
# Probabilities
# ---------------------------------------------------------------------------

def prob_1d(e_over_sigma: float) -> float:
    """P(|x| < e) for a single zero-mean Gaussian, i.e. ``erf(e / (sigma sqrt 2))``."""
    e = _check_radius(e_over_sigma)
    return math.erf(e / _SQRT2)


def tail_2d(e_over_sigma_x: float, r: float, quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Probability mass *outside* the circle, ``1 - prob_2d``."""
    e = _check_radius(e_over_sigma_x)
    r = _check_ratio(r, "r")
    if r < DEGENERATE_RATIO:
        return math.erfc(e / _SQRT2)
    if r == 1.0:
        return math.exp(-0.5 * e * e)
    half_e2 = 0.5 * e * e
    r2 = r * r

    def integrand(t):
        c2 = np.cos(t) ** 2
        return np.exp(-half_e2 / (c2 + r2 * (1.0 - c2)))

    return integrate(integrand, 0.0, _HALF_PI, quad) / _HALF_PI


def prob_2d(e_over_sigma_x: float, r: float, quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Probability that the 2D error lies inside a circle of radius ``e``.

    Args:
        e_over_sigma_x: circle radius in units of the largest standard deviation.
        r: ratio ``sigma_y / sigma_x`` in [0, 1]. Values below 1e-6 are
            handled as the 1D problem; ``r == 1`` uses ``1 - exp(-e^2/2)``.
    """
    e = _check_radius(e_over_sigma_x)
    r = _check_ratio(r, "r")
    if r < DEGENERATE_RATIO:
        return prob_1d(e)
    if r == 1.0:
        return -math.expm1(-0.5 * e * e)
    return 1.0 - tail_2d(e, r, quad)


def tail_3d(e_over_sigma_x: float, m: float, n: float, quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Probability mass outside the sphere, ``1 - prob_3d``.

    ``m`` and ``n`` may be given in either order; the quadrature itself is
    not symmetric in them, which is what the symmetry checks exercise.
    """
    e = _check_radius(e_over_sigma_x)
    m = _check_ratio(m, "m")
    n = _check_ratio(n, "n")
    if min(m, n) < DEGENERATE_RATIO:
        return tail_2d(e, max(m, n), quad)
    if m == 1.0 and n == 1.0:
        return float(upper_gamma_3half_regularized(0.5 * e * e))
    half_e2 = 0.5 * e * e
    m2, n2 = m * m, n * n
    inner_quad = quad.scaled(0.25)

    def outer(theta):
        s2 = np.sin(theta) ** 2
        c2 = 1.0 - s2

        def inner(phi, rows):
            cp2 = np.cos(phi) ** 2
            b = s2[rows] * (cp2 + m2 * (1.0 - cp2)) + n2 * c2[rows]
            with np.errstate(divide="ignore", over="ignore"):
                return upper_gamma_3half_regularized(half_e2 / b)

        zeros = np.zeros_like(theta)
        return np.sin(theta) * integrate_rows(inner, zeros, zeros + _HALF_PI, inner_quad)

    return integrate(outer, 0.0, _HALF_PI, quad) / _HALF_PI


def prob_3d(e_over_sigma_x: float, m: float, n: float, quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Probability that the 3D error lies inside a sphere of radius ``e``.

    Degenerate axes reduce the dimension: ``min(m, n) < 1e-6`` gives the 2D
    problem with ratio ``max(m, n)`` (and the 1D problem when both vanish).
    ``m == n == 1`` is answered through the lower incomplete gamma function.
    """
    e = _check_radius(e_over_sigma_x)
    m = _check_ratio(m, "m")
    n = _check_ratio(n, "n")
    if min(m, n) < DEGENERATE_RATIO:
        return prob_2d(e, max(m, n), quad)
    if m == 1.0 and n == 1.0:
        return lower_incomplete_gamma_3half(0.5 * e * e) / GAMMA_3HALF
    return 1.0 - tail_3d(e, m, n, quad)


def prob(e_over_sigma_x: float, shape: ShapeRatios, quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Dispatch to :func:`prob_1d`, :func:`prob_2d` or :func:`prob_3d` by shape."""
    if shape.dim == 1:
        return prob_1d(e_over_sigma_x)
    if shape.dim == 2:
        return prob_2d(e_over_sigma_x, shape.r, quad)
    return prob_3d(e_over_sigma_x, shape.m, shape.n, quad)


# ---------------------------------------------------------------------------
# Factors
# ---------------------------------------------------------------------------

def chi2_2d_value(confidence: float) -> float:
    """Equal-sigma 2D factor ``sqrt(-2 ln(1 - p))``."""
    p = validate_probability(confidence)
    return math.sqrt(-2.0 * math.log1p(-p))


def equal_sigma_3d_argument(confidence: float) -> float:
    """The ``x`` solving ``gamma(3/2, x) = (sqrt(pi)/2) p``."""
    p = validate_probability(confidence)
    target = GAMMA_3HALF * p
    return find_root(lambda x: lower_incomplete_gamma_3half(x) - target, 0.0, 60.0, tol=1e-13)


def factor_3d_equal_sigma(confidence: float) -> FactorResult:
    """3D factor when all three standard deviations are equal: ``sqrt(2 x)``."""
    p = validate_probability(confidence)
    x = equal_sigma_3d_argument(p)
    return FactorResult(math.sqrt(2.0 * x), Method.EXACT_3D, p, ShapeRatios.spatial(1.0, 1.0))


def factor_1d(confidence: float) -> FactorResult:
    """1D factor ``sqrt(2) * erf_inv(p)``; 1.95996 at 95 %."""
    p = validate_probability(confidence)
    return FactorResult(_SQRT2 * erf_inv(p), Method.EXACT_1D, p, ShapeRatios.line())


def _solve(prob_fn, p: float, lo: float, hi: float) -> float:
    if hi <= lo:
        return lo
    root = find_root(
        lambda e: prob_fn(e) - p,
        lo * (1.0 - _BRACKET_PAD),
        hi * (1.0 + _BRACKET_PAD),
        tol=ROOT_TOL,
    )
    return min(max(root, lo), hi)


def factor_2d(r: float, confidence: float, quad: QuadratureSpec = DEFAULT_QUADRATURE) -> FactorResult:
    """Exact 2D factor ``e / sigma_x`` for ratio ``r = sigma_y / sigma_x``.

    The root of ``prob_2d(e, r) = p`` is bracketed by the 1D factor and the
    equal-sigma factor, which bound it for every ``r``.
    """
    p = validate_probability(confidence)
    r = _check_ratio(r, "r")
    shape = ShapeRatios.planar(r)
    lo = factor_1d(p).factor
    if r < DEGENERATE_RATIO:
        return FactorResult(lo, Method.EXACT_2D, p, shape)
    hi = chi2_2d_value(p)
    if r == 1.0:
        return FactorResult(hi, Method.EXACT_2D, p, shape)
    e = _solve(lambda x: prob_2d(x, r, quad), p, lo, hi)
    return FactorResult(e, Method.EXACT_2D, p, shape)


def factor_3d(m: float, n: float, confidence: float, quad: QuadratureSpec = DEFAULT_QUADRATURE) -> FactorResult:
    """Exact 3D factor ``e / sigma_x`` for ``m = sigma_y/sigma_x``, ``n = sigma_z/sigma_x``.

    The pair is symmetric, so ``(m, n)`` and ``(n, m)`` give the same factor.
    """
    p = validate_probability(confidence)
    shape = ShapeRatios.spatial(_check_ratio(m, "m"), _check_ratio(n, "n"))
    m, n = shape.m, shape.n
    if n < DEGENERATE_RATIO:
        e = factor_2d(m, p, quad).factor
        return FactorResult(e, Method.EXACT_3D, p, shape)
    hi = factor_3d_equal_sigma(p).factor
    if m == 1.0 and n == 1.0:
        return FactorResult(hi, Method.EXACT_3D, p, shape)
    lo = factor_1d(p).factor
    e = _solve(lambda x: prob_3d(x, m, n, quad), p, lo, hi)
    return FactorResult(e, Method.EXACT_3D, p, shape)


def factor(shape: ShapeRatios, confidence: float, quad: QuadratureSpec = DEFAULT_QUADRATURE) -> FactorResult:
    """Exact factor for any shape."""
    if shape.dim == 1:
        return factor_1d(confidence)
    if shape.dim == 2:
        return factor_2d(shape.r, confidence, quad)
    if shape.dim == 3:
        return factor_3d(shape.m, shape.n, confidence, quad)
    raise DimensionMismatch(f"unsupported dimension {shape.dim}")
