"""Special functions and numerical primitives.

Everything downstream needs only a handful of tools: the error function and
its inverse, the lower incomplete gamma function at a = 3/2, an adaptive
quadrature that works on vectorized integrands, and a bracketed root finder.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import optimize
from scipy import special as _sp

from confradius.errors import (
    DomainError,
    InvalidProbability,
    NoSignChange,
    ToleranceNotReached,
)

SQRT_PI = math.sqrt(math.pi)
GAMMA_3HALF = 0.5 * SQRT_PI


def validate_probability(p: float) -> float:
    """Return ``p`` as a float, rejecting anything outside the open interval (0, 1)."""
    try:
        value = float(p)
    except (TypeError, ValueError) as exc:
        raise InvalidProbability(f"confidence must be a number, got {p!r}") from exc
    if not (0.0 < value < 1.0):
        raise InvalidProbability(f"confidence must lie strictly between 0 and 1, got {value!r}")
    return value


# ---------------------------------------------------------------------------
# Error function family
# ---------------------------------------------------------------------------

def erf(x: float) -> float:
    """Error function (libm, accurate to a few ulp)."""
    return math.erf(x)


def erfc(x: float) -> float:
    return math.erfc(x)


def _erf_inv_estimate(y: float) -> float:
    # M. Giles, "Approximating the erfinv function" (GPU Gems 2010), ~1e-7 relative.
    w = -math.log((1.0 - y) * (1.0 + y))
    if w < 5.0:
        w -= 2.5
        p = 2.81022636e-08
        p = 3.43273939e-07 + p * w
        p = -3.5233877e-06 + p * w
        p = -4.39150654e-06 + p * w
        p = 0.00021858087 + p * w
        p = -0.00125372503 + p * w
        p = -0.00417768164 + p * w
        p = 0.246640727 + p * w
        p = 1.50140941 + p * w
    else:
        w = math.sqrt(w) - 3.0
        p = -0.000200214257
        p = 0.000100950558 + p * w
        p = 0.00134934322 + p * w
        p = -0.00367342844 + p * w
        p = 0.00573950773 + p * w
        p = -0.0076224613 + p * w
        p = 0.00943887047 + p * w
        p = 1.00167406 + p * w
        p = 2.83297682 + p * w
    return p * y


def erf_inv(y: float) -> float:
    """Inverse error function on (-1, 1).

    A polynomial first guess is polished by two Newton steps on ``erf``. For
    |y| > 0.5 the residual is formed with ``erfc`` against ``1 - |y|`` (exact
    in floating point there), which keeps the tail accurate.

    Raises:
        DomainError: if ``y`` is not strictly inside (-1, 1).
    """
    y = float(y)
    if not (-1.0 < y < 1.0):
        raise DomainError(f"erf_inv is defined on (-1, 1), got {y!r}")
    if y == 0.0:
        return 0.0
    sign = 1.0 if y > 0 else -1.0
    a = abs(y)
    x = abs(_erf_inv_estimate(a))
    tail = 1.0 - a
    for _ in range(2):
        if a > 0.5:
            resid = tail - math.erfc(x)
        else:
            resid = math.erf(x) - a
        deriv = (2.0 / SQRT_PI) * math.exp(-x * x)
        if deriv == 0.0:
            break
        x -= resid / deriv
    return sign * x


# ---------------------------------------------------------------------------
# Incomplete gamma at a = 3/2
# ---------------------------------------------------------------------------

def lower_incomplete_gamma_3half(x: float) -> float:
    """Unnormalized lower incomplete gamma ``gamma(3/2, x)``.

    Uses the identity ``gamma(3/2, x) = (sqrt(pi)/2) erf(sqrt(x)) - sqrt(x) exp(-x)``.
    """
    x = float(x)
    if x < 0.0 or math.isnan(x):
        raise DomainError(f"gamma(3/2, x) needs x >= 0, got {x!r}")
    if math.isinf(x):
        return GAMMA_3HALF
    s = math.sqrt(x)
    return GAMMA_3HALF * math.erf(s) - s * math.exp(-x)


def upper_gamma_3half_regularized(x):
    """Regularized upper tail ``Gamma(3/2, x) / Gamma(3/2)``, vectorized.

    Equals ``P(chi2_3 > 2x)``. Computed directly from ``erfc`` so tiny tails
    keep their relative accuracy.
    """
    x = np.asarray(x, dtype=float)
    s = np.sqrt(x)
    return _sp.erfc(s) + (2.0 / SQRT_PI) * s * np.exp(-x)


# ---------------------------------------------------------------------------
# Adaptive Gauss-Kronrod quadrature
# ---------------------------------------------------------------------------

# 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15 constants).
_XGK_HALF = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK_HALF = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG_HALF = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

XGK = np.concatenate([-_XGK_HALF[:-1], _XGK_HALF[::-1]])
WGK = np.concatenate([_WGK_HALF[:-1], _WGK_HALF[::-1]])
# Gauss nodes sit at the odd positions of the half-rule (indices 1, 3, 5 and the centre).
_GAUSS_POS = np.array([1, 3, 5, 9, 11, 13, 7])
WG = np.concatenate([_WG_HALF[:-1], _WG_HALF[:-1][::-1], _WG_HALF[-1:]])


@dataclass(frozen=True)
class QuadratureSpec:
    """Accuracy contract for :func:`integrate`.

    An estimate is accepted once the embedded Kronrod/Gauss error is below
    ``max(abs_tol, rel_tol * |result|)``.
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-9
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1")

    def scaled(self, factor: float) -> "QuadratureSpec":
        return QuadratureSpec(self.abs_tol * factor, self.rel_tol * factor, self.max_subdivisions)


DEFAULT_QUADRATURE = QuadratureSpec()


def integrate_rows(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    a,
    b,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> np.ndarray:
    """Integrate a family of integrands at once.

    ``f(x, rows)`` receives flat arrays of abscissae and the row index each
    abscissa belongs to, and returns the integrand values. Row ``k`` is
    integrated over ``[a[k], b[k]]`` and refined independently of the others,
    but every refinement sweep is a single vectorized call.

    Intervals are bisected until each one meets its share of the tolerance,
    ``err_i <= tol * width_i / (b - a)``.

    Raises:
        ToleranceNotReached: when a row needs more than ``max_subdivisions``
            bisections, or an interval can no longer be split.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    a, b = np.broadcast_arrays(a, b)
    if np.any(b < a):
        raise DomainError("integration bounds must satisfy a <= b")
    nrows = a.size
    span = b - a
    total = np.zeros(nrows)

    row = np.flatnonzero(span > 0)
    lo = a[row].copy()
    hi = b[row].copy()
    splits = np.zeros(nrows, dtype=np.int64)

    while row.size:
        centre = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        x = centre[:, None] + half[:, None] * XGK[None, :]
        fx = np.asarray(f(x.ravel(), np.repeat(row, XGK.size)), dtype=float)
        fx = fx.reshape(row.size, XGK.size)
        kron = half * (fx @ WGK)
        gauss = half * (fx[:, _GAUSS_POS] @ WG)
        err = np.abs(kron - gauss)
        if not np.all(np.isfinite(kron)):
            raise ToleranceNotReached("integrand produced non-finite values")

        estimate = total + np.bincount(row, weights=kron, minlength=nrows)
        tol = np.maximum(spec.abs_tol, spec.rel_tol * np.abs(estimate))
        done = err <= tol[row] * (2.0 * half) / span[row]
        total += np.bincount(row[done], weights=kron[done], minlength=nrows)

        todo = ~done
        if not np.any(todo):
            break
        row, lo, hi, centre = row[todo], lo[todo], hi[todo], centre[todo]
        splits += np.bincount(row, minlength=nrows)
        if np.any(splits > spec.max_subdivisions):
            raise ToleranceNotReached(
                f"no convergence after {spec.max_subdivisions} subdivisions"
            )
        if np.any((centre <= lo) | (centre >= hi)):
            raise ToleranceNotReached("interval shrank below floating-point resolution")
        row = np.repeat(row, 2)
        lo, hi = np.column_stack([lo, centre]).ravel(), np.column_stack([centre, hi]).ravel()

    return total


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> float:
    """Adaptive 15-point Gauss-Kronrod integral of ``f`` over ``[a, b]``.

    ``f`` is called with a numpy array of abscissae and must return an array
    of the same shape.
    """
    return float(integrate_rows(lambda x, _rows: f(x), a, b, spec)[0])


# ---------------------------------------------------------------------------
# Root finding
# ---------------------------------------------------------------------------

def find_root(g: Callable[[float], float], lo: float, hi: float, tol: float = 1e-9) -> float:
    """Root of ``g`` inside the bracket ``[lo, hi]`` (Brent's method).

    Raises:
        NoSignChange: if ``g(lo)`` and ``g(hi)`` have the same sign.
    """
    if hi < lo:
        lo, hi = hi, lo
    glo, ghi = g(lo), g(hi)
    if glo == 0.0:
        return float(lo)
    if ghi == 0.0:
        return float(hi)
    if math.isnan(glo) or math.isnan(ghi) or (glo > 0) == (ghi > 0):
        raise NoSignChange(f"g({lo!r})={glo!r} and g({hi!r})={ghi!r} do not bracket a root")
    return float(optimize.brentq(g, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=200))
