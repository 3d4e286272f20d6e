"""Covariance validation and reduction to principal-axis standard deviations.

Only eigenvalues are computed. Every confidence-radius formula depends on the
variances along the principal axes, never on their orientation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from confradius.errors import DegenerateCovariance, DomainError, NotPositiveSemidefinite

PSD_TOLERANCE = 1e-9
SYMMETRY_TOLERANCE = 1e-12
# |cos(3 phi)| this close to 1 means a (near) repeated root in the trigonometric solve.
REPEATED_ROOT_TOLERANCE = 1e-12


@dataclass(frozen=True)
class CovarianceMatrix:
    """Symmetric positive-semidefinite 1x1, 2x2 or 3x3 error covariance.

    Entries are stored as a tuple of tuples, mirrored from the upper triangle
    so that symmetry holds exactly. Inputs whose off-diagonal pairs differ by
    more than 1e-12 of the largest diagonal are rejected.
    """

    entries: tuple

    def __init__(self, entries):
        arr = np.array(entries, dtype=float)
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] not in (1, 2, 3):
            raise NotPositiveSemidefinite(f"covariance must be 1x1, 2x2 or 3x3, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise NotPositiveSemidefinite("covariance entries must be finite")
        diag = np.diag(arr)
        if np.any(diag < 0):
            raise NotPositiveSemidefinite("diagonal entries must be non-negative")
        scale = float(diag.max()) if diag.size else 0.0
        if np.any(np.abs(arr - arr.T) > SYMMETRY_TOLERANCE * max(scale, np.abs(arr).max())):
            raise NotPositiveSemidefinite("covariance is not symmetric")
        sym = np.triu(arr) + np.triu(arr, 1).T
        object.__setattr__(self, "entries", tuple(tuple(float(v) for v in row) for row in sym))
        # Validate positive semidefiniteness eagerly.
        _eigenvalues(self)

    @property
    def dim(self) -> int:
        return len(self.entries)

    def as_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=float)

    @property
    def trace(self) -> float:
        return float(sum(self.entries[i][i] for i in range(self.dim)))

    @classmethod
    def diagonal(cls, variances: Sequence[float]) -> "CovarianceMatrix":
        return cls(np.diag(np.asarray(variances, dtype=float)))


@dataclass(frozen=True)
class EigenSpectrum:
    """Principal standard deviations, sorted descending (sigma_x first)."""

    sigmas: tuple

    def __post_init__(self):
        s = tuple(float(v) for v in self.sigmas)
        if len(s) not in (1, 2, 3):
            raise DomainError("a spectrum has 1, 2 or 3 standard deviations")
        if any(not math.isfinite(v) or v < 0 for v in s):
            raise DomainError("standard deviations must be finite and non-negative")
        s = tuple(sorted(s, reverse=True))
        if s[0] == 0.0:
            raise DegenerateCovariance("all standard deviations are zero")
        object.__setattr__(self, "sigmas", s)

    @property
    def dim(self) -> int:
        return len(self.sigmas)

    @property
    def sigma_x(self) -> float:
        return self.sigmas[0]

    @property
    def variances(self) -> tuple:
        return tuple(s * s for s in self.sigmas)


@dataclass(frozen=True)
class ShapeRatios:
    """Dimensionless shape of a spectrum.

    2D uses ``r = sigma_y / sigma_x`` (and ``v = 1 / r**2``); 3D uses
    ``m = sigma_y / sigma_x`` and ``n = sigma_z / sigma_x`` with ``m >= n``.
    The 1D spectrum has no ratios.
    """

    dim: int
    r: Optional[float] = None
    m: Optional[float] = None
    n: Optional[float] = None

    def __post_init__(self):
        if self.dim == 1:
            if (self.r, self.m, self.n) != (None, None, None):
                raise DomainError("1D shape carries no ratios")
        elif self.dim == 2:
            if self.r is None or self.m is not None or self.n is not None:
                raise DomainError("2D shape needs exactly the ratio r")
            _check_unit(self.r, "r")
            object.__setattr__(self, "r", float(self.r))
        elif self.dim == 3:
            if self.m is None or self.n is None or self.r is not None:
                raise DomainError("3D shape needs exactly the ratios m and n")
            _check_unit(self.m, "m")
            _check_unit(self.n, "n")
            m, n = float(self.m), float(self.n)
            if n > m:
                m, n = n, m
            object.__setattr__(self, "m", m)
            object.__setattr__(self, "n", n)
        else:
            raise DomainError(f"dimension must be 1, 2 or 3, got {self.dim!r}")

    @classmethod
    def line(cls) -> "ShapeRatios":
        return cls(1)

    @classmethod
    def planar(cls, r: float) -> "ShapeRatios":
        return cls(2, r=r)

    @classmethod
    def spatial(cls, m: float, n: float) -> "ShapeRatios":
        return cls(3, m=m, n=n)

    @property
    def v(self) -> float:
        """Variance ratio sigma_x**2 / sigma_y**2 (2D only); infinite when r == 0."""
        if self.dim != 2:
            raise DomainError("v is defined for 2D shapes only")
        return math.inf if self.r == 0.0 else 1.0 / (self.r * self.r)

    def unit_sigmas(self) -> tuple:
        """Standard deviations normalized so that sigma_x == 1."""
        if self.dim == 1:
            return (1.0,)
        if self.dim == 2:
            return (1.0, self.r)
        return (1.0, self.m, self.n)


def _check_unit(value, name):
    value = float(value)
    if not (0.0 <= value <= 1.0):
        raise DomainError(f"ratio {name} must lie in [0, 1], got {value!r}")


# ---------------------------------------------------------------------------
# Eigenvalue solvers
# ---------------------------------------------------------------------------

def _eig2(a: float, b: float, d: float) -> list:
    half_tr = 0.5 * (a + d)
    rad = math.hypot(0.5 * (a - d), b)
    big = half_tr + rad
    # det / big avoids cancellation in the small root.
    small = (a * d - b * b) / big if big > 0 else half_tr - rad
    return [big, small]


def jacobi_eigenvalues(mat: np.ndarray, sweeps: int = 50) -> list:
    """Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations."""
    a = np.array(mat, dtype=float)
    n = a.shape[0]
    for _ in range(sweeps):
        off = sum(a[p, q] ** 2 for p in range(n) for q in range(p + 1, n))
        if off <= 1e-300 or off <= (1e-17 * np.abs(np.diag(a)).max()) ** 2:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if a[p, q] == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * a[p, q])
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                a[p, q] = a[q, p] = 0.0
    return sorted(np.diag(a).tolist(), reverse=True)


def _eig3(mat: np.ndarray) -> list:
    p1 = mat[0, 1] ** 2 + mat[0, 2] ** 2 + mat[1, 2] ** 2
    diag = [mat[0, 0], mat[1, 1], mat[2, 2]]
    if p1 == 0.0:
        return sorted(diag, reverse=True)
    q = sum(diag) / 3.0
    p2 = sum((d - q) ** 2 for d in diag) + 2.0 * p1
    p = math.sqrt(p2 / 6.0)
    bmat = (mat - q * np.eye(3)) / p
    half_det = 0.5 * (
        bmat[0, 0] * (bmat[1, 1] * bmat[2, 2] - bmat[1, 2] * bmat[2, 1])
        - bmat[0, 1] * (bmat[1, 0] * bmat[2, 2] - bmat[1, 2] * bmat[2, 0])
        + bmat[0, 2] * (bmat[1, 0] * bmat[2, 1] - bmat[1, 1] * bmat[2, 0])
    )
    if abs(half_det) >= 1.0 - REPEATED_ROOT_TOLERANCE:
        return jacobi_eigenvalues(mat)
    phi = math.acos(half_det) / 3.0
    big = q + 2.0 * p * math.cos(phi)
    small = q + 2.0 * p * math.cos(phi + 2.0 * math.pi / 3.0)
    mid = 3.0 * q - big - small
    eig = sorted([big, mid, small], reverse=True)
    # The trigonometric form loses relative accuracy on a tiny eigenvalue.
    if eig[0] > 0 and abs(eig[2]) < 1e-6 * eig[0]:
        return jacobi_eigenvalues(mat)
    return eig


def _eigenvalues(cov: CovarianceMatrix) -> list:
    mat = cov.as_array()
    if cov.dim == 1:
        eig = [mat[0, 0]]
    elif cov.dim == 2:
        eig = _eig2(mat[0, 0], mat[0, 1], mat[1, 1])
    else:
        eig = _eig3(mat)
    scale = float(np.diag(mat).max())
    floor = -PSD_TOLERANCE * scale
    out = []
    for lam in eig:
        if lam < floor or math.isnan(lam):
            raise NotPositiveSemidefinite(f"eigenvalue {lam!r} is below -{PSD_TOLERANCE} * {scale!r}")
        out.append(max(lam, 0.0))
    return sorted(out, reverse=True)


def eigenvalues(cov: CovarianceMatrix) -> tuple:
    """Principal variances of ``cov``, sorted descending, small negatives clamped to 0."""
    return tuple(_eigenvalues(cov))


def decompose(cov: CovarianceMatrix) -> EigenSpectrum:
    """Principal standard deviations of ``cov`` (square roots of its eigenvalues).

    Raises:
        DegenerateCovariance: if the largest eigenvalue is zero.
    """
    eig = _eigenvalues(cov)
    if eig[0] <= 0.0:
        raise DegenerateCovariance("covariance has no positive eigenvalue")
    return EigenSpectrum(tuple(math.sqrt(v) for v in eig))


def ratios(spec: EigenSpectrum) -> ShapeRatios:
    s = spec.sigmas
    if spec.dim == 1:
        return ShapeRatios.line()
    if spec.dim == 2:
        return ShapeRatios.planar(min(s[1] / s[0], 1.0))
    return ShapeRatios.spatial(min(s[1] / s[0], 1.0), min(s[2] / s[0], 1.0))
