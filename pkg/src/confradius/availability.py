"""Covariance files, covariance time series and availability.

File formats (JSON):

* single covariance: ``{"dim": k, "matrix": [[...], ...]}``
* series: ``[{"t": ..., "matrix": [[...], ...]}, ...]`` where ``t`` is an
  ISO-8601 string or a number and may be omitted on every epoch (epochs are
  then indexed 0, 1, ...).

Units are whatever the caller's covariance uses (m^2 gives radii in m).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Callable, Optional, Union

from confradius import approx, tables
from confradius.eigen import CovarianceMatrix, decompose, ratios
from confradius.errors import DomainError, FormatError
from confradius.special import validate_probability


def covariance_from_json(obj) -> CovarianceMatrix:
    if not isinstance(obj, dict) or "matrix" not in obj:
        raise FormatError('covariance JSON must be an object with a "matrix" field')
    try:
        cov = CovarianceMatrix(obj["matrix"])
    except (TypeError, ValueError) as exc:
        raise FormatError(f"invalid covariance matrix: {exc}") from exc
    if "dim" in obj and obj["dim"] != cov.dim:
        raise FormatError(f'"dim" is {obj["dim"]!r} but the matrix is {cov.dim}x{cov.dim}')
    return cov


def _read_json(path: Union[str, Path]):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc.msg} at line {exc.lineno})") from exc


def load_covariance(path: Union[str, Path]) -> CovarianceMatrix:
    return covariance_from_json(_read_json(path))


def _parse_time(t):
    if isinstance(t, bool):
        raise FormatError(f"invalid timestamp {t!r}")
    if isinstance(t, (int, float)):
        if not math.isfinite(t):
            raise FormatError(f"invalid timestamp {t!r}")
        return float(t)
    if isinstance(t, str):
        try:
            text = t[:-1] + "+00:00" if t.endswith("Z") else t
            return datetime.fromisoformat(text)
        except ValueError as exc:
            raise FormatError(f"invalid ISO-8601 timestamp {t!r}") from exc
    raise FormatError(f"invalid timestamp {t!r}")


@dataclass(frozen=True)
class CovarianceSeries:
    """Ordered epochs of equal-dimension covariances."""

    times: tuple
    covariances: tuple

    def __post_init__(self):
        if not self.covariances:
            raise FormatError("covariance series is empty")
        if len(self.times) != len(self.covariances):
            raise FormatError("one timestamp per epoch is required")
        dims = {c.dim for c in self.covariances}
        if len(dims) != 1:
            raise FormatError(f"series mixes dimensions {sorted(dims)}")
        parsed = [_parse_time(t) for t in self.times]
        try:
            increasing = all(a < b for a, b in zip(parsed, parsed[1:]))
        except TypeError as exc:
            raise FormatError("timestamps mix incompatible kinds") from exc
        if not increasing:
            raise FormatError("timestamps must be strictly increasing")

    @property
    def dim(self) -> int:
        return self.covariances[0].dim

    def __len__(self):
        return len(self.covariances)

    @classmethod
    def from_json(cls, obj) -> "CovarianceSeries":
        if not isinstance(obj, list):
            raise FormatError("series JSON must be an array of epochs")
        covs = [covariance_from_json(e) for e in obj]
        has_t = ["t" in e for e in obj]
        if any(has_t) and not all(has_t):
            raise FormatError('either every epoch carries "t" or none does')
        times = tuple(e["t"] for e in obj) if all(has_t) else tuple(range(len(obj)))
        return cls(times, tuple(covs))


def load_series(path: Union[str, Path]) -> CovarianceSeries:
    return CovarianceSeries.from_json(_read_json(path))


@dataclass(frozen=True)
class AvailabilityResult:
    availability: float
    per_epoch_radius: tuple
    threshold: float
    confidence: float
    method: str

    @property
    def epochs_met(self) -> int:
        return sum(1 for r in self.per_epoch_radius if r <= self.threshold)


def radius_function(
    method: str = "exact",
    table: Optional[tables.FactorTable] = None,
) -> Callable[[CovarianceMatrix, float], float]:
    """Per-epoch radius computation for ``method``, optionally through a lookup table."""
    if table is None:
        return lambda cov, p: approx.radius(cov, p, method)
    if method != "exact":
        raise DomainError("a lookup table only replaces the exact method")

    def via_table(cov, p):
        if abs(p - table.confidence) > 1e-12:
            raise DomainError(f"table was built for confidence {table.confidence}, asked for {p}")
        spectrum = decompose(cov)
        return spectrum.sigma_x * tables.lookup(table, ratios(spectrum)).factor

    return via_table


def evaluate(
    series: CovarianceSeries,
    threshold: float,
    confidence: float,
    method: str = "exact",
    table: Optional[tables.FactorTable] = None,
) -> AvailabilityResult:
    """Fraction of epochs whose confidence radius is at most ``threshold``."""
    p = validate_probability(confidence)
    threshold = float(threshold)
    if not threshold >= 0.0:
        raise DomainError(f"threshold must be >= 0, got {threshold!r}")
    fn = radius_function(method, table)
    radii = tuple(fn(cov, p) for cov in series.covariances)
    met = sum(1 for r in radii if r <= threshold)
    label = "table" if table is not None else method
    return AvailabilityResult(met / len(radii), radii, threshold, p, label)
