"""Factor lookup tables: build, interpolate, save and load.

A 2D table is the factor curve over ``r = 0, step, ..., 1``. A 3D table is
the factor surface over ``(m, n)``; because the surface is symmetric only
the ``n <= m`` triangle is stored, row by row::

    index(i, j) = i * (i + 1) / 2 + j      for 0 <= j <= i <= N

Two on-disk formats carry the same content.

CSV (human readable)::

    # dim 2
    # confidence 0.95
    # step 0.01
    # interpolation monotone_cubic
    r,factor
    0,1.959963984540054
    ...

Binary ``FTBL`` (all little-endian)::

    magic      4 bytes  b"FTBL"
    version    u16      1
    dim        u8       2 or 3
    interp     u8       0 = linear, 1 = monotone_cubic
    confidence f64
    step       f64
    count      u32      number of stored values
    values     count * f64, storage order above
    crc32      u32      zlib CRC-32 of every preceding byte
"""
from __future__ import annotations

import enum
import io
import struct
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Optional, Union

import numpy as np
from scipy.interpolate import PchipInterpolator, RegularGridInterpolator

from confradius import exact
from confradius.eigen import ShapeRatios
from confradius.errors import DimensionMismatch, DomainError, FormatError, MonotonicityViolation
from confradius.exact import FactorResult, Method
from confradius.special import validate_probability

MAGIC = b"FTBL"
VERSION = 1
_HEADER = struct.Struct("<4sHBBddI")
_CRC = struct.Struct("<I")


class Interpolation(str, enum.Enum):
    LINEAR = "linear"
    MONOTONE_CUBIC = "monotone_cubic"


_INTERP_CODES = {Interpolation.LINEAR: 0, Interpolation.MONOTONE_CUBIC: 1}


def grid_size(step: float) -> int:
    """Number of intervals ``N`` with ``N * step == 1``."""
    step = float(step)
    if not (1e-3 <= step <= 1.0):
        raise DomainError(f"table step must lie in [1e-3, 1], got {step!r}")
    n = round(1.0 / step)
    if abs(n * step - 1.0) > 1e-12:
        raise DomainError(f"table step {step!r} does not divide 1 evenly")
    return n


def triangle_count(n_intervals: int) -> int:
    k = n_intervals + 1
    return k * (k + 1) // 2


@dataclass(frozen=True)
class FactorTable:
    dim: int
    confidence: float
    step: float
    values: np.ndarray = field(repr=False)
    interpolation: Interpolation = Interpolation.MONOTONE_CUBIC

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise DimensionMismatch(f"tables exist for dim 2 and 3, got {self.dim!r}")
        validate_probability(self.confidence)
        n = grid_size(self.step)
        vals = np.array(self.values, dtype=float)
        expected = n + 1 if self.dim == 2 else triangle_count(n)
        if vals.shape != (expected,):
            raise FormatError(f"dim-{self.dim} table with step {self.step} needs {expected} values, got {vals.size}")
        if not np.all(np.isfinite(vals)):
            raise FormatError("table values must be finite")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "interpolation", Interpolation(self.interpolation))

    def __eq__(self, other):
        if not isinstance(other, FactorTable):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.confidence == other.confidence
            and self.step == other.step
            and self.interpolation == other.interpolation
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    @property
    def intervals(self) -> int:
        return grid_size(self.step)

    @property
    def knots(self) -> np.ndarray:
        n = self.intervals
        return np.arange(n + 1) / n

    def grid(self) -> np.ndarray:
        """Full value array: the curve (dim 2) or the symmetric square (dim 3)."""
        if self.dim == 2:
            return np.array(self.values)
        n = self.intervals
        square = np.empty((n + 1, n + 1))
        for i in range(n + 1):
            row = self.values[i * (i + 1) // 2: (i + 1) * (i + 2) // 2]
            square[i, : i + 1] = row
            square[: i + 1, i] = row
        return square

    @cached_property
    def _interpolator(self):
        grid = self.grid()
        if self.dim == 2:
            if self.interpolation is Interpolation.LINEAR:
                knots = self.knots
                return lambda r: np.interp(r, knots, grid)
            return PchipInterpolator(self.knots, grid)
        method = "linear" if self.interpolation is Interpolation.LINEAR else "pchip"
        rgi = RegularGridInterpolator((self.knots, self.knots), grid, method=method)
        return lambda m, n: rgi(np.column_stack([np.atleast_1d(m), np.atleast_1d(n)]))


def monotonicity_margin(table: FactorTable) -> float:
    """Smallest increment between neighbouring grid values (negative means a violation)."""
    grid = table.grid()
    if table.dim == 2:
        return float(np.diff(grid).min())
    return float(min(np.diff(grid, axis=0).min(), np.diff(grid, axis=1).min()))


def validate(table: FactorTable) -> float:
    """Raise :class:`MonotonicityViolation` if the table ever decreases; return the margin."""
    margin = monotonicity_margin(table)
    if margin < 0.0:
        raise MonotonicityViolation(f"factor table decreases by {-margin:.3g} between neighbouring knots")
    return margin


def _cell_2d(args):
    r, p = args
    return exact.factor_2d(r, p).factor


def _cell_3d(args):
    m, n, p = args
    return exact.factor_3d(m, n, p).factor


def build_table(
    dim: int,
    confidence: float,
    step: float,
    interpolation: Union[Interpolation, str] = Interpolation.MONOTONE_CUBIC,
    workers: Optional[int] = None,
) -> FactorTable:
    """Compute exact factors on a regular ratio grid.

    Cells are independent; ``workers > 1`` spreads them over processes.

    Raises:
        MonotonicityViolation: if the computed grid ever decreases.
    """
    p = validate_probability(confidence)
    if dim not in (2, 3):
        raise DimensionMismatch(f"tables exist for dim 2 and 3, got {dim!r}")
    n = grid_size(step)
    if dim == 2:
        cells = [(i / n, p) for i in range(n + 1)]
        fn = _cell_2d
    else:
        cells = [(i / n, j / n, p) for i in range(n + 1) for j in range(i + 1)]
        fn = _cell_3d
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(fn, cells, chunksize=16))
    else:
        values = [fn(c) for c in cells]
    table = FactorTable(dim, p, float(step), np.array(values), Interpolation(interpolation))
    validate(table)
    return table


def _knot_index(x: float, n: int) -> Optional[int]:
    # spline evaluation can miss a knot value by an ulp; return stored values verbatim
    k = round(x * n)
    return k if abs(x * n - k) <= 1e-9 else None


def lookup(table: FactorTable, shape: ShapeRatios) -> FactorResult:
    """Interpolated factor for ``shape`` (dimension must match the table)."""
    if shape.dim != table.dim:
        raise DimensionMismatch(f"dim-{shape.dim} shape queried against dim-{table.dim} table")
    n = table.intervals
    if table.dim == 2:
        i = _knot_index(shape.r, n)
        value = float(table.values[i]) if i is not None else float(table._interpolator(shape.r))
        method = Method.EXACT_2D
    else:
        # ShapeRatios already orders m >= n, so (m, n) and (n, m) hit the same cell.
        i, j = _knot_index(shape.m, n), _knot_index(shape.n, n)
        if i is not None and j is not None:
            value = float(table.values[i * (i + 1) // 2 + j])
        else:
            value = float(table._interpolator(shape.m, shape.n)[0])
        method = Method.EXACT_3D
    return FactorResult(value, method, table.confidence, shape)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def to_bytes(table: FactorTable) -> bytes:
    """Binary ``FTBL`` encoding."""
    head = _HEADER.pack(
        MAGIC, VERSION, table.dim, _INTERP_CODES[table.interpolation],
        table.confidence, table.step, table.values.size,
    )
    body = head + table.values.astype("<f8").tobytes()
    return body + _CRC.pack(zlib.crc32(body))


def from_bytes(data: bytes) -> FactorTable:
    if len(data) < _HEADER.size + _CRC.size:
        raise FormatError("truncated table stream")
    magic, version, dim, interp, conf, step, count = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"unsupported table version {version}")
    end = _HEADER.size + 8 * count
    if len(data) != end + _CRC.size:
        raise FormatError("table stream length does not match its header")
    (crc,) = _CRC.unpack_from(data, end)
    if crc != zlib.crc32(data[:end]):
        raise FormatError("table checksum mismatch")
    codes = {v: k for k, v in _INTERP_CODES.items()}
    if interp not in codes:
        raise FormatError(f"unknown interpolation code {interp}")
    values = np.frombuffer(data, dtype="<f8", count=count, offset=_HEADER.size).astype(float)
    try:
        return FactorTable(dim, conf, step, values, codes[interp])
    except (DomainError, DimensionMismatch) as exc:
        raise FormatError(str(exc)) from exc


def to_csv(table: FactorTable) -> str:
    out = io.StringIO()
    out.write(f"# dim {table.dim}\n")
    out.write(f"# confidence {table.confidence!r}\n")
    out.write(f"# step {table.step!r}\n")
    out.write(f"# interpolation {table.interpolation.value}\n")
    n = table.intervals
    if table.dim == 2:
        out.write("r,factor\n")
        for i, v in enumerate(table.values):
            out.write(f"{i / n!r},{float(v)!r}\n")
    else:
        out.write("m,n,factor\n")
        k = 0
        for i in range(n + 1):
            for j in range(i + 1):
                out.write(f"{i / n!r},{j / n!r},{float(table.values[k])!r}\n")
                k += 1
    return out.getvalue()


def from_csv(text: str) -> FactorTable:
    meta = {}
    rows = []
    header_seen = False
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split(None, 1)
            if len(parts) == 2:
                meta[parts[0]] = parts[1].strip()
            continue
        if not header_seen:
            header_seen = True
            continue
        try:
            rows.append([float(x) for x in line.split(",")])
        except ValueError as exc:
            raise FormatError(f"line {lineno}: {exc}") from exc
    try:
        dim = int(meta["dim"])
        conf = float(meta["confidence"])
        step = float(meta["step"])
        interp = Interpolation(meta.get("interpolation", Interpolation.MONOTONE_CUBIC.value))
    except (KeyError, ValueError) as exc:
        raise FormatError(f"missing or invalid CSV header field: {exc}") from exc
    width = dim if dim in (2, 3) else None
    if width is None or any(len(r) != width for r in rows):
        raise FormatError("CSV rows do not match the table dimension")
    values = np.array([r[-1] for r in rows], dtype=float)
    try:
        table = FactorTable(dim, conf, step, values, interp)
    except (DomainError, DimensionMismatch) as exc:
        raise FormatError(str(exc)) from exc
    n = table.intervals
    coords = np.array([r[:-1] for r in rows])
    if dim == 2:
        expected = np.arange(n + 1)[:, None] / n
    else:
        expected = np.array([(i / n, j / n) for i in range(n + 1) for j in range(i + 1)])
    if not np.allclose(coords, expected, rtol=0, atol=1e-12):
        raise FormatError("CSV grid coordinates do not match the declared step")
    return table


def serialize(table: FactorTable, fmt: str = "bin") -> bytes:
    """Encode as ``"bin"`` (FTBL) or ``"csv"``."""
    if fmt == "bin":
        return to_bytes(table)
    if fmt == "csv":
        return to_csv(table).encode("ascii")
    raise ValueError(f"unknown table format {fmt!r}")


def deserialize(data: bytes) -> FactorTable:
    """Decode either format (sniffed from the first bytes) and check monotonicity.

    Raises:
        FormatError: on bad magic, version, checksum, truncation or layout.
        MonotonicityViolation: if the decoded values ever decrease.
    """
    if data[:4] == MAGIC:
        table = from_bytes(data)
    elif data[:1] == b"#":
        try:
            text = data.decode("ascii")
        except UnicodeDecodeError as exc:
            raise FormatError("CSV table is not ASCII") from exc
        table = from_csv(text)
    else:
        raise FormatError("unrecognized table format")
    validate(table)
    return table


def save(table: FactorTable, path: Union[str, Path], fmt: Optional[str] = None) -> None:
    path = Path(path)
    if fmt is None:
        fmt = "csv" if path.suffix.lower() == ".csv" else "bin"
    path.write_bytes(serialize(table, fmt))


def load(path: Union[str, Path]) -> FactorTable:
    return deserialize(Path(path).read_bytes())
