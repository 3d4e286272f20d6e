"""Monte Carlo ground truth for the exact factors.

The random stream is fully specified so that any implementation can
reproduce it bit for bit:

* Generator: SplitMix64 in counter form. Output ``i`` (0-based) for seed
  ``s`` is ``mix(s + (i + 1) * 0x9E3779B97F4A7C15 mod 2**64)`` with::

      z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
      z = (z ^ (z >> 27)) * 0x94D049BB133111EB
      z =  z ^ (z >> 31)

  This is exactly the sequential SplitMix64 stream seeded with ``s``.
* Uniform: ``u = (z >> 11) * 2**-53`` in [0, 1).
* Normals: basic Box-Muller on consecutive uniform pairs ``(u[2k], u[2k+1])``:
  ``rho = sqrt(-2 ln(1 - u[2k]))``, ``g[2k] = rho cos(2 pi u[2k+1])``,
  ``g[2k+1] = rho sin(2 pi u[2k+1])``.
* Layout: sample ``i`` uses normals ``g[i*d + j]`` for axes ``j = 0..d-1``
  and axis ``j`` is scaled by ``sigma_j / sigma_x``.

Because every variate is addressed by its counter, generating the stream in
chunks (or shards) of any size yields identical samples.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from confradius.eigen import EigenSpectrum
from confradius.errors import DomainError
from confradius.special import validate_probability

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1
CHUNK = 1 << 20


@dataclass(frozen=True)
class McConfig:
    samples: int = 1_000_000
    seed: int = 0
    confidence: float = 0.95

    def __post_init__(self):
        if not (10**4 <= int(self.samples) <= 10**9):
            raise DomainError(f"samples must lie in [1e4, 1e9], got {self.samples!r}")
        object.__setattr__(self, "samples", int(self.samples))
        object.__setattr__(self, "seed", int(self.seed) & _MASK64)
        object.__setattr__(self, "confidence", validate_probability(self.confidence))


def splitmix64(seed: int, counters: np.ndarray) -> np.ndarray:
    """SplitMix64 outputs at the given 0-based counters."""
    z = np.uint64(seed & _MASK64) + (counters.astype(np.uint64) + np.uint64(1)) * _GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def uniforms(seed: int, start: int, count: int) -> np.ndarray:
    counters = np.arange(start, start + count, dtype=np.uint64)
    return (splitmix64(seed, counters) >> np.uint64(11)).astype(np.float64) * 2.0**-53


def normals(seed: int, start: int, count: int) -> np.ndarray:
    """Standard normals ``g[start : start + count]`` of the documented stream."""
    first_pair = start // 2
    last_pair = (start + count + 1) // 2
    u = uniforms(seed, 2 * first_pair, 2 * (last_pair - first_pair))
    rho = np.sqrt(-2.0 * np.log1p(-u[0::2]))
    angle = 2.0 * np.pi * u[1::2]
    g = np.empty(u.size)
    g[0::2] = rho * np.cos(angle)
    g[1::2] = rho * np.sin(angle)
    offset = start - 2 * first_pair
    return g[offset: offset + count]


def sample_radii(spec: EigenSpectrum, samples: int, seed: int, chunk: int = CHUNK) -> np.ndarray:
    """Radii ``|x| / sigma_x`` of ``samples`` principal-axis Gaussian draws."""
    d = spec.dim
    scale = np.array(spec.sigmas) / spec.sigma_x
    out = np.empty(samples)
    for s0 in range(0, samples, chunk):
        s1 = min(s0 + chunk, samples)
        g = normals(seed, s0 * d, (s1 - s0) * d).reshape(s1 - s0, d)
        out[s0:s1] = np.sqrt(((g * scale) ** 2).sum(axis=1))
    return out


def quantile_index(confidence: float, samples: int) -> int:
    """0-based index of the order statistic ``ceil(p * N)``, using the exact binary value of ``p``."""
    k = math.ceil(Fraction(confidence) * samples)
    return min(max(k, 1), samples) - 1


def mc_quantile(spec: EigenSpectrum, cfg: McConfig) -> tuple:
    """Empirical confidence radius (in sigma_x units) and its standard error.

    The standard error is half the spread between the order statistics one
    binomial standard deviation ``sqrt(N p (1 - p))`` either side of the
    quantile index.
    """
    n = cfg.samples
    radii = sample_radii(spec, n, cfg.seed)
    k = quantile_index(cfg.confidence, n)
    delta = math.ceil(math.sqrt(n * cfg.confidence * (1.0 - cfg.confidence)))
    lo, hi = max(k - delta, 0), min(k + delta, n - 1)
    part = np.partition(radii, sorted({lo, k, hi}))
    return float(part[k]), 0.5 * float(part[hi] - part[lo])


def mc_prob(spec: EigenSpectrum, radius_over_sigma_x: float, cfg: McConfig) -> tuple:
    """Fraction of draws strictly inside the ball and its binomial standard error."""
    radius = float(radius_over_sigma_x)
    if not radius >= 0.0:
        raise DomainError(f"radius must be >= 0, got {radius!r}")
    radii = sample_radii(spec, cfg.samples, cfg.seed)
    p_hat = float(np.count_nonzero(radii < radius)) / cfg.samples
    return p_hat, math.sqrt(p_hat * (1.0 - p_hat) / cfg.samples)
