"""Counter-based random numbers for reproducible, order-independent sampling.

Every draw is a pure function of (seed, index), built on the splitmix64
mixing function.  Streams can therefore be evaluated in any order, in
parallel, or re-evaluated point-wise with bitwise identical results.
"""

from __future__ import annotations

import math

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

# Poisson means below this use CDF inversion; above, a normal approximation
# with continuity correction (error negligible against counting noise).
POISSON_INVERSION_CUTOFF = 30.0


def splitmix64(x: int) -> int:
    """One splitmix64 mixing step on a 64-bit integer."""
    x = (x + _GOLDEN) & _MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_key(*parts) -> int:
    """Combine seed material (ints or strings) into a single 64-bit key."""
    key = 0
    for part in parts:
        if isinstance(part, str):
            for byte in part.encode("utf-8"):
                key = splitmix64(key ^ byte)
        else:
            key = splitmix64(key ^ (int(part) & _MASK))
    return key


def uniform01(seed: int, index: int) -> float:
    """Uniform draw in (0, 1], deterministic in (seed, index)."""
    bits = splitmix64(((seed & _MASK) ^ splitmix64(index & _MASK)))
    return (bits + 1) * 2.0 ** -64


def uniform_array(seed: int, n: int, start: int = 0) -> np.ndarray:
    """Vectorised uniform (0, 1] stream for indices start..start+n-1."""
    idx = np.arange(start, start + n, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = _vec_splitmix64(idx)
        z = _vec_splitmix64(np.uint64(seed & _MASK) ^ z)
    return (z.astype(np.float64) + 1.0) * 2.0 ** -64


def _vec_splitmix64(x: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        x = (x + np.uint64(_GOLDEN))
        z = x
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))


def normal(seed: int, index: int) -> float:
    """Standard normal draw via Box-Muller, deterministic in (seed, index)."""
    u1 = uniform01(seed, 2 * index)
    u2 = uniform01(seed, 2 * index + 1)
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


def normal_array(seed: int, n: int, start: int = 0) -> np.ndarray:
    """Vectorised standard normals matching normal(seed, i) draw-for-draw."""
    idx = np.arange(start, start + n, dtype=np.int64)
    u1 = _uniform_at(seed, 2 * idx)
    u2 = _uniform_at(seed, 2 * idx + 1)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def _uniform_at(seed: int, indices: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = _vec_splitmix64(indices.astype(np.uint64))
        z = _vec_splitmix64(np.uint64(seed & _MASK) ^ z)
    return (z.astype(np.float64) + 1.0) * 2.0 ** -64


def poisson(mean: float, seed: int, index: int) -> int:
    """Poisson draw with the given mean, deterministic in (seed, index).

    Inversion of the CDF for small means, normal approximation with
    continuity correction for large ones.
    """
    if mean < 0:
        raise ValueError("Poisson mean must be non-negative")
    if mean == 0.0:
        return 0
    if mean < POISSON_INVERSION_CUTOFF:
        u = uniform01(seed, index)
        p = math.exp(-mean)
        cum = p
        k = 0
        while u > cum:
            k += 1
            p *= mean / k
            cum += p
            if k > 10_000:  # numerical guard, unreachable for mean < 30
                break
        return k
    z = normal(seed, index)
    return max(0, int(math.floor(mean + math.sqrt(mean) * z + 0.5)))


def poisson_array(means, seed: int, start: int = 0) -> np.ndarray:
    """Element-wise Poisson draws at indices start, start+1, ..."""
    means = np.asarray(means, dtype=float)
    out = np.empty(means.shape, dtype=np.int64)
    flat = means.ravel()
    res = out.ravel()
    for i, m in enumerate(flat):
        res[i] = poisson(float(m), seed, start + i)
    return out
