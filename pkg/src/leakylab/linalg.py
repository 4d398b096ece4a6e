"""Dense float64 linear algebra helpers and a portable random source.

Matrices are plain row-major ``float64`` numpy arrays. The random source is
xoshiro256++ seeded by splitmix64 expansion of one 64-bit seed, with Gaussians
drawn by the Box-Muller transform, so a seed reproduces the same stream on any
platform and in any language that follows the same recipe.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numba
import numpy as np

from .errors import ContractError

Matrix = np.ndarray

_MASK64 = (1 << 64) - 1
_INV_2_53 = 1.0 / 9007199254740992.0


def splitmix64(x: int) -> tuple[int, int]:
    """One splitmix64 step. Returns ``(new_state, output)``."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x, z ^ (z >> 31)


# --- compiled kernels -------------------------------------------------------
# The state array is mutated in place; every kernel consumes a fixed number of
# 64-bit words per output so streams stay aligned across chunkings.


@numba.njit(cache=True, inline="always")
def _rotl(x, k):
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


@numba.njit(cache=True, inline="always")
def _next(s):
    result = _rotl(s[0] + s[3], 23) + s[0]
    t = s[1] << np.uint64(17)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result


@numba.njit(cache=True)
def _fill_u64(s, out):
    for i in range(out.size):
        out[i] = _next(s)


@numba.njit(cache=True)
def _fill_uniform(s, out):
    for i in range(out.size):
        out[i] = (_next(s) >> np.uint64(11)) * _INV_2_53


@numba.njit(cache=True)
def _fill_normals(s, out, start):
    """Box-Muller pairs into ``out[start:]``; returns a leftover sine value."""
    n = out.size
    i = start
    while i < n:
        u1 = 1.0 - (_next(s) >> np.uint64(11)) * _INV_2_53  # (0, 1]
        u2 = (_next(s) >> np.uint64(11)) * _INV_2_53
        radius = math.sqrt(-2.0 * math.log(u1))
        theta = 2.0 * math.pi * u2
        out[i] = radius * math.cos(theta)
        spare = radius * math.sin(theta)
        if i + 1 < n:
            out[i + 1] = spare
        else:
            return True, spare
        i += 2
    return False, 0.0


@numba.njit(cache=True, inline="always")
def _randbelow(s, n):
    # accept x >= 2^64 mod n so the accepted range is a multiple of n
    threshold = (np.uint64(0) - n) % n
    while True:
        x = _next(s)
        if x >= threshold:
            return x % n


@numba.njit(cache=True)
def _randbelow_one(s, n):
    return _randbelow(s, n)


@numba.njit(cache=True)
def _partial_shuffle(s, n, k):
    idx = np.arange(n)
    for i in range(k):
        j = i + np.int64(_randbelow(s, np.uint64(n - i)))
        tmp = idx[i]
        idx[i] = idx[j]
        idx[j] = tmp
    return idx[:k].copy()


class Rng:
    """xoshiro256++ generator with a cached Box-Muller spare.

    Single-owner and mutable; derive independent streams with
    :meth:`derive` rather than sharing one instance between runs.
    """

    def __init__(self, seed: int):
        seed = int(seed) & _MASK64
        self.seed = seed
        words = []
        x = seed
        for _ in range(4):
            x, out = splitmix64(x)
            words.append(out)
        if not any(words):
            raise ContractError("xoshiro256++ state must not be all zero")
        self._s = np.array(words, dtype=np.uint64)
        self._has_spare = False
        self._spare = 0.0

    @classmethod
    def from_state(cls, words) -> "Rng":
        """Generator starting from an explicit xoshiro256++ state (for test vectors)."""
        words = [int(w) & _MASK64 for w in words]
        if len(words) != 4 or not any(words):
            raise ContractError("state must be four 64-bit words, not all zero")
        rng = cls.__new__(cls)
        rng.seed = None
        rng._s = np.array(words, dtype=np.uint64)
        rng._has_spare = False
        rng._spare = 0.0
        return rng

    def derive(self, index: int) -> "Rng":
        """Independent generator seeded with ``seed XOR index``."""
        if self.seed is None:
            raise ContractError("a generator built from raw state has no seed to derive from")
        return Rng(self.seed ^ (int(index) & _MASK64))

    @property
    def state(self) -> tuple[int, int, int, int]:
        return tuple(int(w) for w in self._s)

    def next_u64(self) -> int:
        out = np.empty(1, dtype=np.uint64)
        _fill_u64(self._s, out)
        return int(out[0])

    def u64s(self, size: int) -> np.ndarray:
        out = np.empty(int(size), dtype=np.uint64)
        _fill_u64(self._s, out)
        return out

    def uniform(self, size: int | None = None):
        """Uniform draws on [0, 1) with 53 random bits each."""
        out = np.empty(1 if size is None else int(size))
        _fill_uniform(self._s, out)
        return float(out[0]) if size is None else out

    def normals(self, size: int) -> np.ndarray:
        """Standard normal draws; the stream does not depend on chunk sizes."""
        out = np.empty(int(size))
        start = 0
        if out.size and self._has_spare:
            out[0] = self._spare
            self._has_spare = False
            start = 1
        if start < out.size:
            has_spare, spare = _fill_normals(self._s, out, start)
            self._has_spare = bool(has_spare)
            self._spare = float(spare)
        return out

    def normal(self) -> float:
        return float(self.normals(1)[0])

    def randbelow(self, n: int) -> int:
        if n < 1:
            raise ContractError(f"randbelow needs n >= 1, got {n}")
        return int(_randbelow_one(self._s, np.uint64(n)))

    def sample(self, n: int, k: int) -> np.ndarray:
        """``k`` distinct indices from ``range(n)``, uniformly (partial Fisher-Yates)."""
        if not 0 <= k <= n:
            raise ContractError(f"cannot sample {k} of {n} without replacement")
        return _partial_shuffle(self._s, np.int64(n), np.int64(k))

    def permutation(self, n: int) -> np.ndarray:
        return self.sample(n, n)


def matmul(a: Matrix, b: Matrix) -> Matrix:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ContractError(f"matmul dimension mismatch: {a.shape} x {b.shape}")
    return a @ b


def frobenius_norm_sq(ws: Sequence[Matrix] | Iterable[Matrix]) -> float:
    """Sum of squared entries over a list of matrices."""
    ws = list(ws)
    if not ws:
        raise ContractError("frobenius_norm_sq needs at least one matrix")
    total = 0.0
    for w in ws:
        w = np.asarray(w, dtype=np.float64)
        total += float(np.sum(w * w))
    return total


def gaussian_matrix(rng: Rng, rows: int, cols: int, std: float) -> Matrix:
    """``rows x cols`` matrix of i.i.d. N(0, std^2) entries, filled row-major."""
    if not std > 0:
        raise ContractError(f"std must be positive, got {std}")
    if rows < 1 or cols < 1:
        raise ContractError(f"bad matrix shape {rows}x{cols}")
    return std * rng.normals(rows * cols).reshape(rows, cols)
