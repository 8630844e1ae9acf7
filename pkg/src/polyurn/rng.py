"""Counter-based random streams keyed by ``(seed, replica)``.

Draw ``i`` of a stream is a pure function of ``(seed, replica, i)``: a
SplitMix64-style finalizer over a Weyl counter, whitened by a second
per-stream key. Replicas never share state, so any parallel schedule gives
bit-identical output. The jitted and pure-Python versions are the same
function.
"""

from __future__ import annotations

import numba as nb
import numpy as np

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_SALT_A = 0x243F6A8885A308D3
_SALT_B = 0x13198A2E03707344
_INV53 = 1.0 / 9007199254740992.0


def mix64(z: int) -> int:
    z &= MASK
    z = ((z ^ (z >> 30)) * _M1) & MASK
    z = ((z ^ (z >> 27)) * _M2) & MASK
    return z ^ (z >> 31)


def stream_keys(seed: int, replica: int) -> tuple[int, int]:
    k1 = mix64(mix64((seed + _SALT_A) & MASK) + replica)
    k2 = mix64((k1 + _SALT_B) & MASK)
    return k1, k2


class CounterStream:
    """Pure-Python view of one replica's stream (for single draws and checks)."""

    def __init__(self, seed: int, replica: int = 0):
        self.k1, self.k2 = stream_keys(seed & MASK, replica)
        self.counter = 0

    def next_u64(self) -> int:
        x = mix64((self.k1 + self.counter * GOLDEN) & MASK)
        self.counter += 1
        return mix64(x ^ self.k2)

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * _INV53

    def below(self, n: int) -> int:
        """Integer uniform on ``[0, n)``."""
        return int(self.uniform() * n)


_U = nb.uint64


@nb.njit(inline="always", cache=True)
def _mix64_nb(z):
    z = (z ^ (z >> _U(30))) * _U(_M1)
    z = (z ^ (z >> _U(27))) * _U(_M2)
    return z ^ (z >> _U(31))


@nb.njit(cache=True)
def stream_keys_nb(seed, replica):
    k1 = _mix64_nb(_mix64_nb(_U(seed) + _U(_SALT_A)) + _U(replica))
    k2 = _mix64_nb(k1 + _U(_SALT_B))
    return k1, k2


@nb.njit(inline="always", cache=True)
def draw_u64(k1, k2, counter):
    x = _mix64_nb(k1 + _U(counter) * _U(GOLDEN))
    return _mix64_nb(x ^ k2)


@nb.njit(inline="always", cache=True)
def draw_below(k1, k2, counter, n):
    u = np.float64(draw_u64(k1, k2, counter) >> _U(11)) * _INV53
    return np.int64(u * n)


def normalize_seed(seed: int) -> int:
    if seed < 0:
        raise ValueError("seed must be a nonnegative 64-bit integer")
    return seed & MASK
