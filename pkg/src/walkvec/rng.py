"""Counter-based pseudo-random streams for reproducible parallel sampling.

Every sampling site derives an independent stream head from (seed, key1, key2)
with a splitmix-style mixer, so output never depends on thread count or on the
order in which tasks execute.  The jitted helpers are meant to be called from
inside numba kernels; `mix64_py` / `derive_seed` are plain-Python equivalents
for driver code that should not trigger JIT compilation.
"""

import numpy as np
from numba import njit

U64 = np.uint64

_GOLDEN = U64(0x9E3779B97F4A7C15)
_MIX1 = U64(0xBF58476D1CE4E5B9)
_MIX2 = U64(0x94D049BB133111EB)

_MASK64 = (1 << 64) - 1
_INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53


@njit(inline="always")
def mix64(z):
    z = (z ^ (z >> U64(30))) * _MIX1
    z = (z ^ (z >> U64(27))) * _MIX2
    return z ^ (z >> U64(31))


@njit(inline="always")
def stream64(seed, key1, key2):
    """Stream head for the (seed, key1, key2) triple; keys must be >= 0."""
    s = mix64(U64(seed) + _GOLDEN * (U64(key1) + U64(1)))
    return mix64(s + _GOLDEN * (U64(key2) + U64(1)))


@njit(inline="always")
def next_u64(state):
    state = state + _GOLDEN
    return state, mix64(state)


@njit(inline="always")
def next_unit(state):
    """Advance the stream; returns (state, uniform float64 in [0, 1))."""
    state, r = next_u64(state)
    return state, (r >> U64(11)) * _INV_2_53


def mix64_py(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h = ((h ^ b) * 0x100000001B3) & _MASK64
    return h


def derive_seed(seed: int, label: str) -> int:
    """Per-stage seed derived from one top-level seed and a stage label."""
    return mix64_py((seed & _MASK64) ^ _fnv1a64(label.encode("utf-8")))
