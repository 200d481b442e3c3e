"""O(1) sampling from discrete distributions via the alias method.

Construction is Vose's stable two-stack variant.  Weight sums use
compensated (Kahan) accumulation so the implied distribution of a table
reconstructs the normalized input to ~1e-15 even for long weight vectors.
"""

from dataclasses import dataclass, field

import numpy as np
from numba import njit, prange

from . import rng


@dataclass
class AliasTable:
    """Alias table over K outcomes.

    `prob[i]` is the probability that column i returns its own outcome;
    otherwise it returns `alias[i]`.  Both index *columns* (0..K-1); the
    optional `support` maps columns to caller-level outcome labels.
    """

    prob: np.ndarray
    alias: np.ndarray
    support: np.ndarray | None = field(default=None)

    def __len__(self) -> int:
        return len(self.prob)

    def implied_distribution(self) -> np.ndarray:
        """Exact distribution this table samples from (analytic, no draws)."""
        k = len(self.prob)
        out = self.prob.copy()
        np.add.at(out, self.alias, 1.0 - self.prob)
        return out / k

    def draw(self, n: int, seed: int = 1) -> np.ndarray:
        """Draw n outcomes deterministically from `seed` (vectorized)."""
        gen = np.random.default_rng(seed)
        k = len(self.prob)
        cols = gen.integers(0, k, size=n)
        take_alias = gen.random(n) >= self.prob[cols]
        out = np.where(take_alias, self.alias[cols], cols)
        if self.support is not None:
            out = self.support[out]
        return out


@njit(cache=True)
def _kahan_sum(weights):
    total = 0.0
    comp = 0.0
    for i in range(weights.shape[0]):
        y = weights[i] - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


@njit(cache=True)
def _build_alias_arrays(weights, prob, alias):
    """Fill prob/alias for one weight vector; returns 0 on success."""
    k = weights.shape[0]
    total = _kahan_sum(weights)
    if total <= 0.0:
        return 1
    scaled = np.empty(k, dtype=np.float64)
    for i in range(k):
        scaled[i] = weights[i] * k / total
    small = np.empty(k, dtype=np.int64)
    large = np.empty(k, dtype=np.int64)
    ns = 0
    nl = 0
    for i in range(k):
        if scaled[i] < 1.0:
            small[ns] = i
            ns += 1
        else:
            large[nl] = i
            nl += 1
    while ns > 0 and nl > 0:
        ns -= 1
        s = small[ns]
        nl -= 1
        l = large[nl]
        prob[s] = scaled[s]
        alias[s] = l
        scaled[l] = (scaled[l] + scaled[s]) - 1.0
        if scaled[l] < 1.0:
            small[ns] = l
            ns += 1
        else:
            large[nl] = l
            nl += 1
    while nl > 0:
        nl -= 1
        prob[large[nl]] = 1.0
        alias[large[nl]] = large[nl]
    while ns > 0:
        ns -= 1
        prob[small[ns]] = 1.0
        alias[small[ns]] = small[ns]
    return 0


def build_alias_table(weights, support=None) -> AliasTable:
    """Build an AliasTable from nonnegative weights (need not sum to 1)."""
    w = np.ascontiguousarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.shape[0] == 0:
        raise ValueError("weights must be a nonempty 1-D array")
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    prob = np.empty(len(w), dtype=np.float64)
    alias = np.empty(len(w), dtype=np.int32)
    if _build_alias_arrays(w, prob, alias) != 0:
        raise ValueError("weights sum to zero; nothing to sample")
    sup = None if support is None else np.asarray(support)
    if sup is not None and sup.shape[0] != w.shape[0]:
        raise ValueError("support and weights must have equal length")
    return AliasTable(prob=prob, alias=alias, support=sup)


@njit(cache=True, parallel=True)
def build_row_alias_tables(offsets, weights, prob_out, alias_out):
    """Build one alias table per CSR row, in place, aligned with the CSR.

    Row r occupies [offsets[r], offsets[r+1]) in all four arrays; alias
    entries are row-local column indices.  Zero-weight rows are left
    untouched (the walker treats them as dead ends before sampling).
    """
    n = offsets.shape[0] - 1
    for r in prange(n):
        lo = offsets[r]
        hi = offsets[r + 1]
        if hi > lo:
            _build_alias_arrays(weights[lo:hi], prob_out[lo:hi], alias_out[lo:hi])


@njit(cache=True, inline="always")
def alias_draw(prob, alias, lo, hi, state):
    """One draw from the row [lo, hi); returns (state, row-local column)."""
    k = hi - lo
    state, r1 = rng.next_u64(state)
    col = np.int64(r1 % np.uint64(k))
    state, u = rng.next_unit(state)
    if u < prob[lo + col]:
        return state, col
    return state, np.int64(alias[lo + col])
