"""Node-weighted second-order biased random walks over the graph.

Per-node walk budgets are apportioned from the node start weights
(count(v) = max(min_walks_per_node, floor(n * PW[v]))).  Each walk starts
with a first-order step, then follows the p/q-biased second-order rule:
candidate x from current node v with previous node t gets unnormalized
weight alpha(t, x) * W_vx where alpha is 1/p if x == t, 1 if the directed
edge t -> x exists, else 1/q.

Steps are O(1) expected time: proposals come from each node's first-order
alias table and are accepted with probability alpha / alpha_max
(rejection sampling); after 32 consecutive rejections the step falls back
to one exact normalization pass.  The p = q = 1 case skips straight to
the alias draw.

Every walk draws from its own counter-based random stream keyed by
(seed, start node, walk index), so output is bit-identical for any
worker count and walks can be generated in memory-bounded batches.
"""

import json
import math
from dataclasses import dataclass, replace

import numpy as np
from numba import njit, prange

from . import rng, sections
from .alias import alias_draw, build_row_alias_tables
from .errors import ConfigurationError, FormatError
from .graph import CooccurrenceGraph, edge_exists

DEFAULT_WALKS_PER_NODE = 30

_WALKS_MAGIC = b"WVWALKS1"
_WALKS_VERSION = 1


@dataclass(frozen=True)
class WalkConfig:
    """Random-walk parameters.

    `total_walks` is the global budget n shared out by node weight; None
    means 30 * |V|, resolved when the graph is known.  `walk_length` is
    the number of steps, so sequences hold at most walk_length + 1 nodes.
    """

    p: float = 1.0
    q: float = 1.0
    walk_length: int = 200
    total_walks: int | None = None
    min_walks_per_node: int = 1
    seed: int = 1

    def validate(self) -> "WalkConfig":
        if not (self.p > 0 and math.isfinite(self.p)):
            raise ConfigurationError(f"p must be a positive real, got {self.p}")
        if not (self.q > 0 and math.isfinite(self.q)):
            raise ConfigurationError(f"q must be a positive real, got {self.q}")
        if self.walk_length < 1:
            raise ConfigurationError(f"walk_length must be >= 1, got {self.walk_length}")
        if self.total_walks is not None and self.total_walks < 0:
            raise ConfigurationError(f"total_walks must be >= 0, got {self.total_walks}")
        if self.min_walks_per_node < 0:
            raise ConfigurationError(
                f"min_walks_per_node must be >= 0, got {self.min_walks_per_node}"
            )
        if not (0 <= self.seed < 2**64):
            raise ConfigurationError("seed must fit in 64 unsigned bits")
        return self

    def resolve_total_walks(self, num_nodes: int) -> int:
        if self.total_walks is not None:
            return self.total_walks
        return DEFAULT_WALKS_PER_NODE * num_nodes


@dataclass
class WalkCorpus:
    """The sampled sentence set: one int32 id array per walk."""

    sequences: list

    def __len__(self) -> int:
        return len(self.sequences)

    @property
    def total_tokens(self) -> int:
        return int(sum(len(s) for s in self.sequences))


def alpha(p: float, q: float, d_tx: int) -> float:
    """Search-bias multiplier by previous-node distance d_tx in {0, 1, 2}."""
    if d_tx == 0:
        return 1.0 / p
    if d_tx == 1:
        return 1.0
    if d_tx == 2:
        return 1.0 / q
    raise ValueError(f"d_tx must be 0, 1, or 2, got {d_tx}")


def transition_distribution(graph: CooccurrenceGraph, prev, curr: int, p: float, q: float):
    """Analytic next-step distribution over out-neighbors of `curr`.

    `prev=None` gives the first-order distribution (edge weights
    normalized).  Returns a float64 vector aligned with
    graph.neighbors(curr)[0]; empty when `curr` has no out-edges.
    """
    targets, weights = graph.neighbors(curr)
    if targets.shape[0] == 0:
        return np.empty(0, dtype=np.float64)
    pi = weights.astype(np.float64)
    if prev is not None:
        for j in range(targets.shape[0]):
            x = int(targets[j])
            if x == prev:
                d = 0
            elif graph.has_edge(prev, x):
                d = 1
            else:
                d = 2
            pi[j] *= alpha(p, q, d)
    return pi / pi.sum()


def number_walks(node_weights, total_walks: int, min_walks_per_node: int = 1) -> np.ndarray:
    """Per-node walk budget: max(min_walks_per_node, floor(n * PW[v]))."""
    pw = np.asarray(node_weights, dtype=np.float64)
    return np.maximum(
        np.int64(min_walks_per_node),
        np.floor(total_walks * pw).astype(np.int64),
    )


# ---------------------------------------------------------------------------
# Sampling kernels
# ---------------------------------------------------------------------------


@njit(cache=True, inline="always")
def _step_first_order(offsets, targets, prob, alias_arr, curr, state):
    lo = offsets[curr]
    hi = offsets[curr + 1]
    state, col = alias_draw(prob, alias_arr, lo, hi, state)
    return state, targets[lo + col]


@njit(cache=True, inline="always")
def _bias_of(edge_table, prev, x, inv_p, inv_q):
    if x == prev:
        return inv_p
    if edge_exists(edge_table, prev, x):
        return 1.0
    return inv_q


@njit(cache=True)
def _step_biased(
    offsets, targets, weights_f, prob, alias_arr, edge_table,
    prev, curr, inv_p, inv_q, alpha_max, state,
):
    """One exact second-order step; returns (state, next node).

    Caller guarantees `curr` has at least one out-edge and prev >= 0.
    """
    lo = offsets[curr]
    hi = offsets[curr + 1]
    for _ in range(32):
        state, col = alias_draw(prob, alias_arr, lo, hi, state)
        x = targets[lo + col]
        a = _bias_of(edge_table, prev, x, inv_p, inv_q)
        state, u = rng.next_unit(state)
        if u * alpha_max < a:
            return state, x
    # Exact fallback: normalize the biased row and invert the CDF once.
    z = 0.0
    for j in range(lo, hi):
        z += _bias_of(edge_table, prev, targets[j], inv_p, inv_q) * weights_f[j]
    state, u = rng.next_unit(state)
    target_mass = u * z
    acc = 0.0
    for j in range(lo, hi):
        acc += _bias_of(edge_table, prev, targets[j], inv_p, inv_q) * weights_f[j]
        if acc > target_mass:
            return state, targets[j]
    return state, targets[hi - 1]


@njit(cache=True, parallel=True)
def _walk_kernel(
    offsets, targets, weights_f, prob, alias_arr, edge_table,
    task_nodes, task_widx, seed, p, q, walk_length, out, out_len,
):
    inv_p = 1.0 / p
    inv_q = 1.0 / q
    alpha_max = max(1.0, max(inv_p, inv_q))
    unbiased = (p == 1.0) and (q == 1.0)
    for t in prange(task_nodes.shape[0]):
        node = task_nodes[t]
        state = rng.stream64(seed, np.int64(node), task_widx[t])
        out[t, 0] = node
        length = np.int64(1)
        prev = np.int32(-1)
        curr = node
        for _ in range(walk_length):
            if offsets[curr + 1] == offsets[curr]:
                break
            if unbiased or prev < 0:
                state, nxt = _step_first_order(offsets, targets, prob, alias_arr, curr, state)
            else:
                state, nxt = _step_biased(
                    offsets, targets, weights_f, prob, alias_arr, edge_table,
                    prev, curr, inv_p, inv_q, alpha_max, state,
                )
            out[t, length] = nxt
            length += 1
            prev = curr
            curr = nxt
        out_len[t] = length


@njit(cache=True)
def _simulate_steps_kernel(
    offsets, targets, weights_f, prob, alias_arr, edge_table,
    prev, curr, inv_p, inv_q, alpha_max, n, state, counts,
):
    lo = offsets[curr]
    hi = offsets[curr + 1]
    for _ in range(n):
        state, x = _step_biased(
            offsets, targets, weights_f, prob, alias_arr, edge_table,
            prev, curr, inv_p, inv_q, alpha_max, state,
        )
        j = np.searchsorted(targets[lo:hi], x)
        counts[j] += 1


class _SamplerTables:
    """First-order alias tables aligned with the graph's CSR arrays."""

    def __init__(self, graph: CooccurrenceGraph):
        self.weights_f = graph.out_weights.astype(np.float64)
        self.prob = np.zeros(graph.num_edges, dtype=np.float64)
        self.alias = np.zeros(graph.num_edges, dtype=np.int32)
        build_row_alias_tables(graph.out_offsets, self.weights_f, self.prob, self.alias)


def _tables(graph: CooccurrenceGraph) -> _SamplerTables:
    cached = getattr(graph, "_sampler_tables", None)
    if cached is None:
        cached = _SamplerTables(graph)
        graph._sampler_tables = cached
    return cached


def simulate_transition_counts(
    graph: CooccurrenceGraph, prev: int, curr: int, p: float, q: float, n: int, seed: int = 1
) -> np.ndarray:
    """Tally n production-sampler steps from state (prev, curr).

    Returns int64 counts aligned with graph.neighbors(curr)[0]; exists so
    the sampler's empirical distribution can be checked against the
    analytic one without touching kernel internals.
    """
    tab = _tables(graph)
    targets, _ = graph.neighbors(curr)
    counts = np.zeros(targets.shape[0], dtype=np.int64)
    inv_p, inv_q = 1.0 / p, 1.0 / q
    # stream64 returns through Python here, so rewrap as uint64: an int64
    # state would poison the unsigned mixing arithmetic inside the kernel.
    state = np.uint64(rng.stream64(np.uint64(seed), np.int64(prev), np.int64(curr)))
    _simulate_steps_kernel(
        graph.out_offsets, graph.out_targets, tab.weights_f, tab.prob, tab.alias,
        graph.edge_table, np.int32(prev), np.int32(curr),
        inv_p, inv_q, max(1.0, inv_p, inv_q), n, state, counts,
    )
    return counts


# ---------------------------------------------------------------------------
# Corpus generation
# ---------------------------------------------------------------------------


def _task_arrays(graph: CooccurrenceGraph, config: WalkConfig):
    if graph.node_weights is None:
        raise ConfigurationError(
            "graph has no node start weights; compute tf or tf-idf weights first"
        )
    n = config.resolve_total_walks(graph.num_nodes)
    budgets = number_walks(graph.node_weights, n, config.min_walks_per_node)
    task_nodes = np.repeat(
        np.arange(graph.num_nodes, dtype=np.int32), budgets
    )
    # Walk index within each node: 0..budget-1.
    ends = np.cumsum(budgets)
    starts = ends - budgets
    task_widx = np.arange(ends[-1], dtype=np.int64) - np.repeat(starts, budgets)
    return task_nodes, task_widx


def _iter_walk_batches(graph: CooccurrenceGraph, config: WalkConfig, batch_tokens: int = 2**24):
    """Yield (walk matrix, lengths) batches in canonical task order."""
    config.validate()
    tab = _tables(graph)
    task_nodes, task_widx = _task_arrays(graph, config)
    row = config.walk_length + 1
    batch_rows = max(1, batch_tokens // row)
    seed = np.uint64(config.seed)
    for start in range(0, task_nodes.shape[0], batch_rows):
        nodes = task_nodes[start : start + batch_rows]
        widx = task_widx[start : start + batch_rows]
        out = np.zeros((nodes.shape[0], row), dtype=np.int32)
        out_len = np.zeros(nodes.shape[0], dtype=np.int64)
        _walk_kernel(
            graph.out_offsets, graph.out_targets, tab.weights_f, tab.prob, tab.alias,
            graph.edge_table, nodes, widx, seed,
            float(config.p), float(config.q), config.walk_length, out, out_len,
        )
        yield out, out_len


def random_walk(
    graph: CooccurrenceGraph, start: int, config: WalkConfig, walk_index: int = 0
) -> np.ndarray:
    """One walk rooted at `start` (the same walk generate_corpus would emit
    for (start, walk_index))."""
    config.validate()
    tab = _tables(graph)
    out = np.zeros((1, config.walk_length + 1), dtype=np.int32)
    out_len = np.zeros(1, dtype=np.int64)
    _walk_kernel(
        graph.out_offsets, graph.out_targets, tab.weights_f, tab.prob, tab.alias,
        graph.edge_table,
        np.array([start], dtype=np.int32), np.array([walk_index], dtype=np.int64),
        np.uint64(config.seed), float(config.p), float(config.q),
        config.walk_length, out, out_len,
    )
    return out[0, : out_len[0]].copy()


def generate_corpus(graph: CooccurrenceGraph, config: WalkConfig) -> WalkCorpus:
    """Materialize every budgeted walk, discarding walks shorter than 2."""
    sequences = []
    for out, out_len in _iter_walk_batches(graph, config):
        for t in range(out.shape[0]):
            if out_len[t] >= 2:
                sequences.append(out[t, : out_len[t]].copy())
    return WalkCorpus(sequences=sequences)


def generate_walks_text(graph: CooccurrenceGraph, config: WalkConfig, path) -> int:
    """Stream walks to a text file (one walk per line, surface words).

    Returns the number of walks written.
    """
    words = graph.vocab.words
    written = 0
    with open(path, "w", encoding="utf-8") as fh:
        for out, out_len in _iter_walk_batches(graph, config):
            lines = []
            for t in range(out.shape[0]):
                m = out_len[t]
                if m >= 2:
                    lines.append(" ".join(words[out[t, j]] for j in range(m)))
                    written += 1
            if lines:
                fh.write("\n".join(lines) + "\n")
    return written


def generate_walks_binary(graph: CooccurrenceGraph, config: WalkConfig, path) -> int:
    """Write walks as a sectioned binary id-sequence file."""
    corpus = generate_corpus(graph, config)
    save_walks_binary(corpus, graph.vocab.words, path)
    return len(corpus)


def save_walks_text(corpus: WalkCorpus, words, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for seq in corpus.sequences:
            fh.write(" ".join(words[i] for i in seq) + "\n")


def load_walks_text(path) -> list:
    """Read a text walk file back as a list of word lists (small files)."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            toks = line.split()
            if toks:
                out.append(toks)
    return out


def save_walks_binary(corpus: WalkCorpus, words, path) -> None:
    offsets = np.zeros(len(corpus.sequences) + 1, dtype=np.int64)
    for i, seq in enumerate(corpus.sequences):
        offsets[i + 1] = offsets[i] + len(seq)
    flat = (
        np.concatenate(corpus.sequences).astype(np.int32)
        if corpus.sequences
        else np.empty(0, dtype=np.int32)
    )
    head = {"walks": len(corpus.sequences), "tokens": int(offsets[-1]), "nodes": len(words)}
    sections.write_sections(
        path,
        _WALKS_MAGIC,
        _WALKS_VERSION,
        [
            (b"HEAD", json.dumps(head, sort_keys=True).encode("utf-8")),
            (b"VOCW", "\n".join(words).encode("utf-8")),
            (b"OFFS", np.ascontiguousarray(offsets, dtype="<i8").tobytes()),
            (b"TOKS", np.ascontiguousarray(flat, dtype="<i4").tobytes()),
        ],
    )


def load_walks_binary(path):
    """Returns (WalkCorpus, vocabulary words list)."""
    secs = sections.read_sections(path, _WALKS_MAGIC, _WALKS_VERSION)
    head = json.loads(sections.require(secs, b"HEAD", path).decode("utf-8"))
    words = sections.require(secs, b"VOCW", path).decode("utf-8").split("\n")
    if words == [""]:
        words = []
    offsets = np.frombuffer(sections.require(secs, b"OFFS", path), dtype="<i8").astype(np.int64)
    flat = np.frombuffer(sections.require(secs, b"TOKS", path), dtype="<i4").astype(np.int32)
    if offsets.shape[0] != head["walks"] + 1 or flat.shape[0] != head["tokens"]:
        raise FormatError(f"{path}: walk arrays disagree with header counts")
    if len(words) != head["nodes"]:
        raise FormatError(f"{path}: vocabulary length disagrees with header node count")
    sequences = [flat[offsets[i] : offsets[i + 1]] for i in range(head["walks"])]
    return WalkCorpus(sequences=sequences), words


def with_walks_per_node(config: WalkConfig, walks_per_node: int, num_nodes: int) -> WalkConfig:
    """Convenience: express the global budget as walks per node."""
    return replace(config, total_walks=walks_per_node * num_nodes)
