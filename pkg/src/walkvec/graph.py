"""Directed, weighted word co-occurrence graph.

Nodes are vocabulary ids; the edge u -> v carries the number of times v
immediately follows u in the encoded token stream.  Separate input files
(or separate runs generally) never contribute cross-boundary pairs.
Storage is CSR: `out_offsets` (int64, length |V|+1), `out_targets`
(int32, sorted ascending within each row), `out_weights` (uint64).
Self-loops ("going going gone") are ordinary edges.

Each node also carries a start weight used to apportion the walk budget:
either term frequency (count / total) or a TF-IDF variant computed over
fixed-length windows of the retained token stream, renormalized to a
probability vector.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from . import sections
from .corpus import Vocabulary, encode
from .errors import ConfigurationError, FormatError, InternalConsistencyError

TFIDF_WINDOW = 200

_EMPTY_SLOT = np.int64(-1)


# ---------------------------------------------------------------------------
# Edge hash set: open-addressing table of (u << 32) | v keys, sentinel -1.
# Sized at >= 2x load and a power of two so probing is a cheap mask.
# ---------------------------------------------------------------------------


@njit(cache=True, inline="always")
def _edge_key(u, v):
    return (np.int64(u) << np.int64(32)) | np.int64(v)


@njit(cache=True)
def _hash_table_build(offsets, targets, table):
    n = offsets.shape[0] - 1
    mask = np.int64(table.shape[0] - 1)
    for u in range(n):
        for j in range(offsets[u], offsets[u + 1]):
            key = _edge_key(u, targets[j])
            # Fibonacci hashing of the 64-bit key.
            slot = np.int64((np.uint64(key) * np.uint64(0x9E3779B97F4A7C15)) >> np.uint64(40)) & mask
            while table[slot] != _EMPTY_SLOT:
                slot = (slot + 1) & mask
            table[slot] = key


@njit(cache=True, inline="always")
def edge_exists(table, u, v):
    """O(1) membership test for the directed edge u -> v."""
    key = _edge_key(u, v)
    mask = np.int64(table.shape[0] - 1)
    slot = np.int64((np.uint64(key) * np.uint64(0x9E3779B97F4A7C15)) >> np.uint64(40)) & mask
    while True:
        entry = table[slot]
        if entry == key:
            return True
        if entry == _EMPTY_SLOT:
            return False
        slot = (slot + 1) & mask


def _build_edge_table(offsets: np.ndarray, targets: np.ndarray) -> np.ndarray:
    n_edges = int(targets.shape[0])
    size = 16
    while size < 2 * max(n_edges, 1):
        size *= 2
    table = np.full(size, _EMPTY_SLOT, dtype=np.int64)
    _hash_table_build(offsets, targets, table)
    return table


# ---------------------------------------------------------------------------
# Graph container
# ---------------------------------------------------------------------------


@dataclass
class CooccurrenceGraph:
    vocab: Vocabulary
    out_offsets: np.ndarray  # int64, |V|+1
    out_targets: np.ndarray  # int32, sorted within each row
    out_weights: np.ndarray  # uint64
    node_weights: np.ndarray | None = None  # float64 start distribution
    edge_table: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.edge_table is None:
            self.edge_table = _build_edge_table(self.out_offsets, self.out_targets)

    @property
    def num_nodes(self) -> int:
        return len(self.vocab)

    @property
    def num_edges(self) -> int:
        return int(self.out_targets.shape[0])

    def out_degree(self, u: int) -> int:
        return int(self.out_offsets[u + 1] - self.out_offsets[u])

    def neighbors(self, u: int):
        """(targets, weights) views for node u's out-edges."""
        lo, hi = self.out_offsets[u], self.out_offsets[u + 1]
        return self.out_targets[lo:hi], self.out_weights[lo:hi]

    def has_edge(self, u: int, v: int) -> bool:
        return bool(edge_exists(self.edge_table, u, v))

    def edge_weight(self, u: int, v: int) -> int:
        lo, hi = self.out_offsets[u], self.out_offsets[u + 1]
        j = np.searchsorted(self.out_targets[lo:hi], v)
        if j < hi - lo and self.out_targets[lo + j] == v:
            return int(self.out_weights[lo + j])
        return 0


@dataclass
class GraphStats:
    node_count: int
    edge_count: int
    density: float
    avg_out_degree: float


def graph_stats(graph: CooccurrenceGraph) -> GraphStats:
    n, e = graph.num_nodes, graph.num_edges
    density = e / (n * (n - 1)) if n > 1 else 0.0
    return GraphStats(
        node_count=n,
        edge_count=e,
        density=density,
        avg_out_degree=e / n if n else 0.0,
    )


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------


class GraphAccumulator:
    """Accumulates adjacent-pair counts across any number of token runs.

    Pairs within a run are packed into 64-bit keys (u << 32 | v), counted
    with np.unique, and merged into a running sorted (keys, counts) pair
    of arrays.  Memory stays proportional to the number of *distinct*
    edges, not the corpus length.
    """

    def __init__(self, vocab: Vocabulary):
        self.vocab = vocab
        self._keys = np.empty(0, dtype=np.int64)
        self._counts = np.empty(0, dtype=np.int64)

    def add_run(self, ids: np.ndarray) -> None:
        """Add one contiguous token-id run (no pairing across calls)."""
        ids = np.asarray(ids, dtype=np.int64)
        if ids.shape[0] < 2:
            return
        pair_keys = (ids[:-1] << np.int64(32)) | ids[1:]
        keys, counts = np.unique(pair_keys, return_counts=True)
        if self._keys.shape[0] == 0:
            self._keys, self._counts = keys, counts
            return
        merged_keys = np.concatenate([self._keys, keys])
        merged_counts = np.concatenate([self._counts, counts])
        order = np.argsort(merged_keys, kind="mergesort")
        merged_keys = merged_keys[order]
        merged_counts = merged_counts[order]
        boundary = np.empty(merged_keys.shape[0], dtype=bool)
        boundary[0] = True
        np.not_equal(merged_keys[1:], merged_keys[:-1], out=boundary[1:])
        starts = np.flatnonzero(boundary)
        self._keys = merged_keys[starts]
        self._counts = np.add.reduceat(merged_counts, starts)

    def finish(self) -> CooccurrenceGraph:
        n = len(self.vocab)
        srcs = (self._keys >> np.int64(32)).astype(np.int64)
        tgts = (self._keys & np.int64(0xFFFFFFFF)).astype(np.int32)
        offsets = np.zeros(n + 1, dtype=np.int64)
        np.add.at(offsets, srcs + 1, 1)
        np.cumsum(offsets, out=offsets)
        # Keys are sorted, so targets within each row are already ascending.
        return CooccurrenceGraph(
            vocab=self.vocab,
            out_offsets=offsets,
            out_targets=tgts,
            out_weights=self._counts.astype(np.uint64),
        )


def build_graph(runs, vocab: Vocabulary) -> CooccurrenceGraph:
    """Build the graph from an iterable of runs.

    Each run may be a token list/iterator (encoded against `vocab`,
    out-of-vocabulary tokens dropped) or an id array.  Runs do not pair
    across their boundary.
    """
    acc = GraphAccumulator(vocab)
    for run in runs:
        ids = run if isinstance(run, np.ndarray) else encode(run, vocab)
        acc.add_run(ids)
    return acc.finish()


def from_edges(words, edges, node_weights=None) -> CooccurrenceGraph:
    """Construct a graph directly from an edge list (tests, examples).

    `edges` is an iterable of (src_word, dst_word, count).  Word counts in
    the synthesized vocabulary are out-weight sums (so TF start weights
    remain meaningful), with a floor of 1 for isolated words.
    """
    words = list(words)
    index = {w: i for i, w in enumerate(words)}
    merged: dict = {}
    for s, d, c in edges:
        key = (index[s], index[d])
        merged[key] = merged.get(key, 0) + int(c)
    triples = sorted((s, d, c) for (s, d), c in merged.items())
    out_sum = np.zeros(len(words), dtype=np.int64)
    for s, _, c in triples:
        out_sum[s] += c
    counts = np.maximum(out_sum, 1)
    # Re-rank words by count desc / lexicographic to match Vocabulary's contract.
    ranked = sorted(range(len(words)), key=lambda i: (-counts[i], words[i]))
    remap = np.empty(len(words), dtype=np.int64)
    for new_id, old_id in enumerate(ranked):
        remap[old_id] = new_id
    new_words = [words[i] for i in ranked]
    vocab = Vocabulary(
        words=new_words,
        ids={w: i for i, w in enumerate(new_words)},
        counts=counts[ranked],
        total_count=int(counts.sum()),
    )
    triples = sorted((int(remap[s]), int(remap[d]), c) for s, d, c in triples)
    n = len(words)
    offsets = np.zeros(n + 1, dtype=np.int64)
    for s, _, _ in triples:
        offsets[s + 1] += 1
    np.cumsum(offsets, out=offsets)
    targets = np.array([d for _, d, _ in triples], dtype=np.int32)
    weights = np.array([c for _, _, c in triples], dtype=np.uint64)
    nw = None
    if node_weights is not None:
        nw = np.asarray([node_weights[w] for w in new_words], dtype=np.float64)
    return CooccurrenceGraph(vocab, offsets, targets, weights, node_weights=nw)


# ---------------------------------------------------------------------------
# Node start weights
# ---------------------------------------------------------------------------


def compute_tf_node_weights(vocab: Vocabulary) -> np.ndarray:
    """Term frequency: count(v) / sum of all counts."""
    return vocab.counts.astype(np.float64) / float(vocab.total_count)


def compute_tfidf_node_weights(runs, vocab: Vocabulary, window: int = TFIDF_WINDOW) -> np.ndarray:
    """TF-IDF start weights over fixed windows of the retained stream.

    Each run's encoded ids are cut into consecutive non-overlapping
    windows of `window` tokens (final partial window kept).  For word v,
    raw(v) = tf(v) * ln(num_windows / df(v)) where df counts windows
    containing v; the raw vector is then renormalized to sum to 1.
    """
    if window < 1:
        raise ConfigurationError(f"tf-idf window must be >= 1, got {window}")
    n = len(vocab)
    df = np.zeros(n, dtype=np.int64)
    num_windows = 0
    for run in runs:
        ids = run if isinstance(run, np.ndarray) else encode(run, vocab)
        ids = np.asarray(ids, dtype=np.int64)
        if ids.shape[0] == 0:
            continue
        run_windows = -(-ids.shape[0] // window)  # ceil division
        win_id = np.arange(ids.shape[0], dtype=np.int64) // window
        # Distinct (window, word) pairs; second component counts documents.
        pair = win_id * np.int64(n) + ids
        distinct = np.unique(pair)
        np.add.at(df, (distinct % np.int64(n)).astype(np.int64), 1)
        num_windows += int(run_windows)
    if num_windows == 0:
        raise ConfigurationError("tf-idf requested but the corpus has no retained tokens")
    missing = np.flatnonzero((vocab.counts > 0) & (df == 0))
    if missing.size:
        raise InternalConsistencyError(
            f"word {vocab.words[int(missing[0])]!r} has corpus count "
            f"{int(vocab.counts[int(missing[0])])} but appears in no window"
        )
    raw = _tfidf_raw(vocab, df, num_windows)
    total = raw.sum()
    if total <= 0.0:
        raise ConfigurationError(
            "tf-idf weights are all zero (every word occurs in every window); "
            "use tf start weights for this corpus"
        )
    return raw / total


def _tfidf_raw(vocab: Vocabulary, df: np.ndarray, num_windows: int) -> np.ndarray:
    """Pre-normalization TF-IDF values (exposed for direct inspection)."""
    tf = vocab.counts.astype(np.float64) / float(vocab.total_count)
    with np.errstate(divide="ignore"):
        idf = np.log(float(num_windows) / np.maximum(df, 1).astype(np.float64))
    idf[df == 0] = 0.0
    return tf * idf


def attach_node_weights(graph: CooccurrenceGraph, weights: np.ndarray) -> CooccurrenceGraph:
    """Validate and attach a start-weight vector to the graph (in place)."""
    w = np.ascontiguousarray(weights, dtype=np.float64)
    if w.shape != (graph.num_nodes,):
        raise ConfigurationError(
            f"node-weight vector has length {w.shape[0]}, graph has {graph.num_nodes} nodes"
        )
    if np.any(w < 0) or not math.isclose(float(w.sum()), 1.0, abs_tol=1e-9):
        raise ConfigurationError("node weights must be nonnegative and sum to 1 (+/- 1e-9)")
    graph.node_weights = w
    return graph


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

_GRAPH_MAGIC = b"WVCOOCG1"
_GRAPH_VERSION = 1


def save_graph(graph: CooccurrenceGraph, path) -> None:
    head = {
        "nodes": graph.num_nodes,
        "edges": graph.num_edges,
        "total_tokens": int(graph.vocab.total_count),
        "has_node_weights": graph.node_weights is not None,
    }
    vocab_blob = "\n".join(graph.vocab.words).encode("utf-8")
    payloads = [
        (b"HEAD", json.dumps(head, sort_keys=True).encode("utf-8")),
        (b"VOCW", vocab_blob),
        (b"VOCC", np.ascontiguousarray(graph.vocab.counts, dtype="<i8").tobytes()),
        (b"OFFS", np.ascontiguousarray(graph.out_offsets, dtype="<i8").tobytes()),
        (b"TGTS", np.ascontiguousarray(graph.out_targets, dtype="<i4").tobytes()),
        (b"WGTS", np.ascontiguousarray(graph.out_weights, dtype="<u8").tobytes()),
        (
            b"NODW",
            b""
            if graph.node_weights is None
            else np.ascontiguousarray(graph.node_weights, dtype="<f8").tobytes(),
        ),
    ]
    sections.write_sections(path, _GRAPH_MAGIC, _GRAPH_VERSION, payloads)


def load_graph(path) -> CooccurrenceGraph:
    secs = sections.read_sections(path, _GRAPH_MAGIC, _GRAPH_VERSION)
    head = json.loads(sections.require(secs, b"HEAD", path).decode("utf-8"))
    words = sections.require(secs, b"VOCW", path).decode("utf-8").split("\n")
    if words == [""]:
        words = []
    counts = np.frombuffer(sections.require(secs, b"VOCC", path), dtype="<i8").astype(np.int64)
    offsets = np.frombuffer(sections.require(secs, b"OFFS", path), dtype="<i8").astype(np.int64)
    targets = np.frombuffer(sections.require(secs, b"TGTS", path), dtype="<i4").astype(np.int32)
    weights = np.frombuffer(sections.require(secs, b"WGTS", path), dtype="<u8").astype(np.uint64)
    nodw_blob = sections.require(secs, b"NODW", path)
    node_weights = (
        np.frombuffer(nodw_blob, dtype="<f8").astype(np.float64) if nodw_blob else None
    )
    if len(words) != head["nodes"] or counts.shape[0] != head["nodes"]:
        raise FormatError(f"{path}: vocabulary length disagrees with header node count")
    if offsets.shape[0] != head["nodes"] + 1:
        raise FormatError(f"{path}: offsets length disagrees with header node count")
    if targets.shape[0] != head["edges"] or weights.shape[0] != head["edges"]:
        raise FormatError(f"{path}: edge arrays disagree with header edge count")
    if node_weights is not None and node_weights.shape[0] != head["nodes"]:
        raise FormatError(f"{path}: node-weight vector disagrees with header node count")
    vocab = Vocabulary(
        words=words,
        ids={w: i for i, w in enumerate(words)},
        counts=counts,
        total_count=int(head["total_tokens"]),
    )
    return CooccurrenceGraph(vocab, offsets, targets, weights, node_weights=node_weights)


def write_edgelist(graph: CooccurrenceGraph, path) -> None:
    """Human-readable TSV dump: src_word, dst_word, count (CSR order)."""
    with open(path, "w", encoding="utf-8") as fh:
        for u in range(graph.num_nodes):
            lo, hi = graph.out_offsets[u], graph.out_offsets[u + 1]
            for j in range(lo, hi):
                fh.write(
                    f"{graph.vocab.words[u]}\t"
                    f"{graph.vocab.words[int(graph.out_targets[j])]}\t"
                    f"{int(graph.out_weights[j])}\n"
                )
