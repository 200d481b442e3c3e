"""Shared fixtures.

The thread-count environment variable must be set before numba is imported
anywhere, otherwise the runtime pins the thread pool to the machine's core
count and the 1-vs-N-thread determinism tests cannot run on small boxes.
"""

import os

os.environ.setdefault("NUMBA_NUM_THREADS", "4")

import numpy as np
import pytest

from walkvec import (
    CooccurrenceGraph,
    TrainConfig,
    Vocabulary,
    WalkConfig,
    build_vocabulary,
    compute_tf_node_weights,
    from_edges,
    generate_corpus,
    tokenize,
)
from walkvec import embed as _embed

# A small proverb used as a fixed corpus throughout the suite: 20 tokens,
# 16 distinct words, one repeated bigram ("worth doing" appears twice).
SENTENCE = (
    "In truth, whatever is worth doing at all, is worth doing well; "
    "and nothing can be done well without attention."
)

# A four-node directed graph with one self-loop, used wherever a tiny graph
# with hand-checkable transition probabilities is needed.
LADDER_EDGES = [
    ("a", "b", 3),
    ("a", "d", 1),
    ("b", "b", 5),
    ("c", "b", 2),
    ("c", "d", 7),
    ("d", "a", 3),
    ("d", "b", 1),
]


@pytest.fixture(scope="session")
def sentence_tokens() -> list[str]:
    return tokenize(SENTENCE)


@pytest.fixture(scope="session")
def sentence_vocab(sentence_tokens) -> Vocabulary:
    return build_vocabulary(sentence_tokens)


@pytest.fixture()
def ladder_graph() -> CooccurrenceGraph:
    graph = from_edges(["a", "b", "c", "d"], LADDER_EDGES)
    graph.node_weights = compute_tf_node_weights(graph.vocab)
    return graph


@pytest.fixture(scope="session")
def warm_kernels() -> None:
    """Compile every jit kernel once so timed assertions measure steady-state
    throughput rather than compilation."""
    graph = from_edges(["u", "v"], [("u", "v", 1), ("v", "u", 1)])
    graph.node_weights = compute_tf_node_weights(graph.vocab)
    for p, q in ((1.0, 1.0), (2.0, 0.5)):
        cfg = WalkConfig(p=p, q=q, walk_length=4, total_walks=4)
        corpus = generate_corpus(graph, cfg)
    tcfg = TrainConfig(dimension=4, window=2, negatives=2, epochs=1)
    _embed.train(corpus, tcfg, words=graph.vocab.words)
    _embed.train(
        corpus,
        TrainConfig(dimension=4, window=2, negatives=2, epochs=1, deterministic=True),
        words=graph.vocab.words,
    )


def make_random_graph(
    rng: np.random.Generator,
    max_nodes: int = 50,
    max_out_degree: int = 8,
    *,
    allow_sinks: bool = False,
) -> CooccurrenceGraph:
    """Random directed weighted graph for property tests."""
    n = int(rng.integers(2, max_nodes + 1))
    words = [f"w{i:03d}" for i in range(n)]
    edges = []
    for u in range(n):
        degree = int(rng.integers(0 if allow_sinks else 1, max_out_degree + 1))
        if degree == 0:
            continue
        targets = rng.choice(n, size=min(degree, n), replace=False)
        for v in targets:
            edges.append((words[u], words[int(v)], int(rng.integers(1, 20))))
    if not edges:
        edges.append((words[0], words[min(1, n - 1)], 1))
    graph = from_edges(words, edges)
    graph.node_weights = compute_tf_node_weights(graph.vocab)
    return graph


# ---------------------------------------------------------------------------
# Acceptance-suite reporting: one PASS/FAIL/SKIP line per criterion at the end.
# ---------------------------------------------------------------------------

_CRITERION_RESULTS: dict[str, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if not name.startswith("test_criterion_"):
        return
    if report.when == "call" or (report.when == "setup" and report.skipped):
        outcome = report.outcome.upper()
        reason = ""
        if report.skipped and isinstance(report.longrepr, tuple):
            reason = report.longrepr[2]
        _CRITERION_RESULTS[name] = (outcome, reason)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERION_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_CRITERION_RESULTS):
        outcome, reason = _CRITERION_RESULTS[name]
        line = f"{outcome:7s} {name}"
        if reason:
            line += f"  ({reason})"
        terminalreporter.write_line(line)
