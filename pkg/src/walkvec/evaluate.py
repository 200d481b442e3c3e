"""Embedding quality evaluation: similarity, analogy, categorization.

Similarity: Spearman rank correlation between cosine similarities and
human scores.  Analogy: 3CosAdd — predict argmax_w cos(w, v_b - v_a +
v_c) excluding the three query words; score is P@1.  Categorization:
k-means (k-means++ seeding, multiple restarts) over the covered words,
scored by cluster purity against the gold categories.

Out-of-vocabulary items are always skipped and reported via coverage;
vectors are never substituted.
"""

from dataclasses import dataclass, field

import numpy as np

from .embed import EmbeddingMatrix
from .errors import (
    ConfigurationError,
    FormatError,
    InsufficientCoverageError,
    UndefinedMetricError,
)

# ---------------------------------------------------------------------------
# Datasets
# ---------------------------------------------------------------------------


@dataclass
class SimilarityDataset:
    pairs: list  # (word1, word2, human_score)


@dataclass
class AnalogyDataset:
    quads: list  # (a, b, c, d) meaning a : b :: c : d


@dataclass
class CategorizationDataset:
    items: list  # (word, category_label)

    @property
    def category_count(self) -> int:
        return len({cat for _, cat in self.items})


@dataclass
class EvalReport:
    task: str
    dataset: str
    score: float
    coverage: float
    covered: int
    skipped: int
    size: int
    extra: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "task": self.task,
            "dataset": self.dataset,
            "score": self.score,
            "coverage": self.coverage,
            "n": self.covered,
        }


# ---------------------------------------------------------------------------
# Core metrics
# ---------------------------------------------------------------------------


def cosine_similarity(u, v) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise UndefinedMetricError("cosine similarity is undefined for a zero vector")
    return float(u @ v / (nu * nv))


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties given the mean of their positions."""
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(values.shape[0], dtype=np.float64)
    sorted_vals = values[order]
    i = 0
    n = values.shape[0]
    while i < n:
        j = i
        while j + 1 < n and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman_rho(predicted, gold) -> float:
    """Pearson correlation of average-rank vectors."""
    x = np.asarray(predicted, dtype=np.float64)
    y = np.asarray(gold, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or x.shape[0] < 2:
        raise UndefinedMetricError("rank correlation needs two equal-length lists of >= 2 values")
    rx = _average_ranks(x)
    ry = _average_ranks(y)
    rx -= rx.mean()
    ry -= ry.mean()
    denom = np.sqrt((rx @ rx) * (ry @ ry))
    if denom == 0.0:
        raise UndefinedMetricError("rank correlation is undefined when either side has no rank variance")
    return float((rx @ ry) / denom)


# ---------------------------------------------------------------------------
# Task evaluators
# ---------------------------------------------------------------------------


def eval_similarity(emb: EmbeddingMatrix, dataset: SimilarityDataset, name: str = "similarity") -> EvalReport:
    predicted = []
    gold = []
    for w1, w2, score in dataset.pairs:
        i = emb.vocab.id_of(w1)
        j = emb.vocab.id_of(w2)
        if i is None or j is None:
            continue
        predicted.append(cosine_similarity(emb.input_vectors[i], emb.input_vectors[j]))
        gold.append(score)
    covered = len(predicted)
    size = len(dataset.pairs)
    if covered < 2:
        raise InsufficientCoverageError(
            f"similarity needs >= 2 in-vocabulary pairs, found {covered} of {size}"
        )
    rho = spearman_rho(predicted, gold)
    return EvalReport(
        task="similarity",
        dataset=name,
        score=rho,
        coverage=covered / size,
        covered=covered,
        skipped=size - covered,
        size=size,
    )


def _normalized_rows(vectors: np.ndarray):
    """(unit rows, valid mask); zero rows are left as zero and masked out."""
    norms = np.linalg.norm(vectors, axis=1)
    valid = norms > 0.0
    unit = np.zeros_like(vectors, dtype=np.float64)
    unit[valid] = vectors[valid] / norms[valid, None]
    return unit, valid


def predict_analogies(emb: EmbeddingMatrix, quads_ids: np.ndarray, batch: int = 256) -> np.ndarray:
    """3CosAdd predictions for id triples (a, b, c) -> predicted word ids.

    quads_ids is (n, 3) int64; returns (n,) int64 predictions.  Query
    words and zero-norm rows are excluded from the argmax.
    """
    unit, valid = _normalized_rows(np.asarray(emb.input_vectors, dtype=np.float64))
    vecs = np.asarray(emb.input_vectors, dtype=np.float64)
    preds = np.empty(quads_ids.shape[0], dtype=np.int64)
    for lo in range(0, quads_ids.shape[0], batch):
        chunk = quads_ids[lo : lo + batch]
        targets = vecs[chunk[:, 1]] - vecs[chunk[:, 0]] + vecs[chunk[:, 2]]
        tnorm = np.linalg.norm(targets, axis=1)
        tnorm[tnorm == 0.0] = 1.0
        scores = unit @ (targets / tnorm[:, None]).T  # |V| x chunk
        scores[~valid, :] = -np.inf
        for r in range(chunk.shape[0]):
            scores[chunk[r], r] = -np.inf
        preds[lo : lo + chunk.shape[0]] = np.argmax(scores, axis=0)
    return preds


def eval_analogy(emb: EmbeddingMatrix, dataset: AnalogyDataset, name: str = "analogy") -> EvalReport:
    ids = []
    expected = []
    for a, b, c, d in dataset.quads:
        quad_ids = [emb.vocab.id_of(w) for w in (a, b, c, d)]
        if any(i is None for i in quad_ids):
            continue
        ids.append(quad_ids[:3])
        expected.append(quad_ids[3])
    size = len(dataset.quads)
    covered = len(ids)
    if covered == 0:
        raise InsufficientCoverageError(
            f"analogy needs >= 1 fully in-vocabulary quadruple, found 0 of {size}"
        )
    preds = predict_analogies(emb, np.asarray(ids, dtype=np.int64))
    correct = int(np.sum(preds == np.asarray(expected, dtype=np.int64)))
    return EvalReport(
        task="analogy",
        dataset=name,
        score=correct / covered,
        coverage=covered / size,
        covered=covered,
        skipped=size - covered,
        size=size,
        extra={"correct": correct},
    )


# ---------------------------------------------------------------------------
# k-means + purity
# ---------------------------------------------------------------------------


def _kmeanspp_init(points: np.ndarray, k: int, gen: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]), dtype=np.float64)
    first = int(gen.integers(0, n))
    centers[0] = points[first]
    dist2 = np.sum((points - centers[0]) ** 2, axis=1)
    for c in range(1, k):
        total = dist2.sum()
        if total <= 0.0:
            # All remaining points coincide with a center; any choice works.
            idx = int(gen.integers(0, n))
        else:
            idx = int(gen.choice(n, p=dist2 / total))
        centers[c] = points[idx]
        dist2 = np.minimum(dist2, np.sum((points - centers[c]) ** 2, axis=1))
    return centers


def _lloyd(points: np.ndarray, centers: np.ndarray, max_iter: int = 100):
    k = centers.shape[0]
    labels = np.full(points.shape[0], -1, dtype=np.int64)
    for _ in range(max_iter):
        # Squared distances via the expansion ||x||^2 - 2 x.c + ||c||^2.
        d2 = (
            np.sum(points**2, axis=1)[:, None]
            - 2.0 * points @ centers.T
            + np.sum(centers**2, axis=1)[None, :]
        )
        new_labels = np.argmin(d2, axis=1)
        taken = d2[np.arange(points.shape[0]), new_labels]
        for c in range(k):
            members = new_labels == c
            if np.any(members):
                centers[c] = points[members].mean(axis=0)
            else:
                # Re-seed an empty cluster at the worst-fit point.
                far = int(np.argmax(taken))
                centers[c] = points[far]
                new_labels[far] = c
                taken[far] = 0.0
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    inertia = 0.0
    for c in range(k):
        members = labels == c
        if np.any(members):
            inertia += float(np.sum((points[members] - centers[c]) ** 2))
    return labels, inertia


def kmeans(vectors, k: int, seed: int = 1, restarts: int = 10) -> np.ndarray:
    """Best-of-`restarts` Lloyd's k-means with k-means++ seeding."""
    points = np.asarray(vectors, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] == 0:
        raise ConfigurationError("k-means needs a nonempty 2-D array of points")
    if k < 1 or k > points.shape[0]:
        raise ConfigurationError(
            f"k must be in [1, number of points]; got k={k} for {points.shape[0]} points"
        )
    best_labels = None
    best_inertia = np.inf
    for r in range(restarts):
        gen = np.random.default_rng([seed, r])
        centers = _kmeanspp_init(points, k, gen)
        labels, inertia = _lloyd(points, centers)
        if inertia < best_inertia:
            best_inertia = inertia
            best_labels = labels
    return best_labels


def kmeans_inertia(vectors, labels) -> float:
    """Within-cluster sum of squared distances to cluster means."""
    points = np.asarray(vectors, dtype=np.float64)
    labels = np.asarray(labels)
    inertia = 0.0
    for c in np.unique(labels):
        members = points[labels == c]
        inertia += float(np.sum((members - members.mean(axis=0)) ** 2))
    return inertia


def purity(labels, categories) -> float:
    """Fraction of items whose cluster's majority category is their own."""
    labels = np.asarray(labels)
    categories = np.asarray(categories)
    if labels.shape[0] == 0 or labels.shape != categories.shape:
        raise UndefinedMetricError("purity needs equal-length nonempty label lists")
    total = 0
    for c in np.unique(labels):
        member_cats = categories[labels == c]
        _, counts = np.unique(member_cats, return_counts=True)
        total += int(counts.max())
    return total / labels.shape[0]


def eval_categorization(
    emb: EmbeddingMatrix,
    dataset: CategorizationDataset,
    name: str = "categorization",
    seed: int = 1,
    restarts: int = 10,
) -> EvalReport:
    words = []
    cats = []
    for word, cat in dataset.items:
        if emb.vocab.id_of(word) is not None:
            words.append(word)
            cats.append(cat)
    size = len(dataset.items)
    covered = len(words)
    k = dataset.category_count
    if k < 2:
        raise ConfigurationError("categorization dataset must have >= 2 categories")
    if covered < k:
        raise InsufficientCoverageError(
            f"categorization needs >= {k} in-vocabulary words (one per category), found {covered}"
        )
    points = np.stack([np.asarray(emb.vector(w), dtype=np.float64) for w in words])
    labels = kmeans(points, k, seed=seed, restarts=restarts)
    cat_ids = {c: i for i, c in enumerate(sorted(set(cats)))}
    score = purity(labels, np.asarray([cat_ids[c] for c in cats], dtype=np.int64))
    return EvalReport(
        task="categorization",
        dataset=name,
        score=score,
        coverage=covered / size,
        covered=covered,
        skipped=size - covered,
        size=size,
        extra={"clusters": int(k)},
    )


# ---------------------------------------------------------------------------
# Dataset files
# ---------------------------------------------------------------------------


def _data_lines(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            yield lineno, stripped


def load_similarity(path) -> SimilarityDataset:
    pairs = []
    seen = set()
    for lineno, line in _data_lines(path):
        parts = line.split("\t")
        if len(parts) != 3:
            raise FormatError(f"{path}:{lineno}: expected 'word1<TAB>word2<TAB>score'")
        w1, w2 = parts[0].lower(), parts[1].lower()
        try:
            score = float(parts[2])
        except ValueError:
            raise FormatError(f"{path}:{lineno}: score {parts[2]!r} is not a number") from None
        if not np.isfinite(score):
            raise FormatError(f"{path}:{lineno}: score must be finite")
        key = (min(w1, w2), max(w1, w2))
        if key in seen:
            raise FormatError(f"{path}:{lineno}: duplicate pair {w1!r}, {w2!r}")
        seen.add(key)
        pairs.append((w1, w2, score))
    return SimilarityDataset(pairs=pairs)


def load_analogy(path) -> AnalogyDataset:
    quads = []
    for lineno, line in _data_lines(path):
        parts = line.split()
        if len(parts) != 4:
            raise FormatError(f"{path}:{lineno}: expected 'a b c d', got {len(parts)} fields")
        a, b, c, d = (w.lower() for w in parts)
        if a == b:
            raise FormatError(f"{path}:{lineno}: degenerate relation {a!r} : {b!r}")
        quads.append((a, b, c, d))
    return AnalogyDataset(quads=quads)


def load_categorization(path) -> CategorizationDataset:
    items = []
    for lineno, line in _data_lines(path):
        parts = line.split("\t")
        if len(parts) != 2:
            raise FormatError(f"{path}:{lineno}: expected 'word<TAB>category'")
        items.append((parts[0].lower(), parts[1].lower()))
    ds = CategorizationDataset(items=items)
    if items and ds.category_count < 2:
        raise FormatError(f"{path}: categorization dataset needs >= 2 categories")
    return ds


def save_similarity(dataset: SimilarityDataset, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for w1, w2, score in dataset.pairs:
            fh.write(f"{w1}\t{w2}\t{score!r}\n")


def save_analogy(dataset: AnalogyDataset, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for a, b, c, d in dataset.quads:
            fh.write(f"{a} {b} {c} {d}\n")


def save_categorization(dataset: CategorizationDataset, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for word, cat in dataset.items:
            fh.write(f"{word}\t{cat}\n")
