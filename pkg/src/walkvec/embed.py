"""Skip-gram with negative sampling (SGNS) over the sampled walk corpus.

For each center position a context half-width b is drawn uniformly from
[1, k]; every (center, context) pair inside that window contributes one
positive example plus `negatives` noise words drawn from the corpus
unigram distribution raised to `noise_exponent`.  The pair loss is
-ln sigma(u_o . v_c) - sum_neg ln sigma(-u_neg . v_c), where v_c is the
center word's input vector and u_o / u_neg are output vectors.  The
learning rate decays linearly from initial_lr to min_lr over total
(epoch, token) progress.

Two execution modes share one per-sentence routine: a sequential mode
that is bit-deterministic for a fixed seed, and a lock-free parallel
mode where concurrent updates may race (standard asynchronous SGD).
Randomness is drawn from counter-based streams keyed by (seed, epoch,
sentence index), so the parallel mode samples the same windows and noise
words as the sequential one — only update interleaving differs.

Vector tables are float32; losses and dot products accumulate in
float64.  `sgns_pair_loss` is the pure-float64 reference used to verify
the kernel's gradients.
"""

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from numba import njit, prange

from . import rng
from .alias import alias_draw, build_alias_table
from .corpus import Vocabulary, build_vocabulary
from .errors import ConfigurationError, FormatError

_SIGMA_CLAMP = 1e-7


@dataclass(frozen=True)
class TrainConfig:
    dimension: int = 100
    window: int = 10
    negatives: int = 5
    epochs: int = 5
    initial_lr: float = 0.025
    min_lr: float = 1e-4
    noise_exponent: float = 0.75
    seed: int = 1
    deterministic: bool = False
    subsample: float = 0.0  # frequent-word downsampling threshold; 0 = off

    def validate(self) -> "TrainConfig":
        if self.dimension < 1:
            raise ConfigurationError(f"dimension must be >= 1, got {self.dimension}")
        if self.window < 1:
            raise ConfigurationError(f"window must be >= 1, got {self.window}")
        if self.negatives < 1:
            raise ConfigurationError(f"negatives must be >= 1, got {self.negatives}")
        if self.epochs < 0:
            raise ConfigurationError(f"epochs must be >= 0, got {self.epochs}")
        if not (self.initial_lr > self.min_lr > 0):
            raise ConfigurationError(
                f"need initial_lr > min_lr > 0, got {self.initial_lr} and {self.min_lr}"
            )
        if self.subsample < 0:
            raise ConfigurationError(f"subsample must be >= 0, got {self.subsample}")
        if not (0 <= self.seed < 2**64):
            raise ConfigurationError("seed must fit in 64 unsigned bits")
        return self


@dataclass
class EmbeddingMatrix:
    vocab: Vocabulary
    input_vectors: np.ndarray
    output_vectors: np.ndarray | None = None
    epoch_losses: list = field(default_factory=list)

    @property
    def dimension(self) -> int:
        return int(self.input_vectors.shape[1])

    def vector(self, word: str) -> np.ndarray:
        idx = self.vocab.id_of(word)
        if idx is None:
            raise KeyError(word)
        return self.input_vectors[idx]


def init_embeddings(num_words: int, dimension: int, seed: int, vocab=None) -> EmbeddingMatrix:
    """Fresh tables: input uniform in (-0.5/d, +0.5/d), output all zero."""
    if num_words < 1 or dimension < 1:
        raise ConfigurationError("need at least one word and one dimension")
    gen = np.random.default_rng(seed)
    inp = ((gen.random((num_words, dimension)) - 0.5) / dimension).astype(np.float32)
    out = np.zeros((num_words, dimension), dtype=np.float32)
    return EmbeddingMatrix(vocab=vocab, input_vectors=inp, output_vectors=out)


def _sigmoid(x: float) -> float:
    # Branch on sign so math.exp never overflows for large |x|.
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def sgns_pair_loss(center_vec, context_vec, negative_vecs):
    """Float64 reference loss and exact analytic gradients.

    Returns (loss, grad_center, grad_context, grad_negatives).  The
    sigmoid is clamped away from {0, 1} only inside the logs, so the
    loss stays finite for saturated inputs while gradients remain exact.
    """
    v_c = np.asarray(center_vec, dtype=np.float64)
    u_o = np.asarray(context_vec, dtype=np.float64)
    u_neg = np.asarray(negative_vecs, dtype=np.float64).reshape(-1, v_c.shape[0])
    f_pos = _sigmoid(float(v_c @ u_o))
    loss = -math.log(min(max(f_pos, _SIGMA_CLAMP), 1.0 - _SIGMA_CLAMP))
    grad_center = (f_pos - 1.0) * u_o
    grad_context = (f_pos - 1.0) * v_c
    grad_negatives = np.empty_like(u_neg)
    for i in range(u_neg.shape[0]):
        f = _sigmoid(float(v_c @ u_neg[i]))
        loss -= math.log(min(max(1.0 - f, _SIGMA_CLAMP), 1.0 - _SIGMA_CLAMP))
        grad_center += f * u_neg[i]
        grad_negatives[i] = f * v_c
    return loss, grad_center, grad_context, grad_negatives


def noise_distribution(counts, exponent: float = 0.75):
    """Alias table over the vocabulary with P(v) proportional to count^exponent."""
    c = np.asarray(counts, dtype=np.float64)
    if np.any(c <= 0):
        raise ConfigurationError("noise distribution needs positive counts for every word")
    return build_alias_table(np.power(c, exponent))


# ---------------------------------------------------------------------------
# Training corpus
# ---------------------------------------------------------------------------


@dataclass
class TrainingCorpus:
    """Sentences flattened for the kernels, with a corpus-derived vocabulary.

    The trainer's vocabulary always comes from the sentences themselves
    (ids by descending corpus count, ties lexicographic): the sampled
    corpus is the trainer's entire world, including its noise counts.
    """

    vocab: Vocabulary
    flat: np.ndarray  # int32 token ids, all sentences concatenated
    offsets: np.ndarray  # int64, sentence s occupies [offsets[s], offsets[s+1])

    @property
    def num_sentences(self) -> int:
        return int(self.offsets.shape[0] - 1)

    @property
    def num_tokens(self) -> int:
        return int(self.flat.shape[0])

    @classmethod
    def from_sequences(cls, sequences, words) -> "TrainingCorpus":
        """Build from id sequences over the word list `words`.

        Words that never occur in a sequence are dropped; surviving ids
        are re-ranked by corpus count.
        """
        if sequences:
            flat_orig = np.concatenate([np.asarray(s, dtype=np.int64) for s in sequences])
        else:
            flat_orig = np.empty(0, dtype=np.int64)
        counts = np.bincount(flat_orig, minlength=len(words)).astype(np.int64)
        vocab = build_vocabulary(Counter({w: int(c) for w, c in zip(words, counts) if c > 0}))
        remap = np.full(len(words), -1, dtype=np.int64)
        for old_id, w in enumerate(words):
            new_id = vocab.ids.get(w)
            if new_id is not None:
                remap[old_id] = new_id
        flat = remap[flat_orig].astype(np.int32)
        offsets = np.zeros(len(sequences) + 1, dtype=np.int64)
        for i, s in enumerate(sequences):
            offsets[i + 1] = offsets[i] + len(s)
        return cls(vocab=vocab, flat=flat, offsets=offsets)

    @classmethod
    def from_text_file(cls, path) -> "TrainingCorpus":
        """Two-pass load of a one-sentence-per-line whitespace-token file."""
        counter: Counter = Counter()
        num_sentences = 0
        num_tokens = 0
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                toks = line.split()
                if not toks:
                    continue
                counter.update(toks)
                num_sentences += 1
                num_tokens += len(toks)
        if num_tokens == 0:
            raise ConfigurationError(f"{path}: training corpus contains no tokens")
        vocab = build_vocabulary(counter)
        ids = vocab.ids
        flat = np.empty(num_tokens, dtype=np.int32)
        offsets = np.zeros(num_sentences + 1, dtype=np.int64)
        pos = 0
        sent = 0
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                toks = line.split()
                if not toks:
                    continue
                for t in toks:
                    flat[pos] = ids[t]
                    pos += 1
                sent += 1
                offsets[sent] = pos
        return cls(vocab=vocab, flat=flat, offsets=offsets)


def as_training_corpus(corpus, words=None) -> TrainingCorpus:
    """Coerce a TrainingCorpus, walk corpus, or sequence list to TrainingCorpus."""
    if isinstance(corpus, TrainingCorpus):
        return corpus
    sequences = getattr(corpus, "sequences", corpus)
    if words is None:
        raise ConfigurationError("training from id sequences requires the word list")
    return TrainingCorpus.from_sequences(sequences, words)


# ---------------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------------


@njit(cache=True, inline="always")
def _update_target(inp, out, center, target, label, lr, neu1e):
    """One logistic update on (input[center], output[target]); returns loss."""
    d = inp.shape[1]
    s = 0.0
    for j in range(d):
        s += inp[center, j] * out[target, j]
    f = 1.0 / (1.0 + math.exp(-s))
    g = (label - f) * lr
    for j in range(d):
        neu1e[j] += g * out[target, j]
        out[target, j] += np.float32(g * inp[center, j])
    if label > 0.0:
        pf = min(max(f, _SIGMA_CLAMP), 1.0 - _SIGMA_CLAMP)
        return -math.log(pf)
    pf = min(max(1.0 - f, _SIGMA_CLAMP), 1.0 - _SIGMA_CLAMP)
    return -math.log(pf)


@njit(cache=True)
def _train_sentence(
    inp, out, flat, start, end, window, negatives,
    noise_prob, noise_alias, keep_prob, use_subsample,
    lr0, lr_min, done_base, total_tokens, state,
):
    """Train on one sentence; returns (loss sum, pair count)."""
    d = inp.shape[1]
    nv = noise_prob.shape[0]
    sent = np.empty(end - start, dtype=np.int32)
    m = 0
    if use_subsample:
        for i in range(start, end):
            w = flat[i]
            state, u = rng.next_unit(state)
            if u < keep_prob[w]:
                sent[m] = w
                m += 1
    else:
        for i in range(start, end):
            sent[m] = flat[i]
            m += 1
    neu1e = np.zeros(d, dtype=np.float64)
    loss = 0.0
    pairs = np.int64(0)
    for i in range(m):
        c = sent[i]
        state, r = rng.next_u64(state)
        b = 1 + np.int64(r % np.uint64(window))
        progress = (done_base + i) / total_tokens
        lr = lr0 - (lr0 - lr_min) * progress
        if lr < lr_min:
            lr = lr_min
        jlo = i - b
        if jlo < 0:
            jlo = 0
        jhi = i + b + 1
        if jhi > m:
            jhi = m
        for j in range(jlo, jhi):
            if j == i:
                continue
            o = sent[j]
            for t in range(d):
                neu1e[t] = 0.0
            loss += _update_target(inp, out, c, o, 1.0, lr, neu1e)
            for _ in range(negatives):
                state, col = alias_draw(noise_prob, noise_alias, 0, nv, state)
                neg = np.int32(col)
                if neg == o:
                    continue
                loss += _update_target(inp, out, c, neg, 0.0, lr, neu1e)
            for t in range(d):
                inp[c, t] += np.float32(neu1e[t])
            pairs += 1
    return loss, pairs


@njit(cache=True)
def _train_epoch_sequential(
    inp, out, flat, offsets, window, negatives, noise_prob, noise_alias,
    keep_prob, use_subsample, lr0, lr_min, epoch, epochs, seed,
):
    total = np.float64(epochs) * flat.shape[0]
    loss = 0.0
    pairs = np.int64(0)
    for s in range(offsets.shape[0] - 1):
        state = rng.stream64(seed, np.int64(epoch), np.int64(s))
        done_base = np.float64(epoch) * flat.shape[0] + offsets[s]
        l, p = _train_sentence(
            inp, out, flat, offsets[s], offsets[s + 1], window, negatives,
            noise_prob, noise_alias, keep_prob, use_subsample,
            lr0, lr_min, done_base, total, state,
        )
        loss += l
        pairs += p
    return loss, pairs


@njit(cache=True, parallel=True)
def _train_epoch_parallel(
    inp, out, flat, offsets, window, negatives, noise_prob, noise_alias,
    keep_prob, use_subsample, lr0, lr_min, epoch, epochs, seed,
):
    total = np.float64(epochs) * flat.shape[0]
    loss = 0.0
    pairs = np.int64(0)
    for s in prange(offsets.shape[0] - 1):
        state = rng.stream64(seed, np.int64(epoch), np.int64(s))
        done_base = np.float64(epoch) * flat.shape[0] + offsets[s]
        l, p = _train_sentence(
            inp, out, flat, offsets[s], offsets[s + 1], window, negatives,
            noise_prob, noise_alias, keep_prob, use_subsample,
            lr0, lr_min, done_base, total, state,
        )
        loss += l
        pairs += p
    return loss, pairs


def _keep_probabilities(counts: np.ndarray, threshold: float) -> np.ndarray:
    """Word2vec-style downsampling keep-probabilities, capped at 1."""
    total = float(counts.sum())
    freq_ratio = counts.astype(np.float64) / (threshold * total)
    keep = (np.sqrt(freq_ratio) + 1.0) / freq_ratio
    return np.minimum(keep, 1.0)


def train(corpus, config: TrainConfig, words=None) -> EmbeddingMatrix:
    """Train SGNS over the corpus; returns the embedding (input vectors).

    `corpus` may be a TrainingCorpus, a walk corpus (with `words` giving
    the id-to-word mapping), or a raw list of id sequences.
    """
    config.validate()
    tc = as_training_corpus(corpus, words)
    if tc.num_tokens == 0:
        raise ConfigurationError("training corpus is empty")
    emb = init_embeddings(len(tc.vocab), config.dimension, config.seed, vocab=tc.vocab)
    if config.epochs == 0:
        return emb
    noise = noise_distribution(tc.vocab.counts, config.noise_exponent)
    use_sub = config.subsample > 0.0
    keep_prob = (
        _keep_probabilities(tc.vocab.counts, config.subsample)
        if use_sub
        else np.ones(len(tc.vocab), dtype=np.float64)
    )
    epoch_fn = _train_epoch_sequential if config.deterministic else _train_epoch_parallel
    seed = np.uint64(config.seed)
    for epoch in range(config.epochs):
        loss, pairs = epoch_fn(
            emb.input_vectors, emb.output_vectors, tc.flat, tc.offsets,
            config.window, config.negatives, noise.prob, noise.alias,
            keep_prob, use_sub, config.initial_lr, config.min_lr,
            epoch, config.epochs, seed,
        )
        emb.epoch_losses.append(float(loss) / max(int(pairs), 1))
    if not np.all(np.isfinite(emb.input_vectors)) or not np.all(
        np.isfinite(emb.output_vectors)
    ):
        raise ConfigurationError(
            "training diverged to non-finite values; lower initial_lr"
        )
    return emb


# ---------------------------------------------------------------------------
# word2vec text format
# ---------------------------------------------------------------------------


def save_embeddings(emb: EmbeddingMatrix, path) -> None:
    """Write word2vec text format: header '|V| d', then 'word v1 .. vd'."""
    vecs = emb.input_vectors
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{vecs.shape[0]} {vecs.shape[1]}\n")
        for i, word in enumerate(emb.vocab.words):
            row = vecs[i]
            fh.write(word + " " + " ".join(f"{float(x):.6f}" for x in row) + "\n")


def load_embeddings(path) -> EmbeddingMatrix:
    """Read word2vec text format; returns input vectors as float64."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        parts = header.split()
        if len(parts) != 2:
            raise FormatError(f"{path}:1: header must be '<words> <dimension>', got {header!r}")
        try:
            n, d = int(parts[0]), int(parts[1])
        except ValueError:
            raise FormatError(
                f"{path}:1: header must hold two integers, got {header!r}"
            ) from None
        if n < 1 or d < 1:
            raise FormatError(f"{path}:1: header counts must be positive, got {n} x {d}")
        words = []
        ids: dict = {}
        vecs = np.empty((n, d), dtype=np.float64)
        row = 0
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            if row >= n:
                raise FormatError(f"{path}:{lineno}: more than the {n} rows named in the header")
            parts = line.split()
            if len(parts) != d + 1:
                raise FormatError(
                    f"{path}:{lineno}: expected a word and {d} values, got {len(parts)} fields"
                )
            word = parts[0]
            if word in ids:
                raise FormatError(f"{path}:{lineno}: duplicate word {word!r}")
            try:
                vecs[row] = [float(x) for x in parts[1:]]
            except ValueError:
                raise FormatError(f"{path}:{lineno}: non-numeric vector entry") from None
            ids[word] = row
            words.append(word)
            row += 1
        if row != n:
            raise FormatError(f"{path}: header names {n} rows but the body holds {row}")
    vocab = Vocabulary(
        words=words, ids=ids, counts=np.zeros(n, dtype=np.int64), total_count=0
    )
    return EmbeddingMatrix(vocab=vocab, input_vectors=vecs)
