import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from walkvec import (
    ConfigurationError,
    FormatError,
    TrainConfig,
    TrainingCorpus,
    as_training_corpus,
    init_embeddings,
    load_embeddings,
    noise_distribution,
    save_embeddings,
    sgns_pair_loss,
    train,
)
import walkvec.embed as embed_mod


def _random_pair_cosine_q95(dimension: int, seed: int = 99, pairs: int = 2000) -> float:
    """95th percentile of |pairwise| cosine between freshly initialized vectors."""
    gen = np.random.default_rng(seed)
    a = (gen.random((pairs, dimension)) - 0.5) / dimension
    b = (gen.random((pairs, dimension)) - 0.5) / dimension
    cos = np.sum(a * b, axis=1) / (
        np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1)
    )
    return float(np.quantile(cos, 0.95))


def _two_topic_corpus(seed: int = 0):
    """Synthetic corpus with two disjoint topics plus a pair of words (c0,
    c1) given *identical* context multisets: every sentence containing c0
    is emitted again with c1 in the same slot."""
    gen = np.random.default_rng(seed)
    topic_a = [f"a{i}" for i in range(10)]
    topic_b = [f"b{i}" for i in range(10)]
    words = topic_a + topic_b + ["c0", "c1"]
    sentences = []
    for _ in range(150):
        base = [topic_a[int(gen.integers(10))] for _ in range(10)]
        pos = int(gen.integers(1, 9))
        for c in ("c0", "c1"):
            sent = list(base)
            sent[pos] = c
            sentences.append(sent)
    for _ in range(150):
        sentences.append([topic_b[int(gen.integers(10))] for _ in range(10)])
    order = gen.permutation(len(sentences))
    sentences = [sentences[i] for i in order]
    index = {w: i for i, w in enumerate(words)}
    sequences = [np.array([index[w] for w in s], dtype=np.int32) for s in sentences]
    return sequences, words


def _cos(u, v) -> float:
    return float(np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v)))


class TestInit:
    def test_shapes_ranges_and_output_zero(self):
        emb = init_embeddings(50, 16, seed=1)
        assert emb.input_vectors.shape == (50, 16)
        assert emb.input_vectors.dtype == np.float32
        assert np.all(np.abs(emb.input_vectors) <= 0.5 / 16 + 1e-9)
        assert not np.all(emb.input_vectors == 0)
        assert np.all(emb.output_vectors == 0)

    def test_mean_near_zero(self):
        emb = init_embeddings(100, 100, seed=2)
        sigma = (1.0 / 100) / math.sqrt(12)  # stdev of U(-0.5/d, 0.5/d)
        bound = 3 * sigma / math.sqrt(100 * 100)
        assert abs(float(emb.input_vectors.mean())) < bound

    def test_deterministic(self):
        a = init_embeddings(20, 8, seed=7)
        b = init_embeddings(20, 8, seed=7)
        np.testing.assert_array_equal(a.input_vectors, b.input_vectors)

    def test_rejects_degenerate(self):
        with pytest.raises(ConfigurationError):
            init_embeddings(0, 8, seed=1)
        with pytest.raises(ConfigurationError):
            init_embeddings(8, 0, seed=1)


class TestPairLoss:
    def test_zero_vectors_one_negative(self):
        d = 4
        loss, *_ = sgns_pair_loss(np.zeros(d), np.zeros(d), np.zeros((1, d)))
        assert loss == pytest.approx(2 * math.log(2), abs=1e-12)

    def test_saturation_loss_vanishes(self):
        v = np.zeros(8)
        v[0] = 10.0
        anti = np.zeros((2, 8))
        anti[:, 0] = -10.0
        loss, *_ = sgns_pair_loss(v, v, anti)
        assert 0.0 <= loss < 1e-6

    def test_saturation_no_negatives(self):
        v = np.zeros(8)
        v[0] = 10.0
        loss, *_ = sgns_pair_loss(v, v, np.empty((0, 8)))
        assert 0.0 <= loss < 1e-6

    def test_clamp_keeps_loss_finite(self):
        v = np.zeros(8)
        v[0] = 50.0
        w = -v
        loss, *_ = sgns_pair_loss(v, w, np.empty((0, 8)))
        assert math.isfinite(loss)
        assert loss == pytest.approx(-math.log(1e-7), rel=1e-9)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=50, deadline=None)
    def test_gradients_match_finite_differences(self, seed):
        gen = np.random.default_rng(seed)
        d = 8
        k = int(gen.integers(1, 6))
        center = gen.normal(0, 0.8, d)
        context = gen.normal(0, 0.8, d)
        negatives = gen.normal(0, 0.8, (k, d))
        loss, g_c, g_o, g_n = sgns_pair_loss(center, context, negatives)
        h = 1e-4

        def loss_at(c, o, n):
            return sgns_pair_loss(c, o, n)[0]

        def check(analytic, bump):
            num = (loss_at(*bump(+h)) - loss_at(*bump(-h))) / (2 * h)
            denom = max(abs(num), abs(analytic), 1e-8)
            assert abs(num - analytic) / denom < 1e-4

        for j in range(d):
            e = np.zeros(d)
            e[j] = 1.0
            check(g_c[j], lambda s, e=e: (center + s * e, context, negatives))
            check(g_o[j], lambda s, e=e: (center, context + s * e, negatives))
            for i in range(k):
                bump_n = np.zeros((k, d))
                bump_n[i, j] = 1.0
                check(
                    g_n[i, j],
                    lambda s, bn=bump_n: (center, context, negatives + s * bn),
                )


class TestNoiseDistribution:
    def test_three_quarter_power_example(self):
        table = noise_distribution(np.array([16, 1]), exponent=0.75)
        np.testing.assert_allclose(
            table.implied_distribution(), [8 / 9, 1 / 9], rtol=0, atol=1e-12
        )

    def test_exponent_zero_uniform(self):
        table = noise_distribution(np.array([100, 1, 7]), exponent=0.0)
        np.testing.assert_allclose(
            table.implied_distribution(), np.full(3, 1 / 3), rtol=0, atol=1e-12
        )

    def test_exponent_one_proportional(self):
        table = noise_distribution(np.array([3, 1]), exponent=1.0)
        np.testing.assert_allclose(
            table.implied_distribution(), [0.75, 0.25], rtol=0, atol=1e-12
        )

    def test_zero_count_rejected(self):
        with pytest.raises(ConfigurationError):
            noise_distribution(np.array([3, 0]))


class TestUpdateKernel:
    def test_matches_reference_gradients(self):
        gen = np.random.default_rng(4)
        d = 8
        for label in (1.0, 0.0):
            inp = gen.normal(0, 0.3, (3, d)).astype(np.float32)
            out = gen.normal(0, 0.3, (3, d)).astype(np.float32)
            inp0, out0 = inp.copy(), out.copy()
            lr = 0.05
            neu1e = np.zeros(d)
            loss = embed_mod._update_target(inp, out, 0, 1, label, lr, neu1e)
            s = float(np.dot(inp0[0].astype(np.float64), out0[1].astype(np.float64)))
            f = 1.0 / (1.0 + math.exp(-s))
            g = (label - f) * lr
            expected_loss = -math.log(f if label > 0 else 1.0 - f)
            assert loss == pytest.approx(expected_loss, rel=1e-6)
            np.testing.assert_allclose(
                out[1], out0[1] + np.float32(g) * inp0[0], rtol=1e-5, atol=1e-7
            )
            np.testing.assert_allclose(
                neu1e, g * out0[1].astype(np.float64), rtol=1e-5, atol=1e-9
            )
            np.testing.assert_array_equal(inp, inp0)  # caller applies neu1e


class TestTrainingCorpus:
    def test_from_sequences_drops_unused_and_remaps(self):
        words = ["x", "y", "z"]
        sequences = [np.array([0, 2, 0], dtype=np.int32)]
        tc = TrainingCorpus.from_sequences(sequences, words)
        assert tc.vocab.words == ["x", "z"]
        assert tc.vocab.counts.tolist() == [2, 1]
        restored = [tc.vocab.word_of(int(i)) for i in tc.flat]
        assert restored == ["x", "z", "x"]
        assert tc.offsets.tolist() == [0, 3]

    def test_from_text_file_equivalent(self, tmp_path):
        sequences, words = _two_topic_corpus()
        tc_seq = TrainingCorpus.from_sequences(sequences, words)
        path = tmp_path / "walks.txt"
        with open(path, "w") as fh:
            for seq in sequences:
                fh.write(" ".join(words[i] for i in seq) + "\n")
        tc_file = TrainingCorpus.from_text_file(path)
        assert tc_file.vocab.words == tc_seq.vocab.words
        np.testing.assert_array_equal(tc_file.flat, tc_seq.flat)
        np.testing.assert_array_equal(tc_file.offsets, tc_seq.offsets)

    def test_from_text_file_empty_rejected(self, tmp_path):
        path = tmp_path / "empty.txt"
        path.write_text("\n\n")
        with pytest.raises(ConfigurationError):
            TrainingCorpus.from_text_file(path)

    def test_as_training_corpus_needs_words_for_sequences(self):
        with pytest.raises(ConfigurationError):
            as_training_corpus([np.array([0, 1], dtype=np.int32)])

    def test_as_training_corpus_passthrough(self):
        sequences, words = _two_topic_corpus()
        tc = TrainingCorpus.from_sequences(sequences, words)
        assert as_training_corpus(tc) is tc


class TestTrainConfig:
    def test_validation(self):
        for bad in (
            TrainConfig(dimension=0),
            TrainConfig(window=0),
            TrainConfig(negatives=0),
            TrainConfig(epochs=-1),
            TrainConfig(initial_lr=1e-5),  # below min_lr
            TrainConfig(min_lr=0.0),
            TrainConfig(subsample=-0.1),
        ):
            with pytest.raises(ConfigurationError):
                bad.validate()


class TestTraining:
    def test_zero_epochs_returns_init(self):
        sequences, words = _two_topic_corpus()
        cfg = TrainConfig(dimension=8, epochs=0, seed=5)
        emb = train(sequences, cfg, words=words)
        ref = init_embeddings(len(emb.vocab), 8, seed=5)
        np.testing.assert_array_equal(emb.input_vectors, ref.input_vectors)
        assert emb.epoch_losses == []

    def test_deterministic_mode_bit_identical(self):
        sequences, words = _two_topic_corpus()
        cfg = TrainConfig(dimension=16, window=5, epochs=2, seed=3, deterministic=True)
        a = train(sequences, cfg, words=words)
        b = train(sequences, cfg, words=words)
        np.testing.assert_array_equal(a.input_vectors, b.input_vectors)
        np.testing.assert_array_equal(a.output_vectors, b.output_vectors)
        assert a.epoch_losses == b.epoch_losses

    def test_parallel_mode_trains(self):
        sequences, words = _two_topic_corpus()
        cfg = TrainConfig(dimension=16, window=5, epochs=2, seed=3)
        emb = train(sequences, cfg, words=words)
        assert np.all(np.isfinite(emb.input_vectors))
        assert len(emb.epoch_losses) == 2
        assert all(math.isfinite(l) for l in emb.epoch_losses)

    def test_loss_drops_then_stays_low(self):
        sequences, words = _two_topic_corpus()
        cfg = TrainConfig(dimension=16, window=5, epochs=4, seed=3, deterministic=True)
        emb = train(sequences, cfg, words=words)
        losses = emb.epoch_losses
        assert losses[1] < losses[0]
        for earlier, later in zip(losses[1:], losses[2:]):
            assert later <= earlier * 1.05

    def test_identical_context_words_align(self):
        sequences, words = _two_topic_corpus()
        cfg = TrainConfig(dimension=16, window=5, epochs=5, seed=3, deterministic=True)
        emb = train(sequences, cfg, words=words)
        sim = _cos(emb.vector("c0"), emb.vector("c1"))
        assert sim > _random_pair_cosine_q95(16)

    def test_topics_separate(self):
        sequences, words = _two_topic_corpus()
        cfg = TrainConfig(dimension=16, window=5, epochs=5, seed=3, deterministic=True)
        emb = train(sequences, cfg, words=words)
        within, across = [], []
        a_words = [w for w in words if w.startswith("a")]
        b_words = [w for w in words if w.startswith("b")]
        for i in range(5):
            within.append(_cos(emb.vector(a_words[i]), emb.vector(a_words[i + 5])))
            within.append(_cos(emb.vector(b_words[i]), emb.vector(b_words[i + 5])))
            across.append(_cos(emb.vector(a_words[i]), emb.vector(b_words[i])))
        assert np.mean(within) > np.mean(across) + 0.2

    @pytest.mark.xfail(
        strict=True,
        reason=(
            "with a two-word corpus every context distribution equals the "
            "noise distribution, so the SGNS equilibrium pins all dot "
            "products at the same constant and input-input geometry carries "
            "no signal; the alternating-pair cosine stays near zero"
        ),
    )
    def test_two_interleaved_words_become_similar(self):
        sequences = [np.array([0, 1] * 500, dtype=np.int32)]
        cfg = TrainConfig(dimension=16, epochs=5, seed=1, deterministic=True)
        emb = train(sequences, cfg, words=["a", "b"])
        sim = _cos(emb.vector("a"), emb.vector("b"))
        assert sim > _random_pair_cosine_q95(16)

    def test_subsample_smoke(self):
        sequences, words = _two_topic_corpus()
        cfg = TrainConfig(
            dimension=8, window=5, epochs=1, seed=3, deterministic=True, subsample=0.01
        )
        emb = train(sequences, cfg, words=words)
        assert np.all(np.isfinite(emb.input_vectors))

    def test_empty_corpus_rejected(self):
        with pytest.raises(ConfigurationError):
            train([], TrainConfig(dimension=4), words=["a"])


class TestKeepProbabilities:
    def test_rare_words_kept_more(self):
        keep = embed_mod._keep_probabilities(np.array([90, 10]), threshold=0.01)
        assert keep[1] > keep[0]

    def test_below_threshold_capped_at_one(self):
        keep = embed_mod._keep_probabilities(np.array([1, 99]), threshold=0.5)
        assert keep[0] == 1.0

    def test_formula(self):
        counts = np.array([90, 10])
        t = 0.01
        keep = embed_mod._keep_probabilities(counts, t)
        ratio = 90 / (t * 100)
        assert keep[0] == pytest.approx((math.sqrt(ratio) + 1) / ratio, abs=1e-15)


class TestEmbeddingFiles:
    def _trained(self):
        sequences, words = _two_topic_corpus()
        cfg = TrainConfig(dimension=12, window=4, epochs=1, seed=2, deterministic=True)
        return train(sequences, cfg, words=words)

    def test_round_trip_within_print_precision(self, tmp_path):
        emb = self._trained()
        path = tmp_path / "emb.txt"
        save_embeddings(emb, path)
        loaded = load_embeddings(path)
        assert loaded.vocab.words == emb.vocab.words
        assert loaded.input_vectors.dtype == np.float64
        np.testing.assert_allclose(
            loaded.input_vectors,
            emb.input_vectors.astype(np.float64),
            rtol=0,
            atol=5e-7,
        )

    def test_header_must_be_two_ints(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("3\nfoo 1.0\n")
        with pytest.raises(FormatError, match="header"):
            load_embeddings(path)
        path.write_text("x y\n")
        with pytest.raises(FormatError, match="header"):
            load_embeddings(path)
        path.write_text("0 4\n")
        with pytest.raises(FormatError, match="positive"):
            load_embeddings(path)

    def test_wrong_field_count_names_line(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("1 3\nfoo 1.0 2.0\n")
        with pytest.raises(FormatError, match=":2"):
            load_embeddings(path)

    def test_duplicate_word_rejected(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("2 2\nfoo 1 2\nfoo 3 4\n")
        with pytest.raises(FormatError, match="duplicate"):
            load_embeddings(path)

    def test_row_count_mismatch_rejected(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("3 2\nfoo 1 2\nbar 3 4\n")
        with pytest.raises(FormatError, match="3 rows"):
            load_embeddings(path)
        path.write_text("1 2\nfoo 1 2\nbar 3 4\n")
        with pytest.raises(FormatError, match="more than"):
            load_embeddings(path)

    def test_non_numeric_entry_rejected(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("1 2\nfoo 1.0 zzz\n")
        with pytest.raises(FormatError, match="non-numeric"):
            load_embeddings(path)
