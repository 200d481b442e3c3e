#!/usr/bin/env python3
"""Generate a topic-structured corpus with Zipfian word frequencies.

Each topic owns a disjoint vocabulary; every sentence draws one topic and
mixes that topic's words with a shared pool of function-like words.  Words
from the same topic therefore co-occur far more often than words from
different topics, so a healthy embedding pipeline must separate the
topics.  That makes the output a self-contained end-to-end exercise for
`walkvec pipeline` when no real corpus is at hand.

Optionally writes gold evaluation files over the generated vocabulary:
a categorization file (topic = category) and a similarity file
(same-topic pairs scored high, cross-topic pairs low).

All generated words are lowercase a-z only, matching the tokenizer.
"""

import argparse
import sys

import numpy as np


def letters(index: int) -> str:
    """Bijective base-26 rendering of a nonnegative integer, a-z only."""
    out = []
    index += 1
    while index > 0:
        index, rem = divmod(index - 1, 26)
        out.append(chr(ord("a") + rem))
    return "".join(reversed(out))


def zipf_probabilities(size: int, exponent: float) -> np.ndarray:
    ranks = np.arange(1, size + 1, dtype=np.float64)
    probs = ranks**-exponent
    return probs / probs.sum()


def topic_vocabularies(topics: int, words_per_topic: int) -> list[list[str]]:
    # Prefixes keep topic and shared vocabularies disjoint: topic words are
    # "t<letter>...", shared words are "sh...".
    return [
        [f"t{letters(t)}{letters(i)}" for i in range(words_per_topic)]
        for t in range(topics)
    ]


def shared_vocabulary(size: int) -> list[str]:
    return [f"sh{letters(i)}" for i in range(size)]


def write_corpus(
    out_path: str,
    *,
    tokens: int,
    topics: int,
    words_per_topic: int,
    shared_words: int,
    shared_rate: float,
    sentence_length: int,
    exponent: float,
    seed: int,
) -> tuple[list[list[str]], list[str]]:
    rng = np.random.default_rng(seed)
    topic_vocab = topic_vocabularies(topics, words_per_topic)
    shared_vocab = shared_vocabulary(shared_words)
    topic_probs = zipf_probabilities(words_per_topic, exponent)
    shared_probs = zipf_probabilities(shared_words, exponent)

    written = 0
    with open(out_path, "w", encoding="utf-8") as fh:
        while written < tokens:
            topic = int(rng.integers(topics))
            length = min(sentence_length, tokens - written)
            from_shared = rng.random(length) < shared_rate
            topic_ids = rng.choice(words_per_topic, size=length, p=topic_probs)
            shared_ids = rng.choice(shared_words, size=length, p=shared_probs)
            words = [
                shared_vocab[s] if m else topic_vocab[topic][w]
                for m, w, s in zip(from_shared, topic_ids, shared_ids)
            ]
            fh.write(" ".join(words) + "\n")
            written += length
    return topic_vocab, shared_vocab


def write_categorization(path: str, topic_vocab: list[list[str]], top: int) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for t, words in enumerate(topic_vocab):
            for word in words[:top]:
                fh.write(f"{word}\ttopic{letters(t)}\n")


def write_similarity(
    path: str, topic_vocab: list[list[str]], pairs: int, top: int, seed: int
) -> None:
    rng = np.random.default_rng(seed + 1)
    topics = len(topic_vocab)
    seen = set()
    with open(path, "w", encoding="utf-8") as fh:
        emitted = 0
        while emitted < pairs:
            same_topic = rng.random() < 0.5
            t1 = int(rng.integers(topics))
            t2 = t1 if same_topic else int((t1 + 1 + rng.integers(topics - 1)) % topics)
            w1 = topic_vocab[t1][int(rng.integers(min(top, len(topic_vocab[t1]))))]
            w2 = topic_vocab[t2][int(rng.integers(min(top, len(topic_vocab[t2]))))]
            if w1 == w2 or frozenset((w1, w2)) in seen:
                continue
            seen.add(frozenset((w1, w2)))
            score = rng.uniform(6.0, 9.0) if same_topic else rng.uniform(0.0, 3.0)
            fh.write(f"{w1}\t{w2}\t{score:.3f}\n")
            emitted += 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter
    )
    parser.add_argument("--out", required=True, help="corpus file to write")
    parser.add_argument("--tokens", type=int, default=1_000_000)
    parser.add_argument("--topics", type=int, default=8)
    parser.add_argument("--words-per-topic", type=int, default=400)
    parser.add_argument("--shared-words", type=int, default=200)
    parser.add_argument(
        "--shared-rate", type=float, default=0.3,
        help="probability that a token comes from the shared pool",
    )
    parser.add_argument("--sentence-length", type=int, default=40)
    parser.add_argument("--exponent", type=float, default=1.1, help="Zipf exponent")
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument(
        "--categories-out", help="also write gold categorization (word<TAB>topic)"
    )
    parser.add_argument(
        "--similarity-out", help="also write gold similarity pairs (TSV)"
    )
    parser.add_argument(
        "--eval-top", type=int, default=25,
        help="use each topic's N most frequent words for the gold files",
    )
    parser.add_argument("--pairs", type=int, default=400, help="similarity pairs to write")
    args = parser.parse_args(argv)

    if args.topics < 2 or args.topics > 26:
        parser.error("--topics must be in [2, 26]")
    if min(args.words_per_topic, args.shared_words, args.tokens, args.sentence_length) < 1:
        parser.error("sizes must be positive")
    if not 0.0 <= args.shared_rate < 1.0:
        parser.error("--shared-rate must be in [0, 1)")

    topic_vocab, _ = write_corpus(
        args.out,
        tokens=args.tokens,
        topics=args.topics,
        words_per_topic=args.words_per_topic,
        shared_words=args.shared_words,
        shared_rate=args.shared_rate,
        sentence_length=args.sentence_length,
        exponent=args.exponent,
        seed=args.seed,
    )
    print(f"wrote {args.tokens} tokens, {args.topics} topics -> {args.out}")
    if args.categories_out:
        write_categorization(args.categories_out, topic_vocab, args.eval_top)
        print(f"wrote categorization gold -> {args.categories_out}")
    if args.similarity_out:
        write_similarity(args.similarity_out, topic_vocab, args.pairs, args.eval_top, args.seed)
        print(f"wrote similarity gold -> {args.similarity_out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
