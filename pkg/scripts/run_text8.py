#!/usr/bin/env python3
"""Reduced-budget end-to-end quality run on a real corpus such as Text8.

Builds a TF-IDF-weighted co-occurrence graph, samples 10 walks per node of
length 40 with (p=1, q=0.001), trains 100-dimensional embeddings for 5
epochs with 10 negatives, and scores them on a similarity and/or a
categorization dataset.  With Text8 + MEN + BLESS this is the recipe the
acceptance suite's external-data criterion runs (thresholds: MEN Spearman
rho >= 0.35, BLESS purity >= 0.45); exits 1 if a given threshold is missed.

Nothing is downloaded — point the flags at local files:
  --corpus   plain text (e.g. the 100 MB Text8 file)
  --men      `word1 word2 score` per line (tabs or spaces; converted)
  --bless    `word category` per line (tabs or spaces; converted)

Some dataset releases tag words with a part-of-speech suffix ("apple-n");
pass --strip-pos to drop a trailing dash-plus-letter from every word.
"""

import argparse
import os
import re
import sys
import time

from walkvec import (
    TrainConfig,
    TrainingCorpus,
    WalkConfig,
    attach_node_weights,
    build_graph,
    build_vocabulary,
    compute_tfidf_node_weights,
    count_tokens,
    eval_categorization,
    eval_similarity,
    generate_walks_text,
    load_categorization,
    load_similarity,
    save_embeddings,
    train,
)
from walkvec.corpus import iter_encoded_runs
from walkvec.rng import derive_seed

_POS_SUFFIX = re.compile(r"-[a-z]$")


def _normalize_word(word: str, strip_pos: bool) -> str:
    word = word.lower()
    if strip_pos:
        word = _POS_SUFFIX.sub("", word)
    return word


def _as_tsv(src: str, dst: str, fields: int, strip_pos: bool) -> str:
    """Rewrite a whitespace- or tab-separated dataset as strict TSV."""
    with open(src, encoding="utf-8") as inp, open(dst, "w", encoding="utf-8") as out:
        for line in inp:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != fields:
                raise SystemExit(f"{src}: expected {fields} fields, got {len(parts)}: {line!r}")
            parts[:-1] = [_normalize_word(w, strip_pos) for w in parts[:-1]]
            if fields == 2:  # categorization: both fields are labels/words
                parts[0] = _normalize_word(parts[0], strip_pos)
            out.write("\t".join(parts) + "\n")
    return dst


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter
    )
    parser.add_argument("--corpus", required=True, help="plain-text corpus file")
    parser.add_argument("--men", help="similarity dataset (word1 word2 score)")
    parser.add_argument("--bless", help="categorization dataset (word category)")
    parser.add_argument("--strip-pos", action="store_true",
                        help="strip a trailing '-x' part-of-speech tag from dataset words")
    parser.add_argument("--out-dir", default="text8-run")
    parser.add_argument("--min-count", type=int, default=5)
    parser.add_argument("--window", type=int, default=200, help="tf-idf window")
    parser.add_argument("--p", type=float, default=1.0)
    parser.add_argument("--q", type=float, default=0.001)
    parser.add_argument("--walks-per-node", type=int, default=10)
    parser.add_argument("--walk-length", type=int, default=40)
    parser.add_argument("--dimension", type=int, default=100)
    parser.add_argument("--negatives", type=int, default=10)
    parser.add_argument("--epochs", type=int, default=5)
    parser.add_argument("--context-window", type=int, default=10)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--men-threshold", type=float, default=0.35)
    parser.add_argument("--bless-threshold", type=float, default=0.45)
    args = parser.parse_args(argv)

    if not (args.men or args.bless):
        parser.error("give --men and/or --bless, otherwise there is nothing to score")
    os.makedirs(args.out_dir, exist_ok=True)

    def stage(name, fn):
        t0 = time.monotonic()
        result = fn()
        print(f"{name}: {time.monotonic() - t0:.1f}s", flush=True)
        return result

    counts = stage("count tokens", lambda: count_tokens([args.corpus]))
    vocab = build_vocabulary(counts, min_count=args.min_count)
    print(f"vocabulary: {len(vocab)} words, {vocab.total_count} kept tokens")
    graph = stage(
        "build graph",
        lambda: build_graph(iter_encoded_runs([args.corpus], vocab), vocab),
    )
    attach_node_weights(
        graph,
        stage(
            "tf-idf weights",
            lambda: compute_tfidf_node_weights(
                iter_encoded_runs([args.corpus], vocab), vocab, window=args.window
            ),
        ),
    )
    walks_path = os.path.join(args.out_dir, "walks.txt")
    wcfg = WalkConfig(
        p=args.p,
        q=args.q,
        walk_length=args.walk_length,
        total_walks=args.walks_per_node * graph.num_nodes,
        seed=derive_seed(args.seed, "walk"),
    )
    written = stage("sample walks", lambda: generate_walks_text(graph, wcfg, walks_path))
    print(f"walks: {written} -> {walks_path}")
    del graph

    corpus = stage("load walk corpus", lambda: TrainingCorpus.from_text_file(walks_path))
    tcfg = TrainConfig(
        dimension=args.dimension,
        window=args.context_window,
        negatives=args.negatives,
        epochs=args.epochs,
        seed=derive_seed(args.seed, "train"),
    )
    emb = stage("train", lambda: train(corpus, tcfg))
    emb_path = os.path.join(args.out_dir, "embeddings.txt")
    save_embeddings(emb, emb_path)
    print(f"embeddings -> {emb_path}")

    failed = False
    if args.men:
        tsv = _as_tsv(args.men, os.path.join(args.out_dir, "men.tsv"), 3, args.strip_pos)
        report = eval_similarity(emb, load_similarity(tsv), name="men")
        ok = report.score >= args.men_threshold
        failed |= not ok
        print(
            f"MEN rho={report.score:.4f} coverage={report.coverage:.3f} "
            f"(threshold {args.men_threshold}) {'PASS' if ok else 'FAIL'}"
        )
    if args.bless:
        tsv = _as_tsv(args.bless, os.path.join(args.out_dir, "bless.tsv"), 2, args.strip_pos)
        report = eval_categorization(
            emb, load_categorization(tsv), name="bless", seed=derive_seed(args.seed, "eval")
        )
        ok = report.score >= args.bless_threshold
        failed |= not ok
        print(
            f"BLESS purity={report.score:.4f} coverage={report.coverage:.3f} "
            f"(threshold {args.bless_threshold}) {'PASS' if ok else 'FAIL'}"
        )
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
