#!/usr/bin/env python3
"""Corpus-size-invariance smoke test on a synthetic corpus.

Generates a topic-structured corpus, then runs `walkvec scaling-bench`
with duplication factors 1 and 2.  Because the duplicated corpus has the
same vocabulary, the walk budget and training workload are unchanged:
walk+train wall time should stay flat (ratio near 1.0) while the
graph-build scan roughly doubles.  Prints the measured ratios and exits 1
when they fall outside the expected bands.

Timing ratios need enough work to be stable; below roughly a million
tokens the walk+train stage is too quick to time reliably, so treat small
runs as illustrative only.
"""

import argparse
import json
import os
import sys

from make_synthetic_corpus import write_corpus
from walkvec.cli import main as walkvec_main

WALK_TRAIN_BAND = (0.9, 1.1)
GRAPH_BAND = (1.5, 2.5)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter
    )
    parser.add_argument("--out-dir", default="scaling-smoke")
    parser.add_argument("--tokens", type=int, default=2_000_000)
    parser.add_argument("--topics", type=int, default=8)
    parser.add_argument("--words-per-topic", type=int, default=400)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--walks-per-node", type=int, default=10)
    parser.add_argument("--walk-length", type=int, default=40)
    parser.add_argument("--dimension", type=int, default=64)
    parser.add_argument("--epochs", type=int, default=1)
    parser.add_argument("--threads", type=int, default=None)
    args = parser.parse_args(argv)

    os.makedirs(args.out_dir, exist_ok=True)
    corpus_path = os.path.join(args.out_dir, "corpus.txt")
    write_corpus(
        corpus_path,
        tokens=args.tokens,
        topics=args.topics,
        words_per_topic=args.words_per_topic,
        shared_words=200,
        shared_rate=0.3,
        sentence_length=40,
        exponent=1.1,
        seed=args.seed,
    )
    print(f"corpus: {args.tokens} tokens -> {corpus_path}")

    config_path = os.path.join(args.out_dir, "bench.json")
    with open(config_path, "w", encoding="utf-8") as fh:
        json.dump(
            {
                "corpus": {"min_count": 5},
                "graph": {"weight_mode": "tfidf", "window": 200},
                "walk": {
                    "walks_per_node": args.walks_per_node,
                    "walk_length": args.walk_length,
                    "q": 0.001,
                },
                "train": {
                    "dimension": args.dimension,
                    "negatives": 10,
                    "epochs": args.epochs,
                },
            },
            fh,
            indent=2,
        )

    bench_dir = os.path.join(args.out_dir, "bench")
    cli_args = [
        "scaling-bench", corpus_path, "--config", config_path,
        "--out-dir", bench_dir, "--factors", "1,2", "--seed", str(args.seed),
    ]
    if args.threads:
        cli_args += ["--threads", str(args.threads)]
    code = walkvec_main(cli_args)
    if code != 0:
        return code

    with open(os.path.join(bench_dir, "scaling.json"), encoding="utf-8") as fh:
        rows = json.load(fh)["rows"]
    wt_ratio = rows[1]["walk_train_s"] / rows[0]["walk_train_s"]
    graph_ratio = rows[1]["graph_s"] / rows[0]["graph_s"]

    failed = False
    print(f"vocabulary size: {rows[0]['nodes']} at both factors")
    lo, hi = WALK_TRAIN_BAND
    ok = lo <= wt_ratio <= hi
    failed |= not ok
    print(f"walk+train ratio x2/x1 = {wt_ratio:.3f}  (band [{lo}, {hi}]) "
          f"{'PASS' if ok else 'FAIL'}")
    lo, hi = GRAPH_BAND
    ok = lo <= graph_ratio <= hi
    failed |= not ok
    print(f"graph-build ratio x2/x1 = {graph_ratio:.3f}  (band [{lo}, {hi}]) "
          f"{'PASS' if ok else 'FAIL'}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
