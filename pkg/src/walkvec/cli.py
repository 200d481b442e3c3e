"""Command-line interface.

Subcommands: build-graph, walk, train, eval, pipeline, stats,
scaling-bench.  Every flag has a config-file equivalent (JSON,
--config); a flag given on the command line overrides the config value,
which overrides the built-in default.  The effective configuration is
echoed as a JSON run header to stderr and, for commands with a primary
output file, to a `<out>.meta.json` sidecar.

All randomness flows from one top-level --seed; each stage derives its
own stream from it, so a pipeline run and the equivalent stage-by-stage
runs produce identical artifacts.
"""

import argparse
import dataclasses
import json
import os
import sys
import time
import traceback

from . import __version__, config as cfgmod, embed, evaluate, graph as graphmod, walk as walkmod
from .config import PipelineConfig
from .corpus import (
    build_vocabulary,
    count_tokens,
    iter_encoded_runs,
    load_wordlist,
    save_vocabulary,
)
from .errors import (
    EXIT_INTERNAL,
    EXIT_IO,
    EXIT_OK,
    ConfigurationError,
    InternalConsistencyError,
    WalkvecError,
)
from .rng import derive_seed

THREADS_ENV = "WALKVEC_THREADS"

_WALKS_BINARY_MAGIC = b"WVWALKS1"


# ---------------------------------------------------------------------------
# Shared plumbing
# ---------------------------------------------------------------------------


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return value


def _nonneg_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return value


def _base_config(args) -> PipelineConfig:
    if getattr(args, "config", None):
        return cfgmod.load_config(args.config)
    return PipelineConfig()


def _override(obj, **flag_values) -> None:
    """Apply non-None flag values onto a config dataclass in place."""
    for name, value in flag_values.items():
        if value is not None:
            setattr(obj, name, value)


def _apply_threads(cfg: PipelineConfig) -> int:
    """Resolve thread count (flag/config > env > library default)."""
    import numba

    n = cfg.threads
    if n is None:
        env = os.environ.get(THREADS_ENV)
        if env:
            try:
                n = int(env)
            except ValueError:
                raise ConfigurationError(f"{THREADS_ENV}={env!r} is not an integer") from None
    if n is None:
        return numba.get_num_threads()
    if n < 1:
        raise ConfigurationError(f"thread count must be >= 1, got {n}")
    limit = numba.config.NUMBA_NUM_THREADS
    if n > limit:
        print(
            f"note: clamping threads to {limit} (process limit; "
            f"set NUMBA_NUM_THREADS before startup to raise it)",
            file=sys.stderr,
        )
        n = limit
    numba.set_num_threads(n)
    return n


def _emit_header(command: str, cfg: PipelineConfig, out_path=None, extra=None) -> dict:
    header = {
        "tool": "walkvec",
        "version": __version__,
        "command": command,
        "seed": cfg.seed,
        "config": cfgmod.config_to_dict(cfg),
    }
    if extra:
        header.update(extra)
    print(json.dumps(header, sort_keys=True), file=sys.stderr)
    if out_path is not None:
        with open(f"{out_path}.meta.json", "w", encoding="utf-8") as fh:
            json.dump(header, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return header


class _StageTimer:
    """Collects per-stage wall times on the monotonic clock."""

    def __init__(self):
        self.entries = []
        self._origin = time.monotonic()

    def run(self, stage: str, fn, *args, **kwargs):
        start = time.monotonic() - self._origin
        result = fn(*args, **kwargs)
        end = time.monotonic() - self._origin
        self.entries.append(
            {
                "stage": stage,
                "start_s": round(start, 3),
                "end_s": round(end, 3),
                "seconds": round(end - start, 3),
            }
        )
        return result

    def report(self, stream) -> None:
        print("stage\tstart_s\tend_s\tseconds", file=stream)
        for e in self.entries:
            print(
                f"{e['stage']}\t{e['start_s']:.3f}\t{e['end_s']:.3f}\t{e['seconds']:.3f}",
                file=stream,
            )

    def seconds(self, stage: str) -> float:
        for e in self.entries:
            if e["stage"] == stage:
                return e["seconds"]
        raise KeyError(stage)


# ---------------------------------------------------------------------------
# Stage implementations (shared by standalone commands and `pipeline`)
# ---------------------------------------------------------------------------


def _stage_build_graph(cfg: PipelineConfig):
    if not cfg.corpus_paths:
        raise ConfigurationError("no corpus files given (positional arguments or corpus_paths)")
    cfg.graph.validate()
    wordlist = load_wordlist(cfg.corpus.wordlist) if cfg.corpus.wordlist else None
    counts = count_tokens(cfg.corpus_paths)
    vocab = build_vocabulary(counts, min_count=cfg.corpus.min_count, wordlist=wordlist)
    g = graphmod.build_graph(iter_encoded_runs(cfg.corpus_paths, vocab), vocab)
    if cfg.graph.weight_mode == "tf":
        weights = graphmod.compute_tf_node_weights(vocab)
    else:
        weights = graphmod.compute_tfidf_node_weights(
            iter_encoded_runs(cfg.corpus_paths, vocab), vocab, window=cfg.graph.window
        )
    graphmod.attach_node_weights(g, weights)
    return g


def _walk_config(cfg: PipelineConfig, num_nodes: int) -> walkmod.WalkConfig:
    cfg.walk.validate()
    total = cfg.walk.total_walks
    if cfg.walk.walks_per_node is not None:
        total = cfg.walk.walks_per_node * num_nodes
    return walkmod.WalkConfig(
        p=cfg.walk.p,
        q=cfg.walk.q,
        walk_length=cfg.walk.walk_length,
        total_walks=total,
        min_walks_per_node=cfg.walk.min_walks_per_node,
        seed=derive_seed(cfg.seed, "walk"),
    ).validate()


def _stage_walk(cfg: PipelineConfig, g, out_path) -> int:
    wcfg = _walk_config(cfg, g.num_nodes)
    if cfg.walk.format == "binary":
        return walkmod.generate_walks_binary(g, wcfg, out_path)
    return walkmod.generate_walks_text(g, wcfg, out_path)


def _train_config(cfg: PipelineConfig) -> embed.TrainConfig:
    t = cfg.train
    return embed.TrainConfig(
        dimension=t.dimension,
        window=t.window,
        negatives=t.negatives,
        epochs=t.epochs,
        initial_lr=t.initial_lr,
        min_lr=t.min_lr,
        noise_exponent=t.noise_exponent,
        seed=derive_seed(cfg.seed, "train"),
        deterministic=t.deterministic,
        subsample=t.subsample,
    ).validate()


def _load_training_corpus(path) -> embed.TrainingCorpus:
    with open(path, "rb") as fh:
        magic = fh.read(8)
    if magic == _WALKS_BINARY_MAGIC:
        corpus, words = walkmod.load_walks_binary(path)
        return embed.TrainingCorpus.from_sequences(corpus.sequences, words)
    return embed.TrainingCorpus.from_text_file(path)


def _stage_train(cfg: PipelineConfig, walks_path, out_path) -> embed.EmbeddingMatrix:
    tc = _load_training_corpus(walks_path)
    emb = embed.train(tc, _train_config(cfg))
    embed.save_embeddings(emb, out_path)
    return emb


def _run_eval_task(emb, task: str, dataset_path, seed: int):
    name = os.path.basename(str(dataset_path))
    if task == "similarity":
        return evaluate.eval_similarity(emb, evaluate.load_similarity(dataset_path), name=name)
    if task == "analogy":
        return evaluate.eval_analogy(emb, evaluate.load_analogy(dataset_path), name=name)
    if task == "categorization":
        return evaluate.eval_categorization(
            emb, evaluate.load_categorization(dataset_path), name=name, seed=seed
        )
    raise ConfigurationError(f"unknown eval task {task!r}")


def _print_reports(reports, json_only: bool) -> None:
    if not json_only:
        print(f"{'task':<16}{'dataset':<24}{'score':>8}{'coverage':>10}{'n':>7}{'skipped':>9}")
        for r in reports:
            print(
                f"{r.task:<16}{r.dataset:<24}{r.score:>8.4f}{r.coverage:>10.3f}"
                f"{r.covered:>7}{r.skipped:>9}"
            )
    for r in reports:
        print(json.dumps(r.to_json_dict(), sort_keys=True))


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_build_graph(args) -> int:
    cfg = _base_config(args)
    if args.corpus:
        cfg.corpus_paths = list(args.corpus)
    _override(cfg, seed=args.seed, threads=args.threads)
    _override(cfg.corpus, min_count=args.min_count, wordlist=args.wordlist)
    _override(cfg.graph, weight_mode=args.weight_mode, window=args.window)
    cfg.validate()
    _apply_threads(cfg)
    _emit_header("build-graph", cfg, out_path=args.out)
    g = _stage_build_graph(cfg)
    graphmod.save_graph(g, args.out)
    if args.vocab_out:
        save_vocabulary(g.vocab, args.vocab_out)
    if args.edgelist_out:
        graphmod.write_edgelist(g, args.edgelist_out)
    s = graphmod.graph_stats(g)
    print(f"{s.node_count}\t{s.edge_count}\t{s.density:.6g}\t{s.avg_out_degree:.6g}")
    return EXIT_OK


def cmd_stats(args) -> int:
    g = graphmod.load_graph(args.graph)
    s = graphmod.graph_stats(g)
    print(f"{s.node_count}\t{s.edge_count}\t{s.density:.6g}\t{s.avg_out_degree:.6g}")
    return EXIT_OK


def cmd_walk(args) -> int:
    cfg = _base_config(args)
    _override(cfg, seed=args.seed, threads=args.threads)
    _override(
        cfg.walk,
        p=args.p,
        q=args.q,
        walk_length=args.walk_length,
        total_walks=args.total_walks,
        walks_per_node=args.walks_per_node,
        min_walks_per_node=args.min_walks_per_node,
        format=args.format,
    )
    cfg.validate()
    _apply_threads(cfg)
    _emit_header("walk", cfg, out_path=args.out)
    g = graphmod.load_graph(args.graph)
    written = _stage_walk(cfg, g, args.out)
    print(f"{written}\twalks")
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = _base_config(args)
    _override(cfg, seed=args.seed, threads=args.threads)
    _override(
        cfg.train,
        dimension=args.dimension,
        window=args.window,
        negatives=args.negatives,
        epochs=args.epochs,
        initial_lr=args.initial_lr,
        min_lr=args.min_lr,
        noise_exponent=args.noise_exponent,
        deterministic=args.deterministic,
        subsample=args.subsample,
    )
    cfg.validate()
    _apply_threads(cfg)
    _emit_header("train", cfg, out_path=args.out)
    emb = _stage_train(cfg, args.walks, args.out)
    losses = " ".join(f"{x:.6f}" for x in emb.epoch_losses)
    print(f"{len(emb.vocab)}\twords\t{emb.dimension}\tdims\tepoch_loss\t{losses}")
    return EXIT_OK


def cmd_eval(args) -> int:
    cfg = _base_config(args)
    _override(cfg, seed=args.seed)
    if args.task or args.dataset:
        if not (args.task and args.dataset):
            raise ConfigurationError("--task and --dataset must be given together")
        tasks = [cfgmod.EvalTask(task=args.task, dataset=args.dataset)]
    else:
        tasks = cfg.eval
    if not tasks:
        raise ConfigurationError("nothing to evaluate: give --task/--dataset or an eval config")
    for t in tasks:
        t.validate()
    _emit_header("eval", cfg)
    emb = embed.load_embeddings(args.embedding)
    eval_seed = derive_seed(cfg.seed, "eval")
    reports = [_run_eval_task(emb, t.task, t.dataset, eval_seed) for t in tasks]
    _print_reports(reports, args.json)
    return EXIT_OK


def cmd_pipeline(args) -> int:
    cfg = _base_config(args)
    if args.corpus:
        cfg.corpus_paths = list(args.corpus)
    _override(cfg, seed=args.seed, threads=args.threads, out_dir=args.out_dir)
    cfg.validate()
    _apply_threads(cfg)
    os.makedirs(cfg.out_dir, exist_ok=True)
    paths = _pipeline_paths(cfg)
    header = _emit_header("pipeline", cfg, extra={"artifacts": paths})
    timer = _StageTimer()

    g = timer.run("build-graph", _stage_build_graph, cfg)
    graphmod.save_graph(g, paths["graph"])
    save_vocabulary(g.vocab, paths["vocab"])
    timer.run("walk", _stage_walk, cfg, g, paths["walks"])
    del g
    emb = timer.run("train", _stage_train, cfg, paths["walks"], paths["embeddings"])

    reports = []
    if cfg.eval:
        eval_seed = derive_seed(cfg.seed, "eval")

        def _run_all():
            loaded = embed.load_embeddings(paths["embeddings"])
            return [_run_eval_task(loaded, t.task, t.dataset, eval_seed) for t in cfg.eval]

        reports = timer.run("eval", _run_all)
        with open(paths["eval"], "w", encoding="utf-8") as fh:
            for r in reports:
                fh.write(json.dumps(r.to_json_dict(), sort_keys=True) + "\n")

    timer.report(sys.stdout)
    if reports:
        _print_reports(reports, json_only=True)
    header["timing"] = timer.entries
    with open(os.path.join(cfg.out_dir, "pipeline.meta.json"), "w", encoding="utf-8") as fh:
        json.dump(header, fh, indent=2, sort_keys=True)
        fh.write("\n")
    del emb
    return EXIT_OK


def _pipeline_paths(cfg: PipelineConfig) -> dict:
    walks_name = "walks.bin" if cfg.walk.format == "binary" else "walks.txt"
    return {
        "vocab": os.path.join(cfg.out_dir, "vocab.tsv"),
        "graph": os.path.join(cfg.out_dir, "graph.bin"),
        "walks": os.path.join(cfg.out_dir, walks_name),
        "embeddings": os.path.join(cfg.out_dir, "embeddings.txt"),
        "eval": os.path.join(cfg.out_dir, "eval.jsonl"),
    }


def _warm_kernels() -> None:
    """Compile the walk/train kernels on toy inputs so timed runs measure
    steady-state work, not JIT compilation."""
    g = graphmod.from_edges(["u", "v"], [("u", "v", 1), ("v", "u", 1)])
    g.node_weights = graphmod.compute_tf_node_weights(g.vocab)
    wcfg = walkmod.WalkConfig(p=2.0, q=0.5, walk_length=3, total_walks=2)
    corpus = walkmod.generate_corpus(g, wcfg)
    tcfg = embed.TrainConfig(dimension=4, window=2, negatives=1, epochs=1)
    embed.train(corpus, tcfg, words=g.vocab.words)
    embed.train(corpus, dataclasses.replace(tcfg, deterministic=True), words=g.vocab.words)


def cmd_scaling_bench(args) -> int:
    cfg = _base_config(args)
    if args.corpus:
        cfg.corpus_paths = list(args.corpus)
    _override(cfg, seed=args.seed, threads=args.threads, out_dir=args.out_dir)
    cfg.validate()
    if not cfg.corpus_paths:
        raise ConfigurationError("no corpus files given")
    factors = args.factors
    _apply_threads(cfg)
    os.makedirs(cfg.out_dir, exist_ok=True)
    _emit_header("scaling-bench", cfg, extra={"factors": factors})
    _warm_kernels()

    rows = []
    base_paths = list(cfg.corpus_paths)
    for f in factors:
        run_cfg = dataclasses.replace(cfg)  # shallow copy; stage configs shared
        # The duplicated corpus is the same files listed f times: each
        # repetition is an independent token run, so no disk copies needed.
        run_cfg.corpus_paths = base_paths * f
        run_dir = os.path.join(cfg.out_dir, f"x{f}")
        os.makedirs(run_dir, exist_ok=True)
        run_cfg.out_dir = run_dir
        paths = _pipeline_paths(run_cfg)
        timer = _StageTimer()
        g = timer.run("build-graph", _stage_build_graph, run_cfg)
        graphmod.save_graph(g, paths["graph"])
        stats = graphmod.graph_stats(g)
        timer.run("walk", _stage_walk, run_cfg, g, paths["walks"])
        del g
        timer.run("train", _stage_train, run_cfg, paths["walks"], paths["embeddings"])
        rows.append(
            {
                "factor": f,
                "nodes": stats.node_count,
                "edges": stats.edge_count,
                "graph_s": timer.seconds("build-graph"),
                "walk_s": timer.seconds("walk"),
                "train_s": timer.seconds("train"),
                "walk_train_s": round(timer.seconds("walk") + timer.seconds("train"), 3),
            }
        )

    nodes = {r["nodes"] for r in rows}
    if len(nodes) != 1:
        raise InternalConsistencyError(
            f"vocabulary size changed across duplication factors: "
            f"{sorted((r['factor'], r['nodes']) for r in rows)}"
        )
    print("factor\tnodes\tedges\tgraph_s\twalk_s\ttrain_s\twalk_train_s")
    for r in rows:
        print(
            f"{r['factor']}\t{r['nodes']}\t{r['edges']}\t{r['graph_s']:.3f}"
            f"\t{r['walk_s']:.3f}\t{r['train_s']:.3f}\t{r['walk_train_s']:.3f}"
        )
    for prev, curr in zip(rows, rows[1:]):
        graph_ratio = curr["graph_s"] / prev["graph_s"] if prev["graph_s"] > 0 else float("inf")
        wt_ratio = (
            curr["walk_train_s"] / prev["walk_train_s"]
            if prev["walk_train_s"] > 0
            else float("inf")
        )
        print(
            f"ratio\t{curr['factor']}/{prev['factor']}\tgraph={graph_ratio:.3f}"
            f"\twalk_train={wt_ratio:.3f}"
        )
    with open(os.path.join(cfg.out_dir, "scaling.json"), "w", encoding="utf-8") as fh:
        json.dump({"factors": factors, "rows": rows}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _parse_factors(text: str):
    try:
        factors = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad factor list {text!r}") from None
    if not factors or any(f < 1 for f in factors):
        raise argparse.ArgumentTypeError("factors must be positive integers, e.g. 1,2")
    return factors


def _add_common(sub, out_required=True):
    sub.add_argument("--config", help="JSON config file (flags override its values)")
    sub.add_argument("--seed", type=_nonneg_int, default=None, help="top-level random seed")
    sub.add_argument("--threads", type=_positive_int, default=None, help="worker thread count")
    if out_required:
        sub.add_argument("--out", required=True, help="output file path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="walkvec",
        description=(
            "Word embeddings from a co-occurrence graph: build the graph, sample "
            "biased random walks, train skip-gram, evaluate."
        ),
    )
    parser.add_argument("--version", action="version", version=f"walkvec {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("build-graph", help="build the co-occurrence graph from text")
    p.add_argument("corpus", nargs="*", help="input text file(s); each file is a separate run")
    _add_common(p)
    p.add_argument("--min-count", type=_positive_int, default=None)
    p.add_argument("--wordlist", default=None, help="optional vocabulary filter file")
    p.add_argument("--weight-mode", choices=["tf", "tfidf"], default=None)
    p.add_argument("--window", type=_positive_int, default=None, help="tf-idf window size")
    p.add_argument("--vocab-out", default=None, help="also write the vocabulary file here")
    p.add_argument("--edgelist-out", default=None, help="also write a debug edge list here")
    p.set_defaults(func=cmd_build_graph)

    p = subs.add_parser("stats", help="print |V|, |E|, density, avg out-degree of a graph file")
    p.add_argument("graph")
    p.set_defaults(func=cmd_stats)

    p = subs.add_parser("walk", help="sample the walk corpus from a graph file")
    p.add_argument("graph")
    _add_common(p)
    p.add_argument("--p", type=_positive_float, default=None, help="return hyper-parameter")
    p.add_argument("--q", type=_positive_float, default=None, help="in-out hyper-parameter")
    p.add_argument("--walk-length", type=_positive_int, default=None)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--total-walks", type=_nonneg_int, default=None)
    group.add_argument("--walks-per-node", type=_nonneg_int, default=None)
    p.add_argument("--min-walks-per-node", type=_nonneg_int, default=None)
    p.add_argument("--format", choices=["text", "binary"], default=None)
    p.set_defaults(func=cmd_walk)

    p = subs.add_parser("train", help="train skip-gram embeddings on a walk corpus")
    p.add_argument("walks", help="walk corpus file (text or binary)")
    _add_common(p)
    p.add_argument("--dimension", type=_positive_int, default=None)
    p.add_argument("--window", type=_positive_int, default=None)
    p.add_argument("--negatives", type=_positive_int, default=None)
    p.add_argument("--epochs", type=_nonneg_int, default=None)
    p.add_argument("--initial-lr", type=_positive_float, default=None)
    p.add_argument("--min-lr", type=_positive_float, default=None)
    p.add_argument("--noise-exponent", type=float, default=None)
    det = p.add_mutually_exclusive_group()
    det.add_argument(
        "--deterministic", dest="deterministic", action="store_const", const=True, default=None,
        help="single-worker bit-reproducible training",
    )
    det.add_argument(
        "--parallel", dest="deterministic", action="store_const", const=False,
        help="lock-free parallel training (default)",
    )
    p.add_argument("--subsample", type=float, default=None)
    p.set_defaults(func=cmd_train)

    p = subs.add_parser("eval", help="score an embedding file on benchmark datasets")
    p.add_argument("embedding")
    p.add_argument("--config", help="JSON config file (supplies eval tasks if flags absent)")
    p.add_argument("--seed", type=_nonneg_int, default=None)
    p.add_argument("--task", choices=["similarity", "analogy", "categorization"], default=None)
    p.add_argument("--dataset", default=None)
    p.add_argument("--json", action="store_true", help="machine-readable output only")
    p.set_defaults(func=cmd_eval)

    p = subs.add_parser("pipeline", help="build-graph, walk, train, and optionally eval")
    p.add_argument("corpus", nargs="*", help="input text file(s); overrides config corpus_paths")
    p.add_argument("--config", help="JSON pipeline config")
    p.add_argument("--seed", type=_nonneg_int, default=None)
    p.add_argument("--threads", type=_positive_int, default=None)
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_pipeline)

    p = subs.add_parser(
        "scaling-bench", help="time the pipeline on f-fold duplications of a corpus"
    )
    p.add_argument("corpus", nargs="*", help="input text file(s)")
    p.add_argument("--config", help="JSON pipeline config")
    p.add_argument("--seed", type=_nonneg_int, default=None)
    p.add_argument("--threads", type=_positive_int, default=None)
    p.add_argument("--out-dir", default=None)
    p.add_argument(
        "--factors", type=_parse_factors, default=[1, 2],
        help="comma-separated duplication factors (default 1,2)",
    )
    p.set_defaults(func=cmd_scaling_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except WalkvecError as exc:
        print(f"walkvec: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"walkvec: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
