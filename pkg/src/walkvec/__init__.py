"""walkvec: word embeddings via biased random walks on a co-occurrence graph.

Pipeline: tokenize text -> build a directed weighted word co-occurrence
graph with per-node start weights -> sample node-weighted second-order
(p, q)-biased random walks -> train skip-gram with negative sampling on
the walk corpus -> evaluate on similarity / analogy / categorization.
"""

__version__ = "0.1.0"

from .alias import AliasTable, build_alias_table
from .config import (
    CorpusOptions,
    EvalTask,
    GraphOptions,
    PipelineConfig,
    TrainOptions,
    WalkOptions,
    config_from_dict,
    config_to_dict,
    load_config,
    save_config,
)
from .corpus import (
    TokenizerConfig,
    Vocabulary,
    build_vocabulary,
    count_tokens,
    encode,
    iter_file_tokens,
    load_vocabulary,
    load_wordlist,
    save_vocabulary,
    tokenize,
)
from .embed import (
    EmbeddingMatrix,
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
from .errors import (
    ConfigurationError,
    CorpusIOError,
    FormatError,
    InsufficientCoverageError,
    InternalConsistencyError,
    UndefinedMetricError,
    WalkvecError,
)
from .evaluate import (
    AnalogyDataset,
    CategorizationDataset,
    EvalReport,
    SimilarityDataset,
    cosine_similarity,
    eval_analogy,
    eval_categorization,
    eval_similarity,
    kmeans,
    kmeans_inertia,
    load_analogy,
    load_categorization,
    load_similarity,
    predict_analogies,
    purity,
    save_analogy,
    save_categorization,
    save_similarity,
    spearman_rho,
)
from .graph import (
    CooccurrenceGraph,
    GraphStats,
    attach_node_weights,
    build_graph,
    compute_tf_node_weights,
    compute_tfidf_node_weights,
    from_edges,
    graph_stats,
    load_graph,
    save_graph,
    write_edgelist,
)
from .walk import (
    WalkConfig,
    WalkCorpus,
    alpha,
    generate_corpus,
    generate_walks_text,
    load_walks_binary,
    load_walks_text,
    number_walks,
    random_walk,
    save_walks_binary,
    save_walks_text,
    simulate_transition_counts,
    transition_distribution,
    with_walks_per_node,
)

__all__ = [name for name in dir() if not name.startswith("_")]
