"""Build temporal event graph datasets from annotated documents and score generated graphs."""

from .algebra import closure, compose, edge_set, reduction
from .communities import (
    UndirectedAdjacency,
    detect_communities,
    graph_communities,
    induced_subgraphs,
    modularity,
)
from .corpus import (
    AnnotatedDocument,
    MaskedSequence,
    PruneConfig,
    RawEvent,
    RawLink,
    Task1Example,
    augment,
    build_masked_sequence,
    build_task1_examples,
    build_task2_pairs,
    corpus_report,
    masked_nll,
    prune,
    split_corpus,
)
from .dot import decode, encode, is_valid_dot
from .graph import (
    Event,
    RelationLabel,
    TemporalEdge,
    TemporalGraph,
    canonical_edge,
    graph_stats,
    normalize_phrase,
)
from .metrics import (
    EvalReport,
    bleu,
    evaluate_task1,
    evaluate_task2,
    ged,
    isomorphic,
    node_scores,
    rouge_l,
    task1_accuracy,
    temporal_awareness,
)
from .synthetic import SyntheticConfig, generate_corpus

__all__ = [
    "closure",
    "compose",
    "edge_set",
    "reduction",
    "UndirectedAdjacency",
    "detect_communities",
    "graph_communities",
    "induced_subgraphs",
    "modularity",
    "AnnotatedDocument",
    "MaskedSequence",
    "PruneConfig",
    "RawEvent",
    "RawLink",
    "Task1Example",
    "augment",
    "build_masked_sequence",
    "build_task1_examples",
    "build_task2_pairs",
    "corpus_report",
    "masked_nll",
    "prune",
    "split_corpus",
    "decode",
    "encode",
    "is_valid_dot",
    "Event",
    "RelationLabel",
    "TemporalEdge",
    "TemporalGraph",
    "canonical_edge",
    "graph_stats",
    "normalize_phrase",
    "EvalReport",
    "bleu",
    "evaluate_task1",
    "evaluate_task2",
    "ged",
    "isomorphic",
    "node_scores",
    "rouge_l",
    "task1_accuracy",
    "temporal_awareness",
    "SyntheticConfig",
    "generate_corpus",
]

__version__ = "0.1.0"
