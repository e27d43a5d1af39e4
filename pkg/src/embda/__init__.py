"""Domain-aware word embedding training toolkit.

Implements skip-gram and CBOW with negative sampling, plus two
domain-adaptation variants: SG with a per-word domain indicator channel
(sg-di) and CBOW with a domain attention projection (cbow-da). Both are
driven by a word-pair co-occurrence table extracted from a small
target-domain corpus.
"""

from embda.corpus import (
    NegativeSamplingTable,
    Vocabulary,
    build_ns_table,
    build_vocab,
    read_sentences,
)
from embda.evaluate import (
    cluster_tightness,
    nearest_neighbors,
    pca_project,
    shift_report,
)
from embda.model import EmbeddingModel, WordVectors, init_model, load_vectors, save_vectors
from embda.pairs import PairTable, domain_frequencies, extract_pairs
from embda.trainer import TrainConfig, train

__version__ = "0.1.0"

__all__ = [
    "Vocabulary",
    "NegativeSamplingTable",
    "build_vocab",
    "build_ns_table",
    "read_sentences",
    "PairTable",
    "extract_pairs",
    "domain_frequencies",
    "EmbeddingModel",
    "WordVectors",
    "init_model",
    "load_vectors",
    "save_vectors",
    "TrainConfig",
    "train",
    "shift_report",
    "nearest_neighbors",
    "cluster_tightness",
    "pca_project",
]
