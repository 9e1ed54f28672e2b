"""Structural-entropy role discovery over an action space."""

__version__ = "0.1.0"

from .embedding import (
    EmbeddingMatrix,
    TransitionTable,
    correlation_graph,
    learn_embeddings,
    pearson,
)
from .graph import WeightedGraph, build_graph, cut_weight, one_dim_entropy
from .optimize import (
    OperatorApplication,
    apply_combine,
    apply_merge,
    delta_combine,
    delta_merge,
    optimize,
)
from .oracle import OracleResult, enumerate_optimal
from .roles import RoleSet, aggregate_representation, extract_roles
from .sparsify import SparsificationReport, correct_weights, knn_graph, select_k_star
from .tree import (
    EncodingTree,
    flat_tree,
    node_entropy_term,
    tree_entropy,
    validate,
)

__all__ = [
    "EmbeddingMatrix", "TransitionTable", "correlation_graph", "learn_embeddings", "pearson",
    "WeightedGraph", "build_graph", "cut_weight", "one_dim_entropy",
    "OperatorApplication", "apply_combine", "apply_merge", "delta_combine", "delta_merge", "optimize",
    "OracleResult", "enumerate_optimal",
    "RoleSet", "aggregate_representation", "extract_roles",
    "SparsificationReport", "correct_weights", "knn_graph", "select_k_star",
    "EncodingTree", "flat_tree", "node_entropy_term", "tree_entropy", "validate",
]
