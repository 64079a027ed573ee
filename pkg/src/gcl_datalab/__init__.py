"""Desk-scale laboratory for data-centric analysis of graph contrastive learning."""

from .graphs import (
    AttributedGraph,
    LabeledGraph,
    are_isomorphic,
    deserialize,
    serialize,
    wl_hash,
)
from .synth import Dataset, GenerationConfig, generate_dataset, random_background_tree
from .augment import (
    AugmentationRecord,
    AugmentationSpec,
    allowable_budget,
    apply,
    count_augmentations_upper_bound,
    enumerate_augmentations,
)
from .ged import CostModel, GedResult, co_occurring, ged_exact, ged_within
from .pag import (
    AnalysisReport,
    PartitionAssignment,
    PopulationAugmentationGraph,
    alpha_lower_bound,
    build_pag,
    conductance,
    count_pairs,
    detect_inconsistent,
    generalization_bound,
    partition_dissimilarity,
)
from .spectral import EmbeddingMatrix, alignment, normalized_similarity, specloss, spectral_embed
from .metrics import EvalSplit, invariance_score, knn_evaluate, linear_probe, separability_score

__version__ = "0.1.0"
