"""Generalized category discovery over precomputed embeddings.

The pipeline: a small trainable encoder is refined with a joint
supervised/unsupervised contrastive objective (labelled samples pull
same-class embeddings together; every sample pulls same-recording clips
together), the refined embeddings are clustered, and the clustering is
scored on the labelled (Old), unlabelled (New), and combined (All)
subsets with a single global cluster-to-class matching.
"""

__version__ = "0.1.0"

from .core import (
    Assignment,
    DataError,
    Dataset,
    NumericError,
    Reduction,
    SampleMeta,
    Split,
    TrainConfig,
    ensure_features,
    validate_dataset,
)
from .simgeom import cosine_similarity, rank_ascending, similarity_matrix
from .encoder import (
    EncoderParams,
    encoder_backward,
    encoder_forward,
    encoder_init,
    gradient_check,
    load_checkpoint,
    save_checkpoint,
)
from .objective import (
    PairSets,
    build_supervised_pairs,
    build_unsupervised_pairs,
    combined_loss,
    mine_hard_negatives,
    supervised_loss,
    unsupervised_loss,
)
from .trainer import TrainState, embed_all, train
from .clustering import KMeansResult, kmeans, threshold_cluster
from .metrics import (
    MetricReport,
    SubsetMetrics,
    ari,
    clustering_accuracy,
    hungarian_max_assignment,
    nmi,
    silhouette,
    subset_report,
)
from .datagen import SynthConfig, generate

__all__ = [
    "Assignment",
    "DataError",
    "Dataset",
    "EncoderParams",
    "KMeansResult",
    "MetricReport",
    "NumericError",
    "PairSets",
    "Reduction",
    "SampleMeta",
    "Split",
    "SubsetMetrics",
    "SynthConfig",
    "TrainConfig",
    "TrainState",
    "ari",
    "build_supervised_pairs",
    "build_unsupervised_pairs",
    "clustering_accuracy",
    "combined_loss",
    "cosine_similarity",
    "embed_all",
    "encoder_backward",
    "encoder_forward",
    "encoder_init",
    "ensure_features",
    "generate",
    "gradient_check",
    "hungarian_max_assignment",
    "kmeans",
    "load_checkpoint",
    "mine_hard_negatives",
    "nmi",
    "rank_ascending",
    "save_checkpoint",
    "silhouette",
    "similarity_matrix",
    "subset_report",
    "supervised_loss",
    "threshold_cluster",
    "train",
    "unsupervised_loss",
    "validate_dataset",
]
