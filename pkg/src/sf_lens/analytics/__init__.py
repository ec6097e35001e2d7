from .embedding import (
    ConceptCluster,
    EmbeddingFrame,
    EmbeddingParams,
    cache_key,
    color_labels,
    compute_embedding,
    concept_clusters,
    embed_scope,
    load_frame,
    save_frame,
)
from .failures import (
    FailureHit,
    SweepPoint,
    failure_locality,
    intensity_sweep,
    mine_silent_failures,
)
from .kmeans import KmeansResult, kmeans
from .pca import PcaResult, reduce_pca
from .tsne import TsneResult, reduce_tsne

__all__ = [
    "PcaResult",
    "reduce_pca",
    "TsneResult",
    "reduce_tsne",
    "KmeansResult",
    "kmeans",
    "EmbeddingParams",
    "EmbeddingFrame",
    "embed_scope",
    "compute_embedding",
    "color_labels",
    "ConceptCluster",
    "concept_clusters",
    "cache_key",
    "save_frame",
    "load_frame",
    "FailureHit",
    "mine_silent_failures",
    "SweepPoint",
    "intensity_sweep",
    "failure_locality",
]
