"""S3E sentence embeddings built from static word vectors."""

__version__ = "0.1.0"

from .vectors_io import (  # noqa: E402
    ParseError,
    PreprocessMode,
    UnigramTable,
    WordVectorTable,
    concat_vocab_tables,
    load_unigram,
    load_vector_files,
    load_vectors,
    save_vectors,
)
from .weighting import DEFAULT_EPSILON, WeightConfig, weight  # noqa: E402
from .grouping import (  # noqa: E402
    ClusterDiagnostics,
    GroupModel,
    ModelFormatError,
    build_groups,
    group_centroid,
    load_model,
    save_model,
)
from .text import tokenize  # noqa: E402
from .core import (  # noqa: E402
    CovarianceDescriptor,
    EmbedMode,
    GroupResidualMatrix,
    S3EEmbedder,
    SentenceEmbedding,
    covariance,
    embed,
    embed_batch,
    embedding_dim,
    residual_matrix,
    vectorize,
)
from .baselines import BaselineEmbedder, BaselineKind, baseline_embed  # noqa: E402
from .sts_eval import EvalReport, StsPair, cosine, evaluate, load_sts, pearson  # noqa: E402
from .bench import BenchReport, run_bench  # noqa: E402

__all__ = [
    "ParseError",
    "PreprocessMode",
    "UnigramTable",
    "WordVectorTable",
    "concat_vocab_tables",
    "load_unigram",
    "load_vector_files",
    "load_vectors",
    "save_vectors",
    "DEFAULT_EPSILON",
    "WeightConfig",
    "weight",
    "ClusterDiagnostics",
    "GroupModel",
    "ModelFormatError",
    "build_groups",
    "group_centroid",
    "load_model",
    "save_model",
    "tokenize",
    "CovarianceDescriptor",
    "EmbedMode",
    "GroupResidualMatrix",
    "S3EEmbedder",
    "SentenceEmbedding",
    "covariance",
    "embed",
    "embed_batch",
    "embedding_dim",
    "residual_matrix",
    "vectorize",
    "BaselineEmbedder",
    "BaselineKind",
    "baseline_embed",
    "EvalReport",
    "StsPair",
    "cosine",
    "evaluate",
    "load_sts",
    "pearson",
    "BenchReport",
    "run_bench",
]
