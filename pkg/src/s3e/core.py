"""Sentence descriptor: per-group weighted residuals, their K x K covariance,
and the norm-preserving upper-triangle vectorization."""
from __future__ import annotations

import functools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .grouping import GroupModel
from .text import Sentence
from .vectors_io import UnigramTable, WordVectorTable
from .weighting import WeightConfig, weight

SQRT2 = math.sqrt(2.0)


class EmbedMode(str, Enum):
    COV_ONLY = "cov_only"
    COV_PLUS_MEAN = "cov_plus_mean"


def embedding_dim(k: int, d: int, mode: EmbedMode | str = EmbedMode.COV_PLUS_MEAN) -> int:
    n = k * (k + 1) // 2
    return n + d if EmbedMode(mode) is EmbedMode.COV_PLUS_MEAN else n


@dataclass(frozen=True, eq=False)
class GroupResidualMatrix:
    """K x d matrix with one accumulated residual row per group."""

    phi: np.ndarray

    @functools.cached_property
    def row_means(self) -> np.ndarray:
        # computed on first use: only the covariance step needs it
        return self.phi.mean(axis=1)

    @classmethod
    def from_phi(cls, phi: np.ndarray) -> "GroupResidualMatrix":
        return cls(np.asarray(phi, dtype=np.float64))


@dataclass(frozen=True, eq=False)
class CovarianceDescriptor:
    c: np.ndarray


@dataclass(frozen=True, eq=False)
class SentenceEmbedding:
    values: np.ndarray
    norm_flag: bool
    mode: EmbedMode = EmbedMode.COV_PLUS_MEAN

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    @property
    def is_zero(self) -> bool:
        return not self.norm_flag


def _check_dims(model: GroupModel, vectors: WordVectorTable) -> None:
    if model.dim != vectors.dim:
        raise ValueError(f"model dimension {model.dim} does not match word vectors ({vectors.dim})")


def residual_matrix(s: Sentence, model: GroupModel, vectors: WordVectorTable, unigram: UnigramTable,
                    cfg: WeightConfig = WeightConfig()) -> GroupResidualMatrix:
    """Accumulate ``weight(w) * (v_w - g_i)`` into row ``i`` for every token in group ``i``.

    Tokens missing from the vectors or the model are skipped; repeated tokens
    contribute once per occurrence, summed in token order.
    """
    _check_dims(model, vectors)
    phi = np.zeros((model.k, model.dim))
    index = vectors.index
    table = vectors.vectors
    g = model.group_centroids
    group_of = model.assignment
    for tok in s:
        row = index.get(tok)
        if row is None:
            continue
        gi = group_of.get(tok)
        if gi is None:
            continue
        phi[gi] += weight(unigram.prob(tok), cfg) * (table[row] - g[gi])
    return GroupResidualMatrix(phi)


def covariance(phi: GroupResidualMatrix | np.ndarray) -> CovarianceDescriptor:
    """Covariance between rows, treating the d columns as observations (divide by d)."""
    if isinstance(phi, GroupResidualMatrix):
        mat, mu = phi.phi, phi.row_means
    else:
        mat = np.asarray(phi, dtype=np.float64)
        mu = mat.mean(axis=1)
    d = mat.shape[1]
    if d < 1:
        raise ValueError("residual matrix needs at least one column")
    centered = mat - mu[:, None]
    c = (centered @ centered.T) / d
    upper = np.triu(c)
    return CovarianceDescriptor(upper + np.triu(upper, 1).T)


@functools.lru_cache(maxsize=64)
def _triu_layout(k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    rows, cols = np.triu_indices(k)
    scale = np.where(rows == cols, 1.0, SQRT2)
    for a in (rows, cols, scale):
        a.setflags(write=False)
    return rows, cols, scale


def vectorize(c: CovarianceDescriptor | np.ndarray) -> np.ndarray:
    """Row-major upper triangle, off-diagonal entries scaled by sqrt(2)."""
    mat = c.c if isinstance(c, CovarianceDescriptor) else np.asarray(c, dtype=np.float64)
    rows, cols, scale = _triu_layout(mat.shape[0])
    return mat[rows, cols] * scale


def weighted_mean(s: Sentence, model: GroupModel, vectors: WordVectorTable, unigram: UnigramTable,
                  cfg: WeightConfig = WeightConfig()) -> np.ndarray:
    """Weighted average of the in-vocabulary token vectors; zero if none."""
    total = np.zeros(vectors.dim)
    mass = 0.0
    for tok in s:
        row = vectors.index.get(tok)
        if row is None or tok not in model.assignment:
            continue
        w = weight(unigram.prob(tok), cfg)
        total += w * vectors.vectors[row]
        mass += w
    return total / mass if mass > 0 else total


def embed(s: Sentence, model: GroupModel, vectors: WordVectorTable, unigram: UnigramTable,
          cfg: WeightConfig = WeightConfig(), mode: EmbedMode | str = EmbedMode.COV_PLUS_MEAN) -> SentenceEmbedding:
    mode = EmbedMode(mode)
    phi = residual_matrix(s, model, vectors, unigram, cfg)
    v = vectorize(covariance(phi))
    if mode is EmbedMode.COV_PLUS_MEAN:
        v = np.concatenate([v, weighted_mean(s, model, vectors, unigram, cfg)])
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        return SentenceEmbedding(v, False, mode)
    return SentenceEmbedding(v / norm, True, mode)


class BatchItemError(RuntimeError):
    def __init__(self, index: int, cause: BaseException):
        self.index = index
        super().__init__(f"sentence {index}: {cause}")


def embed_batch(sentences: Sequence[Sentence], model: GroupModel, vectors: WordVectorTable, unigram: UnigramTable,
                cfg: WeightConfig = WeightConfig(), mode: EmbedMode | str = EmbedMode.COV_PLUS_MEAN,
                workers: int = 1) -> list[SentenceEmbedding]:
    """Embed each sentence; output order matches input order for any ``workers``."""

    def one(item):
        i, s = item
        try:
            return embed(s, model, vectors, unigram, cfg, mode)
        except Exception as exc:
            raise BatchItemError(i, exc) from exc

    items = list(enumerate(sentences))
    if workers <= 1 or len(items) < 2:
        return [one(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, items))


class S3EEmbedder:
    """Bundles a model with the tables it was built from."""

    def __init__(self, model: GroupModel, vectors: WordVectorTable, unigram: UnigramTable,
                 cfg: WeightConfig | None = None, mode: EmbedMode | str = EmbedMode.COV_PLUS_MEAN):
        _check_dims(model, vectors)
        self.model = model
        self.vectors = vectors
        self.unigram = unigram
        self.cfg = cfg or WeightConfig(model.epsilon)
        self.mode = EmbedMode(mode)

    @property
    def dim(self) -> int:
        return embedding_dim(self.model.k, self.model.dim, self.mode)

    def __call__(self, s: Sentence) -> SentenceEmbedding:
        return embed(s, self.model, self.vectors, self.unigram, self.cfg, self.mode)

    def batch(self, sentences: Sequence[Sentence], workers: int = 1) -> list[SentenceEmbedding]:
        return embed_batch(sentences, self.model, self.vectors, self.unigram, self.cfg, self.mode, workers)
