"""Averaging baselines: plain mean, SIF weighted mean, and SIF with the
corpus-level first principal component projected out."""
from __future__ import annotations

from enum import Enum
from typing import Sequence

import numpy as np

from .text import Sentence
from .vectors_io import UnigramTable, WordVectorTable
from .weighting import WeightConfig, weight_array

PC_MAX_ITER = 100
PC_TOL = 1e-6


class BaselineKind(str, Enum):
    AVG = "avg"
    WEIGHTED_AVG = "weighted_avg"
    WEIGHTED_AVG_PC_REMOVED = "weighted_avg_pc_removed"

    @classmethod
    def from_cli(cls, name: str) -> "BaselineKind":
        return {"avg": cls.AVG, "sif": cls.WEIGHTED_AVG, "sif_pc": cls.WEIGHTED_AVG_PC_REMOVED}.get(name) or cls(name)


def _average(s: Sentence, vectors: WordVectorTable, unigram: UnigramTable | None, cfg: WeightConfig) -> np.ndarray:
    toks = [t for t in s if t in vectors.index]
    if not toks:
        return np.zeros(vectors.dim)
    X = vectors.vectors[[vectors.index[t] for t in toks]]
    if unigram is None:
        w = np.ones(len(toks))
    else:
        w = weight_array(toks, unigram, cfg)
        w = w / w.max()  # scale-free; keeps uniform weights bit-identical to the plain mean
    return (w @ X) / w.sum()


def first_principal_component(X: np.ndarray, max_iter: int = PC_MAX_ITER, tol: float = PC_TOL,
                              seed: int = 0) -> np.ndarray:
    """Top right-singular vector of ``X`` (no centering) by power iteration on ``X^T X``."""
    X = np.asarray(X, dtype=np.float64)
    gram = X.T @ X
    u = np.random.default_rng(seed).standard_normal(gram.shape[0])
    u /= np.linalg.norm(u)
    for _ in range(max_iter):
        nxt = gram @ u
        norm = np.linalg.norm(nxt)
        if norm == 0.0:
            return u
        nxt /= norm
        if np.linalg.norm(nxt - u) < tol:
            u = nxt
            break
        u = nxt
    # fix the sign so results do not depend on the start vector's orientation
    j = int(np.argmax(np.abs(u)))
    return u if u[j] >= 0 else -u


def remove_component(x: np.ndarray, pc: np.ndarray) -> np.ndarray:
    return x - np.dot(x, pc) * pc


def baseline_embed(s: Sentence, kind: BaselineKind | str, vectors: WordVectorTable,
                   unigram: UnigramTable | None = None, cfg: WeightConfig = WeightConfig(),
                   pc: np.ndarray | None = None) -> np.ndarray:
    kind = BaselineKind(kind)
    if kind is BaselineKind.AVG:
        return _average(s, vectors, None, cfg)
    if unigram is None:
        raise ValueError(f"{kind.value} needs a unigram table")
    v = _average(s, vectors, unigram, cfg)
    if kind is BaselineKind.WEIGHTED_AVG_PC_REMOVED:
        if pc is None:
            raise ValueError("principal component required; fit it on the corpus first")
        v = remove_component(v, pc)
    return v


class BaselineEmbedder:
    """Callable baseline; for ``weighted_avg_pc_removed`` call :meth:`fit` on the corpus first."""

    def __init__(self, kind: BaselineKind | str, vectors: WordVectorTable, unigram: UnigramTable | None = None,
                 cfg: WeightConfig = WeightConfig()):
        self.kind = BaselineKind(kind)
        self.vectors = vectors
        self.unigram = unigram
        self.cfg = cfg
        self.pc: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return self.vectors.dim

    def fit(self, corpus: Sequence[Sentence]) -> "BaselineEmbedder":
        if self.kind is BaselineKind.WEIGHTED_AVG_PC_REMOVED and self.pc is None:
            X = np.vstack([_average(s, self.vectors, self.unigram, self.cfg) for s in corpus])
            self.pc = first_principal_component(X)
        return self

    def __call__(self, s: Sentence) -> np.ndarray:
        return baseline_embed(s, self.kind, self.vectors, self.unigram, self.cfg, self.pc)
