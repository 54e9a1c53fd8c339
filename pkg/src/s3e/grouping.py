"""Semantic groups: weighted k-means++ over the word-vector vocabulary.

Word weights act as sample masses, both when sampling seeds (probability
proportional to ``weight * D^2``) and in the Lloyd centroid updates.

Model file layout (all integers little-endian)::

    b"S3E1"
    u32 header_len, header_len bytes of UTF-8 JSON (sorted keys)
    4 records, each u64 byte_len followed by the payload:
        centroids        k*d float64, row-major
        group_centroids  k*d float64, row-major
        words            UTF-8, words joined with "\\n"
        assignment       n_words int32

The JSON header carries ``format_version``, ``k``, ``dim``, ``n_words``,
``epsilon``, ``preprocess_mode`` and ``seed``.
"""
from __future__ import annotations

import json
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .vectors_io import PreprocessMode, UnigramTable, WordVectorTable
from .weighting import WeightConfig, weight_array

log = logging.getLogger(__name__)

MAGIC = b"S3E1"
FORMAT_VERSION = 1
DEFAULT_MAX_ITER = 100
DEFAULT_TOL = 1e-4
_CHUNK = 8192


class ModelFormatError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GroupModel:
    """K semantic groups over a vocabulary.

    ``centroids`` are the weighted Lloyd centers (diagnostic only);
    ``group_centroids`` are ``(1/|G_i|) * sum(weight(w) * v_w)`` over each
    group, which is what the sentence descriptor subtracts.
    """

    k: int
    centroids: np.ndarray
    group_centroids: np.ndarray
    words: tuple[str, ...]
    labels: np.ndarray
    epsilon: float
    preprocess_mode: PreprocessMode = PreprocessMode.NONE
    seed: int = 0
    _group_of: Mapping[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        centroids = np.asarray(self.centroids, dtype=np.float64)
        gc = np.asarray(self.group_centroids, dtype=np.float64)
        words = tuple(self.words)
        if self.k <= 0:
            raise ValueError(f"k must be positive, got {self.k}")
        if len(words) < self.k:
            raise ValueError(f"k={self.k} exceeds vocabulary size {len(words)}")
        if labels.shape != (len(words),):
            raise ValueError("need exactly one group label per word")
        if labels.size and (labels.min() < 0 or labels.max() >= self.k):
            raise ValueError(f"group labels must lie in [0, {self.k})")
        if centroids.ndim != 2 or centroids.shape[0] != self.k or gc.shape != centroids.shape:
            raise ValueError("centroid matrices must both be k x d")
        group_of = dict(zip(words, labels.tolist()))
        if len(group_of) != len(words):
            raise ValueError("duplicate words in model vocabulary")
        for arr in (labels, centroids, gc):
            arr.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "centroids", centroids)
        object.__setattr__(self, "group_centroids", gc)
        object.__setattr__(self, "words", words)
        object.__setattr__(self, "preprocess_mode", PreprocessMode(self.preprocess_mode))
        object.__setattr__(self, "_group_of", group_of)

    @property
    def dim(self) -> int:
        return self.centroids.shape[1]

    @property
    def assignment(self) -> Mapping[str, int]:
        return self._group_of

    def group_of(self, word: str) -> int | None:
        return self._group_of.get(word)

    def members(self, i: int) -> list[str]:
        return [w for w, g in zip(self.words, self.labels) if g == i]

    def same_as(self, other: "GroupModel") -> bool:
        return (
            self.k == other.k
            and self.words == other.words
            and self.epsilon == other.epsilon
            and self.preprocess_mode == other.preprocess_mode
            and self.seed == other.seed
            and np.array_equal(self.labels, other.labels)
            and np.array_equal(self.centroids, other.centroids)
            and np.array_equal(self.group_centroids, other.group_centroids)
        )


@dataclass
class ClusterDiagnostics:
    iterations: int = 0
    weighted_inertia: list[float] = field(default_factory=list)
    empty_group_events: int = 0
    seed: int = 0
    converged: bool = False


def group_centroid(group_words: Sequence[str], vectors: WordVectorTable, unigram: UnigramTable,
                   cfg: WeightConfig = WeightConfig()) -> np.ndarray:
    """Weighted sum of the group's vectors divided by the word count (not the weight sum)."""
    words = list(group_words)
    if not words:
        raise ValueError("cannot take the centroid of an empty group")
    rows = vectors.vectors[[vectors.index[w] for w in words]]
    w = weight_array(words, unigram, cfg)
    return _group_centroids(rows, w, np.zeros(len(words), dtype=np.int64), 1)[0]


def _group_centroids(X: np.ndarray, w: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    sums = np.zeros((k, X.shape[1]))
    np.add.at(sums, labels, w[:, None] * X)
    sizes = np.bincount(labels, minlength=k).astype(np.float64)
    if np.any(sizes == 0):
        raise ValueError("empty group")
    return sums / sizes[:, None]


def _weighted_means(X: np.ndarray, w: np.ndarray, labels: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    sums = np.zeros((k, X.shape[1]))
    np.add.at(sums, labels, w[:, None] * X)
    mass = np.bincount(labels, weights=w, minlength=k)
    out = np.zeros_like(sums)
    nz = mass > 0
    out[nz] = sums[nz] / mass[nz, None]
    return out, mass


def _sq_dist_to(X: np.ndarray, c: np.ndarray) -> np.ndarray:
    diff = X - c
    return np.einsum("ij,ij->i", diff, diff)


def _assign(X: np.ndarray, centers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Nearest center per row (lowest index on ties) and its squared distance."""
    n = X.shape[0]
    labels = np.empty(n, dtype=np.int64)
    dist = np.empty(n)
    c_sq = np.einsum("ij,ij->i", centers, centers)
    for start in range(0, n, _CHUNK):
        block = X[start:start + _CHUNK]
        d2 = c_sq[None, :] - 2.0 * block @ centers.T
        lab = np.argmin(d2, axis=1)
        labels[start:start + _CHUNK] = lab
        diff = block - centers[lab]
        dist[start:start + _CHUNK] = np.einsum("ij,ij->i", diff, diff)
    return labels, dist


def _seed_centers(X: np.ndarray, w: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    chosen = [int(rng.choice(n, p=w / w.sum()))]
    closest = _sq_dist_to(X, X[chosen[0]])
    for _ in range(1, k):
        pot = w * closest
        total = pot.sum()
        if total > 0:
            idx = int(rng.choice(n, p=pot / total))
        else:
            # every point coincides with a chosen center; fall back to weight mass
            mask = np.ones(n, dtype=bool)
            mask[chosen] = False
            pw = np.where(mask, w, 0.0)
            idx = int(rng.choice(n, p=pw / pw.sum()))
        chosen.append(idx)
        np.minimum(closest, _sq_dist_to(X, X[idx]), out=closest)
    return X[chosen].copy()


def _repair_empty(X: np.ndarray, w: np.ndarray, labels: np.ndarray, centers: np.ndarray, k: int) -> int:
    """Move the worst-served point into each empty group; returns the number of repairs."""
    events = 0
    while True:
        sizes = np.bincount(labels, minlength=k)
        empty = np.flatnonzero(sizes == 0)
        if empty.size == 0:
            return events
        cost = w * _sq_dist_to_labels(X, centers, labels)
        cost[sizes[labels] < 2] = -np.inf  # never empty a donor group
        donor = int(np.argmax(cost))
        labels[donor] = empty[0]
        centers[:] = _weighted_means(X, w, labels, k)[0]
        events += 1


def _sq_dist_to_labels(X: np.ndarray, centers: np.ndarray, labels: np.ndarray) -> np.ndarray:
    diff = X - centers[labels]
    return np.einsum("ij,ij->i", diff, diff)


def weighted_kmeans(X: np.ndarray, w: np.ndarray, k: int, seed: int = 0, max_iter: int = DEFAULT_MAX_ITER,
                    tol: float = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray, ClusterDiagnostics]:
    """Weighted k-means++ seeding followed by weighted Lloyd iterations.

    Returns ``(centers, labels, diagnostics)`` where every center is the
    weighted mean of the rows labelled with it.
    """
    X = np.asarray(X, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    n = X.shape[0]
    if k <= 0:
        raise ValueError(f"k must be positive, got {k}")
    if k > n:
        raise ValueError(f"k={k} exceeds the number of points ({n})")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    if tol < 0:
        raise ValueError("tol must be non-negative")
    if np.any(w <= 0):
        raise ValueError("weights must be positive")
    rng = np.random.default_rng(seed)
    diag = ClusterDiagnostics(seed=seed)
    centers = _seed_centers(X, w, k, rng)
    labels = None
    for _ in range(max_iter):
        labels, _ = _assign(X, centers)
        new_centers, _ = _weighted_means(X, w, labels, k)
        diag.empty_group_events += _repair_empty(X, w, labels, new_centers, k)
        diag.weighted_inertia.append(float(np.dot(w, _sq_dist_to_labels(X, new_centers, labels))))
        shift = float(np.sqrt(np.max(np.sum((new_centers - centers) ** 2, axis=1))))
        centers = new_centers
        diag.iterations += 1
        if shift < tol or shift == 0.0:
            diag.converged = True
            break
    return centers, labels, diag


def build_groups(vectors: WordVectorTable, unigram: UnigramTable, cfg: WeightConfig = WeightConfig(), k: int = 30,
                 seed: int = 0, max_iter: int = DEFAULT_MAX_ITER, tol: float = DEFAULT_TOL,
                 top_n_vocab: int | None = None) -> tuple[GroupModel, ClusterDiagnostics]:
    """Cluster the vocabulary into ``k`` groups and compute the group centroids.

    ``top_n_vocab`` restricts clustering to the most frequent words (ties
    keep vector-file order); words outside that set are not part of the model.
    """
    if len(vectors) == 0:
        raise ValueError("empty vocabulary")
    words = list(vectors.vocab)
    if top_n_vocab is not None:
        if top_n_vocab < 1:
            raise ValueError("top_n_vocab must be positive")
        order = sorted(range(len(words)), key=lambda i: -unigram.prob(words[i]))
        keep = sorted(order[:top_n_vocab])
        words = [words[i] for i in keep]
        X = vectors.vectors[keep]
    else:
        X = vectors.vectors
    if k <= 0:
        raise ValueError(f"k must be positive, got {k}")
    if k > len(words):
        raise ValueError(f"k={k} exceeds vocabulary size {len(words)}")
    w = weight_array(words, unigram, cfg)
    centers, labels, diag = weighted_kmeans(X, w, k, seed=seed, max_iter=max_iter, tol=tol)
    gc = _group_centroids(X, w, labels, k)
    log.info("clustered %d words into %d groups in %d iterations (inertia %.6g, %d empty-group repairs)",
             len(words), k, diag.iterations, diag.weighted_inertia[-1], diag.empty_group_events)
    model = GroupModel(k, centers, gc, tuple(words), labels, cfg.epsilon, vectors.preprocess, seed)
    return model, diag


def recompute_group_centroids(model: GroupModel, vectors: WordVectorTable, unigram: UnigramTable,
                              cfg: WeightConfig | None = None) -> np.ndarray:
    cfg = cfg or WeightConfig(model.epsilon)
    X = vectors.vectors[[vectors.index[w] for w in model.words]]
    w = weight_array(model.words, unigram, cfg)
    return _group_centroids(X, w, model.labels, model.k)


def _record(payload: bytes) -> bytes:
    return struct.pack("<Q", len(payload)) + payload


def model_to_bytes(model: GroupModel) -> bytes:
    header = {
        "format_version": FORMAT_VERSION,
        "k": model.k,
        "dim": model.dim,
        "n_words": len(model.words),
        "epsilon": model.epsilon,
        "preprocess_mode": model.preprocess_mode.value,
        "seed": model.seed,
    }
    hbytes = json.dumps(header, sort_keys=True).encode("utf-8")
    parts = [
        MAGIC,
        struct.pack("<I", len(hbytes)),
        hbytes,
        _record(np.ascontiguousarray(model.centroids, dtype="<f8").tobytes()),
        _record(np.ascontiguousarray(model.group_centroids, dtype="<f8").tobytes()),
        _record("\n".join(model.words).encode("utf-8")),
        _record(model.labels.astype("<i4").tobytes()),
    ]
    return b"".join(parts)


def save_model(model: GroupModel, path) -> None:
    if any("\n" in w for w in model.words):
        raise ValueError("words containing newlines cannot be stored")
    Path(path).write_bytes(model_to_bytes(model))


class _Reader:
    def __init__(self, data: bytes, path):
        self.data = data
        self.pos = 0
        self.path = path

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.data):
            raise ModelFormatError(f"{self.path}: truncated file while reading {what}")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def record(self, what: str) -> bytes:
        (n,) = struct.unpack("<Q", self.take(8, what + " length"))
        return self.take(n, what)


def model_from_bytes(data: bytes, path="<bytes>") -> GroupModel:
    r = _Reader(data, path)
    if r.take(4, "magic") != MAGIC:
        raise ModelFormatError(f"{path}: not an S3E model file (bad magic bytes)")
    (hlen,) = struct.unpack("<I", r.take(4, "header length"))
    try:
        header = json.loads(r.take(hlen, "header").decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"{path}: corrupt header ({exc})") from None
    if header.get("format_version") != FORMAT_VERSION:
        raise ModelFormatError(f"{path}: unsupported format version {header.get('format_version')!r}")
    try:
        k, d, n = int(header["k"]), int(header["dim"]), int(header["n_words"])
        eps, mode, seed = float(header["epsilon"]), header["preprocess_mode"], int(header["seed"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"{path}: incomplete header ({exc})") from None
    cbytes = r.record("centroids")
    gbytes = r.record("group centroids")
    wbytes = r.record("words")
    lbytes = r.record("assignment")
    if r.pos != len(data):
        raise ModelFormatError(f"{path}: {len(data) - r.pos} trailing bytes")
    if len(cbytes) != 8 * k * d or len(gbytes) != 8 * k * d or len(lbytes) != 4 * n:
        raise ModelFormatError(f"{path}: record sizes do not match header (k={k}, dim={d}, n_words={n})")
    words = tuple(wbytes.decode("utf-8").split("\n")) if n else ()
    if len(words) != n:
        raise ModelFormatError(f"{path}: expected {n} words, found {len(words)}")
    try:
        return GroupModel(
            k,
            np.frombuffer(cbytes, dtype="<f8").reshape(k, d).astype(np.float64),
            np.frombuffer(gbytes, dtype="<f8").reshape(k, d).astype(np.float64),
            words,
            np.frombuffer(lbytes, dtype="<i4").astype(np.int64),
            eps,
            PreprocessMode(mode),
            seed,
        )
    except ValueError as exc:
        raise ModelFormatError(f"{path}: invalid model ({exc})") from None


def load_model(path) -> GroupModel:
    return model_from_bytes(Path(path).read_bytes(), path)
