"""Reading word-vector text files and unigram count tables."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

log = logging.getLogger(__name__)


class ParseError(ValueError):
    """Malformed vector or frequency file."""

    def __init__(self, path, lineno: int | None, message: str):
        self.path = str(path)
        self.lineno = lineno
        where = f"{self.path}:{lineno}" if lineno is not None else self.path
        super().__init__(f"{where}: {message}")


class PreprocessMode(str, Enum):
    NONE = "none"
    L2 = "l2"
    CENTER_SCALE = "center_scale"


@dataclass(frozen=True, eq=False)
class WordVectorTable:
    """Vocabulary in file order plus a ``len(vocab) x dim`` float64 matrix."""

    vocab: tuple[str, ...]
    vectors: np.ndarray
    preprocess: PreprocessMode = PreprocessMode.NONE
    duplicates: int = 0
    index: Mapping[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        vecs = np.asarray(self.vectors, dtype=np.float64)
        if vecs.ndim != 2:
            raise ValueError(f"vectors must be 2-D, got shape {vecs.shape}")
        if vecs.shape[0] != len(self.vocab):
            raise ValueError(f"{len(self.vocab)} words but {vecs.shape[0]} vector rows")
        if vecs.shape[1] < 1:
            raise ValueError("vector dimension must be positive")
        if not np.all(np.isfinite(vecs)):
            raise ValueError("vectors contain NaN or Inf")
        index = {w: i for i, w in enumerate(self.vocab)}
        if len(index) != len(self.vocab):
            raise ValueError("duplicate words in vocabulary")
        vecs.setflags(write=False)
        object.__setattr__(self, "vocab", tuple(self.vocab))
        object.__setattr__(self, "vectors", vecs)
        object.__setattr__(self, "index", index)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.vocab)

    def __contains__(self, word: str) -> bool:
        return word in self.index

    def get(self, word: str) -> np.ndarray | None:
        row = self.index.get(word)
        return None if row is None else self.vectors[row]


@dataclass(frozen=True)
class UnigramTable:
    """Word probabilities estimated as count / total_count."""

    probs: Mapping[str, float]
    total_count: int

    def prob(self, word: str) -> float:
        # Absent words get p=0, i.e. the maximal weight.
        return self.probs.get(word, 0.0)

    def __contains__(self, word: str) -> bool:
        return word in self.probs

    def __len__(self) -> int:
        return len(self.probs)

    @classmethod
    def from_counts(cls, counts: Mapping[str, int]) -> "UnigramTable":
        total = sum(counts.values())
        if total <= 0:
            raise ValueError("frequency counts sum to zero")
        return cls({w: c / total for w, c in counts.items()}, total)


def _is_header(parts: Sequence[str]) -> bool:
    return len(parts) == 2 and all(p.isdigit() for p in parts)


def load_vectors(path, preprocess: PreprocessMode | str = PreprocessMode.NONE) -> WordVectorTable:
    """Load a GloVe/fastText style text file.

    Each data line is ``word c1 ... cd``.  A leading ``|V| d`` header line is
    detected and skipped.  Repeated words keep their first vector; the number
    of dropped repeats is logged and stored on the table.
    """
    path = Path(path)
    preprocess = PreprocessMode(preprocess)
    words: list[str] = []
    rows: list[np.ndarray] = []
    seen: set[str] = set()
    dup = 0
    dim = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\r\n").split(" ")
            parts = [p for p in parts if p]
            if not parts:
                continue
            if lineno == 1 and _is_header(parts):
                continue
            if len(parts) < 2:
                raise ParseError(path, lineno, "line has a word but no vector components")
            try:
                vec = np.array([float(x) for x in parts[1:]], dtype=np.float64)
            except ValueError as exc:
                raise ParseError(path, lineno, f"unparsable float ({exc})") from None
            if dim is None:
                dim = vec.shape[0]
            elif vec.shape[0] != dim:
                raise ParseError(path, lineno, f"expected {dim} components, found {vec.shape[0]}")
            if not np.all(np.isfinite(vec)):
                raise ParseError(path, lineno, "non-finite vector component")
            word = parts[0]
            if word in seen:
                dup += 1
                continue
            seen.add(word)
            words.append(word)
            rows.append(vec)
    if not rows:
        raise ParseError(path, None, "no word vectors found")
    if dup:
        log.warning("%s: %d duplicate words ignored (first occurrence kept)", path, dup)
    matrix = preprocess_vectors(np.vstack(rows), preprocess)
    return WordVectorTable(tuple(words), matrix, preprocess, dup)


def preprocess_vectors(matrix: np.ndarray, mode: PreprocessMode | str) -> np.ndarray:
    mode = PreprocessMode(mode)
    matrix = np.asarray(matrix, dtype=np.float64)
    if mode is PreprocessMode.NONE:
        return matrix
    if mode is PreprocessMode.L2:
        norms = np.linalg.norm(matrix, axis=1, keepdims=True)
        norms[norms == 0.0] = 1.0
        return matrix / norms
    centered = matrix - matrix.mean(axis=0)
    std = centered.std(axis=0)
    std[std == 0.0] = 1.0  # constant dimension: leave centered at zero
    return centered / std


def save_vectors(table: WordVectorTable, path, header: bool = False) -> None:
    """Write ``table`` in the same text format :func:`load_vectors` reads."""
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            fh.write(f"{len(table)} {table.dim}\n")
        for word, vec in zip(table.vocab, table.vectors):
            fh.write(word + " " + " ".join(repr(float(x)) for x in vec) + "\n")


def concat_vocab_tables(tables: Sequence[WordVectorTable]) -> WordVectorTable:
    """Concatenate several embeddings over their shared vocabulary.

    The word order follows the first table.  Preprocessing of the inputs is
    kept as-is; the result is tagged with the first table's mode when all
    agree and ``none`` otherwise.
    """
    if not tables:
        raise ValueError("need at least one vector table")
    if len(tables) == 1:
        return tables[0]
    shared = set(tables[0].vocab)
    for t in tables[1:]:
        shared &= t.index.keys()
    if not shared:
        raise ValueError("vector tables have no words in common")
    words = tuple(w for w in tables[0].vocab if w in shared)
    blocks = [t.vectors[[t.index[w] for w in words]] for t in tables]
    modes = {t.preprocess for t in tables}
    mode = modes.pop() if len(modes) == 1 else PreprocessMode.NONE
    return WordVectorTable(words, np.hstack(blocks), mode, sum(t.duplicates for t in tables))


def load_unigram(path) -> UnigramTable:
    """Load ``word<TAB or SPACE>count`` lines; repeated words add up."""
    path = Path(path)
    counts: dict[str, int] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            if "\t" in line:
                parts = line.split("\t")
            else:
                parts = line.split()
            if len(parts) != 2 or not parts[0]:
                raise ParseError(path, lineno, "expected 'word count'")
            word, raw = parts[0], parts[1].strip()
            try:
                count = int(raw)
            except ValueError:
                raise ParseError(path, lineno, f"count {raw!r} is not an integer") from None
            if count < 0:
                raise ParseError(path, lineno, f"negative count {count}")
            counts[word] = counts.get(word, 0) + count
    total = sum(counts.values())
    if total == 0:
        raise ParseError(path, None, "total count is zero")
    return UnigramTable.from_counts(counts)


def load_vector_files(paths: Iterable, preprocess: PreprocessMode | str = PreprocessMode.NONE) -> WordVectorTable:
    """Load each file with ``preprocess`` applied, then concatenate in order."""
    tables = [load_vectors(p, preprocess) for p in paths]
    return concat_vocab_tables(tables)


def oov_rate(tokens: Iterable[str], table: WordVectorTable) -> float:
    n = hit = 0
    for tok in tokens:
        n += 1
        hit += tok in table.index
    return math.nan if n == 0 else 1.0 - hit / n
