"""Unsupervised STS evaluation: cosine similarity per pair, Pearson r against gold."""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from .core import SentenceEmbedding
from .text import Sentence, tokenize

log = logging.getLogger(__name__)

REPORT_SCHEMA_VERSION = 1


class UndefinedCorrelationError(ValueError):
    pass


@dataclass(frozen=True)
class StsPair:
    sent_a: Sentence
    sent_b: Sentence
    gold: float
    text_a: str = ""
    text_b: str = ""


@dataclass
class EvalReport:
    dataset_name: str
    n_pairs: int
    pearson: float
    n_zero_embeddings: int
    config_echo: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {"schema_version": REPORT_SCHEMA_VERSION, **asdict(self)}


def load_sts(path, lowercase: bool = True) -> list[StsPair]:
    """Read STS pairs.

    Rows with 7 or more tab-separated columns follow the STS-Benchmark layout
    (score, sentence1, sentence2 in columns 5-7); 3-column rows are
    ``score, sentence1, sentence2``.
    """
    path = Path(path)
    pairs = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            cols = line.split("\t")
            if len(cols) >= 7:
                score, a, b = cols[4], cols[5], cols[6]
            elif len(cols) == 3:
                score, a, b = cols
            else:
                raise ValueError(f"{path}:{lineno}: expected 3 or at least 7 tab-separated columns, got {len(cols)}")
            try:
                gold = float(score)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: score {score!r} is not a number") from None
            if not math.isfinite(gold):
                raise ValueError(f"{path}:{lineno}: non-finite score")
            pairs.append(StsPair(tokenize(a, lowercase), tokenize(b, lowercase), gold, a, b))
    if not pairs:
        raise ValueError(f"{path}: no sentence pairs")
    return pairs


def cosine(u, v) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"length mismatch: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("pearson needs two 1-D sequences of equal length")
    if x.size < 2:
        raise ValueError("pearson needs at least two points")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedCorrelationError("correlation undefined: one of the inputs has zero variance")
    return float(np.clip(np.dot(dx, dy) / math.sqrt(sxx * syy), -1.0, 1.0))


def _as_vector(e) -> np.ndarray:
    return e.values if isinstance(e, SentenceEmbedding) else np.asarray(e, dtype=np.float64)


def score_pairs(pairs: Sequence[StsPair], embedder: Callable[[Sentence], Any]) -> tuple[np.ndarray, int]:
    """Cosine score per pair plus the number of pairs with a zero embedding on either side."""
    scores = np.empty(len(pairs))
    zero = 0
    cache: dict[tuple[str, ...], np.ndarray] = {}

    def vec(s):
        key = tuple(s)
        if key not in cache:
            cache[key] = _as_vector(embedder(s))
        return cache[key]

    for i, p in enumerate(pairs):
        a, b = vec(p.sent_a), vec(p.sent_b)
        if not a.any() or not b.any():
            zero += 1
        scores[i] = cosine(a, b)
    return scores, zero


def evaluate(pairs: Sequence[StsPair], embedder: Callable[[Sentence], Any], dataset_name: str = "sts",
             config_echo: dict[str, Any] | None = None) -> EvalReport:
    if not pairs:
        raise ValueError("no pairs to evaluate")
    if hasattr(embedder, "fit"):
        embedder.fit([s for p in pairs for s in (p.sent_a, p.sent_b)])
    scores, zero = score_pairs(pairs, embedder)
    r = pearson(scores, [p.gold for p in pairs])
    if zero:
        log.warning("%s: %d of %d pairs have a zero embedding on at least one side", dataset_name, zero, len(pairs))
    return EvalReport(dataset_name, len(pairs), r, zero, dict(config_echo or {}))


def parse_k_sweep(value: str) -> list[int]:
    """``"5:60:5"`` -> [5, 10, ..., 60] (inclusive); a comma list is also accepted."""
    value = value.strip()
    if "," in value or ":" not in value:
        ks = [int(x) for x in value.split(",") if x.strip()]
    else:
        parts = [int(x) for x in value.split(":")]
        if len(parts) == 2:
            parts.append(1)
        if len(parts) != 3 or parts[2] <= 0:
            raise ValueError(f"bad K sweep {value!r}; expected start:stop:step")
        start, stop, step = parts
        ks = list(range(start, stop + 1, step))
    if not ks or any(k <= 0 for k in ks):
        raise ValueError(f"bad K sweep {value!r}: values must be positive")
    return ks


def sweep_k(pairs: Sequence[StsPair], ks: Iterable[int], make_embedder: Callable[[int], Callable[[Sentence], Any]],
            dataset_name: str = "sts", config_echo: dict[str, Any] | None = None) -> list[EvalReport]:
    """One report per K; ``make_embedder(k)`` builds the embedder for that K."""
    reports = []
    for k in ks:
        echo = dict(config_echo or {})
        echo["k"] = k
        rep = evaluate(pairs, make_embedder(k), dataset_name, echo)
        log.info("K=%d pearson=%.4f", k, rep.pearson)
        reports.append(rep)
    return reports
