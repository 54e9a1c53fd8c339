"""Batch-size-1 inference timing and a length-doubling scaling check.

Sentences are timed in blocks (default 100) and the block time divided by
the block size, since a single embedding is close to the timer noise floor.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .core import EmbedMode, embed, residual_matrix
from .grouping import GroupModel
from .text import Sentence
from .vectors_io import UnigramTable, WordVectorTable
from .weighting import WeightConfig

log = logging.getLogger(__name__)

BENCH_SCHEMA_VERSION = 1
DEFAULT_TRIALS = 5
DEFAULT_BLOCK = 100


@dataclass
class BenchReport:
    per_sentence_ms: dict[str, float]
    n_sentences: int
    n_trials: int
    scaling_slope: float
    embed_scaling_ratio: float
    mean_tokens: float
    config_echo: dict[str, Any] = field(default_factory=dict)
    block_ms: list[float] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": BENCH_SCHEMA_VERSION,
            "per_sentence_ms": dict(self.per_sentence_ms),
            "n_sentences": self.n_sentences,
            "n_trials": self.n_trials,
            "scaling_slope": self.scaling_slope,
            "embed_scaling_ratio": self.embed_scaling_ratio,
            "mean_tokens": self.mean_tokens,
            "config_echo": dict(self.config_echo),
        }


def _time_blocks(fn: Callable[[Sentence], Any], sentences: Sequence[Sentence], block: int) -> tuple[int, list[float]]:
    """Total nanoseconds over the corpus and the per-sentence ms estimate of each block."""
    total = 0
    per_block = []
    clock = time.perf_counter_ns
    for start in range(0, len(sentences), block):
        chunk = sentences[start:start + block]
        t0 = clock()
        for s in chunk:
            fn(s)
        dt = clock() - t0
        total += dt
        per_block.append(dt / len(chunk) / 1e6)
    return total, per_block


def _length_ratio(fn: Callable[[Sentence], Any], sentences: Sequence[Sentence], trials: int, block: int) -> float:
    doubled = [list(s) + list(s) for s in sentences]
    single_ns, double_ns = [], []
    for _ in range(trials):
        # interleave so drift in machine load hits both lengths alike
        single_ns.append(_time_blocks(fn, sentences, block)[0])
        double_ns.append(_time_blocks(fn, doubled, block)[0])
    return float(np.mean(double_ns) / np.mean(single_ns))


def run_bench(sentences: Sequence[Sentence], model: GroupModel, vectors: WordVectorTable, unigram: UnigramTable,
              cfg: WeightConfig | None = None, trials: int = DEFAULT_TRIALS,
              mode: EmbedMode | str = EmbedMode.COV_PLUS_MEAN, block: int = DEFAULT_BLOCK,
              config_echo: dict[str, Any] | None = None) -> BenchReport:
    """Time ``embed`` one sentence at a time over ``trials`` passes.

    ``scaling_slope`` is time(2N)/time(N) for the residual accumulation, the
    only stage whose cost depends on sentence length; ``embed_scaling_ratio``
    is the same ratio for the full embedding, which also carries the
    length-independent covariance cost.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if not sentences:
        raise ValueError("no sentences to benchmark")
    if block < 1:
        raise ValueError("block size must be at least 1")
    cfg = cfg or WeightConfig(model.epsilon)
    mode = EmbedMode(mode)
    sentences = [list(s) for s in sentences]

    def full(s):
        return embed(s, model, vectors, unigram, cfg, mode)

    def stage(s):
        return residual_matrix(s, model, vectors, unigram, cfg)

    for s in sentences:  # warm-up, untimed
        full(s)
    total_ns = 0
    blocks: list[float] = []
    for t in range(trials):
        ns, per_block = _time_blocks(full, sentences, block)
        total_ns += ns
        blocks.extend(per_block)
        log.info("trial %d: %.4f ms/sentence", t + 1, ns / len(sentences) / 1e6)
    per_sentence = {
        "mean": total_ns / (trials * len(sentences)) / 1e6,
        "median": float(np.median(blocks)),
        "p95": float(np.percentile(blocks, 95)),
    }
    slope = _length_ratio(stage, sentences, trials, block)
    embed_ratio = _length_ratio(full, sentences, trials, block)
    echo = {"k": model.k, "dim": model.dim, "epsilon": cfg.epsilon, "mode": mode.value, "block": block,
            "trials": trials}
    echo.update(config_echo or {})
    return BenchReport(per_sentence, len(sentences), trials, slope, embed_ratio,
                       float(np.mean([len(s) for s in sentences])), echo, blocks)
