"""Frequency-based word weights, ``eps / (eps + p(w))``."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .vectors_io import UnigramTable

DEFAULT_EPSILON = 1e-3


@dataclass(frozen=True)
class WeightConfig:
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        if not (self.epsilon > 0 and np.isfinite(self.epsilon)):
            raise ValueError(f"epsilon must be a positive finite number, got {self.epsilon!r}")


def weight(p: float, cfg: WeightConfig = WeightConfig()) -> float:
    """Weight of a word with unigram probability ``p``; lies in (0, 1]."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {p!r}")
    return cfg.epsilon / (cfg.epsilon + p)


def weight_array(words: Sequence[str], unigram: UnigramTable, cfg: WeightConfig = WeightConfig()) -> np.ndarray:
    """Weights for ``words`` in order; used where every word is touched repeatedly."""
    p = np.fromiter((unigram.prob(w) for w in words), dtype=np.float64, count=len(words))
    return cfg.epsilon / (cfg.epsilon + p)
