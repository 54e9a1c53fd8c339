"""Paths to the small bundled fixture (80 words, d=16, 20 STS pairs)."""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path


@dataclass(frozen=True)
class ToyPaths:
    vectors: Path
    freq: Path
    sts: Path
    sentences: Path


def toy_paths() -> ToyPaths:
    root = Path(str(resources.files("s3e") / "data" / "toy"))
    return ToyPaths(root / "vectors.txt", root / "freq.txt", root / "sts.tsv", root / "sentences.txt")
