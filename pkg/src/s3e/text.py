"""Whitespace tokenizer shared by every embedder, so outputs stay bit-identical."""
from __future__ import annotations

import string
from typing import List

Sentence = List[str]

_PUNCT = string.punctuation + "“”‘’«»…–—"


def tokenize(text: str, lowercase: bool = True) -> Sentence:
    """Split on whitespace, strip surrounding punctuation, drop empty pieces."""
    if lowercase:
        text = text.lower()
    out = []
    for piece in text.split():
        piece = piece.strip(_PUNCT)
        if piece:
            out.append(piece)
    return out
