"""Binary entity-feature vectors.

Each token yields ten 0/1 features: the six morphological bits carried in
its corpus column (root, part of speech, inflectional suffixes, derivational
suffixes, proper noun, name suffixes) followed by four word-type features
computed from the surface form (capitalized, sentence-initial, Latin
spelling, acronym).
"""

from __future__ import annotations

import string

import numpy as np

from .corpus import Sentence

FEATURE_COUNT = 10

_ASCII_LETTERS = set(string.ascii_letters)


def extract_features(sentence: Sentence, position: int) -> np.ndarray:
    """Feature vector for the token at ``position``; shape (10,), values 0/1."""
    if not 0 <= position < len(sentence):
        raise IndexError(f"position {position} out of range for sentence of length {len(sentence)}")
    token = sentence[position]
    surface = token.surface
    alpha = [c for c in surface if c.isalpha()]
    bits = np.zeros(FEATURE_COUNT, dtype=np.float64)
    bits[:6] = token.morph_bits
    bits[6] = 1.0 if surface[0].isupper() else 0.0
    bits[7] = 1.0 if position == 0 else 0.0
    bits[8] = 1.0 if all(c in _ASCII_LETTERS for c in alpha) else 0.0
    bits[9] = 1.0 if len(surface) >= 2 and all(c.isupper() for c in alpha) else 0.0
    return bits


def window_features(sentence: Sentence, position: int, window: int) -> np.ndarray:
    """Concatenated features for a token window; out-of-range slots are zeros."""
    half = window // 2
    out = np.zeros(FEATURE_COUNT * window, dtype=np.float64)
    for slot, offset in enumerate(range(-half, half + 1)):
        j = position + offset
        if 0 <= j < len(sentence):
            out[slot * FEATURE_COUNT : (slot + 1) * FEATURE_COUNT] = extract_features(sentence, j)
    return out
