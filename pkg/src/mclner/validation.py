"""Input checks shared by the estimator and the CLI."""

from __future__ import annotations

from .corpus import CorpusError, Sentence, validate_iob


def check_sentences(X) -> list[Sentence]:
    """Materialize and sanity-check a corpus of Sentence objects."""
    sentences = list(X)
    if not sentences:
        raise ValueError("expected at least one sentence")
    for i, sentence in enumerate(sentences):
        if not isinstance(sentence, Sentence):
            raise TypeError(f"item {i} is {type(sentence).__name__}, "
                            f"expected Sentence")
    return sentences


def attach_tags(X, y) -> list[Sentence]:
    """Zip tag sequences onto sentences, validating lengths."""
    sentences = check_sentences(X)
    tags = list(y)
    if len(tags) != len(sentences):
        raise ValueError(f"got {len(tags)} tag sequences for "
                         f"{len(sentences)} sentences")
    return [s.with_tags(t) for s, t in zip(sentences, tags)]


def check_tagged(X, name: str = "corpus") -> list[Sentence]:
    """Require gold tags on every sentence and IOB-valid sequences."""
    sentences = check_sentences(X)
    for i, sentence in enumerate(sentences):
        if not sentence.has_tags:
            raise CorpusError(f"{name} sentence {i} is missing gold tags")
        violation = validate_iob(sentence.tags())
        if violation is not None:
            pos, reason = violation
            raise CorpusError(f"{name} sentence {i}, token {pos}: {reason}")
    return sentences
