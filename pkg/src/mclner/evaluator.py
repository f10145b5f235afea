"""Chunk-level precision/recall/F1 with conlleval semantics.

A chunk is a maximal IOB segment; a predicted chunk counts as correct
only when its type and both boundaries match a gold chunk.  Like the
original conlleval script, an I-X token that does not continue a chunk
of type X is tolerated and treated as the start of a new chunk.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .corpus import RESERVED_SYMBOLS, Sentence, split_tag
from .embeddings import EmbeddingTable


@dataclass(frozen=True)
class ChunkSpan:
    """Entity span; start inclusive, end exclusive."""

    type: str
    start: int
    end: int


def extract_chunks(tags) -> list[ChunkSpan]:
    """Maximal entity spans in one sentence's tag sequence."""
    tags = list(tags)
    chunks = []
    open_type = None
    open_start = 0
    for i, tag in enumerate(tags):
        parsed = split_tag(tag)
        if parsed is None:
            raise ValueError(f"malformed tag {tag!r} at position {i}")
        prefix, etype = parsed
        continues = prefix == "I" and open_type == etype
        if open_type is not None and not continues:
            chunks.append(ChunkSpan(open_type, open_start, i))
            open_type = None
        if prefix == "B" or (prefix == "I" and not continues):
            open_type = etype
            open_start = i
    if open_type is not None:
        chunks.append(ChunkSpan(open_type, open_start, len(tags)))
    return chunks


def _prf(correct: int, predicted: int, gold: int) -> tuple[float, float, float]:
    precision = 100.0 * correct / predicted if predicted else 0.0
    recall = 100.0 * correct / gold if gold else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


@dataclass
class TypeScore:
    gold: int = 0
    predicted: int = 0
    correct: int = 0

    @property
    def precision(self) -> float:
        return _prf(self.correct, self.predicted, self.gold)[0]

    @property
    def recall(self) -> float:
        return _prf(self.correct, self.predicted, self.gold)[1]

    @property
    def f1(self) -> float:
        return _prf(self.correct, self.predicted, self.gold)[2]


@dataclass
class EvalReport:
    """Overall and per-type chunk scores plus token accuracy."""

    overall: TypeScore = field(default_factory=TypeScore)
    per_type: dict[str, TypeScore] = field(default_factory=dict)
    tokens: int = 0
    correct_tokens: int = 0

    @property
    def precision(self) -> float:
        return self.overall.precision

    @property
    def recall(self) -> float:
        return self.overall.recall

    @property
    def f1(self) -> float:
        return self.overall.f1

    @property
    def accuracy(self) -> float:
        return 100.0 * self.correct_tokens / self.tokens if self.tokens else 0.0


def evaluate(gold, predictions) -> EvalReport:
    """Micro-averaged chunk scores over aligned tag sequences.

    ``gold`` holds tagged sentences (or plain tag sequences);
    ``predictions`` holds one tag sequence per sentence.
    """
    gold = list(gold)
    predictions = list(predictions)
    if len(gold) != len(predictions):
        raise ValueError(f"got {len(predictions)} predictions for {len(gold)} sentences")
    report = EvalReport()
    for si, (g, p) in enumerate(zip(gold, predictions)):
        g_tags = list(g.tags()) if isinstance(g, Sentence) else list(g)
        p_tags = list(p)
        if len(g_tags) != len(p_tags):
            raise ValueError(f"sentence {si}: {len(p_tags)} predicted tags "
                             f"for {len(g_tags)} tokens")
        report.tokens += len(g_tags)
        report.correct_tokens += sum(a == b for a, b in zip(g_tags, p_tags))
        g_chunks = set(extract_chunks(g_tags))
        p_chunks = set(extract_chunks(p_tags))
        for chunk in g_chunks:
            report.overall.gold += 1
            report.per_type.setdefault(chunk.type, TypeScore()).gold += 1
        for chunk in p_chunks:
            report.overall.predicted += 1
            report.per_type.setdefault(chunk.type, TypeScore()).predicted += 1
        for chunk in g_chunks & p_chunks:
            report.overall.correct += 1
            report.per_type[chunk.type].correct += 1
    return report


def format_report(report: EvalReport, machine: bool = False) -> str:
    """conlleval-like text layout, or a TSV variant for scripts."""
    rows = [(name, report.per_type[name]) for name in sorted(report.per_type)]
    rows.append(("Overall", report.overall))
    if machine:
        lines = ["type\tprecision\trecall\tf1\tgold\tpredicted\tcorrect"]
        for name, score in rows:
            lines.append(f"{name}\t{score.precision:.2f}\t{score.recall:.2f}"
                         f"\t{score.f1:.2f}\t{score.gold}\t{score.predicted}"
                         f"\t{score.correct}")
        lines.append(f"accuracy\t{report.accuracy:.2f}\t\t\t{report.tokens}\t\t"
                     f"{report.correct_tokens}")
        return "\n".join(lines)
    lines = [f"processed {report.tokens} tokens; "
             f"found: {report.overall.predicted} chunks; "
             f"correct: {report.overall.correct}.",
             f"accuracy: {report.accuracy:6.2f}%; "
             f"precision: {report.precision:6.2f}%; "
             f"recall: {report.recall:6.2f}%; "
             f"FB1: {report.f1:6.2f}"]
    for name, score in rows[:-1]:
        lines.append(f"{name:>17}: precision: {score.precision:6.2f}%; "
                     f"recall: {score.recall:6.2f}%; FB1: {score.f1:6.2f}  "
                     f"{score.predicted}")
    return "\n".join(lines)


def nearest_neighbors(table: EmbeddingTable, index: dict[str, int], query: str,
                      k: int = 10) -> list[tuple[str, float]]:
    """Top-k tokens by cosine similarity to the query's column.

    The query itself and the reserved symbols are never returned;
    zero-norm columns are skipped with a warning.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if query not in index:
        raise KeyError(f"query {query!r} is not in the vocabulary")
    qvec = table.matrix[:, index[query]]
    qnorm = np.linalg.norm(qvec)
    if qnorm == 0.0:
        warnings.warn(f"query {query!r} has a zero-norm embedding")
        return []
    reserved = set(RESERVED_SYMBOLS)
    scored = []
    for token, col in index.items():
        if token == query or token in reserved:
            continue
        vec = table.matrix[:, col]
        norm = np.linalg.norm(vec)
        if norm == 0.0:
            warnings.warn(f"skipping zero-norm embedding for {token!r}")
            continue
        scored.append((token, float(qvec @ vec / (qnorm * norm))))
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return scored[:k]
