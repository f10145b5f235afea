"""Lookup tables and construction of the concatenated network input.

An embedding table stores one column per dictionary entry.  The input for a
token position is the concatenation of the word embeddings in a window
around it (boundary slots use the start/end padding columns), optionally
the current root embedding, optionally the previous-tag embedding, and
optionally the raw feature bits for every window slot.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import BOS_ID, EOS_ID, RESERVED_SYMBOLS, CorpusError, Sentence, Vocabulary
from .features import FEATURE_COUNT, window_features

INIT_SCALE = 0.01


class EmbeddingTable:
    """Dense matrix of shape (dim, size) whose columns are embeddings."""

    def __init__(self, dim: int, size: int, rng: np.random.Generator | None = None):
        if dim < 1 or size < 1:
            raise ValueError("embedding table needs dim >= 1 and size >= 1")
        if rng is None:
            self.matrix = np.zeros((dim, size), dtype=np.float64)
        else:
            self.matrix = rng.uniform(-INIT_SCALE, INIT_SCALE, size=(dim, size))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def size(self) -> int:
        return self.matrix.shape[1]

    def lookup(self, index: int) -> np.ndarray:
        """Column ``index`` as a view into the table (writes flow back)."""
        if not 0 <= index < self.size:
            raise IndexError(f"embedding index {index} out of range [0, {self.size})")
        return self.matrix[:, index]


@dataclass
class WindowConfig:
    """Shape of the concatenated input vector."""

    window: int = 3
    word_dim: int = 50
    root_dim: int = 50
    tag_dim: int = 50
    use_root: bool = False
    use_tag_embedding: bool = False
    use_features: bool = False

    def __post_init__(self):
        if self.window < 1 or self.window % 2 == 0:
            raise ValueError(f"window must be odd and >= 1, got {self.window}")
        for name in ("word_dim", "root_dim", "tag_dim"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")

    @property
    def input_size(self) -> int:
        size = self.window * self.word_dim
        if self.use_root:
            size += self.root_dim
        if self.use_tag_embedding:
            size += self.tag_dim
        if self.use_features:
            size += FEATURE_COUNT * self.window
        return size


class InputBuilder:
    """Builds input vectors for token positions and routes gradients back.

    Holds the vocabulary, the active embedding tables and the slice layout
    of the concatenated vector.
    """

    def __init__(
        self,
        vocab: Vocabulary,
        config: WindowConfig,
        word_table: EmbeddingTable,
        root_table: EmbeddingTable | None = None,
        tag_table: EmbeddingTable | None = None,
    ):
        if word_table.dim != config.word_dim or word_table.size != vocab.n_words:
            raise ValueError("word table shape is inconsistent with vocabulary/config")
        if config.use_root:
            if root_table is None:
                raise ValueError("config enables root embeddings but no root table given")
            if root_table.dim != config.root_dim or root_table.size != vocab.n_roots:
                raise ValueError("root table shape is inconsistent with vocabulary/config")
        if config.use_tag_embedding:
            if tag_table is None:
                raise ValueError("config enables tag embeddings but no tag table given")
            # one extra column holds the sentence-start tag
            if tag_table.dim != config.tag_dim or tag_table.size != vocab.n_tags + 1:
                raise ValueError("tag table shape is inconsistent with vocabulary/config")
        self.vocab = vocab
        self.config = config
        self.word_table = word_table
        self.root_table = root_table if config.use_root else None
        self.tag_table = tag_table if config.use_tag_embedding else None

        w, d = config.window, config.word_dim
        offset = w * d
        self.word_span = offset
        self.root_slice = None
        self.tag_slice = None
        self.feature_slice = None
        if config.use_root:
            self.root_slice = slice(offset, offset + config.root_dim)
            offset += config.root_dim
        if config.use_tag_embedding:
            self.tag_slice = slice(offset, offset + config.tag_dim)
            offset += config.tag_dim
        if config.use_features:
            self.feature_slice = slice(offset, offset + FEATURE_COUNT * w)
            offset += FEATURE_COUNT * w
        self.input_size = offset

    def window_word_ids(self, sentence: Sentence, position: int) -> list[int]:
        """Word ids for the window slots, padded at sentence boundaries."""
        half = self.config.window // 2
        ids = []
        for offset in range(-half, half + 1):
            j = position + offset
            if j < 0:
                ids.append(BOS_ID)
            elif j >= len(sentence):
                ids.append(EOS_ID)
            else:
                ids.append(self.vocab.word_id(sentence[j].surface))
        return ids

    def build(self, sentence: Sentence, position: int, prev_tag: int | None = None) -> np.ndarray:
        """Input vector for one position; ``prev_tag`` feeds the tag slice."""
        if not 0 <= position < len(sentence):
            raise IndexError(f"position {position} out of range")
        out = np.empty(self.input_size, dtype=np.float64)
        d = self.config.word_dim
        for slot, idx in enumerate(self.window_word_ids(sentence, position)):
            out[slot * d : (slot + 1) * d] = self.word_table.matrix[:, idx]
        if self.root_slice is not None:
            rid = self.vocab.root_id(sentence[position].root)
            out[self.root_slice] = self.root_table.matrix[:, rid]
        if self.tag_slice is not None:
            if prev_tag is None:
                raise ValueError("prev_tag is required when tag embeddings are enabled")
            out[self.tag_slice] = self.tag_table.lookup(prev_tag)
        if self.feature_slice is not None:
            out[self.feature_slice] = window_features(sentence, position, self.config.window)
        return out

    def build_rows(self, sentence: Sentence, prev_tags=None) -> np.ndarray:
        """Stack of input vectors for all positions; shape (len, input_size)."""
        n = len(sentence)
        if self.tag_slice is not None and prev_tags is None:
            raise ValueError("prev_tags is required when tag embeddings are enabled")
        rows = np.empty((n, self.input_size), dtype=np.float64)
        for i in range(n):
            prev = prev_tags[i] if prev_tags is not None else None
            rows[i] = self.build(sentence, i, prev)
        return rows

    def fill_tag_slice(self, rows: np.ndarray, tag_id: int) -> None:
        """Overwrite the tag-embedding slice of prebuilt rows in place."""
        rows[:, self.tag_slice] = self.tag_table.lookup(tag_id)

    def scatter_gradients(
        self,
        sentence: Sentence,
        input_grads: np.ndarray,
        prev_tags,
        word_sink: dict,
        root_sink: dict | None,
        tag_sink: dict | None,
    ) -> None:
        """Accumulate per-position input gradients into per-column sinks.

        The feature slice is skipped: feature bits are constants.
        """
        d = self.config.word_dim
        for i in range(len(sentence)):
            grad = input_grads[i]
            for slot, idx in enumerate(self.window_word_ids(sentence, i)):
                piece = grad[slot * d : (slot + 1) * d]
                if idx in word_sink:
                    word_sink[idx] += piece
                else:
                    word_sink[idx] = piece.copy()
            if self.root_slice is not None:
                rid = self.vocab.root_id(sentence[i].root)
                piece = grad[self.root_slice]
                if rid in root_sink:
                    root_sink[rid] += piece
                else:
                    root_sink[rid] = piece.copy()
            if self.tag_slice is not None:
                tid = prev_tags[i]
                piece = grad[self.tag_slice]
                if tid in tag_sink:
                    tag_sink[tid] += piece
                else:
                    tag_sink[tid] = piece.copy()


@dataclass
class CoverageReport:
    """Outcome of loading pretrained vectors into a table."""

    found: int
    missing: int
    skipped: int


def load_pretrained(path, table: EmbeddingTable, index: dict[str, int], lowercase: bool = False) -> CoverageReport:
    """Load word2vec-text vectors into ``table`` for tokens present in ``index``.

    The file starts with a ``<count> <dim>`` header; each following line is
    a token and ``dim`` floats.  Columns for covered tokens are overwritten;
    everything else keeps its current value.
    """
    reserved = set(RESERVED_SYMBOLS)
    covered: set[int] = set()
    skipped = 0
    with open(path, encoding="utf-8") as handle:
        header = handle.readline().split()
        if len(header) != 2:
            raise CorpusError("line 1: expected '<count> <dim>' header")
        try:
            _, dim = int(header[0]), int(header[1])
        except ValueError as exc:
            raise CorpusError(f"line 1: bad header: {exc}") from exc
        if dim != table.dim:
            raise CorpusError(
                f"embedding dimension mismatch: file has {dim}, table has {table.dim}"
            )
        for lineno, raw in enumerate(handle, start=2):
            parts = raw.rstrip("\n").split(" ")
            parts = [p for p in parts if p]
            if not parts:
                continue
            token, values = parts[0], parts[1:]
            if len(values) != dim:
                raise CorpusError(
                    f"line {lineno}: expected {dim} values, got {len(values)}"
                )
            key = token.lower() if lowercase else token
            if key in reserved:
                skipped += 1
                continue
            idx = index.get(key)
            if idx is None:
                skipped += 1
                continue
            try:
                table.matrix[:, idx] = [float(v) for v in values]
            except ValueError as exc:
                raise CorpusError(f"line {lineno}: bad float: {exc}") from exc
            covered.add(idx)
    missing = len(index) - len(reserved.intersection(index)) - len(covered)
    return CoverageReport(found=len(covered), missing=missing, skipped=skipped)


def save_embeddings(path, table: EmbeddingTable, index: dict[str, int]) -> None:
    """Write non-reserved columns in word2vec text format (round-trip exact)."""
    reserved = set(RESERVED_SYMBOLS)
    entries = [(tok, i) for tok, i in index.items() if tok not in reserved]
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(f"{len(entries)} {table.dim}\n")
        for tok, i in entries:
            vec = " ".join("%.17g" % v for v in table.matrix[:, i])
            handle.write(f"{tok} {vec}\n")
