"""Column-format corpus reading/writing, IOB validation, vocabularies, splits.

Corpus files are UTF-8 text with one token per line, whitespace-separated
columns, and a blank line between sentences.  Recognized columns are
``surface``, ``root``, ``morph`` (a string of six 0/1 digits) and ``tag``;
``_`` skips a column.  With ``schema="auto"`` the column layout is inferred
per line from the column count:

    1 column   SURFACE
    2 columns  SURFACE TAG
    3 columns  SURFACE ROOT TAG
    4 columns  SURFACE ROOT MORPH TAG
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

MORPH_BIT_COUNT = 6

OOV_SYMBOL = "<unk>"
BOS_SYMBOL = "<s>"
EOS_SYMBOL = "</s>"
RESERVED_SYMBOLS = (OOV_SYMBOL, BOS_SYMBOL, EOS_SYMBOL)
OOV_ID, BOS_ID, EOS_ID = 0, 1, 2


class CorpusError(ValueError):
    """Malformed corpus or embedding file; carries a line number when known."""


@dataclass(frozen=True)
class Token:
    """One token: surface form, root/stem, morphological bits, optional gold tag."""

    surface: str
    root: str
    morph_bits: tuple[int, ...] = (0,) * MORPH_BIT_COUNT
    gold_tag: str | None = None

    def __post_init__(self):
        if not self.surface:
            raise ValueError("token surface must be non-empty")
        if not self.root:
            raise ValueError("token root must be non-empty")
        object.__setattr__(self, "morph_bits", tuple(self.morph_bits))
        if len(self.morph_bits) != MORPH_BIT_COUNT:
            raise ValueError(
                f"morph_bits must have {MORPH_BIT_COUNT} entries, got {len(self.morph_bits)}"
            )
        if any(b not in (0, 1) for b in self.morph_bits):
            raise ValueError("morph_bits entries must be 0 or 1")


@dataclass(frozen=True)
class Sentence:
    """A non-empty ordered sequence of tokens."""

    tokens: tuple[Token, ...]

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if not self.tokens:
            raise ValueError("sentence must contain at least one token")

    def __len__(self):
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def __getitem__(self, i):
        return self.tokens[i]

    @property
    def has_tags(self) -> bool:
        return all(t.gold_tag is not None for t in self.tokens)

    def tags(self) -> list[str]:
        if not self.has_tags:
            raise ValueError("sentence has untagged tokens")
        return [t.gold_tag for t in self.tokens]

    def with_tags(self, tags) -> "Sentence":
        """Return a copy with ``tags`` as the gold tags."""
        if len(tags) != len(self.tokens):
            raise ValueError(f"expected {len(self.tokens)} tags, got {len(tags)}")
        return Sentence(
            tuple(
                Token(t.surface, t.root, t.morph_bits, tag)
                for t, tag in zip(self.tokens, tags)
            )
        )


KNOWN_COLUMNS = ("surface", "root", "morph", "tag", "_")
_AUTO_LAYOUTS = {
    1: ("surface",),
    2: ("surface", "tag"),
    3: ("surface", "root", "tag"),
    4: ("surface", "root", "morph", "tag"),
}


def parse_schema(schema: str) -> tuple[str, ...]:
    """Parse a ``--schema`` string like ``"surface,root,morph,tag"``."""
    cols = tuple(c.strip() for c in schema.split(","))
    for c in cols:
        if c not in KNOWN_COLUMNS:
            raise CorpusError(f"unknown schema column {c!r} (known: {', '.join(KNOWN_COLUMNS)})")
    if cols.count("surface") != 1:
        raise CorpusError("schema must name 'surface' exactly once")
    for c in ("root", "morph", "tag"):
        if cols.count(c) > 1:
            raise CorpusError(f"schema names {c!r} more than once")
    return cols


def _parse_morph(text: str, lineno: int) -> tuple[int, ...]:
    if len(text) != MORPH_BIT_COUNT or any(ch not in "01" for ch in text):
        raise CorpusError(
            f"line {lineno}: morph column must be {MORPH_BIT_COUNT} binary digits, got {text!r}"
        )
    return tuple(int(ch) for ch in text)


def _token_from_fields(fields, layout, lineno: int) -> Token:
    values = dict(zip(layout, fields))
    surface = values["surface"]
    root = values.get("root") or surface.lower()
    morph = (
        _parse_morph(values["morph"], lineno)
        if "morph" in values
        else (0,) * MORPH_BIT_COUNT
    )
    return Token(surface, root, morph, values.get("tag"))


def read_corpus(path, schema: str = "auto", iob1: bool = False) -> list[Sentence]:
    """Read a corpus file into sentences.

    Args:
        path: file to read (UTF-8).
        schema: ``"auto"`` or an explicit column list, see module docstring.
        iob1: treat tag columns as IOB1 and convert them to IOB2 on read.

    Raises:
        CorpusError: on malformed lines, with the offending line number.
    """
    layout = None if schema == "auto" else parse_schema(schema)
    sentences: list[Sentence] = []
    current: list[Token] = []
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            fields = raw.split()
            if not fields:
                if current:
                    sentences.append(Sentence(tuple(current)))
                    current = []
                continue
            if layout is None:
                line_layout = _AUTO_LAYOUTS.get(len(fields))
                if line_layout is None:
                    raise CorpusError(
                        f"line {lineno}: expected 1-4 columns, got {len(fields)}"
                    )
            else:
                line_layout = layout
                if len(fields) != len(layout):
                    raise CorpusError(
                        f"line {lineno}: expected {len(layout)} columns, got {len(fields)}"
                    )
            try:
                current.append(_token_from_fields(fields, line_layout, lineno))
            except CorpusError:
                raise
            except ValueError as exc:
                raise CorpusError(f"line {lineno}: {exc}") from exc
    if current:
        sentences.append(Sentence(tuple(current)))
    if iob1:
        sentences = [
            s.with_tags(iob1_to_iob2(s.tags())) if s.has_tags else s for s in sentences
        ]
    return sentences


def format_corpus(sentences) -> str:
    """Render sentences back to the column format (surface root morph [tag])."""
    blocks = []
    for sentence in sentences:
        lines = []
        for token in sentence:
            cols = [token.surface, token.root, "".join(str(b) for b in token.morph_bits)]
            if token.gold_tag is not None:
                cols.append(token.gold_tag)
            lines.append(" ".join(cols))
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + ("\n" if blocks else "")


def write_corpus(sentences, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(format_corpus(sentences))


def split_tag(tag: str):
    """Split ``"B-LOC"`` into ``("B", "LOC")``; ``"O"`` becomes ``("O", None)``.

    Returns None for strings that are not syntactically valid tags.
    """
    if tag == "O":
        return ("O", None)
    if len(tag) > 2 and tag[1] == "-" and tag[0] in "BI":
        return (tag[0], tag[2:])
    return None


def validate_iob(tags) -> tuple[int, str] | None:
    """Check a tag sequence against the IOB2 scheme.

    Returns None when valid, otherwise ``(position, reason)`` for the first
    violation.  An I- tag must continue a chunk of the same type.
    """
    prev_kind, prev_type = "O", None
    for i, tag in enumerate(tags):
        parts = split_tag(tag)
        if parts is None:
            return (i, f"malformed tag {tag!r}")
        kind, etype = parts
        if kind == "I" and not (prev_kind in ("B", "I") and prev_type == etype):
            return (i, f"{tag} does not continue a {etype} chunk")
        prev_kind, prev_type = kind, etype
    return None


def iob1_to_iob2(tags) -> list[str]:
    """Rewrite chunk-initial I- tags as B- tags (deterministic canonicalization)."""
    out = []
    prev_kind, prev_type = "O", None
    for tag in tags:
        parts = split_tag(tag)
        if parts is None:
            raise ValueError(f"malformed tag {tag!r}")
        kind, etype = parts
        if kind == "I" and not (prev_kind in ("B", "I") and prev_type == etype):
            out.append(f"B-{etype}")
        else:
            out.append(tag)
        prev_kind, prev_type = kind, etype
    return out


@dataclass
class Vocabulary:
    """Dense string-to-index maps for words, roots and tags.

    Ids 0, 1 and 2 of the word and root maps are the out-of-vocabulary
    symbol and the sentence start/end padding symbols.  Lookups of unknown
    strings return the OOV id instead of failing.  Tag ids are dense over
    the observed tag set; ``start_tag_id`` is one past the last real tag.
    """

    word_index: dict[str, int] = field(default_factory=dict)
    root_index: dict[str, int] = field(default_factory=dict)
    tag_index: dict[str, int] = field(default_factory=dict)
    lowercase: bool = True

    @property
    def n_words(self) -> int:
        return len(self.word_index)

    @property
    def n_roots(self) -> int:
        return len(self.root_index)

    @property
    def n_tags(self) -> int:
        return len(self.tag_index)

    @property
    def start_tag_id(self) -> int:
        return len(self.tag_index)

    def word_id(self, surface: str) -> int:
        key = surface.lower() if self.lowercase else surface
        return self.word_index.get(key, OOV_ID)

    def root_id(self, root: str) -> int:
        return self.root_index.get(root, OOV_ID)

    def tag_id(self, tag: str) -> int:
        """Id of a known tag; raises KeyError for tags outside the tag set."""
        return self.tag_index[tag]

    @property
    def tag_names(self) -> list[str]:
        return list(self.tag_index)

    def words(self) -> list[str]:
        return list(self.word_index)

    def roots(self) -> list[str]:
        return list(self.root_index)


def build_vocabulary(train, lowercase_words: bool = True, min_count: int = 1) -> Vocabulary:
    """Build word/root/tag maps from training sentences.

    Surface words are lowercased (when ``lowercase_words``) and dropped to
    OOV below ``min_count``; roots are kept in their original form.  The tag
    set is the observed gold tags plus "O", sorted.
    """
    if not train:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    word_counts: Counter[str] = Counter()
    word_order: list[str] = []
    root_order: list[str] = []
    seen_roots = set()
    tags = {"O"}
    for sentence in train:
        for token in sentence:
            key = token.surface.lower() if lowercase_words else token.surface
            if key not in word_counts:
                word_order.append(key)
            word_counts[key] += 1
            if token.root not in seen_roots:
                seen_roots.add(token.root)
                root_order.append(token.root)
            if token.gold_tag is not None:
                tags.add(token.gold_tag)

    word_index = {sym: i for i, sym in enumerate(RESERVED_SYMBOLS)}
    for word in word_order:
        if word_counts[word] >= min_count and word not in word_index:
            word_index[word] = len(word_index)
    root_index = {sym: i for i, sym in enumerate(RESERVED_SYMBOLS)}
    for root in root_order:
        if root not in root_index:
            root_index[root] = len(root_index)
    tag_index = {tag: i for i, tag in enumerate(sorted(tags))}
    return Vocabulary(word_index, root_index, tag_index, lowercase=lowercase_words)


def split_corpus(sentences, ratios=(0.8, 0.1, 0.1), seed: int = 0):
    """Shuffle and partition sentences into (train, dev, test).

    Split sizes are exact under largest-remainder rounding, and the
    partition is deterministic for a given seed.
    """
    if len(ratios) != 3:
        raise ValueError("ratios must have exactly three entries")
    if not math.isclose(sum(ratios), 1.0, abs_tol=1e-9):
        raise ValueError(f"ratios must sum to 1, got {sum(ratios)}")
    n = len(sentences)
    if n < 3:
        raise ValueError(f"need at least 3 sentences to split, got {n}")

    raw = [r * n for r in ratios]
    sizes = [int(math.floor(x)) for x in raw]
    leftover = n - sum(sizes)
    by_remainder = sorted(range(3), key=lambda i: (-(raw[i] - sizes[i]), i))
    for i in range(leftover):
        sizes[by_remainder[i]] += 1

    order = np.random.default_rng(seed).permutation(n)
    shuffled = [sentences[i] for i in order]
    train = shuffled[: sizes[0]]
    dev = shuffled[sizes[0] : sizes[0] + sizes[1]]
    test = shuffled[sizes[0] + sizes[1] :]
    return train, dev, test
