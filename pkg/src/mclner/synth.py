"""Deterministic synthetic agglutinative corpora.

Tokens are a stem plus a chain of suffixes.  Stems are two or three
back-vowel syllables; suffixes are short front-vowel units, so every
surface form decomposes into exactly one (stem, suffix chain) pair and
surface vocabulary grows combinatorially while the root vocabulary
stays fixed.  Entity names come from disjoint gazetteers (capitalized
stems) and inflect like any other token.

The same seed always produces the same corpus, token for token.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .corpus import CorpusError, Sentence, Token, split_corpus

_CONSONANTS = "bdgjklmnqrst"
_BACK_VOWELS = "aou"
_FRONT_VOWELS = "ei"

ENTITY_TYPES = ("LOC", "ORG", "PER")


@dataclass
class SynthConfig:
    n_roots: int = 120
    n_suffixes: int = 12
    max_suffix_chain: int = 2
    n_loc: int = 20
    n_org: int = 15
    n_per: int = 20
    n_sentences: int = 1000
    min_length: int = 5
    max_length: int = 12
    entity_density: float = 0.15
    seed: int = 0

    def __post_init__(self):
        if self.n_roots < 1:
            raise ValueError("n_roots must be >= 1")
        for name in ("n_suffixes", "max_suffix_chain", "n_loc", "n_org", "n_per"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.n_sentences < 1:
            raise ValueError("n_sentences must be >= 1")
        if not 1 <= self.min_length <= self.max_length:
            raise ValueError("need 1 <= min_length <= max_length")
        if not 0.0 < self.entity_density < 1.0:
            raise ValueError("entity_density must be in (0, 1)")


@dataclass
class SynthStats:
    sentences: int = 0
    tokens: int = 0
    surface_types: int = 0
    root_types: int = 0
    entities: dict[str, int] = field(default_factory=dict)

    @property
    def type_token_ratio(self) -> float:
        return self.surface_types / self.tokens if self.tokens else 0.0

    def summary(self) -> str:
        ents = " ".join(f"{t}={self.entities.get(t, 0)}" for t in ENTITY_TYPES)
        return (f"sentences={self.sentences} tokens={self.tokens} "
                f"surface_types={self.surface_types} root_types={self.root_types} "
                f"type_token_ratio={self.type_token_ratio:.4f} {ents}")


@dataclass
class SynthCorpus:
    train: list[Sentence]
    dev: list[Sentence]
    test: list[Sentence]
    stats: SynthStats


def _stem_pool(rng: random.Random, need: int) -> list[str]:
    """Shuffled pool of unique stems, smallest forms first."""
    syllables = [c + v for c in _CONSONANTS for v in _BACK_VOWELS]
    pool = ["".join(p) for p in itertools.product(syllables, repeat=2)]
    rng.shuffle(pool)
    if need > len(pool):
        extra = ["".join(p) for p in itertools.product(syllables, repeat=3)]
        rng.shuffle(extra)
        pool += extra
    if need > len(pool):
        raise CorpusError(
            f"requested lexicon of {need} stems exceeds the derivable "
            f"surface-form space ({len(pool)})")
    return pool


def _suffix_pool(rng: random.Random, need: int) -> list[str]:
    short = [c + v for c in _CONSONANTS for v in _FRONT_VOWELS]
    long = [s + c for s in short for c in _CONSONANTS]
    pool = short + long
    if need > len(pool):
        raise CorpusError(
            f"requested {need} suffixes but only {len(pool)} are derivable")
    rng.shuffle(pool)
    return pool[:need]


def _build_lexicon(rng: random.Random, cfg: SynthConfig):
    """Roots, suffixes and gazetteer entries from disjoint stem sets."""
    worst_case = cfg.n_roots + cfg.n_loc + 2 * cfg.n_org + 2 * cfg.n_per
    stems = iter(_stem_pool(rng, worst_case))
    roots = [next(stems) for _ in range(cfg.n_roots)]
    suffixes = _suffix_pool(rng, cfg.n_suffixes)
    gazetteer: dict[str, list[tuple[str, ...]]] = {}
    gazetteer["LOC"] = [(next(stems),) for _ in range(cfg.n_loc)]
    org = []
    for _ in range(cfg.n_org):
        if rng.random() < 0.5:
            org.append((next(stems),))
        else:
            org.append((next(stems), next(stems)))
    gazetteer["ORG"] = org
    gazetteer["PER"] = [(next(stems), next(stems)) for _ in range(cfg.n_per)]
    return roots, suffixes, gazetteer


def _suffix_chain(rng: random.Random, cfg: SynthConfig, suffixes: list[str]) -> list[str]:
    if not suffixes or cfg.max_suffix_chain == 0:
        return []
    count = rng.randrange(cfg.max_suffix_chain + 1)
    return [rng.choice(suffixes) for _ in range(count)]


def _morph_bits(has_suffix: bool, proper: bool) -> tuple[int, ...]:
    # layout: root, pos, inflectional suffix, derivational suffix,
    # proper noun, name suffix
    return (1, 0, 1 if has_suffix else 0, 0, 1 if proper else 0, 0)


def _make_sentence(rng: random.Random, cfg: SynthConfig, roots, suffixes,
                   entries: list[tuple[str, tuple[str, ...]]]) -> Sentence:
    length = rng.randrange(cfg.min_length, cfg.max_length + 1)
    tokens: list[Token] = []
    while len(tokens) < length:
        remaining = length - len(tokens)
        placed = False
        if entries and rng.random() < cfg.entity_density:
            fitting = [e for e in entries if len(e[1]) <= remaining]
            if fitting:
                etype, stems = rng.choice(fitting)
                for j, stem in enumerate(stems):
                    root = stem.capitalize()
                    chain = _suffix_chain(rng, cfg, suffixes)
                    tokens.append(Token(
                        surface=root + "".join(chain), root=root,
                        morph_bits=_morph_bits(bool(chain), True),
                        gold_tag=("B-" if j == 0 else "I-") + etype))
                placed = True
        if not placed:
            stem = rng.choice(roots)
            chain = _suffix_chain(rng, cfg, suffixes)
            tokens.append(Token(
                surface=stem + "".join(chain), root=stem,
                morph_bits=_morph_bits(bool(chain), False), gold_tag="O"))
    return Sentence(tuple(tokens))


def generate_sentences(cfg: SynthConfig) -> list[Sentence]:
    """All ``cfg.n_sentences`` tagged sentences, before splitting."""
    rng = random.Random(cfg.seed)
    roots, suffixes, gazetteer = _build_lexicon(rng, cfg)
    entries = [(etype, stems) for etype in ENTITY_TYPES
               for stems in gazetteer[etype]]
    return [_make_sentence(rng, cfg, roots, suffixes, entries)
            for _ in range(cfg.n_sentences)]


def corpus_stats(sentences) -> SynthStats:
    stats = SynthStats()
    surfaces: set[str] = set()
    root_set: set[str] = set()
    for sentence in sentences:
        stats.sentences += 1
        for token in sentence:
            stats.tokens += 1
            surfaces.add(token.surface.lower())
            root_set.add(token.root)
            if token.gold_tag and token.gold_tag.startswith("B-"):
                etype = token.gold_tag[2:]
                stats.entities[etype] = stats.entities.get(etype, 0) + 1
    stats.surface_types = len(surfaces)
    stats.root_types = len(root_set)
    return stats


def generate(cfg: SynthConfig) -> SynthCorpus:
    """Full corpus split 80/10/10 (train/dev/test), deterministic."""
    sentences = generate_sentences(cfg)
    if cfg.n_sentences >= 3:
        train, dev, test = split_corpus(sentences, (0.8, 0.1, 0.1), seed=cfg.seed)
    else:
        train, dev, test = sentences, list(sentences), list(sentences)
    return SynthCorpus(train=train, dev=dev, test=test,
                       stats=corpus_stats(sentences))
