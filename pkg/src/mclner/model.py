"""The tagger model: tables + network + decoder glued into one object.

Two variants share the code path:

* transition variant (use_tag_embedding off): the network scores each
  position independently and a learned transition matrix couples tags;
  training minimizes the sentence-level CRF negative log-likelihood.
* tag-embedding variant (use_tag_embedding on): the previous tag enters
  the network input and there is no transition matrix.  Training is
  teacher-forced per-position softmax NLL conditioned on the gold
  previous tag; inference builds the full previous-tag lattice (one
  network pass per previous tag) and runs Viterbi.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

import numpy as np

from .corpus import Sentence, Vocabulary
from .decoder import (TagLattice, TransitionMatrix, crf_nll_and_gradients,
                      softmax_nll_rows, viterbi)
from .embeddings import EmbeddingTable, InputBuilder, WindowConfig
from .network import ARCHITECTURES, NetworkConfig, ScoringNetwork

WORD_KEY = "word_embeddings"
ROOT_KEY = "root_embeddings"
TAG_KEY = "tag_embeddings"
TRANSITIONS_KEY = "transitions"
NETWORK_PREFIX = "network."


@dataclass
class TaggerConfig:
    """Everything needed to size and wire a model (not the training loop)."""

    architecture: str = "plain"
    window: int = 3
    word_dim: int = 50
    root_dim: int = 50
    tag_dim: int = 50
    hidden_size: int = 300
    tensor_size: int = 50
    factors: int = 3
    extra_hidden: int = 0
    use_root: bool = False
    use_tag_embedding: bool = False
    use_features: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.architecture not in ARCHITECTURES:
            raise ValueError(f"architecture must be one of {ARCHITECTURES}")
        # full shape validation happens in WindowConfig/NetworkConfig
        self.window_config()

    def window_config(self) -> WindowConfig:
        return WindowConfig(
            window=self.window, word_dim=self.word_dim, root_dim=self.root_dim,
            tag_dim=self.tag_dim, use_root=self.use_root,
            use_tag_embedding=self.use_tag_embedding, use_features=self.use_features)

    def network_config(self, n_tags: int) -> NetworkConfig:
        return NetworkConfig(
            architecture=self.architecture, hidden_size=self.hidden_size,
            tensor_size=self.tensor_size, factors=self.factors,
            tag_count=n_tags, extra_hidden=self.extra_hidden)

    def to_dict(self) -> dict:
        return {
            "architecture": self.architecture, "window": self.window,
            "word_dim": self.word_dim, "root_dim": self.root_dim,
            "tag_dim": self.tag_dim, "hidden_size": self.hidden_size,
            "tensor_size": self.tensor_size, "factors": self.factors,
            "extra_hidden": self.extra_hidden, "use_root": self.use_root,
            "use_tag_embedding": self.use_tag_embedding,
            "use_features": self.use_features, "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TaggerConfig":
        return cls(**data)


@dataclass
class Gradients:
    """Gradient bundle: full tensors plus sparse per-column updates."""

    dense: dict = field(default_factory=dict)
    # table name -> {column index -> gradient vector}
    columns: dict = field(default_factory=dict)


class TaggerModel:
    """Parameter container with loss, gradients and decoding."""

    def __init__(self, vocab: Vocabulary, config: TaggerConfig):
        self.vocab = vocab
        self.config = config
        rng = np.random.default_rng(config.seed)
        # table init order is fixed so a seed pins every parameter
        self.word_table = EmbeddingTable(config.word_dim, vocab.n_words, rng)
        self.root_table = (EmbeddingTable(config.root_dim, vocab.n_roots, rng)
                           if config.use_root else None)
        self.tag_table = (EmbeddingTable(config.tag_dim, vocab.n_tags + 1, rng)
                          if config.use_tag_embedding else None)
        self.builder = InputBuilder(vocab, config.window_config(), self.word_table,
                                    self.root_table, self.tag_table)
        self.network = ScoringNetwork(self.builder.input_size,
                                      config.network_config(vocab.n_tags), rng)
        self.transitions = (None if config.use_tag_embedding
                            else TransitionMatrix(vocab.n_tags))

    @property
    def n_tags(self) -> int:
        return self.vocab.n_tags

    @property
    def start_tag(self) -> int:
        return self.vocab.start_tag_id

    def parameters(self) -> dict[str, np.ndarray]:
        """Live name -> array registry (mutating the arrays updates the model)."""
        out = {WORD_KEY: self.word_table.matrix}
        if self.root_table is not None:
            out[ROOT_KEY] = self.root_table.matrix
        if self.tag_table is not None:
            out[TAG_KEY] = self.tag_table.matrix
        for name, arr in self.network.parameters().items():
            out[NETWORK_PREFIX + name] = arr
        if self.transitions is not None:
            out[TRANSITIONS_KEY] = self.transitions.A
        return out

    def snapshot(self) -> dict[str, np.ndarray]:
        return {name: arr.copy() for name, arr in self.parameters().items()}

    def restore(self, snapshot: dict[str, np.ndarray]) -> None:
        params = self.parameters()
        if set(snapshot) != set(params):
            raise ValueError("snapshot does not match this model's parameters")
        for name, arr in params.items():
            arr[...] = snapshot[name]

    def clone(self) -> "TaggerModel":
        other = TaggerModel(self.vocab, copy.deepcopy(self.config))
        other.restore(self.snapshot())
        return other

    # -- lattice construction ------------------------------------------------

    def lattice(self, sentence: Sentence) -> TagLattice:
        """Inference lattice; cost is one network pass per previous tag
        in the tag-embedding variant, one pass total otherwise."""
        if len(sentence) == 0:
            raise ValueError("cannot build a lattice for an empty sentence")
        if not self.config.use_tag_embedding:
            rows = self.builder.build_rows(sentence)
            return TagLattice.unary(self.network.forward(rows))
        n, t = len(sentence), self.n_tags
        base = self.builder.build_rows(sentence, [self.start_tag] * n)
        start = self.network.forward(base[:1])[0]
        pairs = np.empty((n - 1, t, t))
        if n > 1:
            tail = base[1:]
            for prev in range(t):
                self.builder.fill_tag_slice(tail, prev)
                pairs[:, prev, :] = self.network.forward(tail)
        return TagLattice.pairwise(start, pairs)

    def predict_tag_ids(self, sentence: Sentence, mask: np.ndarray | None = None) -> list[int]:
        path, _ = viterbi(self.lattice(sentence), self.transitions, mask)
        return path

    def predict_tags(self, sentence: Sentence, mask: np.ndarray | None = None) -> list[str]:
        names = self.vocab.tag_names
        return [names[i] for i in self.predict_tag_ids(sentence, mask)]

    # -- training ------------------------------------------------------------

    def loss_and_gradients(self, sentence: Sentence, gold_ids) -> tuple[float, Gradients]:
        """Sentence loss and gradients for every touched parameter.

        No regularization here; the trainer adds the L2 term.
        """
        gold_ids = list(gold_ids)
        if len(gold_ids) != len(sentence):
            raise ValueError("gold tag count does not match sentence length")
        if any(not 0 <= t < self.n_tags for t in gold_ids):
            raise ValueError("gold tag id out of range")
        if len(sentence) == 0:
            raise ValueError("cannot train on an empty sentence")
        if self.config.use_tag_embedding:
            prev = [self.start_tag] + gold_ids[:-1]
            rows = self.builder.build_rows(sentence, prev)
            scores, caches = self.network.forward_cached(rows)
            loss, d_scores = softmax_nll_rows(scores, gold_ids)
        else:
            prev = None
            rows = self.builder.build_rows(sentence)
            scores, caches = self.network.forward_cached(rows)
            lattice = TagLattice.unary(scores)
            loss, d_scores, d_transitions = crf_nll_and_gradients(
                lattice, gold_ids, self.transitions)
        d_input, net_grads = self.network.backward(d_scores, caches)

        grads = Gradients()
        for name, g in net_grads.items():
            grads.dense[NETWORK_PREFIX + name] = g
        if not self.config.use_tag_embedding:
            grads.dense[TRANSITIONS_KEY] = d_transitions
        word_sink: dict = {}
        root_sink: dict = {} if self.root_table is not None else None
        tag_sink: dict = {} if self.tag_table is not None else None
        self.builder.scatter_gradients(sentence, d_input, prev,
                                       word_sink, root_sink, tag_sink)
        grads.columns[WORD_KEY] = word_sink
        if root_sink is not None:
            grads.columns[ROOT_KEY] = root_sink
        if tag_sink is not None:
            grads.columns[TAG_KEY] = tag_sink
        return loss, grads
