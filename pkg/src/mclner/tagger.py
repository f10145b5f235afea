"""scikit-learn style estimator wrapping the full training pipeline.

``fit`` takes tagged sentences (or sentences plus tag sequences),
builds the vocabulary, trains with AdaGrad and keeps the epoch with the
best dev F1.  ``predict`` returns tag sequences; ``score`` returns the
overall chunk F1 as a percentage.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from . import archive
from .corpus import build_vocabulary
from .embeddings import load_pretrained
from .evaluator import evaluate, nearest_neighbors
from .model import TaggerConfig, TaggerModel
from .trainer import TrainConfig, train
from .validation import attach_tags, check_sentences, check_tagged


class NeuralTagger(BaseEstimator):
    """Window-based neural sequence tagger.

    Parameters mirror the library's config objects; see TaggerConfig and
    TrainConfig.  ``dim`` sets the word, root and tag embedding sizes at
    once.  Fitted attributes: ``vocab_``, ``model_``, ``history_``,
    ``best_epoch_``, ``best_dev_f1_``.
    """

    def __init__(self, architecture: str = "plain", window: int = 3,
                 dim: int = 50, hidden_size: int = 300, tensor_size: int = 50,
                 factors: int = 3, extra_hidden: int = 0,
                 use_root: bool = False, use_tag_embedding: bool = False,
                 use_features: bool = False, learning_rate: float = 0.01,
                 l2: float = 1e-4, epochs: int = 30, seed: int = 0,
                 shuffle: bool = True, patience=None, lowercase: bool = True,
                 min_count: int = 1, pretrained_words=None,
                 pretrained_roots=None, verbose: bool = False):
        self.architecture = architecture
        self.window = window
        self.dim = dim
        self.hidden_size = hidden_size
        self.tensor_size = tensor_size
        self.factors = factors
        self.extra_hidden = extra_hidden
        self.use_root = use_root
        self.use_tag_embedding = use_tag_embedding
        self.use_features = use_features
        self.learning_rate = learning_rate
        self.l2 = l2
        self.epochs = epochs
        self.seed = seed
        self.shuffle = shuffle
        self.patience = patience
        self.lowercase = lowercase
        self.min_count = min_count
        self.pretrained_words = pretrained_words
        self.pretrained_roots = pretrained_roots
        self.verbose = verbose

    def _tagger_config(self) -> TaggerConfig:
        return TaggerConfig(
            architecture=self.architecture, window=self.window,
            word_dim=self.dim, root_dim=self.dim, tag_dim=self.dim,
            hidden_size=self.hidden_size, tensor_size=self.tensor_size,
            factors=self.factors, extra_hidden=self.extra_hidden,
            use_root=self.use_root, use_tag_embedding=self.use_tag_embedding,
            use_features=self.use_features, seed=self.seed)

    def fit(self, X, y=None, dev=None, dev_y=None, log_fn=None):
        """Train on tagged sentences.

        ``X``: sentences; ``y``: optional tag sequences to attach.
        ``dev``: held-out tagged sentences for model selection; when
        omitted the training set doubles as the dev set.
        """
        sentences = attach_tags(X, y) if y is not None else check_sentences(X)
        sentences = check_tagged(sentences, "train")
        if dev is not None:
            dev_sents = attach_tags(dev, dev_y) if dev_y is not None \
                else check_sentences(dev)
            dev_sents = check_tagged(dev_sents, "dev")
        else:
            dev_sents = sentences
        vocab = build_vocabulary(sentences, lowercase_words=self.lowercase,
                                 min_count=self.min_count)
        model = TaggerModel(vocab, self._tagger_config())
        if self.pretrained_words is not None:
            load_pretrained(self.pretrained_words, model.word_table,
                            vocab.word_index, lowercase=self.lowercase)
        if self.pretrained_roots is not None:
            if model.root_table is None:
                raise ValueError("pretrained_roots given but use_root is off")
            load_pretrained(self.pretrained_roots, model.root_table,
                            vocab.root_index, lowercase=False)
        if log_fn is None and self.verbose:
            log_fn = print
        config = TrainConfig(learning_rate=self.learning_rate, l2=self.l2,
                             epochs=self.epochs, seed=self.seed,
                             shuffle=self.shuffle, patience=self.patience)
        result = train(model, sentences, dev_sents, config, log_fn=log_fn)
        self.vocab_ = vocab
        self.model_ = result.model
        self.history_ = result.history
        self.best_epoch_ = result.best_epoch
        self.best_dev_f1_ = result.best_f1
        return self

    def _check_fitted(self) -> TaggerModel:
        if not hasattr(self, "model_"):
            raise NotFittedError("this NeuralTagger is not fitted yet; "
                                 "call fit or load first")
        return self.model_

    def predict(self, X) -> list[list[str]]:
        model = self._check_fitted()
        return [model.predict_tags(s) for s in check_sentences(X)]

    def score(self, X, y=None) -> float:
        """Overall chunk F1 (percent) against gold tags."""
        gold = attach_tags(X, y) if y is not None else check_tagged(X)
        report = evaluate(gold, self.predict(gold))
        return report.f1

    def evaluate(self, X, y=None):
        """Full EvalReport against gold tags."""
        gold = attach_tags(X, y) if y is not None else check_tagged(X)
        return evaluate(gold, self.predict(gold))

    def neighbors(self, query: str, k: int = 10, kind: str = "word"):
        """Nearest embedding neighbors of a word or root."""
        model = self._check_fitted()
        if kind == "word":
            table, index = model.word_table, model.vocab.word_index
            if model.vocab.lowercase:
                query = query.lower()
        elif kind == "root":
            if model.root_table is None:
                raise ValueError("this model has no root embeddings")
            table, index = model.root_table, model.vocab.root_index
        else:
            raise ValueError("kind must be 'word' or 'root'")
        return nearest_neighbors(table, index, query, k)

    def save(self, path, metadata: dict | None = None) -> None:
        model = self._check_fitted()
        meta = {"seed": self.seed, "best_epoch": self.best_epoch_,
                "best_dev_f1": self.best_dev_f1_}
        if metadata:
            meta.update(metadata)
        archive.save_model(path, model, meta)

    @classmethod
    def load(cls, path) -> "NeuralTagger":
        model, meta = archive.load_model(path)
        cfg = model.config
        est = cls(architecture=cfg.architecture, window=cfg.window,
                  dim=cfg.word_dim, hidden_size=cfg.hidden_size,
                  tensor_size=cfg.tensor_size, factors=cfg.factors,
                  extra_hidden=cfg.extra_hidden, use_root=cfg.use_root,
                  use_tag_embedding=cfg.use_tag_embedding,
                  use_features=cfg.use_features, seed=cfg.seed,
                  lowercase=model.vocab.lowercase)
        est.vocab_ = model.vocab
        est.model_ = model
        est.history_ = []
        est.best_epoch_ = meta.get("best_epoch", -1)
        est.best_dev_f1_ = meta.get("best_dev_f1", float("nan"))
        return est
