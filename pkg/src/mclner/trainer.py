"""AdaGrad training loop with L2, dev-set model selection and seeding.

Pure per-sentence SGD.  After each epoch the model is scored on the dev
split and the parameter snapshot with the highest dev F1 is kept (ties
go to the earlier epoch).  Everything is deterministic given the seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corpus import CorpusError, Sentence, validate_iob
from .evaluator import evaluate
from .model import Gradients, TaggerModel

ADAGRAD_EPS = 1e-8


@dataclass
class TrainConfig:
    learning_rate: float = 0.01
    l2: float = 1e-4
    epochs: int = 30
    seed: int = 0
    shuffle: bool = True
    patience: int | None = None

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.l2 < 0:
            raise ValueError("l2 must be >= 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.patience is not None and self.patience < 1:
            raise ValueError("patience must be >= 1 when set")


class AdaGradState:
    """Per-tensor accumulators of squared gradients."""

    def __init__(self, params: dict[str, np.ndarray], eps: float = ADAGRAD_EPS):
        self.eps = eps
        self.acc = {name: np.zeros_like(arr) for name, arr in params.items()}


def adagrad_step(params: dict[str, np.ndarray], grads: Gradients,
                 state: AdaGradState, config: TrainConfig) -> None:
    """One in-place update; L2 enters the gradient before accumulation.

    Column gradients touch only their columns.  A non-finite gradient
    aborts the step before any parameter changes.
    """
    for name, g in grads.dense.items():
        if name not in params:
            raise KeyError(f"gradient for unknown parameter {name!r}")
        if not np.all(np.isfinite(g)):
            raise FloatingPointError(f"non-finite gradient for {name!r}")
    for name, sink in grads.columns.items():
        if name not in params:
            raise KeyError(f"gradient for unknown parameter {name!r}")
        for col, g in sink.items():
            if not np.all(np.isfinite(g)):
                raise FloatingPointError(f"non-finite gradient for {name!r} column {col}")
    lr, l2, eps = config.learning_rate, config.l2, state.eps
    for name, g in grads.dense.items():
        arr, acc = params[name], state.acc[name]
        step = g + l2 * arr
        acc += step * step
        arr -= lr * step / (np.sqrt(acc) + eps)
    for name, sink in grads.columns.items():
        arr, acc = params[name], state.acc[name]
        for col, g in sink.items():
            step = g + l2 * arr[:, col]
            acc[:, col] += step * step
            arr[:, col] -= lr * step / (np.sqrt(acc[:, col]) + eps)


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    dev_precision: float
    dev_recall: float
    dev_f1: float
    dev_accuracy: float

    def row(self) -> str:
        return (f"{self.epoch}\t{self.train_loss:.6f}\t{self.dev_precision:.2f}"
                f"\t{self.dev_recall:.2f}\t{self.dev_f1:.2f}\t{self.dev_accuracy:.2f}")


EPOCH_HEADER = "epoch\ttrain_loss\tdev_precision\tdev_recall\tdev_f1\tdev_accuracy"


@dataclass
class TrainResult:
    model: TaggerModel
    history: list[EpochStats] = field(default_factory=list)
    best_epoch: int = 0
    best_f1: float = 0.0


def _gold_ids(model: TaggerModel, sentences: list[Sentence], split: str) -> list[list[int]]:
    out = []
    for i, sentence in enumerate(sentences):
        if not sentence.has_tags:
            raise CorpusError(f"{split} sentence {i} is missing gold tags")
        tags = sentence.tags()
        violation = validate_iob(tags)
        if violation is not None:
            pos, reason = violation
            raise CorpusError(f"{split} sentence {i}, token {pos}: {reason}")
        try:
            out.append([model.vocab.tag_id(t) for t in tags])
        except KeyError as exc:
            raise CorpusError(f"{split} sentence {i}: unknown tag {exc}") from exc
    return out


def dev_scores(model: TaggerModel, sentences: list[Sentence]):
    predictions = [model.predict_tags(s) for s in sentences]
    return evaluate(sentences, predictions)


def train(model: TaggerModel, train_sentences, dev_sentences,
          config: TrainConfig | None = None, log_fn=None) -> TrainResult:
    """Fit the model in place and restore the best-on-dev snapshot."""
    config = config or TrainConfig()
    train_sentences = list(train_sentences)
    dev_sentences = list(dev_sentences)
    if not train_sentences or not dev_sentences:
        raise ValueError("train and dev splits must both be non-empty")
    train_gold = _gold_ids(model, train_sentences, "train")
    _gold_ids(model, dev_sentences, "dev")

    params = model.parameters()
    state = AdaGradState(params)
    rng = np.random.default_rng(config.seed)
    result = TrainResult(model=model, best_epoch=-1, best_f1=-1.0)
    best_snapshot = None
    stale = 0
    if log_fn is not None:
        log_fn(EPOCH_HEADER)
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(train_sentences)) if config.shuffle \
            else np.arange(len(train_sentences))
        total = 0.0
        for i in order:
            loss, grads = model.loss_and_gradients(train_sentences[i], train_gold[i])
            adagrad_step(params, grads, state, config)
            total += loss
        report = dev_scores(model, dev_sentences)
        stats = EpochStats(epoch, total / len(train_sentences), report.precision,
                           report.recall, report.f1, report.accuracy)
        result.history.append(stats)
        if log_fn is not None:
            log_fn(stats.row())
        if report.f1 > result.best_f1:
            result.best_f1 = report.f1
            result.best_epoch = epoch
            best_snapshot = model.snapshot()
            stale = 0
        else:
            stale += 1
            if config.patience is not None and stale >= config.patience:
                break
    model.restore(best_snapshot)
    return result
