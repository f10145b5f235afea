"""Window-based neural named-entity tagger for morphologically rich
languages: word/root/tag embeddings, an optional factorized bilinear
layer, sentence-level Viterbi decoding, AdaGrad training, chunk-level
evaluation and a synthetic agglutinative corpus generator."""

from .corpus import (CorpusError, Sentence, Token, Vocabulary,
                     build_vocabulary, read_corpus, split_corpus, write_corpus)
from .archive import ArchiveError, load_model, save_model
from .decoder import (TagLattice, TransitionMatrix, log_partition,
                      sentence_score, viterbi)
from .embeddings import EmbeddingTable, load_pretrained, save_embeddings
from .evaluator import (EvalReport, evaluate, extract_chunks, format_report,
                        nearest_neighbors)
from .model import TaggerConfig, TaggerModel
from .network import DenseLayer, FactorizedTensorLayer, ScoringNetwork
from .synth import SynthConfig, generate, generate_sentences
from .tagger import NeuralTagger
from .trainer import TrainConfig, train

__version__ = "0.1.0"

__all__ = [
    "ArchiveError", "CorpusError", "DenseLayer", "EmbeddingTable",
    "EvalReport", "FactorizedTensorLayer", "NeuralTagger", "ScoringNetwork",
    "Sentence", "SynthConfig", "TagLattice", "TaggerConfig", "TaggerModel",
    "Token", "TrainConfig", "TransitionMatrix", "Vocabulary",
    "build_vocabulary", "evaluate", "extract_chunks", "format_report",
    "generate", "generate_sentences", "load_model", "load_pretrained",
    "log_partition", "nearest_neighbors", "read_corpus", "save_embeddings",
    "save_model", "sentence_score", "split_corpus", "train", "viterbi",
    "write_corpus", "__version__",
]
