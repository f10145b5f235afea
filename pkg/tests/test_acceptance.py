"""Acceptance gates for the whole tagger, one test class per criterion.

Every test prints a single summary line so a verbose run reads as a
checklist.  Tolerances are frozen; loosening them is a bug, not a fix.
"""

import time

import numpy as np
import pytest

from oracles import best_path, enumerate_paths, log_sum_exp

from mclner.cli import main
from mclner.corpus import Sentence, Token, build_vocabulary, write_corpus
from mclner.decoder import TagLattice, TransitionMatrix, log_partition, viterbi
from mclner.embeddings import load_pretrained
from mclner.evaluator import evaluate
from mclner.model import TaggerConfig, TaggerModel
from mclner.network import DenseLayer, FactorizedTensorLayer
from mclner.synth import SynthConfig, generate, generate_sentences
from mclner.ablation import run_ablation
from mclner.tagger import NeuralTagger

N_TAGS = 7


def _pass(line: str) -> None:
    print(f"PASS {line}")


def tagged(*pairs) -> Sentence:
    return Sentence(tuple(Token(surface, surface.lower(), gold_tag=tag)
                          for surface, tag in pairs))


def seven_tag_corpus() -> list[Sentence]:
    return [
        tagged(("Aqtobe", "B-LOC"), ("oblysy", "I-LOC"), ("men", "O"),
               ("Qazaq", "B-ORG"), ("universiteti", "I-ORG"),
               ("Abay", "B-PER"), ("Qunanbaev", "I-PER")),
        tagged(("ol", "O"), ("Aqtobe", "B-LOC"), ("qalasynda", "O"),
               ("boldy", "O")),
    ]


class TestGradientCorrectness:
    """Criterion 1: analytic gradients match central finite differences."""

    EPSILON = 1e-4
    TOLERANCE = 1e-4

    def full_gradients(self, model, grads):
        """Dense analytic gradient per parameter, scattered columns included."""
        full = {name: np.zeros_like(arr)
                for name, arr in model.parameters().items()}
        for name, g in grads.dense.items():
            full[name][...] = g
        for key, sink in grads.columns.items():
            for col, vec in sink.items():
                full[key][:, col] = vec
        return full, {key: sorted(sink) for key, sink in grads.columns.items()}

    def probe_config(self, architecture, use_tag_embedding, rng):
        corpus = seven_tag_corpus()
        vocab = build_vocabulary(corpus)
        assert vocab.n_tags == N_TAGS
        config = TaggerConfig(
            architecture=architecture, window=3, word_dim=5, root_dim=5,
            tag_dim=5, hidden_size=20, tensor_size=5, factors=2,
            use_root=True, use_tag_embedding=use_tag_embedding,
            use_features=True, seed=17)
        model = TaggerModel(vocab, config)
        sentence = corpus[0]
        gold = [vocab.tag_id(t) for t in sentence.tags()]

        def loss() -> float:
            return model.loss_and_gradients(sentence, gold)[0]

        _, grads = model.loss_and_gradients(sentence, gold)
        full, touched = self.full_gradients(model, grads)
        params = model.parameters()
        worst, probes = 0.0, 0
        for name in sorted(full):
            arr = params[name]
            if name in touched:
                cols = touched[name]
                picks = [(int(rng.integers(arr.shape[0])), int(rng.choice(cols)))
                         for _ in range(5)]
            else:
                flat = rng.choice(arr.size, size=min(5, arr.size),
                                  replace=False)
                picks = [np.unravel_index(int(i), arr.shape) for i in flat]
            for idx in picks:
                original = arr[idx]
                arr[idx] = original + self.EPSILON
                up = loss()
                arr[idx] = original - self.EPSILON
                down = loss()
                arr[idx] = original
                fd = (up - down) / (2 * self.EPSILON)
                analytic = full[name][idx]
                rel = abs(fd - analytic) / max(abs(fd), abs(analytic), 1e-8)
                assert rel < self.TOLERANCE, \
                    f"{architecture}/{use_tag_embedding} {name}{idx}: " \
                    f"fd={fd!r} analytic={analytic!r} rel={rel:.2e}"
                worst = max(worst, rel)
                probes += 1
        return worst, probes

    def test_finite_differences_all_architectures(self):
        start = time.time()
        rng = np.random.default_rng(29)
        worst, probes = 0.0, 0
        for architecture in ("plain", "tensor"):
            for use_tag_embedding in (False, True):
                w, p = self.probe_config(architecture, use_tag_embedding, rng)
                worst = max(worst, w)
                probes += p
        elapsed = time.time() - start
        assert probes >= 100
        assert elapsed < 30.0
        _pass(f"gradient correctness: {probes} probes over 4 configs, "
              f"worst rel err {worst:.2e}, {elapsed:.1f}s")


class TestDecoderExactness:
    """Criterion 2: Viterbi and log-partition match brute force."""

    TOLERANCE = 1e-8

    def test_viterbi_and_partition_match_enumeration(self):
        start = time.time()
        rng = np.random.default_rng(41)
        checked = 0
        for kind in ("unary", "pairwise"):
            for _ in range(260):
                n = int(rng.integers(1, 7))
                if kind == "unary":
                    lattice = TagLattice.unary(
                        rng.normal(scale=2.0, size=(n, N_TAGS)))
                    transitions = TransitionMatrix(N_TAGS)
                    transitions.A[...] = rng.normal(scale=2.0,
                                                    size=transitions.A.shape)
                else:
                    lattice = TagLattice.pairwise(
                        rng.normal(scale=2.0, size=N_TAGS),
                        rng.normal(scale=2.0, size=(n - 1, N_TAGS, N_TAGS)))
                    transitions = None
                paths, scores = enumerate_paths(lattice, transitions)
                expected_path, expected_score = best_path(paths, scores)
                path, score = viterbi(lattice, transitions)
                assert path == list(expected_path)
                # same numbers summed in a different order
                assert abs(score - expected_score) < 1e-9
                log_z = log_partition(lattice, transitions)
                assert abs(log_z - log_sum_exp(scores)) < self.TOLERANCE
                checked += 1
        elapsed = time.time() - start
        assert checked >= 500
        assert elapsed < 60.0
        _pass(f"decoder exactness: {checked} random lattices "
              f"(unary and pairwise), {elapsed:.1f}s")


class TestTensorEquivalence:
    """Criterion 3: factorized layer equals explicit dense slices."""

    def test_factorized_matches_dense_slices(self):
        rng = np.random.default_rng(53)
        for _ in range(1000):
            n_in = int(rng.integers(2, 9))
            n_out = int(rng.integers(1, 7))
            factors = int(rng.integers(1, 5))
            batch = int(rng.integers(1, 5))
            layer = FactorizedTensorLayer(n_in, n_out, factors, rng=rng)
            x = rng.normal(size=(batch, n_in))
            slices = layer.dense_slices()
            bilinear = np.einsum("bh,ihk,bk->bi", x, slices, x)
            dense = np.tanh(bilinear + x @ layer.W.T + layer.b)
            np.testing.assert_allclose(layer.forward(x), dense,
                                       rtol=1e-12, atol=1e-12)
        _pass("tensor equivalence: factorized forward matches dense slices "
              "on 1000 random configurations (tol 1e-12)")

    def test_zero_factors_reduce_to_plain_layer(self):
        rng = np.random.default_rng(59)
        for _ in range(50):
            n_in = int(rng.integers(2, 9))
            n_out = int(rng.integers(1, 7))
            layer = FactorizedTensorLayer(n_in, n_out, 3, rng=rng)
            layer.P[...] = 0.0
            layer.Q[...] = 0.0
            plain = DenseLayer(n_in, n_out, activation="tanh")
            plain.W[...] = layer.W
            plain.b[...] = layer.b
            x = rng.normal(size=(3, n_in))
            assert np.array_equal(layer.forward(x), plain.forward(x))
        _pass("tensor equivalence: P=Q=0 reduces bit-for-bit to the "
              "plain layer")


class TestOverfitSanity:
    """Criterion 4: the richest configuration memorizes a tiny corpus."""

    def test_train_f1_reaches_99(self):
        start = time.time()
        sentences = generate_sentences(SynthConfig(n_sentences=50))
        est = NeuralTagger(architecture="tensor", use_root=True,
                           use_tag_embedding=True, use_features=True,
                           window=3, dim=50, tensor_size=50, factors=3,
                           learning_rate=0.01, l2=1e-4, epochs=100,
                           patience=10, seed=0)
        est.fit(sentences)
        elapsed = time.time() - start
        assert est.best_dev_f1_ >= 99.0, \
            f"train F1 {est.best_dev_f1_:.2f} after {len(est.history_)} epochs"
        assert est.best_epoch_ <= 100
        assert elapsed < 300.0
        _pass(f"overfit sanity: train F1 {est.best_dev_f1_:.2f} at epoch "
              f"{est.best_epoch_}, {elapsed:.1f}s")


class TestDirectionalAblation:
    """Criterion 5: root embeddings help on a high-sparsity corpus."""

    def test_root_embeddings_beat_words_alone(self):
        start = time.time()
        corpus = generate(SynthConfig(n_roots=200, n_suffixes=20,
                                      max_suffix_chain=3, n_sentences=2500,
                                      seed=11))
        assert len(corpus.train) == 2000
        rows = run_ablation(
            corpus.train, corpus.dev, corpus.test,
            variants=("nn", "nn+root"), seeds=(0, 1, 2, 3, 4),
            base_params=dict(dim=16, hidden_size=32, learning_rate=0.05,
                             l2=1e-4, epochs=3))
        elapsed = time.time() - start
        words_only, with_roots = rows[0].overall, rows[1].overall
        assert len(rows[0].seed_overall) == 5
        assert with_roots > words_only, \
            f"nn+root {with_roots:.2f} <= nn {words_only:.2f}"
        _pass(f"directional ablation: nn+root {with_roots:.2f} > "
              f"nn {words_only:.2f} mean test F1 over 5 seeds "
              f"(margin +{with_roots - words_only:.2f}), {elapsed:.0f}s")


class TestChunkScoringParity:
    """Criterion 6: chunk P/R/F1 match hand-computed values."""

    # (name, gold, predicted, precision, recall, f1)
    FIXTURES = [
        ("perfect single chunk",
         [["B-LOC", "O"]], [["B-LOC", "O"]],
         100.00, 100.00, 100.00),
        ("all O on both sides",
         [["O", "O", "O"]], [["O", "O", "O"]],
         0.00, 0.00, 0.00),
        ("boundary error extends the chunk",
         [["B-PER", "O", "O"]], [["B-PER", "I-PER", "O"]],
         0.00, 0.00, 0.00),
        ("type error on an exact span",
         [["B-LOC", "I-LOC"]], [["B-ORG", "I-ORG"]],
         0.00, 0.00, 0.00),
        ("adjacent chunks merged by the prediction",
         [["B-LOC", "B-LOC", "O", "B-PER"]],
         [["B-LOC", "I-LOC", "O", "B-PER"]],
         50.00, 33.33, 40.00),
        ("orphan continuation starts a chunk",
         [["O", "I-ORG", "I-ORG"]], [["O", "B-ORG", "I-ORG"]],
         100.00, 100.00, 100.00),
        ("one of three chunk types dropped",
         [["B-PER", "I-PER", "O", "B-LOC", "O", "B-ORG"]],
         [["B-PER", "I-PER", "O", "B-LOC", "O", "O"]],
         100.00, 66.67, 80.00),
        ("spurious chunk on an empty gold",
         [["O", "O", "O", "O"]], [["O", "B-LOC", "O", "O"]],
         0.00, 0.00, 0.00),
        ("missed chunk with an empty prediction",
         [["O", "B-LOC", "I-LOC", "O"]], [["O", "O", "O", "O"]],
         0.00, 0.00, 0.00),
        ("mixed errors across sentences",
         [["B-LOC", "I-LOC", "O", "B-PER"], ["B-ORG", "O"],
          ["B-PER", "I-PER"]],
         [["B-LOC", "I-LOC", "O", "O"], ["B-ORG", "I-ORG"],
          ["B-PER", "I-PER"]],
         66.67, 50.00, 57.14),
    ]

    def test_fixtures_match_hand_computed_scores(self):
        assert len(self.FIXTURES) == 10
        for name, gold, pred, precision, recall, f1 in self.FIXTURES:
            report = evaluate(gold, pred)
            assert round(report.precision, 2) == precision, name
            assert round(report.recall, 2) == recall, name
            assert round(report.f1, 2) == f1, name
        _pass("chunk scoring parity: 10 hand-computed fixtures match "
              "to 2 decimals")


class TestDeterminismAndSerialization:
    """Criterion 7: identical flags give identical bytes; archives round-trip."""

    def test_repeated_training_is_byte_identical(self, tmp_path, capsys):
        corpus_path = tmp_path / "train.txt"
        write_corpus(generate_sentences(SynthConfig(n_sentences=30, seed=4)),
                     corpus_path)
        archives = []
        for name in ("one.mclner", "two.mclner"):
            out = tmp_path / name
            code = main(["train", "--train", str(corpus_path), "--dev",
                         str(corpus_path), "--out", str(out), "--dim", "8",
                         "--hidden", "10", "--epochs", "3", "--lr", "0.1",
                         "--use-root"])
            assert code == 0
            archives.append(out.read_bytes())
        capsys.readouterr()
        assert archives[0] == archives[1]
        _pass("determinism: two identical training runs wrote "
              f"byte-identical archives ({len(archives[0])} bytes)")

    def test_save_load_tag_round_trip(self, tmp_path):
        sentences = generate_sentences(SynthConfig(n_sentences=25, seed=6))
        est = NeuralTagger(dim=8, hidden_size=10, learning_rate=0.1,
                           epochs=3, seed=0, use_root=True)
        est.fit(sentences)
        before = est.predict(sentences)
        path = tmp_path / "model.mclner"
        est.save(path)
        after = NeuralTagger.load(path).predict(sentences)
        assert after == before
        _pass("serialization: save, load and tag reproduces every "
              f"token of {sum(len(p) for p in before)}")


class TestPretrainedEmbeddings:
    """Criterion 8: word2vec text loading covers exactly the listed words."""

    WORDS = ["alma", "kitap", "dala", "tau", "su"]

    def write_toy(self, path, dim=5):
        rows = []
        for i, word in enumerate(self.WORDS):
            values = [round(0.1 * (i + 1) + 0.01 * j, 6) for j in range(dim)]
            rows.append((word, values))
        lines = [f"{len(rows)} {dim}"]
        lines += [f"{w} " + " ".join(f"{v:.6f}" for v in values)
                  for w, values in rows]
        path.write_text("\n".join(lines) + "\n")
        return dict(rows)

    def test_covered_columns_overwritten_exactly(self, tmp_path):
        corpus = [tagged(*((w, "O") for w in self.WORDS)),
                  tagged(("qala", "O"), ("el", "O"))]
        vocab = build_vocabulary(corpus)
        model = TaggerModel(vocab, TaggerConfig(word_dim=5, hidden_size=4))
        table = model.word_table
        before = table.matrix.copy()
        toy = tmp_path / "toy.vec"
        expected = self.write_toy(toy)
        report = load_pretrained(toy, table, vocab.word_index, lowercase=True)
        assert report.found == 5
        covered = set()
        for word, values in expected.items():
            col = vocab.word_index[word]
            covered.add(col)
            np.testing.assert_array_equal(table.matrix[:, col],
                                          np.array(values))
        for col in range(table.size):
            if col not in covered:
                np.testing.assert_array_equal(table.matrix[:, col],
                                              before[:, col], err_msg=str(col))
        _pass("pretrained embeddings: 5-word toy file overwrote exactly "
              "its 5 columns")

    def test_dimension_mismatch_rejected(self, tmp_path):
        corpus = [tagged(*((w, "O") for w in self.WORDS))]
        vocab = build_vocabulary(corpus)
        model = TaggerModel(vocab, TaggerConfig(word_dim=4, hidden_size=4))
        toy = tmp_path / "toy.vec"
        self.write_toy(toy, dim=5)
        from mclner.corpus import CorpusError
        with pytest.raises(CorpusError, match="dimension"):
            load_pretrained(toy, model.word_table, vocab.word_index)
        _pass("pretrained embeddings: dimension mismatch rejected")
