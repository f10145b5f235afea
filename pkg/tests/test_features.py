import numpy as np
import pytest

from mclner.corpus import Sentence, Token
from mclner.features import FEATURE_COUNT, extract_features, window_features


def sent(*tokens):
    return Sentence(tuple(tokens))


def tok(surface, bits=(0, 0, 0, 0, 0, 0)):
    return Token(surface, surface.lower(), morph_bits=bits)


class TestExtractFeatures:
    def test_morph_bits_copied_through(self):
        s = sent(tok("astana", bits=(1, 0, 1, 0, 1, 1)))
        feats = extract_features(s, 0)
        assert feats.shape == (FEATURE_COUNT,)
        assert feats[:6].tolist() == [1, 0, 1, 0, 1, 1]

    def test_zero_morph_capitalized_first_token(self):
        # Latin-script name at sentence start with no morph analysis
        s = sent(tok("Astana"), tok("bardy"))
        feats = extract_features(s, 0)
        assert feats.tolist() == [0, 0, 0, 0, 0, 0, 1, 1, 1, 0]

    def test_case_bit_only_looks_at_first_char(self):
        s = sent(tok("aBC"))
        assert extract_features(s, 0)[6] == 0.0

    def test_sentence_start_bit(self):
        s = sent(tok("a"), tok("b"))
        assert extract_features(s, 0)[7] == 1.0
        assert extract_features(s, 1)[7] == 0.0

    def test_latin_bit_rejects_non_ascii_letters(self):
        s = sent(tok("Алматы"))
        assert extract_features(s, 0)[8] == 0.0

    def test_latin_bit_ignores_digits_and_punct(self):
        s = sent(tok("a-1"))
        assert extract_features(s, 0)[8] == 1.0

    def test_acronym_bit(self):
        assert extract_features(sent(tok("KIMEP")), 0)[9] == 1.0
        assert extract_features(sent(tok("Kimep")), 0)[9] == 0.0
        # single letters never count
        assert extract_features(sent(tok("A")), 0)[9] == 0.0

    def test_position_out_of_range(self):
        with pytest.raises(IndexError):
            extract_features(sent(tok("a")), 1)


class TestWindowFeatures:
    def test_concatenation_order(self):
        s = sent(tok("a", bits=(1, 0, 0, 0, 0, 0)),
                 tok("b", bits=(0, 1, 0, 0, 0, 0)),
                 tok("c", bits=(0, 0, 1, 0, 0, 0)))
        feats = window_features(s, 1, window=3)
        assert feats.shape == (3 * FEATURE_COUNT,)
        np.testing.assert_array_equal(feats[0:10], extract_features(s, 0))
        np.testing.assert_array_equal(feats[10:20], extract_features(s, 1))
        np.testing.assert_array_equal(feats[20:30], extract_features(s, 2))

    def test_boundary_slots_are_zero(self):
        s = sent(tok("Only"))
        feats = window_features(s, 0, window=3)
        assert np.all(feats[0:10] == 0)
        assert np.all(feats[20:30] == 0)
        assert feats[10:20].sum() > 0

    def test_window_one_equals_single_extract(self):
        s = sent(tok("a"), tok("B"))
        np.testing.assert_array_equal(window_features(s, 1, window=1),
                                      extract_features(s, 1))
