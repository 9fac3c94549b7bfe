import numpy as np
import pytest
from hypothesis import given, strategies as st

from pcrnn import corpus


def test_ace_act_vocabulary():
    vocab = corpus.build_vocabulary("ace act")
    assert set(vocab.chars) == {"a", "c", "e", "t", " "}
    assert len(vocab) == 5
    # first-occurrence order
    assert vocab.chars == ("a", "c", "e", " ", "t")
    assert all(vocab.index_of[c] == i for i, c in enumerate(vocab.chars))


def test_single_symbol_vocabulary():
    assert corpus.build_vocabulary("aaaa").chars == ("a",)


def test_empty_corpus_rejected():
    with pytest.raises(corpus.CorpusError, match="empty corpus"):
        corpus.build_vocabulary("")


def test_encode_aca():
    vocab = corpus.build_vocabulary("ace act")
    assert corpus.encode("aca", vocab).tolist() == [0, 1, 0]


def test_encode_empty():
    vocab = corpus.build_vocabulary("ace act")
    assert corpus.encode("", vocab).tolist() == []


def test_encode_unknown_character_names_position():
    vocab = corpus.build_vocabulary("ace act")
    with pytest.raises(corpus.CorpusError, match=r"'x' at position 2"):
        corpus.encode("acxe", vocab)


def test_decode_inverse():
    vocab = corpus.build_vocabulary("ace act")
    assert corpus.decode([0, 1, 0], vocab) == "aca"
    assert corpus.decode([], vocab) == ""


def test_decode_out_of_range():
    vocab = corpus.build_vocabulary("ace act")
    with pytest.raises(corpus.CorpusError, match="out of range"):
        corpus.decode([5], vocab)


def test_one_hot_examples():
    assert corpus.one_hot(0, 4).tolist() == [1, 0, 0, 0]
    assert corpus.one_hot(3, 4).tolist() == [0, 0, 0, 1]
    v = corpus.one_hot(41, 42)
    assert v.shape == (42,) and v[41] == 1 and v.sum() == 1


def test_one_hot_out_of_range():
    with pytest.raises(corpus.CorpusError):
        corpus.one_hot(4, 4)


@given(st.text(alphabet="ace t", min_size=1, max_size=50))
def test_round_trip(text):
    vocab = corpus.build_vocabulary("ace act")
    assert corpus.decode(corpus.encode(text, vocab), vocab) == text


@given(st.text(min_size=1, max_size=80))
def test_vocabulary_deterministic_and_roundtrips(text):
    v1 = corpus.build_vocabulary(text)
    v2 = corpus.build_vocabulary(text)
    assert v1.chars == v2.chars
    assert corpus.decode(corpus.encode(text, v1), v1) == text


@given(st.integers(min_value=0, max_value=41))
def test_one_hot_argmax_identity(i):
    assert int(np.argmax(corpus.one_hot(i, 42))) == i


def test_moby_excerpt_counts():
    text = corpus.load_moby_excerpt()
    assert len(text) == 500
    assert len(set(text)) == 42
    assert len(corpus.build_vocabulary(text)) == 42
    assert corpus.encode(text, corpus.build_vocabulary(text)).shape == (500,)


def test_moby_seed_prefix():
    # the 10-character seed used by the recall protocol
    assert corpus.load_moby_excerpt()[:10] == "\nCHAPTER 1"


def test_corpus_guard_rejects_drift(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text(corpus.load_moby_excerpt()[:499], encoding="utf-8")
    with pytest.raises(corpus.CorpusError, match="expected 500"):
        corpus.load_corpus(bad, 500, 42)


def test_crlf_normalized(tmp_path):
    p = tmp_path / "crlf.txt"
    p.write_bytes(b"ab\r\ncd\r\n")
    assert corpus.load_corpus(p) == "ab\ncd\n"
