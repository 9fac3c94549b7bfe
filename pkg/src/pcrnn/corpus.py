"""Character corpus handling: vocabulary, index encoding, one-hot vectors."""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources

import numpy as np

# The bundled Moby Dick excerpt must have exactly these counts; anything else
# means the data file drifted and every experiment built on it is invalid.
MOBY_LENGTH = 500
MOBY_VOCAB_SIZE = 42


class CorpusError(ValueError):
    """Raised for malformed corpora or encoding failures."""


@dataclass(frozen=True)
class Vocabulary:
    """Ordered set of unique characters with bidirectional char/index lookup.

    Characters are ordered by first occurrence in the source text, which makes
    the mapping deterministic for a given corpus.
    """

    chars: tuple[str, ...]
    index_of: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        if len(set(self.chars)) != len(self.chars):
            raise CorpusError("vocabulary contains duplicate characters")
        object.__setattr__(
            self, "index_of", {c: i for i, c in enumerate(self.chars)}
        )

    def __len__(self) -> int:
        return len(self.chars)

    def __contains__(self, char: str) -> bool:
        return char in self.index_of


def build_vocabulary(text: str) -> Vocabulary:
    """Collect the distinct characters of ``text`` in first-occurrence order."""
    if not text:
        raise CorpusError("empty corpus")
    return Vocabulary(tuple(dict.fromkeys(text)))


def encode(text: str, vocab: Vocabulary) -> np.ndarray:
    """Map text to an int array of vocabulary indices."""
    try:
        return np.array([vocab.index_of[c] for c in text], dtype=np.int64)
    except KeyError:
        for pos, c in enumerate(text):
            if c not in vocab:
                raise CorpusError(
                    f"character {c!r} at position {pos} not in vocabulary"
                ) from None
        raise  # pragma: no cover


def decode(indices, vocab: Vocabulary) -> str:
    """Inverse of :func:`encode`."""
    chars = vocab.chars
    out = []
    for i in indices:
        i = int(i)
        if not 0 <= i < len(chars):
            raise CorpusError(f"index {i} out of range for vocabulary of size {len(chars)}")
        out.append(chars[i])
    return "".join(out)


def one_hot(index: int, size: int) -> np.ndarray:
    """Length-``size`` vector with a single 1 at ``index``."""
    if not 0 <= index < size:
        raise CorpusError(f"one-hot index {index} out of range for size {size}")
    v = np.zeros(size, dtype=np.float64)
    v[index] = 1.0
    return v


def one_hot_matrix(indices: np.ndarray, size: int) -> np.ndarray:
    """Stack of one-hot rows, one per index: shape (len(indices), size)."""
    if len(indices) and (indices.min() < 0 or indices.max() >= size):
        raise CorpusError("encoded index out of range for vocabulary size")
    m = np.zeros((len(indices), size), dtype=np.float64)
    m[np.arange(len(indices)), indices] = 1.0
    return m


def load_corpus(path, expect_length: int | None = None,
                expect_vocab_size: int | None = None) -> str:
    """Read a UTF-8 corpus file, normalizing CRLF line endings to LF.

    When expected counts are given, a mismatch aborts loudly before any
    training can start.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        text = fh.read().replace("\r\n", "\n")
    if not text:
        raise CorpusError(f"empty corpus: {path}")
    check_corpus(text, expect_length, expect_vocab_size, source=str(path))
    return text


def check_corpus(text: str, expect_length: int | None,
                 expect_vocab_size: int | None, source: str = "corpus") -> None:
    if expect_length is not None and len(text) != expect_length:
        raise CorpusError(
            f"{source}: expected {expect_length} characters, found {len(text)}"
        )
    if expect_vocab_size is not None and len(set(text)) != expect_vocab_size:
        raise CorpusError(
            f"{source}: expected {expect_vocab_size} distinct characters, "
            f"found {len(set(text))}"
        )


def bundled_corpus_path():
    """Filesystem path of the packaged Moby Dick excerpt."""
    return resources.files("pcrnn.data") / "moby_dick_500.txt"


def load_moby_excerpt() -> str:
    """Load the bundled 500-character excerpt, enforcing the 500/42 guard."""
    return load_corpus(bundled_corpus_path(), MOBY_LENGTH, MOBY_VOCAB_SIZE)
