"""Shared fixtures for the test suite."""

import numpy as np
import pytest

from embda.corpus import Vocabulary, build_vocab, tokenize


@pytest.fixture
def write_corpus(tmp_path):
    """Write text to a file under tmp_path and return its path."""

    def _write(text, name="corpus.txt"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return _write


@pytest.fixture
def small_vocab():
    """Five words with descending counts, ids 0..4."""
    return Vocabulary(
        words=["alpha", "beta", "gamma", "delta", "epsilon"],
        counts=np.array([50, 40, 30, 20, 10], dtype=np.int64),
        total_tokens=150,
    )


def vocab_from_text(text, min_count=1):
    return build_vocab(tokenize(text), min_count=min_count)
