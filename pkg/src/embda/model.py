"""Parameter matrices, initialization, and text vector-file serialization."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from embda.corpus import Vocabulary

MODES = ("sg", "cbow", "sg-di", "cbow-da")


class VectorFormatError(ValueError):
    """A vector file could not be parsed."""


class ZeroVectorError(ValueError):
    """Cosine similarity is undefined for a zero vector."""


@dataclass
class EmbeddingModel:
    """Input/output embedding matrices plus the sg-di indicator matrix.

    All matrices are |V| x dim float32. The indicator matrix exists iff
    the model was created in sg-di mode.
    """

    vocab: Vocabulary
    dim: int
    mode: str
    input: np.ndarray
    output: np.ndarray
    indicator: np.ndarray | None = None

    def check_finite(self) -> None:
        for name, mat in (("input", self.input), ("output", self.output),
                          ("indicator", self.indicator)):
            if mat is not None and not np.all(np.isfinite(mat)):
                raise FloatingPointError(f"non-finite values in {name} matrix")

    def cosine(self, u: int, w: int) -> float:
        return cosine_rows(self.input, u, w)


def cosine_rows(matrix: np.ndarray, u: int, w: int) -> float:
    a = matrix[u].astype(np.float64)
    b = matrix[w].astype(np.float64)
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ZeroVectorError(f"zero vector for id {u if na == 0.0 else w}")
    return float(a @ b / (na * nb))


def init_model(vocab: Vocabulary, dim: int, mode: str, seed: int = 1) -> EmbeddingModel:
    """Uniform(-0.5/dim, 0.5/dim) input rows; zero output and indicator rows.

    Zero output/indicator initialization guarantees the first update of
    any output-side channel leaves input vectors unchanged, which the
    sg-di/sg reduction relies on.
    """
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    rng = np.random.default_rng(seed)
    bound = 0.5 / dim
    inp = rng.uniform(-bound, bound, size=(len(vocab), dim)).astype(np.float32)
    out = np.zeros((len(vocab), dim), dtype=np.float32)
    ind = np.zeros((len(vocab), dim), dtype=np.float32) if mode == "sg-di" else None
    return EmbeddingModel(vocab=vocab, dim=dim, mode=mode, input=inp, output=out, indicator=ind)


@dataclass
class WordVectors:
    """Words plus their vectors, as read from a vector file."""

    words: list[str]
    matrix: np.ndarray  # float32, len(words) x dim

    def __post_init__(self) -> None:
        self.id_of = {w: i for i, w in enumerate(self.words)}

    def __len__(self) -> int:
        return len(self.words)

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]


def write_vectors(
    words: Sequence[str],
    matrix: np.ndarray,
    path: str | Path,
    full_precision: bool = False,
) -> None:
    """Write word2vec-compatible text vectors.

    Default rendering is 6 significant digits; ``full_precision`` uses 9,
    enough for an exact float32 round trip. Decimal separator is always
    a dot regardless of locale.
    """
    fmt = "%.9g" if full_precision else "%.6g"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(words)} {matrix.shape[1]}\n")
        for w, row in zip(words, matrix):
            fh.write(w)
            for x in row:
                fh.write(" ")
                fh.write(fmt % x)
            fh.write("\n")


def save_vectors(
    model: EmbeddingModel,
    which: str,
    path: str | Path,
    full_precision: bool = False,
) -> None:
    """Persist one of the model's matrices (input, output, indicator)."""
    matrices = {"input": model.input, "output": model.output, "indicator": model.indicator}
    if which not in matrices:
        raise ValueError(f"unknown matrix {which!r}")
    mat = matrices[which]
    if mat is None:
        raise ValueError(f"model has no {which} matrix (mode {model.mode})")
    write_vectors(model.vocab.words, mat, path, full_precision=full_precision)


def load_vectors(path: str | Path) -> WordVectors:
    """Read a word2vec-style text vector file."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise VectorFormatError(f"{path}: malformed header (expected '<size> <dim>')")
        try:
            n, dim = int(header[0]), int(header[1])
        except ValueError:
            raise VectorFormatError(f"{path}: malformed header (non-integer fields)") from None
        if n < 1 or dim < 1:
            raise VectorFormatError(f"{path}: empty model (header {n} {dim})")
        words: list[str] = []
        matrix = np.empty((n, dim), dtype=np.float32)
        seen: set[str] = set()
        for i in range(n):
            parts = fh.readline().split()
            if len(parts) != dim + 1:
                raise VectorFormatError(
                    f"{path}: row {i + 1}: expected {dim} values, got {len(parts) - 1}"
                )
            word = parts[0]
            if word in seen:
                raise VectorFormatError(f"{path}: duplicate word {word!r}")
            seen.add(word)
            words.append(word)
            matrix[i] = [float(x) for x in parts[1:]]
    return WordVectors(words=words, matrix=matrix)
