"""Corpus streaming, vocabulary construction, and window extraction."""

from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np


class EmptyCorpusError(ValueError):
    """The corpus yielded no tokens."""


class NoSurvivingTokensError(ValueError):
    """No token met the minimum count threshold."""


class VocabFormatError(ValueError):
    """A vocabulary file could not be parsed."""


def read_sentences(path: str | Path, lowercase: bool = True) -> Iterator[list[str]]:
    """Yield one whitespace-tokenized sentence per non-empty line."""
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            tokens = line.split()
            if not tokens:
                continue
            yield [t.lower() for t in tokens] if lowercase else tokens


def tokenize(text: str, lowercase: bool = True) -> list[list[str]]:
    """Split raw text into sentences (lines) of whitespace tokens."""
    out = []
    for line in text.splitlines():
        tokens = line.split()
        if tokens:
            out.append([t.lower() for t in tokens] if lowercase else tokens)
    return out


@dataclass
class Vocabulary:
    """Word/id mapping with counts over the source corpus.

    Ids are dense in [0, len(words)) and assigned by descending count,
    ties broken by first occurrence in the corpus. ``total_tokens`` is
    the raw token count of the stream, including tokens later dropped by
    the minimum-count filter.
    """

    words: list[str]
    counts: np.ndarray  # int64, counts[i] for word id i
    total_tokens: int
    id_of: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.id_of = {w: i for i, w in enumerate(self.words)}

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self.id_of

    def checksum(self) -> str:
        """Short digest binding derived artifacts (pair tables) to this vocabulary."""
        h = hashlib.sha1()
        h.update(str(self.total_tokens).encode())
        for w, c in zip(self.words, self.counts):
            h.update(b"\x00")
            h.update(w.encode("utf-8"))
            h.update(str(int(c)).encode())
        return h.hexdigest()[:12]

    def encode(self, tokens: Sequence[str]) -> list[int]:
        """Map tokens to ids, dropping out-of-vocabulary tokens."""
        get = self.id_of.get
        return [i for i in map(get, tokens) if i is not None]

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"#total_tokens\t{self.total_tokens}\n")
            for w, c in zip(self.words, self.counts):
                fh.write(f"{w}\t{int(c)}\n")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        words: list[str] = []
        counts: list[int] = []
        total = None
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                if line.startswith("#"):
                    key, _, val = line[1:].partition("\t")
                    if key == "total_tokens":
                        total = int(val)
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise VocabFormatError(f"{path}:{lineno}: expected word<TAB>count")
                words.append(parts[0])
                counts.append(int(parts[1]))
        if total is None:
            raise VocabFormatError(f"{path}: missing #total_tokens header")
        if not words:
            raise VocabFormatError(f"{path}: empty vocabulary")
        return cls(words=words, counts=np.asarray(counts, dtype=np.int64), total_tokens=total)


def build_vocab(sentences: Iterable[Sequence[str]], min_count: int = 5) -> Vocabulary:
    """Count tokens and keep those with count >= min_count.

    Ids are assigned by descending count; ties break by first occurrence.
    """
    if min_count < 1:
        raise ValueError(f"min_count must be >= 1, got {min_count}")
    counts: Counter[str] = Counter()
    first_seen: dict[str, int] = {}
    total = 0
    for sent in sentences:
        for tok in sent:
            counts[tok] += 1
            if tok not in first_seen:
                first_seen[tok] = total
            total += 1
    if total == 0:
        raise EmptyCorpusError("corpus contains no tokens")
    kept = [(w, c) for w, c in counts.items() if c >= min_count]
    if not kept:
        raise NoSurvivingTokensError(
            f"no token appears at least {min_count} times (corpus has {total} tokens)"
        )
    kept.sort(key=lambda wc: (-wc[1], first_seen[wc[0]]))
    words = [w for w, _ in kept]
    arr = np.asarray([c for _, c in kept], dtype=np.int64)
    return Vocabulary(words=words, counts=arr, total_tokens=total)


@dataclass
class NegativeSamplingTable:
    """Cumulative distribution for drawing negative samples.

    Word w is sampled with probability counts[w]**power / sum_u counts[u]**power.
    """

    cumulative: np.ndarray  # float64, strictly increasing
    power: float

    @property
    def total_mass(self) -> float:
        return float(self.cumulative[-1])

    def probabilities(self) -> np.ndarray:
        return np.diff(self.cumulative, prepend=0.0) / self.total_mass

    def sample(self, rng: np.random.Generator, n: int = 1) -> np.ndarray:
        draws = rng.random(n) * self.total_mass
        return np.searchsorted(self.cumulative, draws, side="right")


def build_ns_table(vocab: Vocabulary, power: float = 0.75) -> NegativeSamplingTable:
    if len(vocab) == 0:
        raise ValueError("vocabulary is empty")
    if power <= 0:
        raise ValueError(f"power must be > 0, got {power}")
    weights = vocab.counts.astype(np.float64) ** power
    return NegativeSamplingTable(cumulative=np.cumsum(weights), power=power)


@dataclass
class WindowExample:
    """A center word id and its in-window context ids."""

    center: int
    context: list[int]


def windows(
    sentences: Iterable[Sequence[str]],
    vocab: Vocabulary,
    c: int,
    rng: np.random.Generator | None = None,
    dynamic: bool = False,
) -> Iterator[WindowExample]:
    """Emit (center, context) examples per position, after OOV removal.

    With ``dynamic`` on, the effective radius is drawn uniformly from
    {1..c} per position (shrinking window); otherwise it is c. Windows
    never cross sentence (line) boundaries; positions with an empty
    context are skipped.
    """
    if c < 1:
        raise ValueError(f"window must be >= 1, got {c}")
    if dynamic and rng is None:
        raise ValueError("dynamic windows require an rng")
    for sent in sentences:
        ids = vocab.encode(sent)
        n = len(ids)
        for t in range(n):
            b = int(rng.integers(1, c + 1)) if dynamic else c
            context = ids[max(0, t - b) : t] + ids[t + 1 : t + b + 1]
            if context:
                yield WindowExample(center=ids[t], context=context)


def encode_corpus(
    path: str | Path, vocab: Vocabulary, lowercase: bool = True
) -> tuple[np.ndarray, np.ndarray]:
    """Encode a corpus file into a flat id array plus sentence offsets.

    Returns (ids, offsets) where sentence s spans ids[offsets[s]:offsets[s+1]].
    OOV tokens are dropped; sentences empty after removal are kept as
    zero-length spans (harmless to training).
    """
    ids: list[int] = []
    offsets = [0]
    for sent in read_sentences(path, lowercase=lowercase):
        ids.extend(vocab.encode(sent))
        offsets.append(len(ids))
    return np.asarray(ids, dtype=np.int32), np.asarray(offsets, dtype=np.int64)
