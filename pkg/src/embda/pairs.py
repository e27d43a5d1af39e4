"""Target-domain word-pair extraction and cross-domain frequency statistics."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from embda.corpus import Vocabulary, read_sentences


class PairTableMismatchError(ValueError):
    """Pair table is bound to a different vocabulary than the one supplied."""


class PairFormatError(ValueError):
    """A pair file could not be parsed."""


class EmptyTargetCorpusWarning(UserWarning):
    """The target corpus produced no pairs (valid: model reduces to plain SG/CBOW)."""


def _encode_pair(u: int, w: int, vocab_size: int) -> int:
    a, b = (u, w) if u < w else (w, u)
    return a * vocab_size + b


@dataclass
class PairTable:
    """Unordered in-vocabulary word pairs co-occurring in the target domain.

    Pairs are stored as sorted encoded keys min_id * |V| + max_id, so
    membership lookups are symmetric and O(log n). Self-pairs are never
    stored.
    """

    keys: np.ndarray  # sorted int64 encoded pairs
    vocab_size: int
    window: int
    vocab_checksum: str

    def __len__(self) -> int:
        return len(self.keys)

    def lookup(self, u: int, w: int) -> int:
        """1 iff the unordered pair (u, w) is present; 0 otherwise."""
        if u == w or len(self.keys) == 0:
            return 0
        key = _encode_pair(u, w, self.vocab_size)
        i = int(np.searchsorted(self.keys, key))
        return int(i < len(self.keys) and self.keys[i] == key)

    def pairs(self) -> list[tuple[int, int]]:
        """Decoded (min_id, max_id) pairs, sorted."""
        return [(int(k) // self.vocab_size, int(k) % self.vocab_size) for k in self.keys]

    def member_ids(self) -> np.ndarray:
        """Distinct word ids that appear in at least one pair."""
        if len(self.keys) == 0:
            return np.empty(0, dtype=np.int64)
        flat = np.concatenate([self.keys // self.vocab_size, self.keys % self.vocab_size])
        return np.unique(flat)

    def save(self, path: str | Path, vocab: Vocabulary) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"#window\t{self.window}\n")
            fh.write(f"#vocab_checksum\t{self.vocab_checksum}\n")
            lines = []
            for a, b in self.pairs():
                wa, wb = vocab.words[a], vocab.words[b]
                if wb < wa:
                    wa, wb = wb, wa
                lines.append(f"{wa}\t{wb}\n")
            fh.writelines(sorted(lines))

    @classmethod
    def load(cls, path: str | Path, vocab: Vocabulary) -> "PairTable":
        window = 0
        checksum = ""
        keys = set()
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                if line.startswith("#"):
                    key, _, val = line[1:].partition("\t")
                    if key == "window":
                        window = int(val)
                    elif key == "vocab_checksum":
                        checksum = val
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise PairFormatError(f"{path}:{lineno}: expected word_a<TAB>word_b")
                wa, wb = parts
                if wa not in vocab or wb not in vocab:
                    raise PairFormatError(f"{path}:{lineno}: word not in vocabulary")
                u, w = vocab.id_of[wa], vocab.id_of[wb]
                if u == w:
                    raise PairFormatError(f"{path}:{lineno}: self-pair {wa}")
                keys.add(_encode_pair(u, w, len(vocab)))
        if checksum and checksum != vocab.checksum():
            raise PairTableMismatchError(
                f"{path}: pair table bound to vocabulary {checksum}, "
                f"got {vocab.checksum()}"
            )
        return cls(
            keys=np.asarray(sorted(keys), dtype=np.int64),
            vocab_size=len(vocab),
            window=window,
            vocab_checksum=checksum or vocab.checksum(),
        )


@dataclass
class PairStats:
    """Coverage statistics from pair extraction."""

    target_tokens: int
    in_vocab_tokens: int
    pair_count: int

    @property
    def coverage(self) -> float:
        return self.in_vocab_tokens / self.target_tokens if self.target_tokens else 0.0


def extract_pairs(
    sentences: Iterable[Sequence[str]], vocab: Vocabulary, c: int
) -> tuple[PairTable, PairStats]:
    """Collect unordered in-vocabulary pairs within distance c on any line.

    OOV tokens are removed before windowing, matching training-window
    semantics. An empty target corpus yields an empty table plus a warning.
    """
    if c < 1:
        raise ValueError(f"window must be >= 1, got {c}")
    vsize = len(vocab)
    keys: set[int] = set()
    total = 0
    in_vocab = 0
    for sent in sentences:
        total += len(sent)
        ids = vocab.encode(sent)
        in_vocab += len(ids)
        n = len(ids)
        for t in range(n):
            for j in range(t + 1, min(n, t + c + 1)):
                if ids[t] != ids[j]:
                    keys.add(_encode_pair(ids[t], ids[j], vsize))
    if total == 0:
        warnings.warn("empty target corpus: pair table is empty", EmptyTargetCorpusWarning)
    table = PairTable(
        keys=np.asarray(sorted(keys), dtype=np.int64),
        vocab_size=vsize,
        window=c,
        vocab_checksum=vocab.checksum(),
    )
    return table, PairStats(target_tokens=total, in_vocab_tokens=in_vocab, pair_count=len(keys))


@dataclass
class DomainFrequencies:
    """Relative token frequencies of vocabulary words in two corpora.

    Frequencies are corpus-relative: count of the word divided by the raw
    token count of the corpus, so each map sums to <= 1 (strictly below 1
    when out-of-vocabulary tokens exist). Words absent from a corpus get 0.
    """

    words: list[str]
    rel_freq_source: np.ndarray  # float64 per word index
    rel_freq_target: np.ndarray

    def dice(self, i: int) -> float:
        return dice_coefficient(float(self.rel_freq_source[i]), float(self.rel_freq_target[i]))


def dice_coefficient(f_source: float, f_target: float) -> float:
    """Sorensen-Dice overlap of two relative frequencies; 0 when both are 0."""
    denom = f_source + f_target
    if denom == 0.0:
        return 0.0
    return 2.0 * f_source * f_target / denom


def domain_frequencies(
    words: Sequence[str],
    source_sentences: Iterable[Sequence[str]],
    target_sentences: Iterable[Sequence[str]],
) -> DomainFrequencies:
    """Compute per-word relative frequencies in the source and target corpora."""
    index = {w: i for i, w in enumerate(words)}
    freqs = []
    for sentences in (source_sentences, target_sentences):
        counts = np.zeros(len(words), dtype=np.float64)
        total = 0
        for sent in sentences:
            total += len(sent)
            for tok in sent:
                i = index.get(tok)
                if i is not None:
                    counts[i] += 1
        freqs.append(counts / total if total else counts)
    return DomainFrequencies(
        words=list(words), rel_freq_source=freqs[0], rel_freq_target=freqs[1]
    )


def frequencies_from_files(
    words: Sequence[str],
    source_path: str | Path,
    target_path: str | Path,
    lowercase: bool = True,
) -> DomainFrequencies:
    return domain_frequencies(
        words,
        read_sentences(source_path, lowercase=lowercase),
        read_sentences(target_path, lowercase=lowercase),
    )
