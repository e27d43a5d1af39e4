"""Embedding analyses: shift vs. frequency, neighbors, clusters, 2-D PCA."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from embda.model import WordVectors, cosine_rows
from embda.pairs import DomainFrequencies


class NoCommonWordsError(ValueError):
    """The two vector files share no words."""


class UnknownWordError(KeyError):
    """A query word is not in the vector file."""


class TooFewWordsError(ValueError):
    """Not enough of the requested words are present."""


@dataclass
class ShiftRow:
    word: str
    dice: float
    shift: float  # 1 - cosine(source vector, adapted vector), in [0, 2]


@dataclass
class ShiftReport:
    """Per-word embedding shift against cross-domain Dice frequency."""

    rows: list[ShiftRow]

    def binned_summary(self, bins: int = 10) -> list[tuple[float, float, int, float]]:
        """(lo, hi, count, mean shift) per equal-width dice bin over [0, max dice]."""
        if not self.rows:
            return []
        max_dice = max(r.dice for r in self.rows)
        if max_dice == 0.0:
            return [(0.0, 0.0, len(self.rows),
                     float(np.mean([r.shift for r in self.rows])))]
        edges = np.linspace(0.0, max_dice, bins + 1)
        out = []
        for i in range(bins):
            lo, hi = float(edges[i]), float(edges[i + 1])
            members = [r.shift for r in self.rows
                       if (lo <= r.dice < hi) or (i == bins - 1 and r.dice == hi)]
            out.append((lo, hi, len(members),
                        float(np.mean(members)) if members else float("nan")))
        return out

    def threshold_summary(self, threshold: float = 0.05) -> tuple[float, float]:
        """Mean shift for words with dice above vs. at-or-below the threshold (nan if empty)."""
        above = [r.shift for r in self.rows if r.dice > threshold]
        below = [r.shift for r in self.rows if r.dice <= threshold]
        mean = lambda xs: float(np.mean(xs)) if xs else float("nan")
        return mean(above), mean(below)

    def to_tsv(self) -> str:
        lines = ["#word\tdice\tshift"]
        for r in self.rows:
            lines.append(f"{r.word}\t{r.dice:.6g}\t{r.shift:.6g}")
        return "\n".join(lines) + "\n"


def shift_report(
    source: WordVectors, adapted: WordVectors, freqs: DomainFrequencies
) -> ShiftReport:
    """Per-word (dice, 1 - cosine) rows over the common vocabulary.

    Rows are sorted by dice descending (word ascending on ties). Words
    with a zero vector on either side are skipped.
    """
    if source.dim != adapted.dim:
        raise ValueError(f"dimension mismatch: {source.dim} vs {adapted.dim}")
    dice_of = {w: freqs.dice(i) for i, w in enumerate(freqs.words)}
    rows = []
    common = 0
    for i, word in enumerate(source.words):
        j = adapted.id_of.get(word)
        if j is None:
            continue
        common += 1
        a = source.matrix[i].astype(np.float64)
        b = adapted.matrix[j].astype(np.float64)
        na, nb = np.linalg.norm(a), np.linalg.norm(b)
        if na == 0.0 or nb == 0.0:
            continue
        shift = 1.0 - float(a @ b / (na * nb))
        rows.append(ShiftRow(word=word, dice=dice_of.get(word, 0.0), shift=shift))
    if common == 0:
        raise NoCommonWordsError("vector files share no words")
    rows.sort(key=lambda r: (-r.dice, r.word))
    return ShiftReport(rows=rows)


def _edit_distance_at_most(a: str, b: str, limit: int = 2) -> bool:
    if abs(len(a) - len(b)) > limit:
        return False
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[-1] + 1, prev[j - 1] + (ca != cb)))
        if min(cur) > limit:
            return False
        prev = cur
    return prev[-1] <= limit


def nearest_neighbors(
    vecs: WordVectors, query: str, k: int
) -> list[tuple[str, float]]:
    """Top-k words by cosine to the query vector (exact full scan).

    The query itself is excluded; ties break by word id.
    """
    qi = vecs.id_of.get(query)
    if qi is None:
        close = [w for w in vecs.words if _edit_distance_at_most(query, w)][:10]
        hint = f"; did you mean: {', '.join(close)}" if close else ""
        raise UnknownWordError(f"unknown word {query!r}{hint}")
    if k >= len(vecs):
        raise ValueError(f"k must be < vocabulary size {len(vecs)}")
    if k <= 0:
        return []
    mat = vecs.matrix.astype(np.float64)
    q = mat[qi]
    qn = np.linalg.norm(q)
    norms = np.linalg.norm(mat, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        sims = mat @ q / (norms * qn)
    sims[qi] = -np.inf
    sims = np.where(np.isfinite(sims), sims, -np.inf)
    order = np.lexsort((np.arange(len(sims)), -sims))[:k]
    return [(vecs.words[i], float(sims[i])) for i in order]


def cluster_tightness(vecs: WordVectors, words: Sequence[str]) -> float:
    """Mean pairwise cosine distance over all unordered pairs of the words."""
    ids = [vecs.id_of[w] for w in words if w in vecs.id_of]
    if len(ids) < 2:
        raise TooFewWordsError(
            f"need at least 2 resolvable words, got {len(ids)} of {len(words)}"
        )
    dists = []
    for a in range(len(ids)):
        for b in range(a + 1, len(ids)):
            dists.append(1.0 - cosine_rows(vecs.matrix, ids[a], ids[b]))
    return float(np.mean(dists))


@dataclass
class PcaProjection:
    """2-D coordinates of selected words on the top-2 principal components."""

    words: list[str]
    coords: np.ndarray  # float64, len(words) x 2
    components: np.ndarray  # 2 x dim
    explained_variance: tuple[float, float]

    def to_tsv(self) -> str:
        lines = [
            f"#explained_variance\t{self.explained_variance[0]:.6g}"
            f"\t{self.explained_variance[1]:.6g}",
            "#word\tx\ty",
        ]
        for w, (x, y) in zip(self.words, self.coords):
            lines.append(f"{w}\t{x:.6g}\t{y:.6g}")
        return "\n".join(lines) + "\n"


def _power_iteration(a: np.ndarray, ortho_to: np.ndarray | None,
                     tol: float = 1e-9, max_iter: int = 1000) -> tuple[np.ndarray, float]:
    """Leading eigenvector/eigenvalue of symmetric PSD ``a`` by power iteration.

    ``ortho_to`` forces iterates orthogonal to an already-found component.
    Returns (zero vector, 0) when the matrix has no mass in the subspace.
    """
    d = a.shape[0]
    rng = np.random.default_rng(0)
    v = rng.standard_normal(d)
    if ortho_to is not None:
        v -= (v @ ortho_to) * ortho_to
    nv = np.linalg.norm(v)
    if nv == 0.0:
        return np.zeros(d), 0.0
    v /= nv
    for _ in range(max_iter):
        w = a @ v
        if ortho_to is not None:
            w -= (w @ ortho_to) * ortho_to
        nw = np.linalg.norm(w)
        if nw < 1e-300:
            return np.zeros(d), 0.0
        w /= nw
        if np.linalg.norm(w - v) < tol:
            v = w
            break
        v = w
    lam = float(v @ a @ v)
    if lam < tol:
        return np.zeros(d), 0.0
    return v, lam


def _fix_sign(v: np.ndarray) -> np.ndarray:
    for x in v:
        if abs(x) > 1e-12:
            return -v if x < 0 else v
    return v


def pca_project(vecs: WordVectors, words: Sequence[str]) -> PcaProjection:
    """Project the selected words' vectors onto their top-2 principal components.

    Mean-centers the selected vectors, then finds the top-2 eigenvectors
    of the sample covariance by orthogonalized power iteration. Each
    component's first nonzero coordinate is made positive. A rank-1
    selection yields a zero second component with zero variance.
    """
    ids = [vecs.id_of[w] for w in words if w in vecs.id_of]
    kept = [w for w in words if w in vecs.id_of]
    if len(ids) < 3:
        raise TooFewWordsError(
            f"need at least 3 resolvable words, got {len(ids)} of {len(words)}"
        )
    if vecs.dim < 2:
        raise ValueError("vectors must have dimension >= 2")
    x = vecs.matrix[ids].astype(np.float64)
    x -= x.mean(axis=0)
    cov = x.T @ x / (len(ids) - 1)
    c1, ev1 = _power_iteration(cov, None)
    c2, ev2 = _power_iteration(cov, c1 if ev1 > 0 else None)
    c1, c2 = _fix_sign(c1), _fix_sign(c2)
    coords = np.stack([x @ c1, x @ c2], axis=1)
    return PcaProjection(
        words=kept,
        coords=coords,
        components=np.stack([c1, c2]),
        explained_variance=(ev1, ev2),
    )
