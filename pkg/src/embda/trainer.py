"""SGD training loop for the four embedding modes."""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from embda import kernels
from embda.corpus import NegativeSamplingTable, build_ns_table, encode_corpus
from embda.model import MODES, EmbeddingModel
from embda.pairs import PairTable, PairTableMismatchError

_MODE_CODE = {"sg": kernels.MODE_SG, "cbow": kernels.MODE_CBOW,
              "sg-di": kernels.MODE_SG_DI, "cbow-da": kernels.MODE_CBOW_DA}

DEFAULT_LR = {"sg": 0.025, "sg-di": 0.025, "cbow": 0.05, "cbow-da": 0.05}


class TrainDivergedError(FloatingPointError):
    """A parameter matrix went non-finite during training."""


def sigmoid(x: float) -> float:
    """Logistic function with the trainer's saturation clamp at |x| = 6."""
    x = max(-kernels.SIGMOID_CLAMP, min(kernels.SIGMOID_CLAMP, x))
    return 1.0 / (1.0 + math.exp(-x))


@dataclass
class TrainConfig:
    """Hyperparameters for one training run.

    Defaults follow the standard setup: 200 dimensions, window 5,
    10 negative samples, minimum count 5 at vocabulary time.
    """

    mode: str = "sg"
    dim: int = 200
    window: int = 5
    negatives: int = 10
    epochs: int = 5
    lr: float | None = None  # default 0.025 for sg-family, 0.05 for cbow-family
    min_lr: float | None = None  # default 1e-4 * lr
    indicator_weight: float = 1.0
    workers: int = 1
    seed: int = 1
    ns_power: float = 0.75
    dynamic_window: bool = False
    subsample: float = 0.0  # 0 disables frequent-word subsampling
    lowercase: bool = True
    sigmoid_table: bool = False

    def resolved_lr(self) -> tuple[float, float]:
        lr0 = self.lr if self.lr is not None else DEFAULT_LR[self.mode]
        min_lr = self.min_lr if self.min_lr is not None else 1e-4 * lr0
        return lr0, min_lr

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.dim < 1 or self.window < 1 or self.workers < 1:
            raise ValueError("dim, window, and workers must be >= 1")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.negatives < 0:
            raise ValueError("negatives must be >= 0")
        if self.indicator_weight < 0:
            raise ValueError("indicator_weight must be >= 0")
        lr0, min_lr = self.resolved_lr()
        if not 0 < min_lr <= lr0:
            raise ValueError(f"need 0 < min_lr <= lr, got {min_lr} / {lr0}")


@dataclass
class EpochStats:
    epoch: int
    tokens_per_sec: float
    mean_pos_sigma: float
    mean_ind_sigma: float | None


@dataclass
class TrainStats:
    epochs: list[EpochStats] = field(default_factory=list)

    def to_tsv(self) -> str:
        lines = ["epoch\ttokens_per_sec\tmean_pos_sigma\tmean_ind_sigma"]
        for e in self.epochs:
            ind = "" if e.mean_ind_sigma is None else f"{e.mean_ind_sigma:.6f}"
            lines.append(f"{e.epoch}\t{e.tokens_per_sec:.0f}\t{e.mean_pos_sigma:.6f}\t{ind}")
        return "\n".join(lines) + "\n"


def _shard_bounds(offsets: np.ndarray, workers: int) -> list[tuple[int, int]]:
    """Split sentences into contiguous shards of roughly equal token mass."""
    n_sent = len(offsets) - 1
    total = int(offsets[-1])
    bounds = []
    begin = 0
    for w in range(workers):
        target = total * (w + 1) // workers
        end = int(np.searchsorted(offsets, target, side="left"))
        end = max(begin, min(end, n_sent))
        if w == workers - 1:
            end = n_sent
        bounds.append((begin, end))
        begin = end
    return bounds


def train(
    model: EmbeddingModel,
    corpus_path: str | Path,
    config: TrainConfig,
    pair_table: PairTable | None = None,
    ns_table: NegativeSamplingTable | None = None,
) -> TrainStats:
    """Run epochs of negative-sampling SGD over the corpus file.

    The learning rate decays linearly from lr to min_lr over the total
    scheduled tokens (epochs x in-vocabulary corpus tokens). With
    workers > 1, updates to the shared matrices are unsynchronized
    (lost updates tolerated); single-worker runs are bit-deterministic
    under a fixed seed.
    """
    config.validate()
    if config.mode != model.mode:
        raise ValueError(f"model initialized for mode {model.mode!r}, config says {config.mode!r}")
    vocab = model.vocab
    if config.mode in ("sg-di", "cbow-da"):
        if pair_table is None:
            raise ValueError(f"mode {config.mode} requires a pair table")
        if pair_table.vocab_checksum != vocab.checksum():
            raise PairTableMismatchError(
                f"pair table bound to vocabulary {pair_table.vocab_checksum}, "
                f"model vocabulary is {vocab.checksum()}"
            )
    stats = TrainStats()
    if config.epochs == 0:
        return stats
    if ns_table is None:
        ns_table = build_ns_table(vocab, power=config.ns_power)

    ids, offsets = encode_corpus(corpus_path, vocab, lowercase=config.lowercase)
    total_tokens = int(len(ids))
    if total_tokens == 0:
        return stats

    # sg-di with an empty table disables the indicator channel outright,
    # making the run identical to plain sg (the extreme-case reduction).
    pair_keys = (
        pair_table.keys if config.mode in ("sg-di", "cbow-da") and pair_table is not None
        else np.empty(0, dtype=np.int64)
    )
    indicator = model.indicator
    if indicator is None:
        indicator = np.zeros((1, model.dim), dtype=np.float32)  # unused placeholder

    keep_prob = np.ones(len(vocab), dtype=np.float64)
    use_subsample = config.subsample > 0.0
    if use_subsample:
        freq = vocab.counts / max(1, total_tokens)
        with np.errstate(divide="ignore"):
            ratio = config.subsample / np.where(freq > 0, freq, 1.0)
        keep_prob = np.minimum(1.0, np.sqrt(ratio) + ratio)

    lr0, min_lr = config.resolved_lr()
    mode_code = _MODE_CODE[config.mode]
    total_scheduled = float(config.epochs * total_tokens) + 1.0
    shards = _shard_bounds(offsets, config.workers)
    shard_token_offsets = [int(offsets[b]) for b, _ in shards]

    for epoch in range(config.epochs):
        epoch_stats = np.zeros((config.workers, 5), dtype=np.float64)
        t0 = time.perf_counter()

        def run_worker(w: int) -> None:
            begin, end = shards[w]
            if begin >= end:
                return
            state = kernels.seed_state(config.seed * 1_000_003 + epoch * 8191 + w)
            processed0 = epoch * total_tokens + shard_token_offsets[w]
            kernels.train_shard(
                ids, offsets, begin, end, model.input, model.output, indicator,
                ns_table.cumulative, pair_keys, len(vocab), mode_code,
                config.window, config.negatives, config.dynamic_window,
                keep_prob, use_subsample, lr0, min_lr, config.indicator_weight,
                processed0, total_scheduled, state,
                kernels.SIGMOID_TABLE, config.sigmoid_table, epoch_stats[w],
            )

        if config.workers == 1:
            run_worker(0)
        else:
            with ThreadPoolExecutor(max_workers=config.workers) as pool:
                list(pool.map(run_worker, range(config.workers)))

        elapsed = time.perf_counter() - t0
        agg = epoch_stats.sum(axis=0)
        try:
            model.check_finite()
        except FloatingPointError as exc:
            raise TrainDivergedError(
                f"epoch {epoch}: {exc} after {int(agg[4])} tokens"
            ) from exc
        stats.epochs.append(EpochStats(
            epoch=epoch,
            tokens_per_sec=agg[4] / elapsed if elapsed > 0 else 0.0,
            mean_pos_sigma=agg[1] / agg[0] if agg[0] else 0.0,
            mean_ind_sigma=(agg[3] / agg[2] if agg[2] else None)
            if config.mode == "sg-di" else None,
        ))
    return stats
