"""Skip-gram with negative sampling, trained by (optionally asynchronous) SGD."""
from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from ._accel import HAVE_NUMBA
from .corpus import PeriodCorpus, Vocabulary, subsample_rate

logger = logging.getLogger(__name__)

NEG_EXPONENT = 0.75
CUM_TABLE_DOMAIN = 2**31 - 1
MIN_ALPHA_FRACTION = 1e-4


class TrainingError(RuntimeError):
    pass


@dataclass(frozen=True)
class Hyperparams:
    vector_size: int = 300
    window: int = 4
    negative: int = 5
    sample: float = 1e-5
    alpha: float = 0.02
    epochs: int = 5
    seed: int = 1
    workers: int = 1

    def __post_init__(self):
        checks = [
            (self.vector_size >= 1, "vector_size must be >= 1"),
            (self.window >= 1, "window must be >= 1"),
            (self.negative >= 0, "negative must be >= 0"),
            (self.sample >= 0, "sample must be >= 0"),
            (self.alpha > 0, "alpha must be > 0"),
            (self.epochs >= 1, "epochs must be >= 1"),
            (self.workers >= 1, "workers must be >= 1"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ValueError(msg)

    def replace(self, **changes) -> "Hyperparams":
        return replace(self, **changes)


@dataclass
class EmbeddingSpace:
    """Vocabulary with word (input) and context (output) vectors for one period."""

    vocab: Vocabulary
    input_vectors: np.ndarray
    output_vectors: np.ndarray | None = None
    period_index: int = 0
    epoch_losses: list[float] = field(default_factory=list)

    def __post_init__(self):
        if self.input_vectors.shape[0] != len(self.vocab):
            raise ValueError("row count of input_vectors must equal vocabulary size")
        if self.output_vectors is not None and self.output_vectors.shape != self.input_vectors.shape:
            raise ValueError("output_vectors must match input_vectors in shape")

    @property
    def dim(self) -> int:
        return self.input_vectors.shape[1]

    def __contains__(self, key: str) -> bool:
        return key in self.vocab

    def vector(self, key: str) -> np.ndarray:
        return self.input_vectors[self.vocab.index[key]]

    def freeze(self) -> "EmbeddingSpace":
        self.input_vectors.setflags(write=False)
        if self.output_vectors is not None:
            self.output_vectors.setflags(write=False)
        return self


class NegativeSampler:
    """Draws word ids with probability proportional to ``count ** 0.75``."""

    def __init__(self, counts, seed: int = 0, exponent: float = NEG_EXPONENT):
        self.cum_table = make_cum_table(counts, exponent)
        self.rng = np.random.default_rng(seed)

    @property
    def probabilities(self) -> np.ndarray:
        return np.diff(self.cum_table, prepend=0) / self.cum_table[-1]

    def draw(self, size: int, exclude: int | None = None) -> np.ndarray:
        out = self._draw(size)
        if exclude is not None:
            if len(self.cum_table) < 2:
                raise ValueError("cannot exclude the only word in the vocabulary")
            bad = out == exclude
            while bad.any():
                out[bad] = self._draw(int(bad.sum()))
                bad = out == exclude
        return out

    def _draw(self, size):
        r = self.rng.integers(0, self.cum_table[-1], size=size)
        return np.searchsorted(self.cum_table, r, side="right")


def make_cum_table(counts, exponent: float = NEG_EXPONENT, domain: int = CUM_TABLE_DOMAIN) -> np.ndarray:
    weights = np.asarray(counts, dtype=np.float64) ** exponent
    cum = np.round(np.cumsum(weights) / weights.sum() * domain).astype(np.int64)
    cum[-1] = domain
    return cum


def dynamic_window(window: int, rng: np.random.Generator) -> int:
    """Effective context radius, uniform on ``1..window``."""
    if window < 1:
        raise ValueError("window must be >= 1")
    return int(rng.integers(1, window + 1))


def lr_schedule(alpha: float, progress: float) -> float:
    if not 0.0 <= progress <= 1.0:
        raise ValueError("progress must lie in [0, 1]")
    return max(alpha * (1.0 - progress), MIN_ALPHA_FRACTION * alpha)


def sgns_pair_step(center: int, context: int, negatives, lr: float, space: EmbeddingSpace) -> float:
    """Apply one SGD step for a (center, context) pair and its negatives.

    The update follows the exact gradient of
    ``-log s(u_c . v_w) - sum_n log s(-u_n . v_w)`` with all dot products
    taken before any row is modified. Returns the loss before the update.
    """
    if lr <= 0:
        raise ValueError("lr must be positive")
    if space.output_vectors is None:
        raise ValueError("space has no output vectors")
    n = len(space.vocab)
    targets = np.concatenate([[context], np.asarray(negatives, dtype=np.int64).reshape(-1)]).astype(np.int64)
    if not (0 <= center < n) or targets.min() < 0 or targets.max() >= n:
        raise IndexError("word id out of range")
    syn0, syn1 = space.input_vectors, space.output_vectors
    if HAVE_NUMBA:
        grad = np.empty(len(targets))
        neu1e = np.empty(syn0.shape[1])
        return float(_kernels.pair_update_jit(syn0, syn1, int(center), targets, len(targets), float(lr), grad, neu1e))
    return _kernels.pair_update_numpy(syn0, syn1, int(center), targets, float(lr))


def _span_kernel(use_numba: bool | None):
    use = HAVE_NUMBA if use_numba is None else use_numba
    return _kernels.train_span_jit if use else _kernels.train_span_numpy


def train(corpus: PeriodCorpus, hp: Hyperparams = Hyperparams(), use_numba: bool | None = None) -> EmbeddingSpace:
    """Train SGNS vectors for one period.

    With ``hp.workers == 1`` the result is a deterministic function of the
    corpus and ``hp.seed``. With more workers, sentence shards are processed
    by threads that update the shared matrices without locking.
    """
    vocab = corpus.vocab
    if len(vocab) == 0 or corpus.tokens.size == 0:
        raise TrainingError("cannot train on an empty corpus")
    d = hp.vector_size
    rng = np.random.default_rng(hp.seed)
    syn0 = ((rng.random((len(vocab), d)) - 0.5) / d).astype(np.float32)
    syn1 = np.zeros((len(vocab), d), dtype=np.float32)

    keep = subsample_rate(vocab, hp.sample)
    cum_table = make_cum_table(vocab.counts)
    tokens, offsets = corpus.tokens, corpus.offsets
    max_len = int(np.diff(offsets).max())
    kernel = _span_kernel(use_numba)
    min_alpha = MIN_ALPHA_FRACTION * hp.alpha

    n_sent = corpus.n_sentences
    workers = min(hp.workers, n_sent)
    bounds = np.linspace(0, n_sent, workers + 1).astype(np.int64)
    states = [_kernels.seed_state(hp.seed * 7919 + w) for w in range(workers)]
    losses = []
    for epoch in range(hp.epochs):
        results = [None] * workers

        def run(w, epoch=epoch, results=results):
            lo, hi = int(bounds[w]), int(bounds[w + 1])
            span_words = max(int(offsets[hi] - offsets[lo]), 1)
            buf = np.empty(max_len, dtype=np.int64)
            results[w] = kernel(
                syn0, syn1, tokens, offsets, lo, hi, keep, cum_table,
                hp.window, hp.negative, hp.alpha, min_alpha, epoch, hp.epochs,
                span_words, states[w], buf,
            )

        if workers == 1:
            run(0)
        else:
            threads = [threading.Thread(target=run, args=(w,)) for w in range(workers)]
            for t in threads:
                t.start()
            for t in threads:
                t.join()
        loss = sum(r[0] for r in results)
        pairs = sum(r[1] for r in results)
        states = [int(r[2]) for r in results]
        mean_loss = loss / max(pairs, 1)
        if not np.isfinite(mean_loss) or not (np.isfinite(syn0).all() and np.isfinite(syn1).all()):
            raise TrainingError(f"non-finite values after epoch {epoch + 1} of period {corpus.period_index}")
        losses.append(float(mean_loss))
        logger.info("period %d epoch %d: %d pairs, mean loss %.4f", corpus.period_index, epoch + 1, pairs, mean_loss)

    return EmbeddingSpace(vocab, syn0, syn1, corpus.period_index, losses).freeze()
