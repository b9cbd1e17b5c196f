"""Sentiment shift between periods via embedding transfer.

A classifier trained on period-i features is re-applied to the same test
texts featurized with another period's aligned embeddings; the change in its
mean predicted sentiment is the transfer delta for cell (i, j).
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy import optimize, special, stats

from .align import AlignedChain
from .corpus import PeriodCorpus
from .sgns import EmbeddingSpace

logger = logging.getLogger(__name__)

LABELS = ("negative", "neutral", "positive")
LABEL_VALUE = {"negative": -1.0, "neutral": 0.0, "positive": 1.0}
_LABEL_ALIASES = {"neg": "negative", "neu": "neutral", "pos": "positive", "-1": "negative", "0": "neutral", "1": "positive"}
ZERO_VARIANCE_P = 1e-12
MAX_ITER = 1000
GRAD_TOL = 1e-6


class SentimentError(ValueError):
    pass


def parse_label(raw: str) -> str:
    label = raw.strip().lower()
    label = _LABEL_ALIASES.get(label, label)
    if label not in LABEL_VALUE:
        raise SentimentError(f"unknown sentiment label {raw!r}")
    return label


@dataclass(frozen=True)
class SentimentExample:
    tokens: tuple[str, ...]
    label: str

    def __post_init__(self):
        if not self.tokens:
            raise SentimentError("example has no tokens")
        if self.label not in LABEL_VALUE:
            raise SentimentError(f"unknown sentiment label {self.label!r}")


def featurize(example: SentimentExample, space: EmbeddingSpace) -> tuple[np.ndarray, bool]:
    """Mean vector of in-vocabulary tokens; ``(zeros, True)`` when all are OOV."""
    index = space.vocab.index
    rows = [index[t] for t in example.tokens if t in index]
    if not rows:
        return np.zeros(space.dim), True
    return np.asarray(space.input_vectors, dtype=np.float64)[rows].mean(axis=0), False


def featurize_all(examples: Sequence[SentimentExample], space: EmbeddingSpace) -> tuple[np.ndarray, np.ndarray]:
    feats = np.empty((len(examples), space.dim))
    oov = np.zeros(len(examples), dtype=bool)
    for n, ex in enumerate(examples):
        feats[n], oov[n] = featurize(ex, space)
    return feats, oov


@dataclass(frozen=True)
class SentimentClassifier:
    """Multinomial logistic regression over averaged embeddings."""

    weights: np.ndarray  # (n_classes, d)
    biases: np.ndarray
    classes: tuple[str, ...]
    training_period: int
    final_loss: float = float("nan")
    n_iter: int = 0

    @property
    def feature_dim(self) -> int:
        return self.weights.shape[1]

    def scores(self, feats: np.ndarray) -> np.ndarray:
        return feats @ self.weights.T + self.biases

    def predict(self, feats: np.ndarray) -> list[str]:
        return [self.classes[k] for k in np.argmax(self.scores(feats), axis=1)]

    def save(self, path: str | Path) -> None:
        np.savez(
            path,
            weights=self.weights,
            biases=self.biases,
            classes=np.array(self.classes, dtype=np.str_),
            training_period=np.int64(self.training_period),
            final_loss=np.float64(self.final_loss),
            n_iter=np.int64(self.n_iter),
        )

    @classmethod
    def load(cls, path: str | Path) -> "SentimentClassifier":
        with np.load(path, allow_pickle=False) as z:
            return cls(
                z["weights"], z["biases"], tuple(str(c) for c in z["classes"]),
                int(z["training_period"]), float(z["final_loss"]), int(z["n_iter"]),
            )


def _objective(theta, x, y_onehot, reg):
    n, d = x.shape
    k = y_onehot.shape[1]
    w = theta[: k * d].reshape(k, d)
    b = theta[k * d :]
    z = x @ w.T + b
    logp = z - special.logsumexp(z, axis=1, keepdims=True)
    loss = -np.sum(y_onehot * logp) / n + 0.5 * reg * np.sum(w * w)
    resid = (np.exp(logp) - y_onehot) / n
    gw = resid.T @ x + reg * w
    gb = resid.sum(axis=0)
    return loss, np.concatenate([gw.ravel(), gb])


def classifier_loss(clf: SentimentClassifier, x: np.ndarray, labels: Sequence[str], reg: float) -> float:
    y = _onehot(labels, clf.classes)
    theta = np.concatenate([clf.weights.ravel(), clf.biases])
    return float(_objective(theta, x, y, reg)[0])


def _onehot(labels, classes):
    pos = {c: k for k, c in enumerate(classes)}
    y = np.zeros((len(labels), len(classes)))
    y[np.arange(len(labels)), [pos[l] for l in labels]] = 1.0
    return y


def fit_features(
    x: np.ndarray,
    labels: Sequence[str],
    reg: float | None = None,
    training_period: int = 0,
    init_seed: int | None = None,
) -> SentimentClassifier:
    """Minimise mean cross-entropy + ``reg/2 * ||W||^2`` (biases unpenalised).

    ``reg=None`` uses ``1/n``, the same minimiser as an inverse strength
    ``C = 1`` on the summed loss. Starts from zero unless ``init_seed`` is given.
    """
    x = np.asarray(x, dtype=np.float64)
    classes = tuple(c for c in LABELS if c in set(labels))
    if len(classes) < 2:
        raise SentimentError(f"training set needs at least two classes, got {classes}")
    n, d = x.shape
    reg = 1.0 / n if reg is None else float(reg)
    y = _onehot(labels, classes)
    k = len(classes)
    theta0 = np.zeros(k * (d + 1))
    if init_seed is not None:
        theta0 = np.random.default_rng(init_seed).normal(scale=1.0, size=theta0.shape)
    res = optimize.minimize(
        _objective, theta0, args=(x, y, reg), jac=True, method="L-BFGS-B",
        options={"maxiter": MAX_ITER, "gtol": GRAD_TOL / 10, "ftol": 1e-15, "maxcor": 20},
    )
    grad_norm = float(np.linalg.norm(res.jac))
    if grad_norm >= GRAD_TOL and res.nit < MAX_ITER:
        logger.debug("optimizer stopped at gradient norm %.2e: %s", grad_norm, res.message)
    theta = res.x
    w = theta[: k * d].reshape(k, d).copy()
    b = theta[k * d :].copy()
    if not (np.isfinite(w).all() and np.isfinite(b).all()):
        raise SentimentError("classifier parameters are not finite")
    return SentimentClassifier(w, b, classes, training_period, float(res.fun), int(res.nit))


def train_classifier(
    train_set: Sequence[SentimentExample],
    space: EmbeddingSpace,
    reg: float | None = None,
    init_seed: int | None = None,
) -> SentimentClassifier:
    feats, oov = featurize_all(train_set, space)
    labels = [ex.label for ex, bad in zip(train_set, oov) if not bad]
    if len(labels) == 0:
        raise SentimentError("every training example is out of vocabulary")
    return fit_features(feats[~oov], labels, reg, space.period_index, init_seed)


def sentiment_values(clf: SentimentClassifier, feats: np.ndarray, mode: str = "hard") -> np.ndarray:
    if mode == "hard":
        return np.array([LABEL_VALUE[c] for c in clf.predict(feats)])
    if mode == "expected":
        z = clf.scores(feats)
        probs = np.exp(z - special.logsumexp(z, axis=1, keepdims=True))
        return probs @ np.array([LABEL_VALUE[c] for c in clf.classes])
    raise SentimentError(f"unknown mode {mode!r}")


def mean_sentiment(
    clf: SentimentClassifier,
    test_set: Sequence[SentimentExample],
    space: EmbeddingSpace,
    mode: str = "hard",
) -> float:
    """Average predicted sentiment on ``test_set`` (labels mapped to -1/0/+1).

    All-OOV examples are left out.
    """
    if clf.feature_dim != space.dim:
        raise SentimentError(f"classifier expects dim {clf.feature_dim}, space has {space.dim}")
    feats, oov = featurize_all(test_set, space)
    if oov.all():
        raise SentimentError("no test example has an in-vocabulary token")
    if oov.any():
        logger.debug("excluded %d all-OOV test examples", int(oov.sum()))
    return float(sentiment_values(clf, feats[~oov], mode).mean())


@dataclass(frozen=True)
class SentimentTransferMatrix:
    values: np.ndarray  # values[i, j] = d_{i<-j}
    baselines: np.ndarray  # s_{i<-i}
    p_values: np.ndarray | None = None
    mode: str = "hard"

    def as_dict(self) -> dict:
        n = len(self.baselines)
        return {
            "periods": list(range(n)),
            "values": self.values.tolist(),
            "baselines": self.baselines.tolist(),
            "p_values": None if self.p_values is None else [
                [None if np.isnan(p) else float(p) for p in row] for row in self.p_values
            ],
            "mode": self.mode,
        }


def _check_dims(classifiers, chain):
    for clf in classifiers:
        for space in chain.spaces:
            if clf.feature_dim != space.dim:
                raise SentimentError(f"classifier dim {clf.feature_dim} does not match space dim {space.dim}")


def transfer_matrix(
    classifiers: Sequence[SentimentClassifier],
    chain: AlignedChain,
    test_set: Sequence[SentimentExample],
    mode: str = "hard",
) -> SentimentTransferMatrix:
    """Cell (i, j): mean sentiment of C_i with period-j features minus with period-i features."""
    n = chain.n_periods
    if len(classifiers) != n:
        raise SentimentError(f"need one classifier per period ({n}), got {len(classifiers)}")
    _check_dims(classifiers, chain)
    s = np.array([[mean_sentiment(classifiers[i], test_set, chain.spaces[j], mode) for j in range(n)] for i in range(n)])
    base = np.diag(s).copy()
    values = s - base[:, None]
    np.fill_diagonal(values, 0.0)
    return SentimentTransferMatrix(values, base, None, mode)


def stratified_folds(labels: Sequence[str], folds: int, seed: int = 0) -> np.ndarray:
    """Fold id per example, spreading every label round-robin after a seeded shuffle."""
    rng = np.random.default_rng(seed)
    labels = np.asarray(labels)
    fold_of = np.empty(len(labels), dtype=np.int64)
    offset = 0
    for label in LABELS:
        idx = np.flatnonzero(labels == label)
        rng.shuffle(idx)
        fold_of[idx] = (np.arange(len(idx)) + offset) % folds
        offset += len(idx)
    return fold_of


def one_sided_pvalue(deltas) -> float:
    """One-sample t-test of ``mean > 0``.

    With zero spread the test degenerates; a positive mean then gets
    ``ZERO_VARIANCE_P``, a zero mean 0.5, a negative mean ``1 - ZERO_VARIANCE_P``.
    """
    deltas = np.asarray(deltas, dtype=np.float64)
    if np.ptp(deltas) == 0.0:
        m = deltas[0]
        return ZERO_VARIANCE_P if m > 0 else (0.5 if m == 0 else 1.0 - ZERO_VARIANCE_P)
    return float(stats.ttest_1samp(deltas, 0.0, alternative="greater").pvalue)


def fold_deltas(
    chain: AlignedChain,
    dataset: Sequence[SentimentExample],
    i: int,
    j: int,
    folds: int = 10,
    reg: float | None = None,
    seed: int = 0,
    mode: str = "hard",
) -> np.ndarray:
    labels = [ex.label for ex in dataset]
    present = {l for l in labels}
    if len(present) < 2:
        raise SentimentError("dataset has a single class; cannot build folds")
    if len(dataset) < folds:
        raise SentimentError(f"{len(dataset)} examples cannot fill {folds} folds")
    space_i, space_j = chain.spaces[i], chain.spaces[j]
    feats_i, oov_i = featurize_all(dataset, space_i)
    feats_j, oov_j = featurize_all(dataset, space_j)
    fold_of = stratified_folds(labels, folds, seed)
    deltas = []
    for f in range(folds):
        train = (fold_of != f) & ~oov_i
        test = (fold_of == f) & ~oov_i & ~oov_j
        train_labels = [labels[n] for n in np.flatnonzero(train)]
        if len(set(train_labels)) < 2:
            raise SentimentError(f"fold {f} training split has a single class")
        if not test.any():
            raise SentimentError(f"fold {f} has no usable held-out examples")
        clf = fit_features(feats_i[train], train_labels, reg, i)
        s_ii = sentiment_values(clf, feats_i[test], mode).mean()
        s_ij = sentiment_values(clf, feats_j[test], mode).mean()
        deltas.append(s_ij - s_ii)
    return np.array(deltas)


def significance(
    chain: AlignedChain,
    dataset: Sequence[SentimentExample],
    i: int,
    j: int,
    folds: int = 10,
    reg: float | None = None,
    seed: int = 0,
    mode: str = "hard",
) -> float:
    """p-value that the transfer delta for cell (i, j) is greater than zero, from k-fold CV."""
    return one_sided_pvalue(fold_deltas(chain, dataset, i, j, folds, reg, seed, mode))


def significance_matrix(chain, dataset, folds=10, reg=None, seed=0, mode="hard") -> np.ndarray:
    n = chain.n_periods
    p = np.full((n, n), np.nan)
    for i in range(n):
        for j in range(n):
            if i != j:
                p[i, j] = significance(chain, dataset, i, j, folds, reg, seed, mode)
    return p


def _resolve_polarity(key: str, lexicon: Mapping[str, str]) -> str | None:
    pol = lexicon.get(key)
    if pol is None and "#" in key:
        pol = lexicon.get(key.rpartition("#")[0])
    return pol


def lexicon_positive_share(corpus: PeriodCorpus, lexicon: Mapping[str, str]) -> float:
    """Positive tokens over all lexicon-covered tokens in one period."""
    if not lexicon:
        raise SentimentError("lexicon is empty")
    pos = covered = 0
    for key, count in zip(corpus.vocab.keys, corpus.vocab.counts):
        pol = _resolve_polarity(key, lexicon)
        if pol is None:
            continue
        covered += int(count)
        if pol == "positive":
            pos += int(count)
    if covered == 0:
        raise SentimentError(f"no token of period {corpus.period_index} is covered by the lexicon")
    return pos / covered


def load_dataset(path: str | Path) -> list[SentimentExample]:
    """Read ``label<TAB>space separated token keys`` rows."""
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh, delimiter="\t", quoting=csv.QUOTE_NONE), 1):
            if not row or row[0].startswith("#"):
                continue
            if len(row) < 2:
                raise SentimentError(f"{path}:{lineno}: expected label and tokens")
            if lineno == 1 and row[0].strip().lower() == "label":
                continue
            tokens = tuple(row[1].split())
            if not tokens:
                continue
            out.append(SentimentExample(tokens, parse_label(row[0])))
    return out


def load_lexicon(path: str | Path) -> dict[str, str]:
    """Read ``word<TAB>positive|negative`` rows; keys are lowercased."""
    out = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh, delimiter="\t"), 1):
            if not row or row[0].startswith("#"):
                continue
            if len(row) < 2:
                raise SentimentError(f"{path}:{lineno}: expected word and polarity")
            pol = row[1].strip().lower()
            if pol not in ("positive", "negative"):
                if lineno == 1:
                    continue
                raise SentimentError(f"{path}:{lineno}: polarity must be positive or negative")
            word = row[0].strip()
            head, sep, tag = word.rpartition("#")
            out[f"{head.lower()}#{tag.upper()}" if sep else word.lower()] = pol
    return out
