"""Intrinsic quality checks: word-similarity correlation and synonym contrastive spread."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import stats

from .sgns import EmbeddingSpace


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class SimilarityPair:
    word_a: str
    word_b: str
    human_score: float

    def __post_init__(self):
        if self.word_a == self.word_b:
            raise EvaluationError(f"pair repeats {self.word_a!r}")
        if not np.isfinite(self.human_score):
            raise EvaluationError("human score must be finite")


@dataclass(frozen=True)
class SynonymItem:
    target: str
    synonym: str
    distractors: tuple[str, str, str]
    pos: str

    def __post_init__(self):
        if len(self.distractors) != 3:
            raise EvaluationError("a synonym item needs exactly three distractors")
        if self.synonym in self.distractors:
            raise EvaluationError(f"synonym {self.synonym!r} is also a distractor")
        if self.target in (self.synonym, *self.distractors):
            raise EvaluationError(f"target {self.target!r} repeats among its options")


@dataclass(frozen=True)
class SpearmanResult:
    rho: float
    p_value: float
    n_used: int
    n_skipped: int

    def as_dict(self) -> dict:
        return {"rho": self.rho, "p": self.p_value, "n_used": self.n_used, "n_skipped": self.n_skipped}


@dataclass(frozen=True)
class SpreadResult:
    pos: str
    mean_spread: float
    n_used: int
    n_skipped: int

    def as_dict(self) -> dict:
        return {"pos": self.pos, "mean_spread": self.mean_spread, "n_used": self.n_used, "n_skipped": self.n_skipped}


class KeyResolver:
    """Maps dataset words to vocabulary keys.

    Keys already of the form ``lemma#POS`` are used verbatim. Otherwise
    ``lemma#pos`` is tried when a POS hint is given, then the most frequent
    vocabulary entry sharing the bare lemma.
    """

    def __init__(self, space: EmbeddingSpace):
        self.space = space
        self._bare: dict[str, str] = {}
        for key in space.vocab.keys:  # id order = descending count, so first wins
            self._bare.setdefault(key.rpartition("#")[0] or key, key)

    def __call__(self, word: str, pos: str | None = None) -> str | None:
        word = word.strip().lower()
        vocab = self.space.vocab
        if "#" in word:
            head, _, tag = word.rpartition("#")
            word = f"{head}#{tag.upper()}"
            if word in vocab:
                return word
            word = head
        if pos is not None and f"{word}#{pos}" in vocab:
            return f"{word}#{pos}"
        if word in vocab:
            return word
        return self._bare.get(word)


def _unit(space: EmbeddingSpace, key: str) -> np.ndarray:
    v = np.asarray(space.vector(key), dtype=np.float64)
    n = np.linalg.norm(v)
    if n == 0:
        raise EvaluationError(f"zero vector for {key!r}")
    return v / n


def rank_pearson(x, y) -> float:
    """Spearman's rho as the Pearson correlation of average ranks."""
    rx = stats.rankdata(x)
    ry = stats.rankdata(y)
    rx -= rx.mean()
    ry -= ry.mean()
    denom = np.sqrt((rx @ rx) * (ry @ ry))
    if denom == 0:
        raise EvaluationError("rank correlation undefined for constant input")
    return float(rx @ ry / denom)


def t_pvalue(rho: float, n: int) -> float:
    if abs(rho) >= 1.0:
        return 0.0
    t = rho * np.sqrt((n - 2) / (1.0 - rho * rho))
    return float(2.0 * stats.t.sf(abs(t), n - 2))


def permutation_pvalue(x, y, rho: float, n_permutations: int = 10_000, seed: int = 0) -> float:
    rng = np.random.default_rng(seed)
    rx = stats.rankdata(x)
    ry = stats.rankdata(y)
    rx = (rx - rx.mean()) / np.linalg.norm(rx - rx.mean())
    ry = (ry - ry.mean()) / np.linalg.norm(ry - ry.mean())
    perms = rng.permuted(np.tile(ry, (n_permutations, 1)), axis=1)
    null = perms @ rx
    hits = int(np.sum(np.abs(null) >= abs(rho) - 1e-12))
    return (hits + 1) / (n_permutations + 1)


def spearman(
    pairs: Sequence[SimilarityPair],
    space: EmbeddingSpace,
    method: str = "t",
    n_permutations: int = 10_000,
    seed: int = 0,
) -> SpearmanResult:
    """Correlate cosine similarities with human scores over in-vocabulary pairs."""
    resolve = KeyResolver(space)
    human, model = [], []
    for pair in pairs:
        a, b = resolve(pair.word_a), resolve(pair.word_b)
        if a is None or b is None:
            continue
        human.append(pair.human_score)
        model.append(float(_unit(space, a) @ _unit(space, b)))
    n = len(human)
    if n < 3:
        raise EvaluationError(f"only {n} usable pairs; need at least 3")
    rho = rank_pearson(human, model)
    if method == "t":
        p = t_pvalue(rho, n)
    elif method == "permutation":
        p = permutation_pvalue(human, model, rho, n_permutations, seed)
    else:
        raise EvaluationError(f"unknown p-value method {method!r}")
    return SpearmanResult(rho, p, n, len(pairs) - n)


def contrastive_spread(items: Sequence[SynonymItem], space: EmbeddingSpace, pos: str) -> SpreadResult:
    """Mean of ``cos(target, synonym) - mean_d cos(target, d)`` over usable items of ``pos``.

    ``n_used + n_skipped`` equals the number of items tagged ``pos``.
    """
    resolve = KeyResolver(space)
    spreads = []
    total = 0
    for item in items:
        if item.pos != pos:
            continue
        total += 1
        keys = [resolve(w, pos) for w in (item.target, item.synonym, *item.distractors)]
        if any(k is None for k in keys):
            continue
        t, s, *ds = (_unit(space, k) for k in keys)
        spreads.append(t @ s - np.mean([t @ d for d in ds]))
    if not spreads:
        raise EvaluationError(f"no usable {pos} items")
    return SpreadResult(pos, float(np.mean(spreads)), len(spreads), total - len(spreads))


def load_similarity_pairs(path: str | Path) -> list[SimilarityPair]:
    pairs = []
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh, delimiter="\t"), 1):
            if not row or row[0].startswith("#"):
                continue
            try:
                pairs.append(SimilarityPair(row[0].strip(), row[1].strip(), float(row[2])))
            except (IndexError, ValueError) as exc:
                if lineno == 1:
                    continue  # header
                raise EvaluationError(f"{path}:{lineno}: {exc}") from None
    return pairs


def load_synonym_items(path: str | Path) -> list[SynonymItem]:
    """Read ``target, pos, synonym, distractor1..3`` rows."""
    items = []
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh, delimiter="\t"), 1):
            if not row or row[0].startswith("#"):
                continue
            if len(row) != 6:
                if lineno == 1:
                    continue
                raise EvaluationError(f"{path}:{lineno}: expected 6 columns, got {len(row)}")
            target, pos, syn, *ds = (c.strip() for c in row)
            if lineno == 1 and pos.lower() == "pos":
                continue
            items.append(SynonymItem(target, syn, tuple(ds), pos.upper()))
    return items
