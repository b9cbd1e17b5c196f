"""Cumulative semantic shift over an aligned chain and per-period neighbor traces."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .align import AlignedChain

logger = logging.getLogger(__name__)

NEIGHBOR_POOL = 1000
NEIGHBOR_KEEP = 20
NEIGHBOR_FREQ_FLOOR = 20
TOTAL_FREQ_FLOOR = 1000


class ShiftError(ValueError):
    pass


def cosine(u, v) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise ShiftError("cosine of a zero vector is undefined")
    return float(np.clip(u @ v / (nu * nv), -1.0, 1.0))


@dataclass(frozen=True)
class ShiftScore:
    word: str
    per_step: tuple[float, ...]
    cumulative: float

    def as_dict(self) -> dict:
        return {"word": self.word, "per_step": list(self.per_step), "cumulative": self.cumulative}


def _require_chain(chain) -> AlignedChain:
    if not isinstance(chain, AlignedChain):
        raise TypeError("shift scores are only defined on an AlignedChain; align the spaces first")
    return chain


def cumulative_shift(word: str, chain: AlignedChain) -> ShiftScore:
    """Sum of halved cosine distances between consecutive aligned vectors."""
    chain = _require_chain(chain)
    missing = [s.period_index for s in chain.spaces if word not in s.vocab]
    if missing:
        raise ShiftError(f"{word!r} missing from periods {missing}")
    vecs = chain.vectors(word)
    steps = tuple((1.0 - cosine(vecs[i], vecs[i + 1])) / 2.0 for i in range(len(vecs) - 1))
    return ShiftScore(word, steps, float(sum(steps)))


def shift_scores(chain: AlignedChain, words: Iterable[str] | None = None) -> list[ShiftScore]:
    """Vectorized :func:`cumulative_shift` for many words (default: the shared vocabulary)."""
    chain = _require_chain(chain)
    words = list(chain.shared.keys if words is None else words)
    stacks = []
    for space in chain.spaces:
        try:
            rows = [space.vocab.index[w] for w in words]
        except KeyError as exc:
            raise ShiftError(f"{exc.args[0]!r} missing from period {space.period_index}") from None
        m = np.asarray(space.input_vectors, dtype=np.float64)[rows]
        norms = np.linalg.norm(m, axis=1, keepdims=True)
        if (norms == 0).any():
            raise ShiftError(f"zero vector in period {space.period_index}")
        stacks.append(m / norms)
    steps = np.stack(
        [(1.0 - np.clip(np.einsum("ij,ij->i", stacks[i], stacks[i + 1]), -1.0, 1.0)) / 2.0 for i in range(len(stacks) - 1)],
        axis=1,
    )
    return [ShiftScore(w, tuple(float(x) for x in row), float(row.sum())) for w, row in zip(words, steps)]


def total_count(word: str, chain: AlignedChain) -> int:
    return sum(s.vocab.count(word) for s in chain.spaces)


def rank_candidates(
    candidates: Sequence[str],
    chain: AlignedChain,
    total_freq_floor: int = TOTAL_FREQ_FLOOR,
    top_k: int = 20,
) -> list[ShiftScore]:
    """Drop rare candidates, then order by descending shift (ties by key)."""
    if top_k < 1:
        raise ShiftError("top_k must be >= 1")
    kept = sorted({w for w in candidates if total_count(w, chain) >= total_freq_floor})
    if not kept:
        raise ShiftError(f"no candidate reaches total frequency {total_freq_floor}")
    scores = shift_scores(chain, kept)
    scores.sort(key=lambda s: (-s.cumulative, s.word))
    return scores[:top_k]


@dataclass(frozen=True)
class NeighborTrace:
    word: str
    periods: tuple[tuple[tuple[str, float], ...], ...]
    incomplete: bool = False

    def as_dict(self, shift: float | None = None) -> dict:
        out = {
            "word": self.word,
            "periods": [
                {"index": k, "neighbors": [{"key": key, "sim": sim} for key, sim in nbrs]}
                for k, nbrs in enumerate(self.periods)
            ],
            "incomplete": self.incomplete,
        }
        if shift is not None:
            out["D_c"] = shift
        return out


def _has_pos(key: str, pos: str | None) -> bool:
    if pos is None:
        return True
    head, sep, tag = key.rpartition("#")
    return bool(sep) and tag == pos


def neighbor_trace(
    word: str,
    chain: AlignedChain,
    pool_size: int = NEIGHBOR_POOL,
    keep: int = NEIGHBOR_KEEP,
    pos_filter: str | None = "NOUN",
    per_period_freq_floor: int = NEIGHBOR_FREQ_FLOOR,
) -> NeighborTrace:
    """Nearest shared-vocabulary neighbors of ``word`` in each period.

    Per period: the ``pool_size`` most similar words with the requested POS,
    minus those seen fewer than ``per_period_freq_floor`` times in any
    period, truncated to ``keep``. Ties are broken by key. The search is an
    exhaustive scan.
    """
    chain = _require_chain(chain)
    keys = chain.shared.keys
    candidates = np.array(
        [i for i, k in enumerate(keys) if k != word and _has_pos(k, pos_filter)],
        dtype=np.int64,
    )
    frequent = np.ones(len(keys), dtype=bool)
    for space, rows in zip(chain.spaces, chain.shared.rows):
        frequent &= space.vocab.counts[rows] >= per_period_freq_floor
    periods = []
    incomplete = False
    for space, rows in zip(chain.spaces, chain.shared.rows):
        if word not in space.vocab:
            raise ShiftError(f"{word!r} missing from period {space.period_index}")
        if len(candidates) == 0:
            periods.append(())
            incomplete = True
            continue
        q = np.asarray(space.vector(word), dtype=np.float64)
        m = np.asarray(space.input_vectors, dtype=np.float64)[rows[candidates]]
        norms = np.linalg.norm(m, axis=1) * np.linalg.norm(q)
        sims = np.clip(np.divide(m @ q, norms, out=np.full(len(m), -1.0), where=norms > 0), -1.0, 1.0)
        # shared keys are sorted, so candidate position doubles as the lexicographic tie-break
        order = np.lexsort((candidates, -sims))[:pool_size]
        chosen = [j for j in order if frequent[candidates[j]]][:keep]
        if len(chosen) < keep:
            incomplete = True
        periods.append(tuple((keys[candidates[j]], float(sims[j])) for j in chosen))
    if incomplete:
        logger.warning("neighbor trace for %r has fewer than %d neighbors in some period", word, keep)
    return NeighborTrace(word, tuple(periods), incomplete)
