"""Orthogonal Procrustes alignment of a chain of period embeddings.

The most recent period is the anchor. Walking backwards, each period is
rotated to best match the already-aligned period after it, with the fit
computed on the rows of words shared by every period.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .sgns import EmbeddingSpace


class AlignmentError(ValueError):
    pass


@dataclass(frozen=True)
class SharedVocab:
    keys: tuple[str, ...]
    rows: tuple[np.ndarray, ...]

    def __len__(self) -> int:
        return len(self.keys)


def shared_vocab(spaces: Sequence[EmbeddingSpace], min_count_per_period: int = 1) -> SharedVocab:
    if len(spaces) < 2:
        raise AlignmentError("need at least two spaces")
    common = None
    for space in spaces:
        vocab = space.vocab
        ok = {k for k, c in zip(vocab.keys, vocab.counts) if c >= min_count_per_period}
        common = ok if common is None else common & ok
    if not common:
        raise AlignmentError(f"no word reaches count {min_count_per_period} in every period")
    keys = tuple(sorted(common))
    rows = tuple(np.fromiter((s.vocab.index[k] for k in keys), dtype=np.int64, count=len(keys)) for s in spaces)
    return SharedVocab(keys, rows)


def procrustes(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Orthogonal ``W`` minimising ``||a @ W - b||_F``.

    Reflections are allowed; rank-deficient problems still yield an
    orthogonal matrix.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or a.shape != b.shape:
        raise AlignmentError(f"shape mismatch: {a.shape} vs {b.shape}")
    if not (np.isfinite(a).all() and np.isfinite(b).all()):
        raise AlignmentError("procrustes inputs must be finite")
    u, _, vt = np.linalg.svd(a.T @ b)
    return u @ vt


def _unit_rows(m: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(m, axis=1, keepdims=True)
    return m / np.where(norms > 0, norms, 1.0)


@dataclass(frozen=True)
class AlignedChain:
    spaces: tuple[EmbeddingSpace, ...]
    rotations: tuple[np.ndarray, ...]
    shared: SharedVocab
    normalize: bool = True

    @property
    def anchor_index(self) -> int:
        return len(self.spaces) - 1

    @property
    def n_periods(self) -> int:
        return len(self.spaces)

    def vectors(self, key: str) -> np.ndarray:
        """Stack of the word's aligned vectors, one row per period."""
        missing = [s.period_index for s in self.spaces if key not in s.vocab]
        if missing:
            raise KeyError(f"{key!r} missing from periods {missing}")
        return np.stack([s.vector(key) for s in self.spaces])

    def rotated(self, rotation: np.ndarray) -> "AlignedChain":
        """Apply one global orthogonal map to every period."""
        spaces = tuple(_with_vectors(s, s.input_vectors @ rotation) for s in self.spaces)
        return AlignedChain(spaces, tuple(r @ rotation for r in self.rotations), self.shared, self.normalize)

    def manifest(self) -> dict:
        return {
            "anchor_index": self.anchor_index,
            "periods": [s.period_index for s in self.spaces],
            "normalize": self.normalize,
            "shared_vocab_size": len(self.shared),
        }


def _with_vectors(space: EmbeddingSpace, vectors: np.ndarray) -> EmbeddingSpace:
    vectors = np.ascontiguousarray(vectors)
    vectors.setflags(write=False)
    return EmbeddingSpace(space.vocab, vectors, None, space.period_index, list(space.epoch_losses))


def align_chain(spaces: Sequence[EmbeddingSpace], shared: SharedVocab | None = None, normalize: bool = True) -> AlignedChain:
    """Rotate ``spaces`` (oldest first) into the frame of the last one.

    The fitted rotation is applied to every row of a period, including
    words outside the shared vocabulary.
    """
    if shared is None:
        shared = shared_vocab(spaces)
    if len(shared) == 0:
        raise AlignmentError("shared vocabulary is empty")
    dims = {s.dim for s in spaces}
    if len(dims) != 1:
        raise AlignmentError(f"spaces differ in dimension: {sorted(dims)}")
    n = len(spaces)
    d = dims.pop()
    aligned: list[EmbeddingSpace | None] = [None] * n
    rotations: list[np.ndarray | None] = [None] * n
    anchor = spaces[-1]
    aligned[-1] = _with_vectors(anchor, np.asarray(anchor.input_vectors, dtype=np.float64))
    rotations[-1] = np.eye(d)
    for t in range(n - 2, -1, -1):
        src = np.asarray(spaces[t].input_vectors, dtype=np.float64)
        a = src[shared.rows[t]]
        b = aligned[t + 1].input_vectors[shared.rows[t + 1]]
        if normalize:
            a, b = _unit_rows(a), _unit_rows(b)
        w = procrustes(a, b)
        rotations[t] = w
        aligned[t] = _with_vectors(spaces[t], src @ w)
    return AlignedChain(tuple(aligned), tuple(rotations), shared, normalize)


def save_chain(chain: AlignedChain, directory: str | Path) -> None:
    from .vectors import write_binary, write_text

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for k, space in enumerate(chain.spaces):
        write_text(space, directory / f"period_{k}.txt")
        write_binary(space, directory / f"period_{k}.bin")
    np.save(directory / "rotations.npy", np.stack(chain.rotations))
    (directory / "shared_vocab.txt").write_text("\n".join(chain.shared.keys) + "\n", encoding="utf-8")
    (directory / "chain.json").write_text(json.dumps(chain.manifest(), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_chain(directory: str | Path) -> AlignedChain:
    from .vectors import read_binary

    directory = Path(directory)
    meta = json.loads((directory / "chain.json").read_text(encoding="utf-8"))
    n = len(meta["periods"])
    spaces = [read_binary(directory / f"period_{k}.bin", dtype=np.float64) for k in range(n)]
    for s in spaces:
        s.input_vectors.setflags(write=False)
    rotations = tuple(np.load(directory / "rotations.npy"))
    keys = tuple((directory / "shared_vocab.txt").read_text(encoding="utf-8").split())
    rows = tuple(np.fromiter((s.vocab.index[k] for k in keys), dtype=np.int64, count=len(keys)) for s in spaces)
    return AlignedChain(tuple(spaces), rotations, SharedVocab(keys, rows), bool(meta["normalize"]))
