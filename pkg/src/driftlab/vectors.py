"""Reading and writing embedding spaces.

Text format: a ``<vocab_size> <dim>`` header, then ``key v1 ... vd`` per word
in id order (descending count). Floats are written as the shortest decimal
that parses back to the same float32, so a round trip is exact.

Binary format (little-endian)::

    magic  b"DLVEC\\0"   6 bytes
    version             uint16
    vocab_size, dim     uint64, uint64
    period_index        int64
    key table           per word: uint32 byte length, utf-8 key, uint64 count
    matrix              vocab_size * dim float32
"""
from __future__ import annotations

import struct
from pathlib import Path
from typing import Mapping

import numpy as np

from .corpus import Vocabulary
from .sgns import EmbeddingSpace

MAGIC = b"DLVEC\0"
VERSION = 1


class FormatError(ValueError):
    pass


def write_text(space: EmbeddingSpace, path: str | Path) -> None:
    vecs = np.asarray(space.input_vectors, dtype=np.float32)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{vecs.shape[0]} {vecs.shape[1]}\n")
        for key, row in zip(space.vocab.keys, vecs):
            if not key or any(c.isspace() for c in key):
                raise FormatError(f"key {key!r} cannot be written in text format")
            fh.write(key)
            fh.write(" ")
            fh.write(" ".join(str(x) for x in row))
            fh.write("\n")


def read_text(path: str | Path, counts: Mapping[str, int] | None = None, period_index: int = 0) -> EmbeddingSpace:
    """Load a text export. The format carries no counts; missing ones default to 1."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise FormatError(f"{path}: bad header")
        n, d = int(header[0]), int(header[1])
        keys = []
        mat = np.empty((n, d), dtype=np.float32)
        for i in range(n):
            parts = fh.readline().rstrip("\n").split(" ")
            if len(parts) != d + 1:
                raise FormatError(f"{path}: line {i + 2} has {len(parts) - 1} values, expected {d}")
            keys.append(parts[0])
            mat[i] = np.array(parts[1:], dtype=np.float32)
        if fh.readline().strip():
            raise FormatError(f"{path}: trailing data after {n} rows")
    cnt = [int(counts.get(k, 1)) if counts else 1 for k in keys]
    return EmbeddingSpace(Vocabulary.from_keys_counts(keys, cnt), mat, None, period_index)


def write_binary(space: EmbeddingSpace, path: str | Path) -> None:
    vecs = np.ascontiguousarray(space.input_vectors, dtype="<f4")
    n, d = vecs.shape
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<HQQq", VERSION, n, d, space.period_index))
        for key, count in zip(space.vocab.keys, space.vocab.counts):
            raw = key.encode("utf-8")
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)
            fh.write(struct.pack("<Q", int(count)))
        fh.write(vecs.tobytes())


def read_binary(path: str | Path, dtype=np.float32) -> EmbeddingSpace:
    data = Path(path).read_bytes()
    if not data.startswith(MAGIC):
        raise FormatError(f"{path}: not a driftlab vector file")
    off = len(MAGIC)
    version, n, d, period = struct.unpack_from("<HQQq", data, off)
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    off += struct.calcsize("<HQQq")
    keys, counts = [], []
    for _ in range(n):
        (length,) = struct.unpack_from("<I", data, off)
        off += 4
        keys.append(data[off : off + length].decode("utf-8"))
        off += length
        (count,) = struct.unpack_from("<Q", data, off)
        off += 8
        counts.append(count)
    expected = n * d * 4
    if len(data) - off != expected:
        raise FormatError(f"{path}: matrix has {len(data) - off} bytes, expected {expected}")
    mat = np.frombuffer(data, dtype="<f4", count=n * d, offset=off).reshape(n, d).astype(dtype)
    return EmbeddingSpace(Vocabulary.from_keys_counts(keys, counts), mat, None, period)
