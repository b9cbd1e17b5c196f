"""Ingestion of time-stamped, pre-annotated documents into per-period corpora.

Tokens are keyed as ``lowercase(lemma)#POS``; punctuation is discarded.
Each period gets its own vocabulary and a flat id stream with sentence
offsets, which is the layout the training kernels consume.
"""
from __future__ import annotations

import configparser
import csv
import datetime as dt
import json
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

logger = logging.getLogger(__name__)

POS_TAGS = frozenset(
    {
        "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM", "PART",
        "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X", "OTHER",
    }
)


class CorpusError(ValueError):
    pass


class EmptyPeriodError(CorpusError):
    def __init__(self, period_index: int, bounds: tuple[dt.date, dt.date], stats: "IngestStats | None" = None):
        self.period_index = period_index
        self.stats = stats
        super().__init__(
            f"period {period_index} ({bounds[0].isoformat()} to {bounds[1].isoformat()}) has no documents"
        )


@dataclass(frozen=True)
class AnnotatedToken:
    surface: str
    lemma: str
    pos: str

    def __post_init__(self):
        if not self.surface:
            raise CorpusError("token surface must be non-empty")
        if self.pos not in POS_TAGS:
            raise CorpusError(f"unknown POS tag {self.pos!r}")


def normalize_pos(tag: str) -> str:
    tag = tag.strip().upper()
    return tag if tag in POS_TAGS else "OTHER"


Lexicon = Mapping[tuple[str, str], str]


def load_lexicon(path: str | Path) -> dict[tuple[str, str], str]:
    """Read a ``surface<TAB>pos<TAB>lemma`` file. Later lines override earlier ones."""
    lexicon: dict[tuple[str, str], str] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh, delimiter="\t"), 1):
            if not row or row[0].startswith("#"):
                continue
            if len(row) < 3:
                raise CorpusError(f"{path}:{lineno}: expected 3 columns, got {len(row)}")
            surface, pos, lemma = (c.strip() for c in row[:3])
            lexicon[(surface, normalize_pos(pos))] = lemma
    return lexicon


def lemma_key(token: AnnotatedToken, lexicon: Lexicon | None = None) -> str:
    lemma = None
    if lexicon:
        lemma = lexicon.get((token.surface, token.pos))
        if lemma is None:
            lemma = lexicon.get((token.surface.lower(), token.pos))
    if not lemma:
        lemma = token.lemma or token.surface
    return f"{lemma.lower()}#{token.pos}"


@dataclass(frozen=True)
class PeriodConfig:
    """Ordered, disjoint ``[start, end)`` date ranges."""

    boundaries: tuple[tuple[dt.date, dt.date], ...]

    def __post_init__(self):
        if not self.boundaries:
            raise CorpusError("at least one period is required")
        prev_end = None
        for start, end in self.boundaries:
            if not start < end:
                raise CorpusError(f"empty period {start}..{end}")
            if prev_end is not None and start < prev_end:
                raise CorpusError("periods must be ordered and disjoint")
            prev_end = end

    @property
    def count(self) -> int:
        return len(self.boundaries)

    @classmethod
    def uniform(cls, start_year: int, years: int, count: int) -> "PeriodConfig":
        return cls(
            tuple(
                (dt.date(start_year + k * years, 1, 1), dt.date(start_year + (k + 1) * years, 1, 1))
                for k in range(count)
            )
        )

    def period_of(self, date: dt.date) -> int | None:
        for k, (start, end) in enumerate(self.boundaries):
            if start <= date < end:
                return k
        return None

    @classmethod
    def from_mapping(cls, section: Mapping[str, str]) -> "PeriodConfig":
        """Build from a ``[periods]`` config section.

        Either ``start_year``/``years``/``count`` or numbered ``p1``, ``p2`` ...
        entries of the form ``YYYY-MM-DD YYYY-MM-DD``.
        """
        if "start_year" in section:
            return cls.uniform(int(section["start_year"]), int(section.get("years", 5)), int(section.get("count", 5)))
        entries = sorted(
            ((int(k[1:]), v) for k, v in section.items() if k.startswith("p") and k[1:].isdigit()),
        )
        bounds = []
        for _, value in entries:
            parts = value.replace(",", " ").split()
            if len(parts) != 2:
                raise CorpusError(f"bad period boundary {value!r}")
            bounds.append((dt.date.fromisoformat(parts[0]), dt.date.fromisoformat(parts[1])))
        return cls(tuple(bounds))

    @classmethod
    def load(cls, path: str | Path) -> "PeriodConfig":
        parser = configparser.ConfigParser()
        if not parser.read(path, encoding="utf-8"):
            raise CorpusError(f"cannot read period config {path}")
        if not parser.has_section("periods"):
            raise CorpusError(f"{path}: missing [periods] section")
        return cls.from_mapping(parser["periods"])

    def to_ini(self) -> str:
        lines = ["[periods]"]
        for k, (start, end) in enumerate(self.boundaries, 1):
            lines.append(f"p{k} = {start.isoformat()} {end.isoformat()}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Vocabulary:
    """Word keys in id order with their raw counts."""

    keys: tuple[str, ...]
    counts: np.ndarray
    index: Mapping[str, int] = field(repr=False, compare=False)

    @classmethod
    def from_keys_counts(cls, keys: Sequence[str], counts) -> "Vocabulary":
        counts = np.asarray(counts, dtype=np.int64)
        counts.setflags(write=False)
        keys = tuple(keys)
        if len(keys) != len(counts):
            raise CorpusError("keys and counts differ in length")
        return cls(keys, counts, {k: i for i, k in enumerate(keys)})

    def __len__(self) -> int:
        return len(self.keys)

    def __contains__(self, key: object) -> bool:
        return key in self.index

    @property
    def total_tokens(self) -> int:
        return int(self.counts.sum())

    @property
    def entries(self) -> dict[str, tuple[int, int]]:
        return {k: (i, int(c)) for i, (k, c) in enumerate(zip(self.keys, self.counts))}

    def count(self, key: str) -> int:
        i = self.index.get(key)
        return 0 if i is None else int(self.counts[i])


def build_vocab(stream: Iterable[str] | Counter, min_count: int = 1) -> Vocabulary:
    """Count keys; ids follow descending count, ties broken by key."""
    if min_count < 1:
        raise CorpusError("min_count must be >= 1")
    counter = stream if isinstance(stream, Counter) else Counter(stream)
    if not counter:
        raise CorpusError("cannot build a vocabulary from an empty corpus")
    kept = sorted(((k, c) for k, c in counter.items() if c >= min_count), key=lambda kc: (-kc[1], kc[0]))
    return Vocabulary.from_keys_counts([k for k, _ in kept], [c for _, c in kept])


def keep_probability(count, total, sample: float):
    """Probability of retaining a token during frequent-word subsampling.

    Works elementwise on arrays. Words with relative frequency at or below
    ``sample`` are always kept.
    """
    f = np.asarray(count, dtype=np.float64) / total
    p = np.minimum(1.0, (np.sqrt(f / sample) + 1.0) * sample / f)
    return float(p) if p.ndim == 0 else p


@dataclass(frozen=True)
class PeriodCorpus:
    """Sentences of one period as a flat id array plus sentence offsets."""

    period_index: int
    vocab: Vocabulary
    tokens: np.ndarray
    offsets: np.ndarray

    @property
    def n_sentences(self) -> int:
        return len(self.offsets) - 1

    def sentences(self) -> Iterator[np.ndarray]:
        for s in range(self.n_sentences):
            yield self.tokens[self.offsets[s] : self.offsets[s + 1]]

    def save(self, path: str | Path) -> None:
        np.savez(
            path,
            period_index=np.int64(self.period_index),
            keys=np.array(self.vocab.keys, dtype=np.str_),
            counts=self.vocab.counts,
            tokens=self.tokens,
            offsets=self.offsets,
        )

    @classmethod
    def load(cls, path: str | Path) -> "PeriodCorpus":
        with np.load(path, allow_pickle=False) as data:
            vocab = Vocabulary.from_keys_counts([str(k) for k in data["keys"]], data["counts"])
            return cls(int(data["period_index"]), vocab, data["tokens"].astype(np.int32), data["offsets"].astype(np.int64))


@dataclass
class IngestStats:
    documents: int = 0
    ingested: int = 0
    out_of_range: int = 0
    malformed: int = 0
    punct_dropped: int = 0
    per_period: list[int] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)

    @property
    def skipped(self) -> int:
        return self.out_of_range + self.malformed


MAX_ERROR_SAMPLES = 20


def parse_record(obj) -> tuple[dt.date, list[list[AnnotatedToken]]]:
    """Validate one decoded corpus record."""
    if not isinstance(obj, dict):
        raise CorpusError("record is not a JSON object")
    try:
        date = dt.date.fromisoformat(obj["date"])
        raw_sentences = obj["sentences"]
    except (KeyError, TypeError, ValueError) as exc:
        raise CorpusError(f"bad date or missing field: {exc}") from None
    if not isinstance(raw_sentences, list):
        raise CorpusError("'sentences' must be a list")
    sentences = []
    for sent in raw_sentences:
        if not isinstance(sent, list):
            raise CorpusError("sentence must be a list of tokens")
        toks = []
        for tok in sent:
            if not isinstance(tok, (list, tuple)) or len(tok) != 3 or not all(isinstance(x, str) for x in tok):
                raise CorpusError(f"token must be [surface, lemma, pos], got {tok!r}")
            toks.append(AnnotatedToken(tok[0], tok[1], normalize_pos(tok[2])))
        sentences.append(toks)
    return date, sentences


def read_records(paths: Iterable[str | Path]) -> Iterator[object]:
    """Yield decoded JSON records from JSON-lines files; undecodable lines yield ``None``."""
    for path in paths:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                try:
                    yield json.loads(line)
                except json.JSONDecodeError:
                    yield None


def ingest(
    records: Iterable[object],
    config: PeriodConfig,
    lexicon: Lexicon | None = None,
    min_count: int = 1,
) -> tuple[list[PeriodCorpus], IngestStats]:
    """Bucket records into periods and key their tokens.

    Records may be decoded dicts or raw JSON strings. Malformed and
    out-of-range records are skipped and counted in the returned stats.
    Raises :class:`EmptyPeriodError` if any period ends up without documents.
    """
    stats = IngestStats(per_period=[0] * config.count)
    period_sents: list[list[list[str]]] = [[] for _ in range(config.count)]
    counters = [Counter() for _ in range(config.count)]
    for raw in records:
        stats.documents += 1
        try:
            if raw is None:
                raise CorpusError("line is not valid JSON")
            if isinstance(raw, (str, bytes)):
                try:
                    raw = json.loads(raw)
                except json.JSONDecodeError as exc:
                    raise CorpusError(f"invalid JSON: {exc}") from None
            date, sentences = parse_record(raw)
        except CorpusError as exc:
            stats.malformed += 1
            if len(stats.errors) < MAX_ERROR_SAMPLES:
                stats.errors.append(f"record {stats.documents}: {exc}")
            logger.debug("skipping record %d: %s", stats.documents, exc)
            continue
        k = config.period_of(date)
        if k is None:
            stats.out_of_range += 1
            logger.debug("skipping record %d: date %s outside all periods", stats.documents, date)
            continue
        stats.ingested += 1
        stats.per_period[k] += 1
        for sent in sentences:
            keys = []
            for tok in sent:
                if tok.pos == "PUNCT":
                    stats.punct_dropped += 1
                    continue
                keys.append(lemma_key(tok, lexicon))
            if keys:
                counters[k].update(keys)
                period_sents[k].append(keys)
    if stats.skipped:
        logger.info("ingest skipped %d malformed and %d out-of-range records", stats.malformed, stats.out_of_range)
    for k, n in enumerate(stats.per_period):
        if n == 0:
            raise EmptyPeriodError(k, config.boundaries[k], stats)

    corpora = []
    for k in range(config.count):
        vocab = build_vocab(counters[k], min_count)
        corpora.append(_encode(k, vocab, period_sents[k]))
        period_sents[k] = []
    return corpora, stats


def _encode(period_index: int, vocab: Vocabulary, sentences: list[list[str]]) -> PeriodCorpus:
    index = vocab.index
    ids: list[int] = []
    offsets = [0]
    for sent in sentences:
        before = len(ids)
        ids.extend(index[w] for w in sent if w in index)
        if len(ids) > before:
            offsets.append(len(ids))
    return PeriodCorpus(
        period_index,
        vocab,
        np.asarray(ids, dtype=np.int32),
        np.asarray(offsets, dtype=np.int64),
    )


def corpus_from_sentences(sentences: Iterable[Sequence[str]], min_count: int = 1, period_index: int = 0) -> PeriodCorpus:
    """Convenience constructor from already-keyed sentences."""
    sentences = [list(s) for s in sentences]
    vocab = build_vocab(Counter(w for s in sentences for w in s), min_count)
    return _encode(period_index, vocab, sentences)


def subsample_rate(vocab: Vocabulary, sample: float) -> np.ndarray:
    """Per-id keep probabilities; ``sample <= 0`` disables subsampling."""
    if sample <= 0 or math.isinf(sample):
        return np.ones(len(vocab), dtype=np.float64)
    return np.asarray(keep_probability(vocab.counts, vocab.total_tokens, sample), dtype=np.float64).reshape(-1)
