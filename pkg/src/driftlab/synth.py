"""Synthetic multi-period corpora with planted semantic drift.

Stable words belong to one topic. A drifted word moves from a source topic
to a target topic following a per-period schedule. Each sentence is a center
word flanked by ``2 * window`` context words drawn from the center's active
topic, where a drifted word is a member of its source and target topics
with weights ``1 - lam`` and ``lam``. Under this construction every word has
expected relative frequency ``1 / vocab_size``.
"""
from __future__ import annotations

import datetime as dt
import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .corpus import PeriodConfig

POS = "NOUN"
# words shared by all periods in the full-scale corpus; sets the scale of `sample`
REFERENCE_SHARED_VOCAB = 348_679


class SynthError(ValueError):
    pass


@dataclass(frozen=True)
class DriftedWord:
    word: str
    source: int
    target: int
    schedule: tuple[float, ...]


@dataclass(frozen=True)
class DriftSpec:
    vocab_size: int = 1000
    n_periods: int = 5
    n_topics: int = 10
    drifted: tuple[DriftedWord, ...] = ()
    sentences_per_period: int = 50_000
    window: int = 4
    seed: int = 0
    start_year: int = 2000
    years_per_period: int = 5
    sentences_per_doc: int = 100

    def __post_init__(self):
        n_stable = self.vocab_size - len(self.drifted)
        if self.n_topics < 2 or n_stable < 2 * self.n_topics:
            raise SynthError(f"vocab of {self.vocab_size} is too small for {self.n_topics} topics")
        seen = set()
        for d in self.drifted:
            if d.word in seen or d.word in self.stable_words:
                raise SynthError(f"duplicate word {d.word!r}")
            seen.add(d.word)
            if len(d.schedule) != self.n_periods:
                raise SynthError(f"schedule for {d.word!r} needs {self.n_periods} values")
            if any(not 0.0 <= x <= 1.0 for x in d.schedule):
                raise SynthError(f"schedule for {d.word!r} must lie in [0, 1]")
            if any(b < a for a, b in zip(d.schedule, d.schedule[1:])):
                raise SynthError(f"schedule for {d.word!r} must be non-decreasing")
            if not (0 <= d.source < self.n_topics and 0 <= d.target < self.n_topics) or d.source == d.target:
                raise SynthError(f"bad topics for {d.word!r}")
        if self.sentences_per_period < 1 or self.window < 1 or self.sentences_per_doc < 1:
            raise SynthError("sentence counts and window must be positive")

    @property
    def stable_words(self) -> list[str]:
        return [f"w{i:04d}" for i in range(self.vocab_size - len(self.drifted))]

    @property
    def words(self) -> list[str]:
        return self.stable_words + [d.word for d in self.drifted]

    @property
    def topics(self) -> list[list[str]]:
        stable = self.stable_words
        return [stable[t :: self.n_topics] for t in range(self.n_topics)]

    def periods(self) -> PeriodConfig:
        return PeriodConfig.uniform(self.start_year, self.years_per_period, self.n_periods)

    def membership(self, period: int) -> np.ndarray:
        """(vocab_size, n_topics) matrix of topic weights per word."""
        n_stable = self.vocab_size - len(self.drifted)
        m = np.zeros((self.vocab_size, self.n_topics))
        m[np.arange(n_stable), np.arange(n_stable) % self.n_topics] = 1.0
        for k, d in enumerate(self.drifted):
            lam = d.schedule[period]
            m[n_stable + k, d.source] += 1.0 - lam
            m[n_stable + k, d.target] += lam
        return m

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "DriftSpec":
        data = dict(data)
        data["drifted"] = tuple(
            DriftedWord(d["word"], int(d["source"]), int(d["target"]), tuple(float(x) for x in d["schedule"]))
            for d in data.get("drifted", ())
        )
        return cls(**data)

    @classmethod
    def load(cls, path: str | Path) -> "DriftSpec":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def desk_sample(vocab_size: int, sample: float = 1e-5) -> float:
    """Subsampling threshold rescaled so ``sample * vocab_size`` matches full scale.

    A relative threshold of 1e-5 only touches a few thousand very frequent
    words in a corpus with hundreds of thousands of types; applied literally
    to a 1000-word corpus it would discard ~90% of every word.
    """
    return sample * REFERENCE_SHARED_VOCAB / vocab_size


def linear_schedule(n_periods: int) -> tuple[float, ...]:
    return tuple(float(x) for x in np.linspace(0.0, 1.0, n_periods))


def make_spec(
    n_drifted: int = 3,
    schedule: Sequence[float] | None = None,
    **kwargs,
) -> DriftSpec:
    """Spec with ``n_drifted`` words moving between distinct topic pairs."""
    n_periods = kwargs.get("n_periods", 5)
    n_topics = kwargs.get("n_topics", 10)
    sched = tuple(schedule) if schedule is not None else linear_schedule(n_periods)
    drifted = tuple(
        DriftedWord(f"drift{k}", (2 * k) % n_topics, (2 * k + 1) % n_topics, sched) for k in range(n_drifted)
    )
    return DriftSpec(drifted=drifted, **kwargs)


def _period_sentences(spec: DriftSpec, period: int) -> np.ndarray:
    """(n_sentences, 2*window+1) array of word ids."""
    rng = np.random.default_rng([spec.seed, period])
    m = spec.membership(period)
    v, w, n = spec.vocab_size, spec.window, spec.sentences_per_period
    centers = rng.integers(0, v, size=n)
    rows = m[centers]
    cum = np.cumsum(rows / rows.sum(axis=1, keepdims=True), axis=1)
    topic = np.minimum((cum < rng.random(n)[:, None]).sum(axis=1), spec.n_topics - 1)
    context = np.empty((n, 2 * w), dtype=np.int64)
    for t in range(spec.n_topics):
        sel = np.flatnonzero(topic == t)
        if len(sel) == 0:
            continue
        col = m[:, t] / m[:, t].sum()
        context[sel] = rng.choice(v, size=(len(sel), 2 * w), p=col)
    return np.concatenate([context[:, :w], centers[:, None], context[:, w:]], axis=1)


def period_records(spec: DriftSpec, period: int) -> Iterator[dict]:
    words = spec.words
    tokens = [[word, word, POS] for word in words]
    sents = _period_sentences(spec, period)
    start, end = spec.periods().boundaries[period]
    span = (end - start).days
    per_doc = spec.sentences_per_doc
    for doc, lo in enumerate(range(0, len(sents), per_doc)):
        date = start + dt.timedelta(days=(doc * 7) % span)
        yield {
            "date": date.isoformat(),
            "sentences": [[tokens[i] for i in row] for row in sents[lo : lo + per_doc].tolist()],
        }


def records(spec: DriftSpec) -> Iterator[dict]:
    for p in range(spec.n_periods):
        yield from period_records(spec, p)


def ground_truth(spec: DriftSpec) -> dict:
    return {
        "drifted_words": [f"{d.word}#{POS}" for d in spec.drifted],
        "schedules": {f"{d.word}#{POS}": list(d.schedule) for d in spec.drifted},
        "topics": {f"{d.word}#{POS}": [d.source, d.target] for d in spec.drifted},
        "stable_words": [f"{w}#{POS}" for w in spec.stable_words],
    }


def expected_frequencies(spec: DriftSpec, period: int) -> np.ndarray:
    """Analytic per-word token share in ``period`` (uniform by construction)."""
    m = spec.membership(period)
    v, w = spec.vocab_size, spec.window
    topic_prob = m.sum(axis=0) / v
    ctx = (m / m.sum(axis=0)) @ topic_prob
    return (1.0 / v + 2 * w * ctx) / (2 * w + 1)


def generate(spec: DriftSpec, out_dir: str | Path) -> list[Path]:
    """Write one JSON-lines corpus file per period, plus ``ground_truth.json``,
    ``periods.ini`` and ``spec.json``. Returns the corpus file paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for p in range(spec.n_periods):
        path = out_dir / f"period_{p}.jsonl"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for rec in period_records(spec, p):
                fh.write(json.dumps(rec, ensure_ascii=False, separators=(",", ":")))
                fh.write("\n")
        paths.append(path)
    (out_dir / "ground_truth.json").write_text(json.dumps(ground_truth(spec), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    (out_dir / "periods.ini").write_text(spec.periods().to_ini(), encoding="utf-8")
    (out_dir / "spec.json").write_text(spec.to_json() + "\n", encoding="utf-8")
    return paths


def mini_spec() -> DriftSpec:
    """The small bundled spec used for smoke runs."""
    path = Path(__file__).with_name("data") / "mini_spec.json"
    return DriftSpec.load(path)
