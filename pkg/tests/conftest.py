import numpy as np
import pytest

from driftlab import align, corpus, sgns, synth


def random_orthogonal(d, rng):
    q, r = np.linalg.qr(rng.normal(size=(d, d)))
    return q * np.sign(np.diag(r))


def space_from_matrix(keys, mat, counts=None, period=0):
    counts = counts if counts is not None else [100] * len(keys)
    vocab = corpus.Vocabulary.from_keys_counts(keys, counts)
    return sgns.EmbeddingSpace(vocab, np.asarray(mat, dtype=np.float64), None, period)


ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def mini_run():
    """Mini synthetic corpus trained and aligned once per session."""
    spec = synth.mini_spec()
    corpora, stats = corpus.ingest(synth.records(spec), spec.periods())
    hp = sgns.Hyperparams(vector_size=50, sample=synth.desk_sample(spec.vocab_size), seed=3)
    spaces = [sgns.train(c, hp) for c in corpora]
    chain = align.align_chain(spaces)
    return {"spec": spec, "corpora": corpora, "stats": stats, "spaces": spaces, "chain": chain, "hp": hp}


def sentiment_toy(seed=0, n_examples=300, dim=10, words_per_class=20, noise=1.0, separation=2.0):
    """Three word clusters (negative/neutral/positive) and labelled 5-token examples."""
    from driftlab.senti import LABELS, SentimentExample

    rng = np.random.default_rng(seed)
    means = {label: separation * rng.normal(size=dim) for label in LABELS}
    keys, rows, by_label = [], [], {}
    for label in LABELS:
        by_label[label] = []
        for k in range(words_per_class):
            key = f"{label[:3]}{k:02d}#NOUN"
            keys.append(key)
            rows.append(means[label] + noise * rng.normal(size=dim))
            by_label[label].append(key)
    examples = []
    for n in range(n_examples):
        label = LABELS[n % 3]
        tokens = tuple(rng.choice(by_label[label], size=5))
        examples.append(SentimentExample(tokens, label))
    return keys, np.array(rows), examples


def identity_chain(mats, keys):
    spaces = [space_from_matrix(keys, m, period=p) for p, m in enumerate(mats)]
    return align.AlignedChain(
        tuple(spaces), tuple(np.eye(mats[0].shape[1]) for _ in mats), align.shared_vocab(spaces)
    )


def mini_config():
    from importlib import resources

    return str(resources.files("driftlab") / "data" / "mini.ini")


def write_mini_datasets(directory):
    """Tiny evaluation and sentiment inputs keyed on the mini synthetic vocabulary."""
    from pathlib import Path

    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(0)
    sim = ["word1\tword2\tscore"]
    for i in range(30):
        a, b = rng.choice(198, size=2, replace=False)
        same = a % 10 == b % 10
        sim.append(f"w{a:04d}\tw{b:04d}\t{(8.0 if same else 2.0) + rng.random():.3f}")
    (d / "sim.tsv").write_text("\n".join(sim) + "\n")
    syn = ["target\tpos\tsynonym\td1\td2\td3"]
    for t in range(10):
        syn.append(f"w{t:04d}\tNOUN\tw{t + 10:04d}\tw{(t + 1) % 10 + 20:04d}\tw{(t + 2) % 10 + 30:04d}\tw{(t + 3) % 10 + 40:04d}")
    (d / "syn.tsv").write_text("\n".join(syn) + "\n")
    labels = {0: "neg", 1: "neu", 2: "pos"}
    rows = ["label\ttokens"]
    for n in range(90):
        topic = n % 3
        words = rng.choice(np.arange(topic, 198, 10), size=4)
        rows.append(labels[topic] + "\t" + " ".join(f"w{w:04d}#NOUN" for w in words))
    (d / "senti.tsv").write_text("\n".join(rows) + "\n")
    (d / "lexicon.tsv").write_text("w0000\tnegative\nw0002\tpositive\nw0012\tpositive\n")
    return d


def run_cli_pipeline(workspace, data_dir, seed=7):
    """Full subcommand chain on the mini spec. Returns the list of exit codes."""
    from driftlab.cli import main

    ws = ["--workspace", str(workspace)]
    cfg = ["--config", mini_config()]
    d = str(data_dir)
    steps = [
        ["synth", *ws],
        ["ingest", *ws],
        ["train", *ws, *cfg, "--seed", str(seed)],
        ["align", *ws, *cfg],
        ["shift", *ws, *cfg],
        ["neighbors", *ws, *cfg, "--word", "drift0#NOUN", "--word", "drift1#NOUN"],
        ["eval-sim", *ws, "--dataset", f"{d}/sim.tsv"],
        ["eval-syn", *ws, "--dataset", f"{d}/syn.tsv", "--pos", "NOUN"],
        ["senti-train", *ws, "--dataset", f"{d}/senti.tsv"],
        ["senti-matrix", *ws, "--test", f"{d}/senti.tsv", "--significance", f"{d}/senti.tsv"],
        ["senti-share", *ws, "--lexicon", f"{d}/lexicon.tsv"],
        ["report", *ws],
    ]
    return [main(step) for step in steps]
