"""``driftlab`` command line.

Every subcommand reads and writes artifacts inside a workspace directory
(``--workspace``, else ``$DRIFTLAB_WORKSPACE``, else ``./driftlab-workspace``)
and appends provenance to its ``manifest.json``.

Exit codes:

====  ==================  ================================================
code  name                meaning
====  ==================  ================================================
0     ok
1     internal            unexpected failure
2     usage               unknown subcommand or flag, bad flag value
3     config              invalid configuration or hyperparameters
4     missing-artifact    a required workspace artifact was never produced
5     hash-mismatch       an artifact changed since it was recorded
6     input               malformed input data (corpus records, datasets)
7     data                computation impossible on the given data
====  ==================  ================================================

On failure a single JSON object ``{"error", "exit_code", "message"}`` is
written to stderr.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .workspace import HashMismatch, MissingArtifact, Workspace, dump_json

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_MISSING = 4
EXIT_HASH = 5
EXIT_INPUT = 6
EXIT_DATA = 7

_EXIT_NAMES = {
    EXIT_INTERNAL: "internal",
    EXIT_USAGE: "usage",
    EXIT_CONFIG: "config",
    EXIT_MISSING: "missing-artifact",
    EXIT_HASH: "hash-mismatch",
    EXIT_INPUT: "input",
    EXIT_DATA: "data",
}

logger = logging.getLogger("driftlab")


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(EXIT_USAGE, f"{self.prog}: {message}")


class Settings:
    """Resolves options with precedence: command-line flag, config file, default."""

    def __init__(self, path: str | None):
        self.parser = configparser.ConfigParser()
        if path:
            if not self.parser.read(path, encoding="utf-8"):
                raise CliError(EXIT_CONFIG, f"cannot read config file {path}")

    def get(self, section, key, flag, default, conv=str):
        if flag is not None:
            return flag
        if self.parser.has_option(section, key):
            raw = self.parser.get(section, key)
            try:
                return conv(raw)
            except ValueError as exc:
                raise CliError(EXIT_CONFIG, f"config [{section}] {key}: {exc}") from None
        return default

    def section(self, name):
        return self.parser[name] if self.parser.has_section(name) else None


def _bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _write_report(ws: Workspace, rel: str, report: dict) -> str:
    from . import schemas
    import jsonschema

    jsonschema.validate(report, schemas.BY_KIND[report["kind"]])
    dump_json(report, ws.path(rel))
    return rel


def _write_csv(ws: Workspace, rel: str, header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    ws.path(rel).write_text(buf.getvalue(), encoding="utf-8")
    return rel


# -- subcommands -----------------------------------------------------------


def cmd_synth(args, ws: Workspace, cfg: Settings):
    from . import synth

    try:
        spec = synth.DriftSpec.load(args.spec) if args.spec else synth.mini_spec()
        if args.seed is not None:
            spec = synth.DriftSpec.from_dict({**json.loads(spec.to_json()), "seed": args.seed})
    except (OSError, ValueError, TypeError, KeyError) as exc:
        raise CliError(EXIT_CONFIG, f"bad synth spec: {exc}") from None
    paths = synth.generate(spec, ws.root / "synth")
    rels = [str(p.relative_to(ws.root)) for p in paths]
    rels += ["synth/ground_truth.json", "synth/periods.ini", "synth/spec.json"]
    ws.record("synth", rels, {"seed": spec.seed, "spec": json.loads(spec.to_json())})
    return {"files": rels}


def _reject_malformed(stats) -> None:
    if stats.malformed:
        first = stats.errors[0] if stats.errors else "?"
        raise CliError(EXIT_INPUT, f"{stats.malformed} malformed record(s); first: {first}")


def cmd_ingest(args, ws: Workspace, cfg: Settings):
    from .corpus import CorpusError, EmptyPeriodError, PeriodConfig, ingest, load_lexicon, read_records

    corpus_files = args.corpus
    if not corpus_files:
        rels = ws.find("synth/period_", ".jsonl")
        if not rels:
            raise CliError(EXIT_MISSING, "no --corpus given and no synthetic corpus in the workspace")
        corpus_files = [ws.require(r) for r in rels]
    periods_path = cfg.get("paths", "periods", args.periods, None)
    try:
        if periods_path:
            periods = PeriodConfig.load(periods_path)
        elif cfg.section("periods") is not None:
            periods = PeriodConfig.from_mapping(cfg.section("periods"))
        elif "synth/periods.ini" in ws.latest():
            periods = PeriodConfig.load(ws.require("synth/periods.ini"))
        else:
            raise CliError(EXIT_CONFIG, "no period configuration (use --periods or a [periods] config section)")
    except (CorpusError, ValueError) as exc:
        raise CliError(EXIT_CONFIG, f"bad period configuration: {exc}") from None
    min_count = cfg.get("ingest", "min_count", args.min_count, 1, int)
    if min_count < 1:
        raise CliError(EXIT_CONFIG, "min_count must be >= 1")
    lexicon_path = cfg.get("paths", "lexicon", args.lexicon, None)
    try:
        lexicon = load_lexicon(lexicon_path) if lexicon_path else None
    except (OSError, CorpusError) as exc:
        raise CliError(EXIT_INPUT, f"bad lexicon: {exc}") from None
    try:
        corpora, stats = ingest(read_records(corpus_files), periods, lexicon, min_count)
    except EmptyPeriodError as exc:
        # malformed input is the likelier cause of an empty period; report it first
        if exc.stats is not None and not args.skip_malformed:
            _reject_malformed(exc.stats)
        raise CliError(EXIT_DATA, str(exc)) from None
    except OSError as exc:
        raise CliError(EXIT_INPUT, str(exc)) from None
    if not args.skip_malformed:
        _reject_malformed(stats)
    rels = []
    for c in corpora:
        rel = f"corpus/period_{c.period_index}.npz"
        c.save(ws.path(rel))
        rels.append(rel)
    stats_rel = "corpus/ingest_stats.json"
    dump_json(
        {
            "documents": stats.documents,
            "ingested": stats.ingested,
            "out_of_range": stats.out_of_range,
            "malformed": stats.malformed,
            "punct_dropped": stats.punct_dropped,
            "per_period": stats.per_period,
            "vocab_sizes": [len(c.vocab) for c in corpora],
            "tokens": [c.vocab.total_tokens for c in corpora],
        },
        ws.path(stats_rel),
    )
    ws.record(
        "ingest",
        rels + [stats_rel],
        {
            "corpus": [str(p) for p in corpus_files],
            "periods": [[a.isoformat(), b.isoformat()] for a, b in periods.boundaries],
            "min_count": min_count,
            "lexicon": lexicon_path,
        },
    )
    return {"periods": len(corpora), "skipped": stats.skipped, "malformed": stats.malformed}


def _hyperparams(args, cfg: Settings):
    from .sgns import Hyperparams

    d = Hyperparams()
    try:
        return Hyperparams(
            vector_size=cfg.get("train", "vector_size", args.vector_size, d.vector_size, int),
            window=cfg.get("train", "window", args.window, d.window, int),
            negative=cfg.get("train", "negative", args.negative, d.negative, int),
            sample=cfg.get("train", "sample", args.sample, d.sample, float),
            alpha=cfg.get("train", "alpha", args.alpha, d.alpha, float),
            epochs=cfg.get("train", "epochs", args.epochs, d.epochs, int),
            seed=cfg.get("train", "seed", args.seed, d.seed, int),
            workers=cfg.get("train", "workers", args.workers, d.workers, int),
        )
    except ValueError as exc:
        raise CliError(EXIT_CONFIG, f"invalid hyperparameters: {exc}") from None


def cmd_train(args, ws: Workspace, cfg: Settings):
    from .corpus import PeriodCorpus
    from .sgns import TrainingError, train
    from .vectors import write_binary, write_text

    hp = _hyperparams(args, cfg)
    available = ws.find("corpus/period_", ".npz")
    if not available:
        raise CliError(EXIT_MISSING, "no ingested corpus; run `driftlab ingest` first")
    if args.period == "all":
        targets = available
    else:
        try:
            k = int(args.period)
        except ValueError:
            raise CliError(EXIT_USAGE, f"--period must be 'all' or an integer, got {args.period!r}") from None
        targets = [f"corpus/period_{k}.npz"]
    out = []
    for rel in targets:
        corpus = PeriodCorpus.load(ws.require(rel))
        try:
            space = train(corpus, hp)
        except TrainingError as exc:
            raise CliError(EXIT_DATA, str(exc)) from None
        k = corpus.period_index
        bin_rel, txt_rel = f"spaces/period_{k}.bin", f"spaces/period_{k}.txt"
        write_binary(space, ws.path(bin_rel))
        write_text(space, ws.path(txt_rel))
        params = {**hp.__dict__, "corpus": rel, "epoch_losses": space.epoch_losses}
        ws.record("train", [bin_rel, txt_rel], params)
        out.append({"period": k, "epoch_losses": space.epoch_losses})
    return {"trained": out}


def _load_spaces(ws: Workspace):
    from .vectors import read_binary

    rels = ws.find("spaces/period_", ".bin")
    if not rels:
        raise CliError(EXIT_MISSING, "no trained spaces; run `driftlab train` first")
    return [read_binary(ws.require(r)) for r in rels]


def _load_chain(ws: Workspace):
    from .align import load_chain

    ws.require("chain/chain.json")
    for rel in ws.find("chain/"):
        ws.require(rel)
    return load_chain(ws.root / "chain")


def cmd_align(args, ws: Workspace, cfg: Settings):
    from .align import AlignmentError, align_chain, save_chain, shared_vocab

    spaces = _load_spaces(ws)
    if len(spaces) < 2:
        raise CliError(EXIT_DATA, "alignment needs at least two trained periods")
    normalize = cfg.get("align", "normalize", args.normalize, True, _bool)
    min_count = cfg.get("align", "min_count", args.min_count, 1, int)
    try:
        shared = shared_vocab(spaces, min_count)
        chain = align_chain(spaces, shared, normalize)
    except AlignmentError as exc:
        raise CliError(EXIT_DATA, str(exc)) from None
    save_chain(chain, ws.root / "chain")
    rels = sorted(str(p.relative_to(ws.root)) for p in (ws.root / "chain").iterdir())
    ws.record("align", rels, {"normalize": normalize, "min_count": min_count})
    return chain.manifest()


def cmd_shift(args, ws: Workspace, cfg: Settings):
    from .shift import ShiftError, rank_candidates

    chain = _load_chain(ws)
    if args.candidates:
        try:
            candidates = [w.strip() for w in Path(args.candidates).read_text(encoding="utf-8").split() if w.strip()]
        except OSError as exc:
            raise CliError(EXIT_INPUT, str(exc)) from None
    else:
        candidates = list(chain.shared.keys)
    floor = cfg.get("shift", "freq_floor", args.freq_floor, 1000, int)
    top_k = cfg.get("shift", "top_k", args.top_k, 20, int)
    try:
        scores = rank_candidates(candidates, chain, floor, top_k)
    except ShiftError as exc:
        raise CliError(EXIT_DATA, str(exc)) from None
    report = {"schema_version": 1, "kind": "shift", "scores": [s.as_dict() for s in scores]}
    rels = [_write_report(ws, "reports/shift.json", report)]
    n_steps = chain.n_periods - 1
    rels.append(
        _write_csv(
            ws,
            "reports/shift.csv",
            ["word"] + [f"step_{i}" for i in range(n_steps)] + ["cumulative"],
            [[s.word, *(repr(x) for x in s.per_step), repr(s.cumulative)] for s in scores],
        )
    )
    ws.record("shift", rels, {"candidates": args.candidates, "freq_floor": floor, "top_k": top_k})
    return {"top": [s.word for s in scores[:5]]}


def cmd_neighbors(args, ws: Workspace, cfg: Settings):
    from .shift import ShiftError, cumulative_shift, neighbor_trace

    chain = _load_chain(ws)
    words = list(args.word or [])
    if not words:
        rel = "reports/shift.json"
        if rel not in ws.latest():
            raise CliError(EXIT_MISSING, "no --word given and no shift report to take words from")
        report = json.loads(ws.require(rel).read_text(encoding="utf-8"))
        words = [s["word"] for s in report["scores"]]
    pool = cfg.get("neighbors", "pool_size", args.pool_size, 1000, int)
    keep = cfg.get("neighbors", "keep", args.keep, 20, int)
    pos = cfg.get("neighbors", "pos", args.pos, "NOUN")
    floor = cfg.get("neighbors", "freq_floor", args.freq_floor, 20, int)
    traces = []
    try:
        for w in words:
            trace = neighbor_trace(w, chain, pool, keep, None if pos.upper() == "ANY" else pos.upper(), floor)
            traces.append(trace.as_dict(cumulative_shift(w, chain).cumulative))
    except ShiftError as exc:
        raise CliError(EXIT_DATA, str(exc)) from None
    report = {"schema_version": 1, "kind": "neighbors", "traces": traces}
    rels = [_write_report(ws, "reports/neighbors.json", report)]
    ws.record("neighbors", rels, {"words": words, "pool_size": pool, "keep": keep, "pos": pos, "freq_floor": floor})
    return {"words": len(traces)}


def _period_selection(arg: str, n: int) -> list[int]:
    if arg == "all":
        return list(range(n))
    try:
        k = int(arg)
    except ValueError:
        raise CliError(EXIT_USAGE, f"--period must be 'all' or an integer, got {arg!r}") from None
    if not 0 <= k < n:
        raise CliError(EXIT_USAGE, f"period {k} out of range 0..{n - 1}")
    return [k]


def cmd_eval_sim(args, ws: Workspace, cfg: Settings):
    from .evaluation import EvaluationError, load_similarity_pairs, spearman

    spaces = _load_spaces(ws)
    try:
        pairs = load_similarity_pairs(args.dataset)
    except (OSError, EvaluationError) as exc:
        raise CliError(EXIT_INPUT, str(exc)) from None
    results = []
    for k in _period_selection(args.period, len(spaces)):
        try:
            res = spearman(pairs, spaces[k], args.method, seed=args.seed or 0)
        except EvaluationError as exc:
            raise CliError(EXIT_DATA, f"period {k}: {exc}") from None
        results.append({"period": k, **res.as_dict()})
    report = {"schema_version": 1, "kind": "eval-sim", "results": results}
    rels = [_write_report(ws, "reports/eval_sim.json", report)]
    ws.record("eval-sim", rels, {"dataset": args.dataset, "method": args.method, "period": args.period})
    return {"results": results}


def cmd_eval_syn(args, ws: Workspace, cfg: Settings):
    from .evaluation import EvaluationError, contrastive_spread, load_synonym_items

    spaces = _load_spaces(ws)
    try:
        items = load_synonym_items(args.dataset)
    except (OSError, EvaluationError) as exc:
        raise CliError(EXIT_INPUT, str(exc)) from None
    results = []
    for k in _period_selection(args.period, len(spaces)):
        for pos in args.pos or ["NOUN", "ADJ", "VERB"]:
            try:
                res = contrastive_spread(items, spaces[k], pos.upper())
            except EvaluationError as exc:
                logger.warning("period %d: %s", k, exc)
                continue
            results.append({"period": k, **res.as_dict()})
    if not results:
        raise CliError(EXIT_DATA, "no usable synonym items for any requested POS")
    report = {"schema_version": 1, "kind": "eval-syn", "results": results}
    rels = [_write_report(ws, "reports/eval_syn.json", report)]
    ws.record("eval-syn", rels, {"dataset": args.dataset, "pos": args.pos, "period": args.period})
    return {"results": results}


def _load_senti(path):
    from .senti import SentimentError, load_dataset

    try:
        return load_dataset(path)
    except (OSError, SentimentError) as exc:
        raise CliError(EXIT_INPUT, str(exc)) from None


def cmd_senti_train(args, ws: Workspace, cfg: Settings):
    from .senti import SentimentError, train_classifier

    chain = _load_chain(ws)
    data = _load_senti(args.dataset)
    reg = cfg.get("senti", "reg", args.reg, None, float)
    rels = []
    for k, space in enumerate(chain.spaces):
        try:
            clf = train_classifier(data, space, reg)
        except SentimentError as exc:
            raise CliError(EXIT_DATA, f"period {k}: {exc}") from None
        rel = f"classifiers/period_{k}.npz"
        clf.save(ws.path(rel))
        rels.append(rel)
    ws.record("senti-train", rels, {"dataset": args.dataset, "reg": reg})
    return {"classifiers": rels}


def cmd_senti_matrix(args, ws: Workspace, cfg: Settings):
    from .senti import SentimentClassifier, SentimentError, SentimentTransferMatrix, significance_matrix, transfer_matrix

    chain = _load_chain(ws)
    rels = ws.find("classifiers/period_", ".npz")
    if len(rels) != chain.n_periods:
        raise CliError(EXIT_MISSING, "classifiers missing; run `driftlab senti-train` first")
    classifiers = [SentimentClassifier.load(ws.require(r)) for r in rels]
    test = _load_senti(args.test)
    mode = cfg.get("senti", "mode", args.mode, "hard")
    folds = cfg.get("senti", "folds", args.folds, 10, int)
    reg = cfg.get("senti", "reg", args.reg, None, float)
    seed = args.seed or 0
    try:
        matrix = transfer_matrix(classifiers, chain, test, mode)
        if args.significance:
            pvals = significance_matrix(chain, _load_senti(args.significance), folds, reg, seed, mode)
            matrix = SentimentTransferMatrix(matrix.values, matrix.baselines, pvals, mode)
    except SentimentError as exc:
        raise CliError(EXIT_DATA, str(exc)) from None
    report = {"schema_version": 1, "kind": "senti-matrix", **matrix.as_dict()}
    out = [_write_report(ws, "reports/senti_matrix.json", report)]
    n = chain.n_periods
    out.append(
        _write_csv(
            ws,
            "reports/senti_matrix.csv",
            ["i\\j"] + [str(j) for j in range(n)],
            [[str(i)] + [repr(float(v)) for v in matrix.values[i]] for i in range(n)],
        )
    )
    ws.record("senti-matrix", out, {"test": args.test, "significance": args.significance, "mode": mode, "folds": folds, "seed": seed})
    return {"values": matrix.values.tolist()}


def cmd_senti_share(args, ws: Workspace, cfg: Settings):
    from .corpus import PeriodCorpus
    from .senti import SentimentError, lexicon_positive_share, load_lexicon

    rels = ws.find("corpus/period_", ".npz")
    if not rels:
        raise CliError(EXIT_MISSING, "no ingested corpus; run `driftlab ingest` first")
    try:
        lexicon = load_lexicon(args.lexicon)
    except (OSError, SentimentError) as exc:
        raise CliError(EXIT_INPUT, str(exc)) from None
    shares = []
    for rel in rels:
        corpus = PeriodCorpus.load(ws.require(rel))
        try:
            shares.append({"period": corpus.period_index, "positive_share": lexicon_positive_share(corpus, lexicon)})
        except SentimentError as exc:
            raise CliError(EXIT_DATA, str(exc)) from None
    report = {"schema_version": 1, "kind": "senti-share", "shares": shares}
    out = [_write_report(ws, "reports/senti_share.json", report)]
    ws.record("senti-share", out, {"lexicon": args.lexicon})
    return {"shares": shares}


def cmd_report(args, ws: Workspace, cfg: Settings):
    latest = ws.latest()
    if not latest:
        raise CliError(EXIT_MISSING, "workspace has no artifacts")
    reports = {}
    for rel in ws.find("reports/", ".json"):
        if rel == "reports/summary.json":
            continue
        data = json.loads(ws.require(rel).read_text(encoding="utf-8"))
        reports[data.get("kind", rel)] = {"path": rel, "sha256": latest[rel]["sha256"]}
    artifacts = {rel: entry["sha256"] for rel, entry in latest.items() if rel != "reports/summary.json"}
    for rel in artifacts:
        ws.require(rel)
    summary = {"schema_version": 1, "kind": "summary", "tool_version": __version__, "artifacts": artifacts, "reports": reports}
    dump_json(summary, ws.path("reports/summary.json"))
    ws.record("report", ["reports/summary.json"], {})
    return {"artifacts": len(artifacts), "reports": sorted(reports)}


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--workspace", help="workspace directory (default: $DRIFTLAB_WORKSPACE or ./driftlab-workspace)")
    common.add_argument("--config", help="INI config file; command-line flags take precedence")
    common.add_argument("--seed", type=int, help="random seed for this command")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="driftlab", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"driftlab {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic drift corpus")
    p.add_argument("--spec", help="DriftSpec JSON (default: bundled mini spec)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", parents=[common], help="split annotated documents into period corpora")
    p.add_argument("--corpus", nargs="+", help="JSON-lines corpus files (default: synthetic corpus)")
    p.add_argument("--periods", help="period config file with a [periods] section")
    p.add_argument("--lexicon", help="lemma lexicon TSV (surface, pos, lemma)")
    p.add_argument("--min-count", type=int)
    p.add_argument("--skip-malformed", action="store_true", help="skip malformed records instead of failing")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", parents=[common], help="train SGNS embeddings per period")
    p.add_argument("--period", default="all")
    p.add_argument("--vector-size", type=int)
    p.add_argument("--window", type=int)
    p.add_argument("--negative", type=int)
    p.add_argument("--sample", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("align", parents=[common], help="Procrustes-align all periods to the last one")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--normalize", dest="normalize", action="store_true", default=None)
    g.add_argument("--no-normalize", dest="normalize", action="store_false")
    p.add_argument("--min-count", type=int, help="per-period count floor for the shared vocabulary")
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("shift", parents=[common], help="rank words by cumulative shift")
    p.add_argument("--candidates", help="file of candidate keys (default: the whole shared vocabulary)")
    p.add_argument("--freq-floor", type=int, help="minimum total count over all periods (default 1000)")
    p.add_argument("--top-k", type=int)
    p.set_defaults(func=cmd_shift)

    p = sub.add_parser("neighbors", parents=[common], help="trace nearest neighbors across periods")
    p.add_argument("--word", action="append", help="word key; repeatable (default: words of the shift report)")
    p.add_argument("--pool-size", type=int)
    p.add_argument("--keep", type=int)
    p.add_argument("--pos", help="POS filter for neighbors, or ANY (default NOUN)")
    p.add_argument("--freq-floor", type=int, help="minimum count in every period (default 20)")
    p.set_defaults(func=cmd_neighbors)

    p = sub.add_parser("eval-sim", parents=[common], help="Spearman correlation with human similarity scores")
    p.add_argument("--dataset", required=True)
    p.add_argument("--period", default="all")
    p.add_argument("--method", choices=["t", "permutation"], default="t")
    p.set_defaults(func=cmd_eval_sim)

    p = sub.add_parser("eval-syn", parents=[common], help="contrastive spread on synonym-choice items")
    p.add_argument("--dataset", required=True)
    p.add_argument("--period", default="all")
    p.add_argument("--pos", action="append")
    p.set_defaults(func=cmd_eval_syn)

    p = sub.add_parser("senti-train", parents=[common], help="train one sentiment classifier per period")
    p.add_argument("--dataset", required=True)
    p.add_argument("--reg", type=float, help="L2 strength on the mean loss (default 1/n)")
    p.set_defaults(func=cmd_senti_train)

    p = sub.add_parser("senti-matrix", parents=[common], help="sentiment transfer matrix")
    p.add_argument("--test", required=True)
    p.add_argument("--significance", help="labelled dataset for k-fold significance")
    p.add_argument("--folds", type=int)
    p.add_argument("--reg", type=float)
    p.add_argument("--mode", choices=["hard", "expected"])
    p.set_defaults(func=cmd_senti_matrix)

    p = sub.add_parser("senti-share", parents=[common], help="share of positive lexicon words per period")
    p.add_argument("--lexicon", required=True)
    p.set_defaults(func=cmd_senti_share)

    p = sub.add_parser("report", parents=[common], help="summarise workspace artifacts")
    p.set_defaults(func=cmd_report)
    return parser


def _fail(code: int, message: str) -> int:
    sys.stderr.write(json.dumps({"error": _EXIT_NAMES.get(code, "error"), "exit_code": code, "message": message}) + "\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise CliError(EXIT_USAGE, "a subcommand is required")
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
        cfg = Settings(args.config)
        ws = Workspace.open(args.workspace)
        result = args.func(args, ws, cfg)
    except CliError as exc:
        return _fail(exc.code, str(exc))
    except MissingArtifact as exc:
        return _fail(EXIT_MISSING, f"missing artifact: {exc}")
    except HashMismatch as exc:
        return _fail(EXIT_HASH, f"artifact changed since it was recorded: {exc}")
    except Exception as exc:  # noqa: BLE001
        logger.debug("internal error", exc_info=True)
        return _fail(EXIT_INTERNAL, f"{type(exc).__name__}: {exc}")
    sys.stdout.write(json.dumps({"command": args.command, **(result or {})}, sort_keys=True, default=_jsonable) + "\n")
    return EXIT_OK


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(type(obj).__name__)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
