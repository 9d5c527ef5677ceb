"""Command-line entry point.

One binary, subcommand style. Every run writes a manifest recording the
command, the effective configuration, input digests, seed, tool version
and timing, so experiments stay reproducible. Exit codes: 1 usage,
2 input validation, 3 runtime failure; messages go to standard error.

A key=value config file (``--config`` or the LITCOREF_CONFIG environment
variable) seeds the pipeline settings; command-line flags override it.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, docio, gender as gender_mod, harness, metrics, resolver
from .detector import (TaggerTrainConfig, detect_mentions, evaluate_mentions,
                       load_tagger, save_tagger, train_tagger)
from .model import Document, PipelineConfig, attach_embeddings, validate_document
from .pairs import PairTrainConfig, load_pair_scorer, save_pair_scorer, train_pair_scorer

CONFIG_ENV_VAR = "LITCOREF_CONFIG"

EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_RUNTIME = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage problems, not argparse's 2
        raise UsageError(message)


# ---------------------------------------------------------------------------
# Configuration


def _parse_scalar(value: str):
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            continue
    return value


def read_config_file(path: str | Path) -> dict:
    values = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise docio.ParseError(f"{path}:{lineno}", "expected key = value")
        key, raw = (part.strip() for part in line.split("=", 1))
        values[key] = _parse_scalar(raw)
    return values


def effective_config(args) -> tuple[PipelineConfig, dict]:
    values: dict = {}
    config_path = getattr(args, "config", None) or os.environ.get(CONFIG_ENV_VAR)
    if config_path:
        values.update(read_config_file(config_path))
    for key in ("pronoun_window", "noun_window", "null_threshold",
                "clustering_strategy", "embedding_dim", "seed", "jobs"):
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    pipeline = PipelineConfig(
        pronoun_window=int(values.get("pronoun_window", 30)),
        noun_window=int(values.get("noun_window", 300)),
        null_threshold=float(values.get("null_threshold", 0.5)),
        clustering_strategy=str(values.get("clustering_strategy", "left_to_right")),
        embedding_dim=int(values.get("embedding_dim", 1024)),
    )
    extras = {"seed": int(values.get("seed", 0)), "jobs": int(values.get("jobs", 1))}
    return pipeline, extras


# ---------------------------------------------------------------------------
# Manifest


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return "sha256:" + digest.hexdigest()


def write_manifest(command: str, args, pipeline: PipelineConfig | None,
                   extras: dict, inputs: list[Path], outputs: list[Path],
                   started: float) -> None:
    manifest_path = getattr(args, "manifest", None)
    if manifest_path is None:
        manifest_path = f"litcoref-{command}.manifest.json"
    payload = {
        "command": command,
        "arguments": {k: v for k, v in sorted(vars(args).items())
                      if k not in ("func", "manifest") and v is not None},
        "config": (vars(pipeline) if pipeline else {}),
        "seed": extras.get("seed"),
        "jobs": extras.get("jobs"),
        "inputs": {str(p): _sha256(Path(p)) for p in inputs if Path(p).exists()},
        "outputs": {str(p): _sha256(Path(p)) for p in outputs if Path(p).exists()},
        "version": __version__,
        "duration_s": round(time.time() - started, 3),
    }
    Path(manifest_path).write_text(
        json.dumps(payload, indent=1, sort_keys=True, default=str),
        encoding="utf-8")


# ---------------------------------------------------------------------------
# Corpus loading


def _embedding_path(doc_path: Path) -> Path:
    return doc_path.with_suffix(".emb")


def load_corpus(paths, require_embeddings: bool = False,
                pipeline: PipelineConfig | None = None) -> list[Document]:
    corpus = []
    for raw in paths:
        path = Path(raw)
        doc = docio.load_document(path)
        emb_path = _embedding_path(path)
        if emb_path.exists():
            matrix = docio.read_embeddings(emb_path)
            expected = None
            if pipeline is not None and matrix.shape[1] == pipeline.embedding_dim:
                expected = pipeline.embedding_dim
            attach_embeddings(doc, matrix.astype(float), expected)
        elif require_embeddings:
            raise FileNotFoundError(f"no embedding file at {emb_path}")
        corpus.append(doc)
    return corpus


def _load_partition(path: Path, as_spans: bool = False) -> list[list]:
    text = Path(path).read_text(encoding="utf-8")
    if path.suffix == ".conll":
        return [sorted(cluster) for cluster in docio.import_conll(text)]
    raw = json.loads(text)
    if isinstance(raw, dict) and "chains" in raw:
        if as_spans:
            raise docio.ParseError(
                str(path), "chain files carry no spans; cannot be compared "
                           "against a CoNLL file")
        _, chains, _ = docio.parse_chains(text)
        return chains
    doc = docio.parse_document(text)
    if as_spans:
        return [sorted(doc.mentions[m].span() for m in chain.mention_ids)
                for chain in doc.chains]
    return [list(chain.mention_ids) for chain in doc.chains]


# ---------------------------------------------------------------------------
# Subcommands


def cmd_validate(args, pipeline, extras):
    failures = 0
    for raw in args.input:
        try:
            doc = docio.load_document(raw)
        except (docio.ParseError, docio.ValidationError) as err:
            print(f"{raw}: INVALID\n{err}", file=sys.stderr)
            failures += 1
            continue
        report = validate_document(doc)
        if report.ok:
            print(f"{raw}: OK ({doc.doc_id}: {doc.n_tokens} tokens, "
                  f"{len(doc.mentions)} mentions, {len(doc.chains)} chains)")
        else:
            print(f"{raw}: INVALID\n{report}", file=sys.stderr)
            failures += 1
    if failures:
        raise docio.ParseError("validate", f"{failures} invalid document(s)")
    return [Path(p) for p in args.input], []


def cmd_synth(args, pipeline, extras):
    values = read_config_file(args.config) if args.config else {}
    gap_means = {
        "pronoun": float(values.get("gap_pronoun", 2.0)),
        "common": float(values.get("gap_common", 12.0)),
        "proper": float(values.get("gap_proper", 20.0)),
    }
    pool = values.get("proper_pool")
    config = harness.SyntheticCorpusConfig(
        n_docs=int(values.get("n_docs", 1)),
        tokens_per_doc=int(values.get("tokens_per_doc", 1000)),
        n_entities=int(values.get("n_entities", 4)),
        pronoun_ratio=float(values.get("pronoun_ratio", 0.7)),
        proper_pool=tuple(str(pool).split("|")) if pool else
        harness.DEFAULT_NAME_POOL,
        gap_means=gap_means,
        coordination_rate=float(values.get("coordination_rate", 0.0)),
        burst_length=int(values.get("burst_length", 0)),
        embedding_dim=int(values.get("embedding_dim", 16)),
        seed=int(values.get("seed", extras["seed"])),
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = []
    for doc in harness.generate_synthetic_corpus(config):
        doc_path = out_dir / f"{doc.doc_id}.json"
        embeddings = doc.embeddings
        doc.embeddings = None
        docio.save_document(doc, doc_path)
        docio.write_embeddings(embeddings, _embedding_path(doc_path))
        outputs += [doc_path, _embedding_path(doc_path)]
        print(f"wrote {doc_path} ({doc.n_tokens} tokens, "
              f"{len(doc.mentions)} mentions)")
    inputs = [Path(args.config)] if args.config else []
    return inputs, outputs


def cmd_train_detector(args, pipeline, extras):
    corpus = load_corpus(args.corpus, require_embeddings=True, pipeline=pipeline)
    config = TaggerTrainConfig(
        batch_sentences=args.batch, learning_rate=args.lr,
        max_epochs=args.epochs, locked_dropout=args.dropout,
        seed=extras["seed"])
    model, log = train_tagger(
        corpus, args.level, config, projection_dim=args.projection,
        hidden_size=args.hidden, encoder=args.encoder,
        log_path=args.train_log)
    save_tagger(model, args.out)
    if log:
        print(f"trained level-{args.level} tagger: "
              f"best validation F1 {max(e.validation_f1 for e in log):.4f}")
    return [Path(p) for p in args.corpus], [Path(args.out)]


def cmd_detect(args, pipeline, extras):
    corpus = load_corpus(args.input, require_embeddings=True, pipeline=pipeline)
    level0 = load_tagger(args.level0)
    level1 = load_tagger(args.level1)
    outputs = []
    for raw, doc in zip(args.input, corpus):
        mentions = detect_mentions(level0, level1, doc)
        predicted = Document(doc.doc_id, doc.tokens, mentions, [])
        out_path = Path(args.out) if len(args.input) == 1 else \
            Path(args.out) / (Path(raw).stem + ".detected.json")
        out_path.parent.mkdir(parents=True, exist_ok=True)
        docio.save_document(docio.parse_document(docio.write_document(predicted)),
                            out_path)
        outputs.append(out_path)
        if args.report:
            prf = evaluate_mentions(mentions, doc.mentions)
            print(f"{doc.doc_id}: P={prf.precision:.4f} R={prf.recall:.4f} "
                  f"F1={prf.f1:.4f}")
        else:
            print(f"{doc.doc_id}: {len(mentions)} mentions detected")
    return [Path(p) for p in args.input], outputs


def cmd_train_pairs(args, pipeline, extras):
    corpus = load_corpus(args.corpus, require_embeddings=True, pipeline=pipeline)
    config = PairTrainConfig(
        batch_pairs=args.batch, learning_rate=args.lr,
        max_epochs=args.epochs, seed=extras["seed"])
    model, log = train_pair_scorer(corpus, config, pipeline,
                                   hidden_dim=args.hidden,
                                   dropout_rate=args.dropout)
    save_pair_scorer(model, args.out)
    if log:
        print(f"trained pair scorer: best validation loss "
              f"{min(e['validation_loss'] for e in log):.4f}")
    return [Path(p) for p in args.corpus], [Path(args.out)]


def _scorer_from_args(args):
    if args.oracle_pairs:
        return resolver.oracle_scorer()
    if args.pairs:
        return resolver.model_scorer(load_pair_scorer(args.pairs))
    raise UsageError("resolve needs --pairs MODEL or --oracle-pairs")


def _resolve_worker(payload):
    (doc_path, mentions_path, gold_mentions, pairs_path, oracle,
     strategy, pipeline_kwargs) = payload
    pipeline = PipelineConfig(**pipeline_kwargs)
    doc = load_corpus([doc_path], require_embeddings=pairs_path is not None,
                      pipeline=pipeline)[0]
    if gold_mentions:
        mentions = None
    else:
        predicted = docio.load_document(Path(mentions_path))
        mentions = predicted.mentions
    if oracle:
        scorer = resolver.oracle_scorer()
    else:
        scorer = resolver.model_scorer(load_pair_scorer(pairs_path))
    chains, _, diagnostics = resolver.resolve_document(
        doc, scorer, pipeline, mentions=mentions, strategy=strategy)
    return doc.doc_id, docio.write_chains(doc.doc_id, chains, strategy,
                                          diagnostics)


def cmd_resolve(args, pipeline, extras):
    if not args.gold_mentions and not args.mentions:
        raise UsageError("resolve needs --gold-mentions or --mentions FILE")
    if args.mentions and len(args.mentions) != len(args.input):
        raise UsageError("--mentions must be given once per --input document")
    _scorer_from_args(args)  # validate flags early
    strategy = args.strategy or pipeline.clustering_strategy
    payloads = []
    for i, doc_path in enumerate(args.input):
        payloads.append((
            doc_path,
            args.mentions[i] if args.mentions else None,
            args.gold_mentions,
            args.pairs,
            args.oracle_pairs,
            strategy,
            vars(pipeline),
        ))
    if extras["jobs"] > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(max_workers=extras["jobs"]) as pool:
            results = list(pool.map(_resolve_worker, payloads))
    else:
        results = [_resolve_worker(p) for p in payloads]
    out_dir = Path(args.out)
    outputs = []
    if len(results) == 1 and not out_dir.is_dir():
        out_dir.parent.mkdir(parents=True, exist_ok=True)
        Path(out_dir).write_text(results[0][1], encoding="utf-8")
        outputs.append(out_dir)
    else:
        out_dir.mkdir(parents=True, exist_ok=True)
        for doc_id, payload in results:
            path = out_dir / f"{doc_id}.chains.json"
            path.write_text(payload, encoding="utf-8")
            outputs.append(path)
    for doc_id, _ in results:
        print(f"resolved {doc_id} with {strategy}")
    return [Path(p) for p in args.input], outputs


def cmd_score(args, pipeline, extras):
    # a CoNLL side forces span-based comparison on both sides
    as_spans = Path(args.gold).suffix == ".conll" or \
        Path(args.pred).suffix == ".conll"
    gold = _load_partition(Path(args.gold), as_spans)
    pred = _load_partition(Path(args.pred), as_spans)
    report = metrics.score_partitions(
        [frozenset(c) for c in gold], [frozenset(c) for c in pred])
    print(f"MUC P={report.muc.precision:.5f} R={report.muc.recall:.5f} "
          f"F1={report.muc.f1:.5f}")
    print(f"B3 P={report.b_cubed.precision:.5f} R={report.b_cubed.recall:.5f} "
          f"F1={report.b_cubed.f1:.5f}")
    print(f"CEAFe P={report.ceaf_e.precision:.5f} R={report.ceaf_e.recall:.5f} "
          f"F1={report.ceaf_e.f1:.5f}")
    print(f"CoNLL F1={report.conll_f1:.5f}")
    return [Path(args.gold), Path(args.pred)], []


def cmd_stats(args, pipeline, extras):
    corpus = load_corpus(args.corpus)
    text = harness.corpus_stats(corpus).to_tsv()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        return [Path(p) for p in args.corpus], [Path(args.out)]
    print(text, end="")
    return [Path(p) for p in args.corpus], []


def cmd_antecedent_dist(args, pipeline, extras):
    corpus = load_corpus(args.corpus)
    text = harness.distances_to_tsv(
        harness.antecedent_distance_distribution(corpus))
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        return [Path(p) for p in args.corpus], [Path(args.out)]
    print(text, end="")
    return [Path(p) for p in args.corpus], []


def cmd_length_sweep(args, pipeline, extras):
    corpus = load_corpus(args.corpus,
                         require_embeddings=args.pairs is not None,
                         pipeline=pipeline)
    scorer = _scorer_from_args(args)
    strategies = ([args.strategy] if args.strategy != "both"
                  else ["left_to_right", "easy_first_global"])
    blocks = []
    ldjson = []
    outputs = []
    for strategy in strategies:
        def run(sample, _strategy=strategy):
            chains, _, _ = resolver.resolve_document(
                sample, scorer, pipeline, strategy=_strategy)
            return [frozenset(c) for c in chains]
        cells = harness.length_sweep(corpus, args.lengths, run)
        blocks.append(harness.sweep_to_tsv(cells, strategy))
        ldjson.append(harness.sweep_to_ldjson(cells, strategy))
        if args.series_dir:
            series_dir = Path(args.series_dir)
            series_dir.mkdir(parents=True, exist_ok=True)
            series_path = series_dir / f"{strategy}.dat"
            series_path.write_text(harness.sweep_to_series(cells),
                                   encoding="utf-8")
            outputs.append(series_path)
    text = blocks[0] + "".join(block.split("\n", 1)[1] for block in blocks[1:])
    if args.ldjson:
        Path(args.ldjson).write_text("".join(ldjson), encoding="utf-8")
        outputs.append(Path(args.ldjson))
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        outputs.append(Path(args.out))
    else:
        print(text, end="")
    return [Path(p) for p in args.corpus], outputs


def cmd_gender(args, pipeline, extras):
    corpus = load_corpus(args.corpus)
    clues = docio.load_genderclue_lexicon(args.clues)
    firstnames = docio.load_firstname_lexicon(args.firstnames)
    chains_per_doc = None
    if args.chains:
        if len(args.chains) != len(args.corpus):
            raise UsageError("--chains must be given once per corpus document")
        chains_per_doc = []
        for doc, path in zip(corpus, args.chains):
            partition = _load_partition(Path(path))
            chains_per_doc.append(gender_mod.partition_chains(doc, partition))
    reports = gender_mod.evaluate_gender_corpus(
        corpus, clues, firstnames, chains_per_doc, args.ratio_threshold)
    text = gender_mod.reports_to_tsv(reports)
    outputs = []
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        outputs.append(Path(args.out))
    else:
        print(text, end="")
    if args.assignments:
        doc = corpus[0]
        assignment = gender_mod.propagate_gender(
            doc,
            chains_per_doc[0] if chains_per_doc else gender_mod.eligible_chains(doc),
            gender_mod.label_mentions(doc, clues, firstnames,
                                      args.ratio_threshold))
        Path(args.assignments).write_text(
            gender_mod.assignment_to_json(doc, assignment), encoding="utf-8")
        outputs.append(Path(args.assignments))
    inputs = [Path(p) for p in args.corpus] + [Path(args.clues),
                                               Path(args.firstnames)]
    return inputs, outputs


# ---------------------------------------------------------------------------
# Parser assembly


def build_parser() -> _Parser:
    parser = _Parser(prog="litcoref",
                     description="Coreference toolkit for long documents")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value pipeline config file")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--jobs", type=int, default=None,
                        help="document-level parallelism (1 = reproducible)")
    common.add_argument("--manifest", help="run manifest path")
    common.add_argument("--pronoun-window", type=int, dest="pronoun_window")
    common.add_argument("--noun-window", type=int, dest="noun_window")
    common.add_argument("--null-threshold", type=float, dest="null_threshold")
    common.add_argument("--embedding-dim", type=int, dest="embedding_dim")

    p = sub.add_parser("validate", parents=[common],
                       help="check documents against the model invariants")
    p.add_argument("--input", nargs="+", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("--config", help="key=value generator config")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train-detector", parents=[common],
                       help="train one nesting level's mention tagger")
    p.add_argument("--corpus", nargs="+", required=True)
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--encoder", choices=["mixer", "recurrent"], default="mixer")
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--batch", type=int, default=16)
    p.add_argument("--lr", type=float, default=1.4e-4)
    p.add_argument("--dropout", type=float, default=0.5)
    p.add_argument("--hidden", type=int, default=256)
    p.add_argument("--projection", type=int, default=None)
    p.add_argument("--train-log", dest="train_log")
    p.set_defaults(func=cmd_train_detector)

    p = sub.add_parser("detect", parents=[common],
                       help="run mention detection over documents")
    p.add_argument("--input", nargs="+", required=True)
    p.add_argument("--level0", required=True)
    p.add_argument("--level1", required=True)
    p.add_argument("--out", required=True,
                   help="output file (single input) or directory")
    p.add_argument("--report", action="store_true",
                   help="print exact-match P/R/F1 against gold mentions")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("train-pairs", parents=[common],
                       help="train the mention-pair scorer")
    p.add_argument("--corpus", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--batch", type=int, default=16000)
    p.add_argument("--lr", type=float, default=1.4e-4)
    p.add_argument("--dropout", type=float, default=0.6)
    p.add_argument("--hidden", type=int, default=1900)
    p.set_defaults(func=cmd_train_pairs)

    p = sub.add_parser("resolve", parents=[common],
                       help="rank antecedents and cluster into chains")
    p.add_argument("--input", nargs="+", required=True)
    p.add_argument("--mentions", nargs="+",
                   help="detected-mention documents, one per input")
    p.add_argument("--gold-mentions", action="store_true",
                   help="bypass detection and use gold mention spans")
    p.add_argument("--pairs", help="pair scorer checkpoint")
    p.add_argument("--oracle-pairs", action="store_true",
                   help="score pairs from gold chains (pipeline verification)")
    p.add_argument("--strategy",
                   choices=["left_to_right", "easy_first_global"])
    p.add_argument("--out", required=True,
                   help="chains file (single input) or directory")
    p.set_defaults(func=cmd_resolve)

    p = sub.add_parser("score", parents=[common],
                       help="score a predicted partition against gold")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("stats", parents=[common], help="corpus statistics")
    p.add_argument("--corpus", nargs="+", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("antecedent-dist", parents=[common],
                       help="nearest-antecedent distance percentiles")
    p.add_argument("--corpus", nargs="+", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_antecedent_dist)

    p = sub.add_parser("length-sweep", parents=[common],
                       help="document-length study over gold mentions")
    p.add_argument("--corpus", nargs="+", required=True)
    p.add_argument("--lengths", nargs="+", type=int, required=True)
    p.add_argument("--strategy", default="both",
                   choices=["both", "left_to_right", "easy_first_global"])
    p.add_argument("--pairs")
    p.add_argument("--oracle-pairs", action="store_true")
    p.add_argument("--out")
    p.add_argument("--ldjson", help="also write line-delimited JSON rows")
    p.add_argument("--series-dir", dest="series_dir",
                   help="write per-strategy plot series files here")
    p.set_defaults(func=cmd_length_sweep)

    p = sub.add_parser("gender", parents=[common],
                       help="three-stage character gender report")
    p.add_argument("--corpus", nargs="+", required=True)
    p.add_argument("--clues", required=True)
    p.add_argument("--firstnames", required=True)
    p.add_argument("--chains", nargs="+",
                   help="predicted chain files for the propagation stage")
    p.add_argument("--ratio-threshold", type=float, default=0.9,
                   dest="ratio_threshold")
    p.add_argument("--out")
    p.add_argument("--assignments",
                   help="write per-mention assignment JSON (first document)")
    p.set_defaults(func=cmd_gender)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    started = time.time()
    try:
        args = parser.parse_args(argv)
        pipeline, extras = (None, {"seed": 0, "jobs": 1})
        if args.command != "synth":
            pipeline, extras = effective_config(args)
        elif getattr(args, "seed", None) is not None:
            extras = {"seed": args.seed, "jobs": 1}
        np.random.seed(extras["seed"])
        inputs, outputs = args.func(args, pipeline, extras)
        write_manifest(args.command, args, pipeline, extras, inputs, outputs,
                       started)
        return 0
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (docio.ParseError, docio.ValidationError, FileNotFoundError) as err:
        print(f"input error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, RuntimeError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_RUNTIME


def run() -> None:
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    run()
