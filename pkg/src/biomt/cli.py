"""Command-line entry point.

Exit codes: 0 success, 1 validation failure, 2 I/O failure, 3 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from biomt import __version__
from biomt.bleu import Smoothing, corpus_bleu_text, tokenize_eval
from biomt.core import LangPair, NmtConfigCapture
from biomt.errors import BiomtError, InvalidConfig
from biomt.ingest import (
    ParseReport,
    open_text,
    parse_doc_metadata,
    parse_mrconso,
    read_bitext_files,
    read_doc_titles,
    read_tsv_file,
    write_bitext,
)
from biomt.manifest import load_manifest, make_manifest, save_manifest, validate_manifest
from biomt.pipeline import (
    DEFAULT_SEED,
    PartitionSpec,
    build_exclusion_index,
    corpus_stats,
    filter_overlap,
    partition,
)
from biomt.reference import report_official_scores
from biomt.runner import PipelineConfig, canonical_hash, run_pipeline
from biomt.smt import (
    DecoderWeights,
    LanguageModel,
    TranslationTable,
    evaluate_baseline,
    train_bigram_lm,
    train_ibm1,
    translate_tokens,
)
from biomt.umls import extract_parallel_concepts, write_term_pairs

logger = logging.getLogger("biomt")


def _read_lines(path) -> list[str]:
    with open_text(path) as fh:
        return [line.rstrip("\r\n") for line in fh]


def _segments(args, pair, corpus_id="input"):
    if getattr(args, "tsv", None):
        return list(read_tsv_file(args.tsv, pair, corpus_id))
    if getattr(args, "src", None) and getattr(args, "tgt", None):
        return list(read_bitext_files(args.src, args.tgt, pair, corpus_id))
    raise InvalidConfig("give either --tsv FILE or --src FILE --tgt FILE")


def _dump(obj, path=None):
    text = json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_ingest(args):
    pair = LangPair.parse(args.pair)
    out = Path(args.out)
    if args.tsv:
        refs = [(args.tsv, "tsv")]
    elif args.src and args.tgt:
        refs = [(args.src, "text-source"), (args.tgt, "text-target")]
    else:
        raise InvalidConfig("give either --tsv FILE or --src FILE --tgt FILE")
    # file refs are stored relative to the manifest's directory
    base = out.parent
    refs = [(os.path.relpath(p, base), fmt) for p, fmt in refs]
    manifest = make_manifest(args.name, pair, refs, base_dir=base, provenance_note=args.note)
    save_manifest(manifest, out)
    report = validate_manifest(manifest, base)
    sys.stdout.write(f"{manifest.name}\t{manifest.pair}\t{manifest.segment_count} segments\n")
    sys.stdout.write(report.to_tsv())
    return 1 if report else 0


def cmd_validate(args):
    status = 0
    for path in args.manifest:
        manifest = load_manifest(path)
        report = validate_manifest(manifest, Path(path).parent)
        sys.stdout.write(f"# {path}\n{report.to_tsv()}")
        status = status or (1 if report else 0)
    return status


def cmd_umls_extract(args):
    pair = LangPair.parse(args.pair)
    parse = ParseReport()
    with open_text(args.mrconso) as fh:
        atoms = parse_mrconso(fh, {pair.source, pair.target}, parse, args.max_malformed)
        pairs, report = extract_parallel_concepts(atoms, pair)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            write_term_pairs(pairs, fh)
    else:
        write_term_pairs(pairs, sys.stdout)
    if args.report:
        Path(args.report).write_text(report.to_json(), encoding="utf-8")
    if args.errors:
        Path(args.errors).write_text(parse.to_tsv(), encoding="utf-8")
    sys.stderr.write(report.to_json())
    return 0


def cmd_filter(args):
    pair = LangPair.parse(args.pair)
    segments = _segments(args, pair)
    titles = {}
    if args.titles:
        with open_text(args.titles) as fh:
            titles = read_doc_titles(fh)
    docs = []
    for path in args.metadata:
        with open_text(path) as fh:
            docs.extend(parse_doc_metadata(fh))
    index = build_exclusion_index(docs)
    kept, removed, report = filter_overlap(segments, titles, index)
    out = Path(args.out_dir)
    write_bitext(kept, out / "kept.src", out / "kept.tgt")
    write_bitext(removed, out / "removed.src", out / "removed.tgt")
    _dump(report.to_dict(), out / "filter_report.json")
    (out / "filter_report.tsv").write_text(
        "\n".join(f"{k}\t{v}" for k, v in report.to_dict().items()) + "\n", encoding="utf-8")
    _dump(report.to_dict())
    return 0


def cmd_partition(args):
    pair = LangPair.parse(args.pair)
    segments = _segments(args, pair)
    spec = PartitionSpec(args.dev_size, args.seed, args.unit)
    train, dev = partition(segments, spec)
    out = Path(args.out_dir)
    note = f"partition dev_size={spec.dev_size} unit={spec.unit.value} seed={spec.seed}"
    for name, segs in (("train", train), ("dev", dev)):
        write_bitext(segs, out / f"{name}.src", out / f"{name}.tgt")
        m = make_manifest(name, pair, [(f"{name}.src", "text-source"), (f"{name}.tgt", "text-target")],
                          base_dir=out, provenance_note=note)
        save_manifest(m, out / f"{name}.manifest.json")
    sys.stdout.write(f"train\t{len(train)}\ndev\t{len(dev)}\n")
    return 0


def cmd_stats(args):
    manifests = [load_manifest(p) for p in args.manifest]
    printed = {}
    for item in args.printed_total:
        key, _, value = item.partition("=")
        printed[LangPair.parse(key)] = value
    pair = LangPair.parse(args.pair) if args.pair else None
    table = corpus_stats(manifests, pair=pair, printed_totals=printed)
    if args.json:
        Path(args.json).write_text(table.to_json(), encoding="utf-8")
    if args.tsv:
        Path(args.tsv).write_text(table.to_tsv(), encoding="utf-8")
    sys.stdout.write(table.render())
    for w in table.warnings:
        sys.stderr.write(f"warning: {w}\n")
    return 0


def cmd_train_baseline(args):
    pair = LangPair.parse(args.pair)
    segments = _segments(args, pair)
    tt, history = train_ibm1(segments, args.iterations, args.null, args.lowercase)
    lm = train_bigram_lm((tokenize_eval(s.target_text, args.lowercase) for s in segments), args.k)
    out = Path(args.model_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "tt.tsv").write_text(tt.to_tsv(), encoding="utf-8")
    (out / "lm.tsv").write_text(lm.to_tsv(), encoding="utf-8")
    for i, ll in enumerate(history, 1):
        sys.stdout.write(f"iteration {i}\tlog-likelihood {ll:.6f}\n")
    return 0


def _load_model(model_dir):
    model_dir = Path(model_dir)
    with open_text(model_dir / "tt.tsv") as fh:
        tt = TranslationTable.from_tsv(fh)
    with open_text(model_dir / "lm.tsv") as fh:
        lm = LanguageModel.from_tsv(fh)
    return tt, lm


def _weights(args):
    return DecoderWeights(args.lambda_tm, args.lambda_lm, args.beam)


def cmd_translate(args):
    tt, lm = _load_model(args.model_dir)
    w = _weights(args)
    sources = [tokenize_eval(line, args.lowercase) for line in _read_lines(args.input)]
    hyps = translate_tokens(sources, tt, lm, w, args.threads)
    out = open(args.output, "w", encoding="utf-8", newline="\n") if args.output else sys.stdout
    try:
        for hyp in hyps:
            out.write(" ".join(hyp) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_evaluate(args):
    pair = LangPair.parse(args.pair)
    tt, lm = _load_model(args.model_dir)
    segments = _segments(args, pair)
    report = evaluate_baseline(segments, tt, lm, _weights(args), args.lowercase, args.threads)
    sys.stdout.write(report.to_json())
    sys.stdout.write(report.summary() + "\n")
    return 0


def cmd_bleu(args):
    hyps = _read_lines(args.hyp)
    refs = _read_lines(args.ref)
    report = corpus_bleu_text(hyps, refs, lowercase=args.lowercase,
                              max_order=args.max_n, smoothing=args.smoothing)
    sys.stdout.write(report.to_json())
    sys.stdout.write(report.summary() + "\n")
    return 0


def cmd_report(args):
    sys.stdout.write(report_official_scores(args.direction, args.fixture))
    return 0


def cmd_emit_nmt_config(args):
    overrides = {name: getattr(args, name) for name in
                 ("word_vector_size", "layers", "rnn_size", "batch_size", "vocabulary_size")
                 if getattr(args, name) is not None}
    config = NmtConfigCapture.with_overrides(overrides)
    if args.out:
        Path(args.out).write_text(config.to_json(), encoding="utf-8")
    else:
        sys.stdout.write(config.to_json())
    return 0


def cmd_run(args):
    config = PipelineConfig.load(args.config)
    if args.append_terms is not None:
        config.set_append_terms(args.append_terms)
    config.threads = args.threads
    sys.stderr.write(f"seed={config.seed} config_hash={config.config_hash}\n")
    summary = run_pipeline(config)
    for st in summary.stages:
        counts = {k: v for k, v in st.items() if isinstance(v, int) and not isinstance(v, bool)}
        sys.stdout.write(f"{st['stage']}\t" + " ".join(f"{k}={v}" for k, v in counts.items()) + "\n")
    return 0


def _add_input(p, required_pair=True):
    p.add_argument("--pair", required=required_pair, help="language pair, e.g. SPA-ENG")
    p.add_argument("--tsv", help="TSV bitext: source, target[, doc_id]")
    p.add_argument("--src", help="source side of a line-aligned bitext")
    p.add_argument("--tgt", help="target side of a line-aligned bitext")


def _add_decoder(p):
    p.add_argument("--model-dir", required=True)
    p.add_argument("--beam", type=int, default=5)
    p.add_argument("--lambda-tm", type=float, default=1.0)
    p.add_argument("--lambda-lm", type=float, default=1.0)
    p.add_argument("--lowercase", action="store_true")
    _add_threads(p)


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return value


def _add_threads(p):
    p.add_argument("--threads", type=_positive_int, default=1,
                   help="cap on decoding worker processes (output does not depend on it)")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage errors are validation failures (1); argparse would use 2
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="biomt", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="register a corpus: write its manifest and validate it")
    _add_input(p)
    p.add_argument("--name", required=True)
    p.add_argument("--out", required=True, help="manifest JSON to write")
    p.add_argument("--note", default="", help="provenance note")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("validate", help="validate manifests against their files")
    p.add_argument("manifest", nargs="+")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("umls-extract", help="parallel concept terms from MRCONSO.RRF")
    p.add_argument("--mrconso", required=True)
    p.add_argument("--pair", required=True)
    p.add_argument("--out", help="term pair TSV (default stdout)")
    p.add_argument("--report", help="extraction report JSON")
    p.add_argument("--errors", help="malformed-row report TSV")
    p.add_argument("--max-malformed", type=int, default=1000)
    p.set_defaults(func=cmd_umls_extract)

    p = sub.add_parser("filter", help="remove segments of documents found in metadata exports")
    _add_input(p)
    p.add_argument("--titles", help="doc_id/title TSV for the corpus documents")
    p.add_argument("--metadata", nargs="+", default=[], help="Pubmed metadata TSV exports")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("partition", help="seeded train/dev split")
    _add_input(p)
    p.add_argument("--dev-size", type=int, required=True)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--unit", choices=("segment", "document"), default="segment")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("stats", help="corpus size table from manifests")
    p.add_argument("manifest", nargs="+")
    p.add_argument("--pair", help="restrict the table to one language pair")
    p.add_argument("--printed-total", action="append", default=[], metavar="PAIR=TOTAL",
                   help="compare a total against a printed value such as 2.37M")
    p.add_argument("--json")
    p.add_argument("--tsv")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("train-baseline", help="train Model 1 and a bigram LM")
    _add_input(p)
    p.add_argument("--model-dir", required=True)
    p.add_argument("--iterations", type=int, default=10)
    p.add_argument("--null", action="store_true", help="add a NULL source word")
    p.add_argument("--k", type=float, default=1.0, help="LM add-k constant")
    p.add_argument("--lowercase", action="store_true")
    p.set_defaults(func=cmd_train_baseline)

    p = sub.add_parser("translate", help="decode a source file with a trained baseline")
    _add_decoder(p)
    p.add_argument("--input", required=True)
    p.add_argument("--output")
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("evaluate", help="decode a bitext's source side and score it")
    _add_input(p)
    _add_decoder(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bleu", help="corpus BLEU of a hypothesis file against a reference file")
    p.add_argument("--hyp", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--lowercase", action="store_true")
    p.add_argument("--max-n", type=int, default=4)
    p.add_argument("--smoothing", choices=[s.value for s in Smoothing], default="none")
    p.set_defaults(func=cmd_bleu)

    p = sub.add_parser("report", help="official shared-task BLEU table")
    p.add_argument("--direction", help="EN/ES, EN/PT, ES/EN or PT/EN")
    p.add_argument("--fixture", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("emit-nmt-config", help="write the NMT hyperparameter capture")
    for name in ("word-vector-size", "layers", "rnn-size", "batch-size", "vocabulary-size"):
        p.add_argument(f"--{name}", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_emit_nmt_config)

    p = sub.add_parser("run", help="run the full pipeline from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--append-terms", action=argparse.BooleanOptionalAction, default=None,
                   help="turn the configured append-terms stage on or off")
    _add_threads(p)
    p.set_defaults(func=cmd_run)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command != "run":
        params = {k: v for k, v in vars(args).items() if k not in ("func", "verbose", "threads")}
        seed = params.get("seed", DEFAULT_SEED)
        sys.stderr.write(f"seed={seed} config_hash={canonical_hash(params)}\n")
    try:
        return args.func(args)
    except BiomtError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.exit_code
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except Exception as exc:  # noqa: BLE001
        sys.stderr.write(f"internal error: {type(exc).__name__}: {exc}\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
