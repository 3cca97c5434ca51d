"""Config-driven end-to-end run: ingest, filter, dedup, append terms,
partition, and optionally train and evaluate the baseline."""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from biomt.bleu import Smoothing, corpus_bleu, tokenize_eval
from biomt.core import LangPair, SegmentPair
from biomt.errors import BiomtError, InvalidConfig, IOFailure
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
from biomt.manifest import CorpusManifest, FileRef, file_sha256, make_manifest, save_manifest
from biomt.pipeline import (
    DEFAULT_SEED,
    PartitionSpec,
    build_exclusion_index,
    corpus_stats,
    dedup,
    filter_overlap,
    partition,
    render_split_table,
)
from biomt.smt import (
    DecoderWeights,
    shuffled_control,
    train_bigram_lm,
    train_ibm1,
    translate_segments,
)
from biomt.umls import extract_parallel_concepts, write_term_pairs

logger = logging.getLogger(__name__)

STAGES = ("ingest", "filter", "dedup", "append-terms", "partition", "train-baseline", "evaluate")


def canonical_hash(obj) -> str:
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


@dataclass
class PipelineConfig:
    pair: LangPair
    stages: list[dict]
    partition: PartitionSpec | None
    output_dir: Path
    seed: int = DEFAULT_SEED
    base_dir: Path = Path(".")
    lowercase: bool = False
    raw: dict = field(default_factory=dict)
    # decoding worker cap; does not change outputs, so it is not hashed
    threads: int = 1

    @property
    def config_hash(self) -> str:
        return canonical_hash(self.raw)

    @classmethod
    def from_dict(cls, d: dict, base_dir=".") -> PipelineConfig:
        try:
            pair = d["pair"]
            pair = LangPair.parse(pair) if isinstance(pair, str) else LangPair(pair["source"], pair["target"])
            seed = d.get("seed", DEFAULT_SEED)
            stages = [s if isinstance(s, dict) else {"stage": s} for s in d["stages"]]
            part = d.get("partition")
            spec = None
            if part is not None:
                spec = PartitionSpec(int(part["dev_size"]), seed, part.get("unit", "segment"))
            output_dir = d["output_dir"]
        except (KeyError, TypeError) as exc:
            raise InvalidConfig(f"config is missing or has a bad field: {exc}") from None
        if not stages:
            raise InvalidConfig("stage list is empty")
        names = [s.get("stage") for s in stages]
        for name in names:
            if name not in STAGES:
                raise InvalidConfig(f"unknown stage {name!r}")
        if len(set(names)) != len(names):
            raise InvalidConfig("a stage is listed twice")
        if names[0] != "ingest":
            raise InvalidConfig("the first stage must be ingest")
        order = {n: i for i, n in enumerate(names)}
        for later, earlier in (("train-baseline", "partition"), ("evaluate", "train-baseline")):
            if later in order and order.get(earlier, len(names)) > order[later]:
                raise InvalidConfig(f"{later} needs {earlier} before it")
        if "partition" in order and spec is None:
            raise InvalidConfig("partition stage needs a 'partition' section with dev_size")
        base = Path(base_dir)
        return cls(pair, stages, spec, base / output_dir, seed, base,
                   bool(d.get("lowercase", False)), d)

    def set_append_terms(self, enabled: bool) -> None:
        """Override the append-terms stage's flag; the override is part of
        the hashed config."""
        for st in self.stages:
            if st["stage"] == "append-terms":
                st["enabled"] = enabled
        self.raw = {**self.raw, "stages": self.stages}

    @classmethod
    def load(cls, path) -> PipelineConfig:
        path = Path(path)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise IOFailure(path, "no such file") from None
        except json.JSONDecodeError as exc:
            raise InvalidConfig(f"{path}: not valid JSON ({exc})") from None
        return cls.from_dict(raw, base_dir=path.parent)

    def input_paths(self) -> list[Path]:
        paths = []
        for st in self.stages:
            for c in st.get("corpora", ()):
                paths += [c[k] for k in ("tsv", "source", "target", "titles") if k in c]
            paths += list(st.get("metadata", ()))
            if "mrconso" in st:
                paths.append(st["mrconso"])
        return [self.base_dir / p for p in paths]


@dataclass
class RunSummary:
    seed: int
    config_hash: str
    pair: str
    stages: list[dict] = field(default_factory=list)
    statistics: dict = field(default_factory=dict)
    error: dict | None = None

    def to_dict(self) -> dict:
        d = {
            "seed": self.seed,
            "config_hash": self.config_hash,
            "pair": self.pair,
            "stages": self.stages,
            "statistics": self.statistics,
        }
        if self.error is not None:
            d["error"] = self.error
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    def stage(self, name: str) -> dict:
        for st in self.stages:
            if st["stage"] == name:
                return st
        raise KeyError(name)


class _Run:
    def __init__(self, config: PipelineConfig):
        self.cfg = config
        self.out = config.output_dir
        self.summary = RunSummary(config.seed, config.config_hash, str(config.pair))
        self.segments: list[SegmentPair] = []
        self.titles: dict[str, str] = {}
        self.input_manifests: list[CorpusManifest] = []
        self.terms: list[SegmentPair] = []
        self.train: list[SegmentPair] | None = None
        self.dev: list[SegmentPair] | None = None
        self.model = None

    @property
    def provenance(self) -> str:
        return f"seed={self.cfg.seed} config_hash={self.cfg.config_hash}"

    def path(self, p) -> Path:
        return self.cfg.base_dir / p

    def write_split(self, name: str, segments, note: str) -> dict:
        src, tgt = f"{name}.src", f"{name}.tgt"
        write_bitext(segments, self.out / src, self.out / tgt)
        manifest = make_manifest(name, self.cfg.pair, [(src, "text-source"), (tgt, "text-target")],
                                 base_dir=self.out, provenance_note=f"{note}; {self.provenance}")
        save_manifest(manifest, self.out / f"{name}.manifest.json")
        return {"name": name, "segments": manifest.segment_count}

    def ingest(self, st):
        corpora = st.get("corpora") or []
        if not corpora:
            raise InvalidConfig("ingest stage lists no corpora")
        report = {"stage": "ingest", "corpora": []}
        seen = set()
        for c in corpora:
            name = c["name"]
            if name in seen:
                raise InvalidConfig(f"corpus name {name!r} is used twice")
            seen.add(name)
            parse = ParseReport()
            if "tsv" in c:
                segs = list(read_tsv_file(self.path(c["tsv"]), self.cfg.pair, name, parse))
                refs = (FileRef(c["tsv"], "tsv", file_sha256(self.path(c["tsv"]))),)
            elif "source" in c and "target" in c:
                segs = list(read_bitext_files(self.path(c["source"]), self.path(c["target"]),
                                              self.cfg.pair, name, parse))
                refs = (FileRef(c["source"], "text-source", file_sha256(self.path(c["source"]))),
                        FileRef(c["target"], "text-target", file_sha256(self.path(c["target"]))))
            else:
                raise InvalidConfig(f"corpus {name!r} needs 'tsv' or 'source'+'target'")
            if "titles" in c:
                with open_text(self.path(c["titles"])) as fh:
                    for doc, title in read_doc_titles(fh).items():
                        self.titles.setdefault(doc, title)
            self.segments.extend(segs)
            self.input_manifests.append(CorpusManifest.for_pair(
                name, self.cfg.pair, len(segs), file_refs=refs, provenance_note=c.get("note", "")))
            report["corpora"].append({"name": name, "segments": len(segs), "parse": parse.to_dict()})
        report["output"] = len(self.segments)
        stats = corpus_stats(self.input_manifests)
        self.summary.statistics["corpora"] = stats.to_dict()
        (self.out / "corpora.stats.txt").write_text(stats.render(), encoding="utf-8")
        (self.out / "corpora.stats.tsv").write_text(stats.to_tsv(), encoding="utf-8")
        return report

    def filter(self, st):
        meta_report = ParseReport()
        docs = []
        for p in st.get("metadata", ()):
            with open_text(self.path(p)) as fh:
                docs.extend(parse_doc_metadata(fh, meta_report))
        index = build_exclusion_index(docs)
        kept, removed, rep = filter_overlap(self.segments, self.titles, index)
        self.segments = kept
        self.write_split("removed", removed, "segments overlapping indexed documents")
        return {
            "stage": "filter",
            "input": rep.input_segments,
            "kept": rep.kept_segments,
            "removed": rep.removed_segments,
            "report": rep.to_dict(),
            "index": {"records": index.record_count, "pii_keys": len(index.by_pii),
                      "title_keys": len(index.by_title_key), "collisions": index.collisions},
            "metadata_parse": meta_report.to_dict(),
        }

    def dedup(self, st):
        n_in = len(self.segments)
        self.segments, dups = dedup(self.segments)
        return {"stage": "dedup", "input": n_in, "kept": len(self.segments), "removed": dups}

    def append_terms(self, st):
        if not st.get("enabled", True):
            return {"stage": "append-terms", "enabled": False, "terms": 0}
        parse = ParseReport()
        with open_text(self.path(st["mrconso"])) as fh:
            atoms = parse_mrconso(fh, {self.cfg.pair.source, self.cfg.pair.target}, parse)
            pairs, rep = extract_parallel_concepts(atoms, self.cfg.pair)
        with open(self.out / "terms.tsv", "w", encoding="utf-8", newline="\n") as fh:
            write_term_pairs(pairs, fh)
        self.terms = [SegmentPair(tp.source_term, tp.target_term, "umls") for tp in pairs]
        if self.train is not None:
            self._attach_terms()
        return {"stage": "append-terms", "enabled": True, "terms": len(pairs),
                "extraction": rep.to_dict(), "parse": parse.to_dict()}

    def _attach_terms(self):
        self.train = self.train + self.terms
        self.write_split("train", self.train, "train split with appended terminology")

    def partition(self, st):
        spec = self.cfg.partition
        train, dev = partition(self.segments, spec)
        self.train, self.dev = train, dev
        note = f"partition dev_size={spec.dev_size} unit={spec.unit.value}"
        self.write_split("dev", dev, note)
        self.write_split("train", train, note)
        if self.terms:
            self._attach_terms()
        self.summary.statistics["splits"] = {
            "pair": str(self.cfg.pair), "train": len(self.train), "dev": len(dev)}
        (self.out / "splits.txt").write_text(
            render_split_table([(self.cfg.pair, len(self.train), len(dev))]), encoding="utf-8")
        return {"stage": "partition", "input": len(self.segments), "train": len(train),
                "dev": len(dev), "terms_appended": len(self.terms), "seed": spec.seed,
                "unit": spec.unit.value}

    def train_baseline(self, st):
        lowercase = self.cfg.lowercase
        tt, history = train_ibm1(self.train, int(st.get("iterations", 10)),
                                 bool(st.get("use_null", False)), lowercase)
        lm = train_bigram_lm((tokenize_eval(s.target_text, lowercase) for s in self.train),
                             float(st.get("k", 1.0)))
        model_dir = self.out / "model"
        model_dir.mkdir(exist_ok=True)
        (model_dir / "tt.tsv").write_text(tt.to_tsv(), encoding="utf-8")
        (model_dir / "lm.tsv").write_text(lm.to_tsv(), encoding="utf-8")
        self.model = (tt, lm)
        return {"stage": "train-baseline", "sentences": len(self.train),
                "log_likelihood": history, "source_vocab": len(tt.source_vocab),
                "target_vocab": len(lm.vocab)}

    def evaluate(self, st):
        tt, lm = self.model
        weights = DecoderWeights(float(st.get("lambda_tm", 1.0)), float(st.get("lambda_lm", 1.0)),
                                 int(st.get("beam_width", 5)))
        hyps = translate_segments(self.dev, tt, lm, weights, self.cfg.lowercase, self.cfg.threads)
        refs = [tokenize_eval(s.target_text, self.cfg.lowercase) for s in self.dev]
        with open(self.out / "dev.hyp", "w", encoding="utf-8", newline="\n") as fh:
            fh.writelines(" ".join(h) + "\n" for h in hyps)
        report = corpus_bleu(hyps, refs, smoothing=Smoothing.add_one_from_order_2)
        control = shuffled_control(hyps, refs, self.cfg.seed)
        (self.out / "bleu.json").write_text(report.to_json(), encoding="utf-8")
        return {"stage": "evaluate", "bleu": report.to_dict(),
                "shuffled_control_bleu": round(control.score, 2),
                "summary": report.summary()}


def run_pipeline(config: PipelineConfig) -> RunSummary:
    """Run every configured stage in order and write outputs plus
    ``run_summary.json``. On failure a ``run_summary.partial.json`` holding
    the stages completed so far is written and the error re-raised."""
    missing = [p for p in config.input_paths() if not p.is_file()]
    if missing:
        raise IOFailure(missing[0], "no such file")
    config.output_dir.mkdir(parents=True, exist_ok=True)
    run = _Run(config)
    logger.info("seed=%s config_hash=%s", config.seed, config.config_hash)
    try:
        for st in config.stages:
            handler = getattr(run, st["stage"].replace("-", "_"))
            run.summary.stages.append(handler(st))
    except (BiomtError, OSError) as exc:
        run.summary.error = {"type": type(exc).__name__, "message": str(exc)}
        (config.output_dir / "run_summary.partial.json").write_text(
            run.summary.to_json(), encoding="utf-8")
        raise
    (config.output_dir / "run_summary.json").write_text(run.summary.to_json(), encoding="utf-8")
    return run.summary
