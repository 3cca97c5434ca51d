"""Corpus manifests: a JSON description of one named corpus and the files
holding it, plus validation of a manifest against those files."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from biomt.core import LangPair, is_registered
from biomt.errors import IOFailure, UnsupportedFormat, ValidationError
from biomt.ingest import open_text, parse_bitext, parse_tsv_bitext

FORMATS = ("text-source", "text-target", "tsv")


def file_sha256(path) -> str:
    digest = hashlib.sha256()
    try:
        with open(path, "rb") as fh:
            for block in iter(lambda: fh.read(1 << 16), b""):
                digest.update(block)
    except FileNotFoundError:
        raise IOFailure(path, "no such file") from None
    except OSError as exc:
        raise IOFailure(path, exc.strerror or str(exc)) from None
    return digest.hexdigest()


@dataclass(frozen=True)
class FileRef:
    path: str
    format: str
    sha256: str = ""


@dataclass(frozen=True)
class CorpusManifest:
    """One named corpus.

    Language codes are kept as the raw strings found in the manifest so that
    an unregistered code surfaces as a validation finding rather than a
    load failure; :attr:`pair` gives the checked :class:`LangPair`.
    """

    name: str
    source_lang: str
    target_lang: str
    segment_count: int
    file_refs: tuple[FileRef, ...] = ()
    provenance_note: str = ""

    def __post_init__(self):
        object.__setattr__(self, "file_refs", tuple(self.file_refs))
        if self.segment_count < 0:
            raise ValidationError("segment_count must be non-negative")

    @property
    def pair(self) -> LangPair:
        return LangPair(self.source_lang, self.target_lang)

    @classmethod
    def for_pair(cls, name: str, pair: LangPair, segment_count: int, **kw) -> CorpusManifest:
        return cls(name, pair.source.code, pair.target.code, segment_count, **kw)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "pair": {"source": self.source_lang, "target": self.target_lang},
            "segment_count": self.segment_count,
            "file_refs": [
                {"path": r.path, "format": r.format, "sha256": r.sha256}
                for r in self.file_refs
            ],
            "provenance_note": self.provenance_note,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> CorpusManifest:
        try:
            return cls(
                name=d["name"],
                source_lang=d["pair"]["source"],
                target_lang=d["pair"]["target"],
                segment_count=int(d["segment_count"]),
                file_refs=tuple(
                    FileRef(r["path"], r["format"], r.get("sha256", ""))
                    for r in d.get("file_refs", ())
                ),
                provenance_note=d.get("provenance_note", ""),
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"manifest is missing field {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> CorpusManifest:
        return cls.from_dict(json.loads(text))


def load_manifest(path) -> CorpusManifest:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise IOFailure(path, "no such file") from None
    return CorpusManifest.from_json(text)


def save_manifest(manifest: CorpusManifest, path) -> None:
    Path(path).write_text(manifest.to_json(), encoding="utf-8")


def make_manifest(name: str, pair: LangPair, refs: list[tuple[str, str]],
                  base_dir=None, provenance_note: str = "") -> CorpusManifest:
    """Build a manifest by hashing and counting the given ``(path, format)`` refs."""
    base = Path(base_dir) if base_dir is not None else Path(".")
    file_refs = tuple(FileRef(p, fmt, file_sha256(base / p)) for p, fmt in refs)
    count = count_segments(file_refs, pair, base)
    return CorpusManifest.for_pair(name, pair, count, file_refs=file_refs,
                                   provenance_note=provenance_note)


def count_segments(file_refs, pair, base_dir=None) -> int:
    base = Path(base_dir) if base_dir is not None else Path(".")
    for ref in file_refs:
        if ref.format not in FORMATS:
            raise UnsupportedFormat(ref.format)
    sources = [r for r in file_refs if r.format == "text-source"]
    targets = [r for r in file_refs if r.format == "text-target"]
    if len(sources) != len(targets):
        raise ValidationError("text-source and text-target refs must come in pairs")
    total = 0
    for src, tgt in zip(sources, targets):
        with open_text(base / src.path) as s, open_text(base / tgt.path) as t:
            total += sum(1 for _ in parse_bitext(s, t, pair, "count"))
    for ref in file_refs:
        if ref.format == "tsv":
            with open_text(base / ref.path) as fh:
                total += sum(1 for _ in parse_tsv_bitext(fh, pair, "count"))
    return total


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    def __bool__(self):
        return bool(self.violations)

    def __len__(self):
        return len(self.violations)

    def kinds(self) -> list[str]:
        return [v.kind for v in self.violations]

    def to_tsv(self) -> str:
        rows = ["violation_kind\tdetail"]
        rows += [f"{v.kind}\t{v.detail}" for v in self.violations]
        return "\n".join(rows) + "\n"


def validate_manifest(manifest: CorpusManifest, base_dir=None) -> ValidationReport:
    """Check language codes, checksums and the segment count of a manifest.

    An empty report means the manifest is consistent with its files.
    Unreadable files raise :class:`IOFailure`; an unknown format tag raises
    :class:`UnsupportedFormat`.
    """
    base = Path(base_dir) if base_dir is not None else Path(".")
    report = ValidationReport()
    for code in (manifest.source_lang, manifest.target_lang):
        if not is_registered(code):
            report.violations.append(Violation("UnknownLanguage", code))
    if not report and manifest.source_lang.upper() == manifest.target_lang.upper():
        report.violations.append(Violation("SameLanguage", manifest.source_lang))

    for ref in manifest.file_refs:
        if ref.format not in FORMATS:
            raise UnsupportedFormat(ref.format)
    for ref in manifest.file_refs:
        actual = file_sha256(base / ref.path)
        if ref.sha256 and actual != ref.sha256:
            report.violations.append(
                Violation("ChecksumMismatch", f"{ref.path}: expected {ref.sha256}, found {actual}"))

    # counting needs a valid pair only for the parser signature
    try:
        pair = manifest.pair
    except ValidationError:
        pair = None
    try:
        found = count_segments(manifest.file_refs, pair, base)
    except ValidationError as exc:
        report.violations.append(Violation("ParseError", str(exc)))
    else:
        if found != manifest.segment_count:
            report.violations.append(Violation(
                "CountMismatch", f"manifest says {manifest.segment_count}, files hold {found}"))
    return report

