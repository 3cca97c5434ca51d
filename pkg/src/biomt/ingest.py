"""Streaming parsers for bitext, TSV bitext, Pubmed metadata exports and
UMLS MRCONSO.RRF.

Every parser is a generator over an iterable of lines, so a file object can
be passed straight in and nothing is buffered beyond the current record.
Counters for skipped and malformed input go into an optional
:class:`ParseReport` that the caller owns.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, TextIO

from biomt.core import LangPair, LanguageTag, SegmentPair, is_registered
from biomt.errors import (
    AsymmetricBlank,
    IOFailure,
    LineCountMismatch,
    MalformedRow,
    MissingColumn,
)

logger = logging.getLogger(__name__)

MRCONSO_COLUMNS = (
    "CUI", "LAT", "TS", "LUI", "STT", "SUI", "ISPREF", "AUI", "SAUI",
    "SCUI", "SDUI", "SAB", "TTY", "CODE", "STR", "SRL", "SUPPRESS", "CVF",
)
_COL = {name: i for i, name in enumerate(MRCONSO_COLUMNS)}

METADATA_COLUMNS = ("pmid", "pii", "title", "language")

DEFAULT_MAX_MALFORMED = 1000


@dataclass
class ParseReport:
    lines: int = 0
    emitted: int = 0
    skipped: int = 0
    malformed: int = 0
    issues: list[tuple[int, str]] = field(default_factory=list)

    def note(self, line_no: int, reason: str) -> None:
        self.issues.append((line_no, reason))

    def to_tsv(self) -> str:
        rows = ["line_no\treason"]
        rows += [f"{n}\t{reason}" for n, reason in self.issues]
        return "\n".join(rows) + "\n"

    def to_dict(self) -> dict:
        return {
            "lines": self.lines,
            "emitted": self.emitted,
            "skipped": self.skipped,
            "malformed": self.malformed,
        }


@dataclass(frozen=True)
class ConceptAtom:
    cui: str
    lat: LanguageTag
    ts: str
    ispref: str
    sui: str
    aui: str
    sab: str
    str_text: str
    suppress: str

    def __post_init__(self):
        if not self.cui:
            raise ValueError("empty CUI")
        if not self.str_text:
            raise ValueError("empty STR")


@dataclass(frozen=True)
class DocMeta:
    title: str = ""
    pmid: str | None = None
    pii: str | None = None
    language: LanguageTag | None = None

    def __post_init__(self):
        if not (self.pmid or self.pii or self.title.strip()):
            raise ValueError("a document needs at least one of pmid, pii, title")


def _chomp(line: str) -> str:
    return line.rstrip("\r\n")


def open_text(path) -> TextIO:
    try:
        return open(path, encoding="utf-8", newline="")
    except FileNotFoundError:
        raise IOFailure(path, "no such file") from None
    except OSError as exc:
        raise IOFailure(path, exc.strerror or str(exc)) from None


def parse_bitext(
    source_lines: Iterable[str],
    target_lines: Iterable[str],
    pair: LangPair,
    corpus_id: str,
    report: ParseReport | None = None,
) -> Iterator[SegmentPair]:
    """Pair line i of the source side with line i of the target side.

    Lines blank on both sides are dropped and counted as skipped.
    """
    if report is None:
        report = ParseReport()
    missing = object()
    line_no = 0
    zipped = itertools.zip_longest(source_lines, target_lines, fillvalue=missing)
    for src, tgt in zipped:
        if src is missing or tgt is missing:
            rest = 1 + sum(1 for _ in zipped)
            if src is missing:
                raise LineCountMismatch(line_no, line_no + rest)
            raise LineCountMismatch(line_no + rest, line_no)
        line_no += 1
        report.lines += 1
        src, tgt = src.strip(), tgt.strip()
        if not src and not tgt:
            report.skipped += 1
            continue
        if not src or not tgt:
            raise AsymmetricBlank(line_no)
        report.emitted += 1
        yield SegmentPair(src, tgt, corpus_id)


def parse_tsv_bitext(
    lines: Iterable[str],
    pair: LangPair,
    corpus_id: str,
    report: ParseReport | None = None,
) -> Iterator[SegmentPair]:
    """Parse ``source<TAB>target[<TAB>doc_id]`` rows.

    Entirely blank lines are skipped; anything else without two non-empty
    text columns is a :class:`MalformedRow`.
    """
    if report is None:
        report = ParseReport()
    for line_no, line in enumerate(lines, 1):
        report.lines += 1
        line = _chomp(line)
        if not line.strip():
            report.skipped += 1
            continue
        cols = line.split("\t")
        if len(cols) < 2 or not cols[0].strip() or not cols[1].strip():
            raise MalformedRow(line_no, "expected source and target columns")
        doc_id = cols[2].strip() if len(cols) > 2 and cols[2].strip() else None
        report.emitted += 1
        yield SegmentPair(cols[0].strip(), cols[1].strip(), corpus_id, doc_id)


def parse_mrconso(
    lines: Iterable[str],
    keep_languages: Iterable[LanguageTag | str],
    report: ParseReport | None = None,
    max_malformed: int = DEFAULT_MAX_MALFORMED,
) -> Iterator[ConceptAtom]:
    """Yield one :class:`ConceptAtom` per MRCONSO row whose LAT is kept.

    Rows must have exactly 18 pipe-separated fields followed by a trailing
    pipe. Malformed rows are recorded in ``report``; once more than
    ``max_malformed`` have been seen the offending row raises
    :class:`MalformedRow`. Pass ``max_malformed=0`` for strict parsing.
    """
    if report is None:
        report = ParseReport()
    keep = {LanguageTag(str(lang)).code for lang in keep_languages}

    def bad(line_no, reason):
        report.malformed += 1
        report.note(line_no, reason)
        if report.malformed > max_malformed:
            raise MalformedRow(line_no, reason)

    for line_no, line in enumerate(lines, 1):
        report.lines += 1
        line = _chomp(line)
        if not line.endswith("|"):
            bad(line_no, "missing trailing pipe")
            continue
        cols = line[:-1].split("|")
        if len(cols) != len(MRCONSO_COLUMNS):
            bad(line_no, f"expected {len(MRCONSO_COLUMNS)} fields, found {len(cols)}")
            continue
        cui, lat, text = cols[_COL["CUI"]], cols[_COL["LAT"]], cols[_COL["STR"]]
        if not cui:
            bad(line_no, "empty CUI")
            continue
        if not text:
            bad(line_no, "empty STR")
            continue
        if lat.upper() not in keep:
            report.skipped += 1
            continue
        report.emitted += 1
        yield ConceptAtom(
            cui=cui,
            lat=LanguageTag(lat),
            ts=cols[_COL["TS"]],
            ispref=cols[_COL["ISPREF"]],
            sui=cols[_COL["SUI"]],
            aui=cols[_COL["AUI"]],
            sab=cols[_COL["SAB"]],
            str_text=text,
            suppress=cols[_COL["SUPPRESS"]],
        )


def parse_doc_metadata(
    lines: Iterable[str], report: ParseReport | None = None
) -> Iterator[DocMeta]:
    """Parse a Pubmed metadata export: TSV with a header row.

    Recognised columns are pmid, pii, title and language (others are
    ignored); title is mandatory. Language values that are not registered
    tags are dropped with a note in the report.
    """
    if report is None:
        report = ParseReport()
    it = iter(lines)
    header = next(it, None)
    if header is None:
        raise MissingColumn("title")
    report.lines += 1
    names = [c.strip().lower() for c in _chomp(header).split("\t")]
    if "title" not in names:
        raise MissingColumn("title")
    pos = {name: names.index(name) for name in METADATA_COLUMNS if name in names}

    for line_no, line in enumerate(it, 2):
        report.lines += 1
        cols = _chomp(line).split("\t")
        values = {
            name: (cols[i].strip() if i < len(cols) else "") for name, i in pos.items()
        }
        if not any(values.get(k) for k in ("pmid", "pii", "title")):
            report.skipped += 1
            report.note(line_no, "empty row")
            continue
        language = None
        if values.get("language"):
            if is_registered(values["language"]):
                language = LanguageTag(values["language"])
            else:
                report.note(line_no, f"unregistered language {values['language']!r}")
        report.emitted += 1
        yield DocMeta(
            title=values["title"],
            pmid=values.get("pmid") or None,
            pii=values.get("pii") or None,
            language=language,
        )


def read_doc_titles(lines: Iterable[str]) -> dict[str, str]:
    """Read a ``doc_id<TAB>title`` table (with header) into a dict.

    This is the corpus-side metadata that overlap filtering joins against.
    The first title seen for a doc_id wins.
    """
    it = iter(lines)
    header = next(it, None)
    if header is None:
        raise MissingColumn("doc_id")
    names = [c.strip().lower() for c in _chomp(header).split("\t")]
    for required in ("doc_id", "title"):
        if required not in names:
            raise MissingColumn(required)
    i_doc, i_title = names.index("doc_id"), names.index("title")
    titles: dict[str, str] = {}
    for line_no, line in enumerate(it, 2):
        cols = _chomp(line).split("\t")
        if not any(c.strip() for c in cols):
            continue
        if len(cols) <= max(i_doc, i_title) or not cols[i_doc].strip():
            raise MalformedRow(line_no, "expected doc_id and title columns")
        titles.setdefault(cols[i_doc].strip(), cols[i_title].strip())
    return titles


def read_bitext_files(source_path, target_path, pair: LangPair, corpus_id: str,
                      report: ParseReport | None = None) -> Iterator[SegmentPair]:
    with open_text(source_path) as src, open_text(target_path) as tgt:
        yield from parse_bitext(src, tgt, pair, corpus_id, report)


def read_tsv_file(path, pair: LangPair, corpus_id: str,
                  report: ParseReport | None = None) -> Iterator[SegmentPair]:
    with open_text(path) as fh:
        yield from parse_tsv_bitext(fh, pair, corpus_id, report)


def write_bitext(segments: Iterable[SegmentPair], source_path, target_path) -> int:
    n = 0
    Path(source_path).parent.mkdir(parents=True, exist_ok=True)
    with open(source_path, "w", encoding="utf-8", newline="\n") as src, \
            open(target_path, "w", encoding="utf-8", newline="\n") as tgt:
        for seg in segments:
            src.write(seg.source_text + "\n")
            tgt.write(seg.target_text + "\n")
            n += 1
    return n


def write_tsv_bitext(segments: Iterable[SegmentPair], path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for seg in segments:
            row = [seg.source_text, seg.target_text]
            if seg.doc_id:
                row.append(seg.doc_id)
            fh.write("\t".join(row) + "\n")
            n += 1
    return n
