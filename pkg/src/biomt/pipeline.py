"""Corpus preparation: overlap filtering against bibliographic records,
deduplication, deterministic train/dev partitioning and corpus statistics."""

from __future__ import annotations

import enum
import json
import logging
import random
import re
import unicodedata
from dataclasses import asdict, dataclass, field
from decimal import Decimal, InvalidOperation
from typing import Iterable, Iterator, Mapping, Sequence

from biomt.core import LangPair, SegmentPair
from biomt.errors import InvalidSpec, MixedPairs, ValidationError
from biomt.ingest import DocMeta
from biomt.manifest import CorpusManifest

logger = logging.getLogger(__name__)

DEFAULT_SEED = 42
_WS = re.compile(r"\s+")


def normalize_title(raw: str) -> str:
    """Matching key for a title: NFKC, case-folded, punctuation replaced by
    spaces, whitespace collapsed. Accents are kept."""
    text = unicodedata.normalize("NFKC", raw)
    text = unicodedata.normalize("NFKC", text.casefold())
    text = "".join(" " if unicodedata.category(ch).startswith("P") else ch for ch in text)
    return _WS.sub(" ", text).strip()


@dataclass
class ExclusionIndex:
    by_pii: dict[str, int] = field(default_factory=dict)
    by_title_key: dict[str, int] = field(default_factory=dict)
    record_count: int = 0
    collisions: int = 0

    def match(self, doc_id: str, title: str | None) -> str | None:
        """Return ``"pii"`` or ``"title"`` for the key that matched, else None."""
        if doc_id in self.by_pii:
            return "pii"
        if title is not None:
            key = normalize_title(title)
            if key and key in self.by_title_key:
                return "title"
        return None


def build_exclusion_index(docs: Iterable[DocMeta]) -> ExclusionIndex:
    index = ExclusionIndex()
    for record_id, doc in enumerate(docs):
        index.record_count += 1
        if doc.pii:
            if doc.pii in index.by_pii:
                index.collisions += 1
            else:
                index.by_pii[doc.pii] = record_id
        key = normalize_title(doc.title)
        if key:
            if key in index.by_title_key:
                index.collisions += 1
            else:
                index.by_title_key[key] = record_id
    return index


@dataclass
class FilterReport:
    input_segments: int = 0
    kept_segments: int = 0
    removed_segments: int = 0
    matched_by_pii: int = 0
    matched_by_title: int = 0
    docs_without_title: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def iter_overlap(
    segments: Iterable[SegmentPair],
    titles_by_doc: Mapping[str, str],
    index: ExclusionIndex,
    report: FilterReport,
) -> Iterator[tuple[SegmentPair, bool]]:
    """Yield ``(segment, removed)`` for each input segment, in input order."""
    decided: dict[str, bool] = {}
    for seg in segments:
        report.input_segments += 1
        removed = False
        if seg.doc_id is not None:
            removed = decided.get(seg.doc_id)
            if removed is None:
                title = titles_by_doc.get(seg.doc_id)
                how = index.match(seg.doc_id, title)
                if how == "pii":
                    report.matched_by_pii += 1
                elif how == "title":
                    report.matched_by_title += 1
                elif title is None:
                    report.docs_without_title += 1
                    logger.warning("document %s has no title; kept unfiltered", seg.doc_id)
                removed = decided[seg.doc_id] = how is not None
        if removed:
            report.removed_segments += 1
        else:
            report.kept_segments += 1
        yield seg, removed


def filter_overlap(
    segments: Iterable[SegmentPair],
    titles_by_doc: Mapping[str, str],
    index: ExclusionIndex,
) -> tuple[list[SegmentPair], list[SegmentPair], FilterReport]:
    """Split segments into those kept and those whose document is indexed.

    A document matches when its id is an indexed pii or its normalized title
    is an indexed title key. Segments without a doc_id are always kept.
    """
    report = FilterReport()
    kept, removed = [], []
    for seg, gone in iter_overlap(segments, titles_by_doc, index, report):
        (removed if gone else kept).append(seg)
    return kept, removed, report


def _dedup_key(seg: SegmentPair) -> tuple[str, str]:
    return seg.source_text.strip(), seg.target_text.strip()


def iter_dedup(segments: Iterable[SegmentPair], counter: list[int] | None = None
               ) -> Iterator[SegmentPair]:
    """Drop repeated (source, target) pairs, keeping the first occurrence.

    ``counter[0]`` is incremented per dropped duplicate when given.
    """
    seen: set[tuple[str, str]] = set()
    for seg in segments:
        key = _dedup_key(seg)
        if key in seen:
            if counter is not None:
                counter[0] += 1
            continue
        seen.add(key)
        yield seg


def dedup(segments: Iterable[SegmentPair]) -> tuple[list[SegmentPair], int]:
    counter = [0]
    unique = list(iter_dedup(segments, counter))
    return unique, counter[0]


class PartitionUnit(str, enum.Enum):
    segment = "segment"
    document = "document"


@dataclass(frozen=True)
class PartitionSpec:
    dev_size: int
    seed: int = DEFAULT_SEED
    unit: PartitionUnit = PartitionUnit.segment

    def __post_init__(self):
        if isinstance(self.dev_size, bool) or not isinstance(self.dev_size, int) or self.dev_size <= 0:
            raise InvalidSpec(f"dev_size must be a positive integer, got {self.dev_size!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise InvalidSpec(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        try:
            object.__setattr__(self, "unit", PartitionUnit(self.unit))
        except ValueError:
            raise InvalidSpec(f"unknown partition unit {self.unit!r}") from None


def _units(segments: Sequence[SegmentPair], unit: PartitionUnit) -> list[int]:
    """Unit number for each segment; units are numbered by first appearance."""
    if unit is PartitionUnit.segment:
        return list(range(len(segments)))
    ids: dict[object, int] = {}
    out = []
    for i, seg in enumerate(segments):
        key = ("doc", seg.doc_id) if seg.doc_id is not None else ("seg", i)
        out.append(ids.setdefault(key, len(ids)))
    return out


def partition(
    segments: Sequence[SegmentPair], spec: PartitionSpec
) -> tuple[list[SegmentPair], list[SegmentPair]]:
    """Draw ``spec.dev_size`` units for dev with a generator seeded from
    ``spec.seed``; everything else is train. Both sides keep input order.

    With ``unit=document`` all segments of a document land on the same side
    (segments without a doc_id count as documents of their own).
    """
    segments = list(segments)
    unit_of = _units(segments, spec.unit)
    n_units = (max(unit_of) + 1) if unit_of else 0
    if spec.dev_size >= n_units:
        raise InvalidSpec(f"dev_size {spec.dev_size} must be below the {n_units} available {spec.unit.value}s")
    rng = random.Random(spec.seed)
    dev_units = set(rng.sample(range(n_units), spec.dev_size))
    train, dev = [], []
    for seg, u in zip(segments, unit_of):
        (dev if u in dev_units else train).append(seg)
    return train, dev


def _parse_printed(printed: str) -> tuple[Decimal, Decimal]:
    """Parse a printed count such as ``2.37M`` or ``950,252`` into
    ``(value, half_unit)`` where half_unit is the rounding slack it implies."""
    text = printed.strip().replace(",", "")
    scale = Decimal(1)
    if text[-1:].upper() in ("K", "M"):
        scale = Decimal(1000) if text[-1].upper() == "K" else Decimal(1_000_000)
        text = text[:-1]
    try:
        number = Decimal(text)
    except InvalidOperation:
        raise ValidationError(f"cannot parse printed total {printed!r}") from None
    exponent = number.as_tuple().exponent
    half = Decimal(1).scaleb(exponent) * scale / 2
    return number * scale, half


def printed_total_matches(exact: int, printed: str) -> bool:
    value, half = _parse_printed(printed)
    return abs(Decimal(exact) - value) <= half


def _fmt_count(n: int | None) -> str:
    return "-" if n is None else f"{n:,}"


@dataclass
class StatsTable:
    """Per-corpus segment counts by language pair, with exact column totals."""

    pairs: list[LangPair] = field(default_factory=list)
    rows: list[tuple[str, dict[LangPair, int]]] = field(default_factory=list)
    totals: dict[LangPair, int] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def __len__(self):
        return len(self.rows)

    def to_dict(self) -> dict:
        return {
            "pairs": [str(p) for p in self.pairs],
            "rows": [
                {"corpus": name, "counts": {str(p): c for p, c in counts.items()}}
                for name, counts in self.rows
            ],
            "totals": {str(p): self.totals[p] for p in self.pairs},
            "warnings": list(self.warnings),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_tsv(self) -> str:
        lines = ["corpus\t" + "\t".join(p.label for p in self.pairs)]
        for name, counts in self.rows:
            lines.append(name + "\t" + "\t".join(str(counts.get(p, "-")) for p in self.pairs))
        if self.rows:
            lines.append("Total\t" + "\t".join(str(self.totals[p]) for p in self.pairs))
        return "\n".join(lines) + "\n"

    def render(self) -> str:
        header = ["Corpus"] + [p.label for p in self.pairs]
        body = [[name] + [_fmt_count(counts.get(p)) for p in self.pairs] for name, counts in self.rows]
        footer = [["Total"] + [_fmt_count(self.totals[p]) for p in self.pairs]] if self.rows else []
        return render_columns(header, body, footer)


def render_columns(header: list[str], body: list[list[str]], footer: list[list[str]] = ()) -> str:
    """Aligned plain-text table; first column left-aligned, others right."""
    table = [header] + body + list(footer)
    widths = [max(len(row[i]) for row in table) for i in range(len(header))]

    def line(row):
        cells = [row[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(row[1:], widths[1:])]
        return "  ".join(cells).rstrip()

    rule = "-" * (sum(widths) + 2 * (len(widths) - 1))
    out = [line(header), rule] + [line(r) for r in body]
    if footer:
        out += [rule] + [line(r) for r in footer]
    return "\n".join(out) + "\n"


def corpus_stats(
    manifests: Sequence[CorpusManifest],
    pair: LangPair | None = None,
    printed_totals: Mapping[LangPair, str] | None = None,
) -> StatsTable:
    """Tabulate segment counts per corpus and language pair.

    Totals are exact sums. When ``pair`` is given the table has that single
    column and a manifest for any other pair raises :class:`MixedPairs`.
    ``printed_totals`` maps a pair to a rounded total as printed elsewhere
    (e.g. ``"2.37M"``); a disagreement with the exact sum becomes a warning.
    """
    table = StatsTable()
    rows: dict[str, dict[LangPair, int]] = {}
    for m in manifests:
        mp = m.pair
        if pair is not None and mp != pair:
            raise MixedPairs(f"corpus {m.name!r} is {mp}, table is {pair}")
        if mp not in table.pairs:
            table.pairs.append(mp)
            table.totals[mp] = 0
        counts = rows.setdefault(m.name, {})
        if mp in counts:
            raise ValidationError(f"corpus {m.name!r} listed twice for {mp}")
        counts[mp] = m.segment_count
        table.totals[mp] += m.segment_count
    table.rows = list(rows.items())
    for p, printed in (printed_totals or {}).items():
        if p not in table.totals:
            continue
        exact = table.totals[p]
        if not printed_total_matches(exact, printed):
            msg = f"{p.label}: exact total {exact:,} disagrees with printed total {printed}"
            table.warnings.append(msg)
            logger.warning(msg)
    return table


def render_split_table(rows: Sequence[tuple[LangPair, int, int]]) -> str:
    """Train/dev sizes per language pair."""
    body = [[p.label, _fmt_count(train), _fmt_count(dev)] for p, train, dev in rows]
    return render_columns(["Language", "Train", "Dev"], body)
