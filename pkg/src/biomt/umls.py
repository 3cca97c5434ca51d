"""Parallel terminology from MRCONSO atoms: one term pair per concept."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Iterable

from biomt.core import LangPair
from biomt.ingest import ConceptAtom


@dataclass(frozen=True)
class TermPair:
    cui: str
    source_term: str
    target_term: str
    pair: LangPair


@dataclass(frozen=True)
class ExtractionReport:
    concepts_seen: int = 0
    pairs_emitted: int = 0
    concepts_missing_source: int = 0
    concepts_missing_target: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def preference_key(atom: ConceptAtom) -> tuple:
    """Sort key; the smallest key is the preferred atom for its concept and
    language. TS=P, then ISPREF=Y, then unsuppressed, then lowest SUI, with
    AUI and the string itself as final tie-breaks."""
    return (
        atom.ts != "P",
        atom.ispref != "Y",
        atom.suppress != "N",
        atom.sui,
        atom.aui,
        atom.str_text,
    )


def extract_parallel_concepts(
    atoms: Iterable[ConceptAtom], pair: LangPair
) -> tuple[list[TermPair], ExtractionReport]:
    """Emit one :class:`TermPair` per CUI with atoms on both sides of ``pair``.

    Only the best atom per (CUI, language) is retained while streaming, so
    memory grows with the number of concepts rather than atoms. Output is
    sorted by CUI.
    """
    src, tgt = pair.source, pair.target
    best: dict[str, list] = {}
    for atom in atoms:
        if atom.lat == src:
            slot = 0
        elif atom.lat == tgt:
            slot = 1
        else:
            continue
        entry = best.setdefault(atom.cui, [None, None])
        current = entry[slot]
        if current is None or preference_key(atom) < preference_key(current):
            entry[slot] = atom

    pairs = []
    missing_src = missing_tgt = 0
    for cui in sorted(best):
        s, t = best[cui]
        if s is None:
            missing_src += 1
        elif t is None:
            missing_tgt += 1
        else:
            pairs.append(TermPair(cui, s.str_text, t.str_text, pair))
    report = ExtractionReport(
        concepts_seen=len(best),
        pairs_emitted=len(pairs),
        concepts_missing_source=missing_src,
        concepts_missing_target=missing_tgt,
    )
    return pairs, report


def write_term_pairs(pairs: Iterable[TermPair], fh) -> int:
    fh.write("cui\tsource_term\ttarget_term\n")
    n = 0
    for tp in pairs:
        fh.write(f"{tp.cui}\t{tp.source_term}\t{tp.target_term}\n")
        n += 1
    return n
