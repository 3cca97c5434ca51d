import io
import random

from hypothesis import given, settings, strategies as st

from biomt.core import LangPair, LanguageTag
from biomt.ingest import ConceptAtom, parse_mrconso
from biomt.umls import ExtractionReport, extract_parallel_concepts, write_term_pairs
from oracles import brute_force_concepts

ENG_SPA = LangPair("ENG", "SPA")


def atom(cui, lat, text, ts="P", ispref="Y", suppress="N", sui=None, aui=None):
    sui = sui or f"S-{text}"
    return ConceptAtom(cui, LanguageTag(lat), ts, ispref, sui, aui or f"A-{text}", "SRC", text, suppress)


def test_hand_enumerated_example():
    atoms = [atom("C1", "ENG", "headache"), atom("C1", "SPA", "cefalea"), atom("C2", "ENG", "fever")]
    pairs, report = extract_parallel_concepts(atoms, ENG_SPA)
    assert [(p.cui, p.source_term, p.target_term) for p in pairs] == [("C1", "headache", "cefalea")]
    assert report == ExtractionReport(concepts_seen=2, pairs_emitted=1,
                                      concepts_missing_source=0, concepts_missing_target=1)


def test_preferred_atom_chosen():
    atoms = [
        atom("C3", "ENG", "x"),
        atom("C3", "SPA", "secundario", ts="S", ispref="N", sui="S1"),
        atom("C3", "SPA", "preferido", ts="P", ispref="Y", sui="S9"),
        atom("C3", "SPA", "otro", ts="P", ispref="N", sui="S0"),
    ]
    (pair,), _ = extract_parallel_concepts(atoms, ENG_SPA)
    assert pair.target_term == "preferido"


def test_other_languages_ignored():
    atoms = [atom("C1", "POR", "dor"), atom("C1", "ENG", "pain")]
    pairs, report = extract_parallel_concepts(atoms, ENG_SPA)
    assert pairs == [] and report.concepts_seen == 1 and report.concepts_missing_target == 1


def test_empty_input():
    assert extract_parallel_concepts([], ENG_SPA) == ([], ExtractionReport())


def test_terms_verbatim_and_tsv():
    atoms = [atom("C1", "ENG", "BRCA1 gene"), atom("C1", "SPA", "gen BRCA1")]
    pairs, _ = extract_parallel_concepts(atoms, ENG_SPA)
    buf = io.StringIO()
    write_term_pairs(pairs, buf)
    assert buf.getvalue() == "cui\tsource_term\ttarget_term\nC1\tBRCA1 gene\tgen BRCA1\n"


_atoms = st.lists(
    st.builds(
        atom,
        cui=st.sampled_from(["C01", "C02", "C03", "C04"]),
        lat=st.sampled_from(["ENG", "SPA", "POR"]),
        text=st.text("abcxyz", min_size=1, max_size=3),
        ts=st.sampled_from("PS"),
        ispref=st.sampled_from("YN"),
        suppress=st.sampled_from("NOEY"),
        sui=st.sampled_from(["S1", "S2", "S3"]),
        aui=st.sampled_from(["A1", "A2"]),
    ),
    max_size=25,
)


@settings(max_examples=200)
@given(_atoms, st.randoms(use_true_random=False))
def test_matches_oracle_and_is_permutation_invariant(atoms, rnd):
    pairs, report = extract_parallel_concepts(atoms, ENG_SPA)
    got = [(p.cui, p.source_term, p.target_term) for p in pairs]
    assert got == brute_force_concepts(atoms, "ENG", "SPA")
    shuffled = list(atoms)
    rnd.shuffle(shuffled)
    assert extract_parallel_concepts(shuffled, ENG_SPA) == (pairs, report)
    cuis = [p.cui for p in pairs]
    assert len(cuis) == len(set(cuis))
    assert report.pairs_emitted <= report.concepts_seen
    assert (report.pairs_emitted + report.concepts_missing_source
            + report.concepts_missing_target) == report.concepts_seen


def test_fixture_file_through_parser(fixtures_dir):
    with open(fixtures_dir / "MRCONSO_50.RRF", encoding="utf-8") as fh:
        atoms = list(parse_mrconso(fh, {"ENG", "SPA"}))
    pairs, _ = extract_parallel_concepts(atoms, ENG_SPA)
    rng = random.Random(3)
    for _ in range(20):
        rng.shuffle(atoms)
        assert extract_parallel_concepts(atoms, ENG_SPA)[0] == pairs
