import pytest
from hypothesis import given, settings, strategies as st

from biomt.core import SegmentPair
from biomt.errors import EmptyCorpus, ValidationError
from biomt.smt import NULL, TranslationTable, ibm1_em, train_ibm1
from oracles import em_by_enumeration

TOY = [("la maison".split(), "the house".split()),
       ("la maison bleue".split(), "the blue house".split()),
       ("la fleur".split(), "the flower".split())]


def _sums_to_one(tt):
    return all(abs(sum(d.values()) - 1.0) <= 1e-9 for d in tt.probs.values())


def test_single_pair_is_certain():
    tt, history = ibm1_em([(["a"], ["x"])], iterations=3)
    assert tt.prob("x", "a") == 1.0
    assert history == [0.0, 0.0, 0.0]


@pytest.mark.parametrize("use_null", [False, True])
def test_matches_alignment_enumeration(use_null):
    tt, history = ibm1_em(TOY, 10, use_null)
    t_ref, h_ref = em_by_enumeration(TOY, 10, use_null)
    for (e, f), p in t_ref.items():
        assert tt.prob(e, f) == pytest.approx(p, abs=1e-12)
    assert history == pytest.approx(h_ref, abs=1e-9)
    assert _sums_to_one(tt)
    assert (NULL in tt.probs) is use_null and NULL not in tt.source_vocab


def test_frozen_toy_values():
    # frozen from the enumeration oracle
    tt, history = ibm1_em(TOY, 10)
    assert tt.prob("the", "la") == pytest.approx(0.9348892651537887, abs=1e-12)
    assert history[0] == pytest.approx(-7.315576419871464, abs=1e-9)
    assert history[-1] == pytest.approx(-6.163355548952543, abs=1e-9)
    assert tt.candidates("la", 1)[0][0] == "the"


def test_empty_and_bad_input():
    with pytest.raises(EmptyCorpus):
        ibm1_em([], 5)
    with pytest.raises(EmptyCorpus):
        ibm1_em([([], ["x"])], 5)
    with pytest.raises(ValidationError):
        ibm1_em(TOY, 0)


def test_train_from_segments_and_roundtrip():
    segs = [SegmentPair(" ".join(f), " ".join(e), "toy") for f, e in TOY]
    tt, _ = train_ibm1(segs, iterations=5, use_null=True)
    back = TranslationTable.from_tsv(tt.to_tsv().splitlines())
    assert back == tt
    assert tt.to_tsv().splitlines()[0] == "#biomt-tt\tversion=1\tnull=1"


def test_from_tsv_rejects_garbage():
    with pytest.raises(ValidationError):
        TranslationTable.from_tsv(["something else"])
    with pytest.raises(ValidationError):
        TranslationTable.from_tsv(["#biomt-tt\tversion=1\tnull=0", "only\ttwo"])


_sent = st.lists(st.sampled_from("abcde"), min_size=1, max_size=4)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(_sent, st.lists(st.sampled_from("vwxyz"), min_size=1, max_size=4)),
                min_size=1, max_size=6), st.booleans())
def test_random_corpora_normalized_and_ll_monotone(pairs, use_null):
    tt, history = ibm1_em(pairs, 8, use_null)
    assert _sums_to_one(tt)
    assert all(b >= a - 1e-9 for a, b in zip(history, history[1:]))
