import math

import pytest

from biomt.errors import EmptyCorpus, ValidationError
from biomt.smt import BOS, EOS, LanguageModel, train_bigram_lm


def test_add_one_bigram():
    lm = train_bigram_lm([["a", "b"]], k=1.0)
    # V = {a, b, </s>}; c(a) = 1, c(a, b) = 1
    assert lm.vocab == frozenset({"a", "b", EOS})
    assert lm.prob("b", "a") == pytest.approx(0.5)
    assert lm.prob("a", "b") == pytest.approx(0.25)
    assert lm.prob("a", BOS) == pytest.approx(0.5)


def test_distributions_normalized():
    lm = train_bigram_lm([["a", "b", "a"], ["c"], ["b", "b"]], k=0.5)
    for h in [BOS, "a", "b", "c", "unseen"]:
        assert sum(lm.prob(w, h) for w in lm.vocab) == pytest.approx(1.0, abs=1e-9)


def test_sentence_logprob():
    lm = train_bigram_lm([["a", "b"]])
    expected = math.log(0.5) + math.log(0.5) + math.log(0.5)
    assert lm.sentence_logprob(["a", "b"]) == pytest.approx(expected)


def test_errors():
    with pytest.raises(EmptyCorpus):
        train_bigram_lm([])
    with pytest.raises(ValidationError):
        train_bigram_lm([["a"]], k=0)


def test_tsv_roundtrip():
    lm = train_bigram_lm([["a", "b"], ["b"]], k=0.25)
    back = LanguageModel.from_tsv(lm.to_tsv().splitlines())
    assert back.bigrams == lm.bigrams and back.k == lm.k and back.vocab == lm.vocab
    assert back.prob("b", "a") == lm.prob("b", "a")
    with pytest.raises(ValidationError):
        LanguageModel.from_tsv(["#biomt-tt\tversion=1"])
