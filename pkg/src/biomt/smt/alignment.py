"""IBM Model 1 lexical translation probabilities t(e|f), trained by EM."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from biomt.bleu import tokenize_eval
from biomt.core import SegmentPair
from biomt.errors import EmptyCorpus, ValidationError

NULL = "<NULL>"
TT_HEADER = "#biomt-tt"
TT_VERSION = "1"

TokenPair = tuple[Sequence[str], Sequence[str]]


@dataclass
class TranslationTable:
    """``probs[f][e] = t(e|f)``. Only co-occurring pairs are stored; every
    other pair has probability zero."""

    probs: dict[str, dict[str, float]]
    source_vocab: frozenset[str]
    target_vocab: frozenset[str]
    includes_null: bool = False

    def prob(self, e: str, f: str) -> float:
        return self.probs.get(f, {}).get(e, 0.0)

    def candidates(self, f: str, k: int | None = None) -> list[tuple[str, float]]:
        """Target words for ``f`` by descending t(e|f), ties by the word."""
        ranked = sorted(self.probs.get(f, {}).items(), key=lambda kv: (-kv[1], kv[0]))
        return ranked if k is None else ranked[:k]

    def to_tsv(self) -> str:
        lines = [f"{TT_HEADER}\tversion={TT_VERSION}\tnull={int(self.includes_null)}"]
        for f in sorted(self.probs):
            for e, p in self.candidates(f):
                lines.append(f"{f}\t{e}\t{p!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_tsv(cls, lines: Iterable[str]) -> TranslationTable:
        it = iter(lines)
        header = next(it, "").rstrip("\n").split("\t")
        if not header or header[0] != TT_HEADER or f"version={TT_VERSION}" not in header:
            raise ValidationError("not a version 1 translation table")
        includes_null = "null=1" in header
        probs: dict[str, dict[str, float]] = {}
        for line_no, line in enumerate(it, 2):
            line = line.rstrip("\n")
            if not line:
                continue
            cols = line.split("\t")
            if len(cols) != 3:
                raise ValidationError(f"translation table line {line_no}: expected 3 columns")
            probs.setdefault(cols[0], {})[cols[1]] = float(cols[2])
        source = frozenset(f for f in probs if f != NULL)
        target = frozenset(e for dist in probs.values() for e in dist)
        return cls(probs, source, target, includes_null)


def _log_likelihood(t, pairs: list[TokenPair]) -> float:
    ll = 0.0
    for f_toks, e_toks in pairs:
        log_l = math.log(len(f_toks))
        for e in e_toks:
            ll += math.log(sum(t[f][e] for f in f_toks)) - log_l
    return ll


def ibm1_em(
    pairs: Sequence[TokenPair], iterations: int, use_null: bool = False
) -> tuple[TranslationTable, list[float]]:
    """EM over tokenized ``(source_tokens, target_tokens)`` pairs.

    ``t`` starts uniform over the target words co-occurring with each source
    word. The returned list holds the corpus log-likelihood
    sum_s sum_j log( (1/l_s) * sum_i t(e_j|f_i) ) after each iteration.
    """
    if iterations < 1:
        raise ValidationError("iterations must be positive")
    pairs = [
        ((NULL, *f) if use_null else tuple(f), tuple(e))
        for f, e in pairs
        if f and e
    ]
    if not pairs:
        raise EmptyCorpus("bitext")

    t: dict[str, dict[str, float]] = {}
    for f_toks, e_toks in pairs:
        for f in f_toks:
            dist = t.setdefault(f, {})
            for e in e_toks:
                dist[e] = 0.0
    for dist in t.values():
        u = 1.0 / len(dist)
        for e in dist:
            dist[e] = u

    history = []
    for _ in range(iterations):
        counts = {f: dict.fromkeys(dist, 0.0) for f, dist in t.items()}
        # accumulation order is the corpus order, so results are reproducible
        for f_toks, e_toks in pairs:
            for e in e_toks:
                z = sum(t[f][e] for f in f_toks)
                for f in f_toks:
                    counts[f][e] += t[f][e] / z
        for f, c in counts.items():
            total = sum(c.values())
            t[f] = {e: v / total for e, v in c.items()}
        history.append(_log_likelihood(t, pairs))

    source = frozenset(f for f in t if f != NULL)
    target = frozenset(e for _, e_toks in pairs for e in e_toks)
    return TranslationTable(t, source, target, use_null), history


def train_ibm1(
    bitext: Sequence[SegmentPair],
    iterations: int = 10,
    use_null: bool = False,
    lowercase: bool = False,
) -> tuple[TranslationTable, list[float]]:
    pairs = [
        (tokenize_eval(seg.source_text, lowercase), tokenize_eval(seg.target_text, lowercase))
        for seg in bitext
    ]
    return ibm1_em(pairs, iterations, use_null)
