"""Add-k smoothed bigram language model."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from biomt.errors import EmptyCorpus, ValidationError

BOS = "<s>"
EOS = "</s>"
LM_HEADER = "#biomt-lm"
LM_VERSION = "1"


@dataclass
class LanguageModel:
    """p(w|h) = (c(h, w) + k) / (c(h) + k|V|) where V is the training
    vocabulary plus ``</s>``. ``<s>`` only ever appears as a history."""

    bigrams: dict[str, Counter]
    k: float
    vocab: frozenset[str]
    order: int = 2

    def __post_init__(self):
        if not self.k > 0:
            raise ValidationError("add-k constant must be positive")
        self._history = {h: sum(c.values()) for h, c in self.bigrams.items()}

    def history_count(self, h: str) -> int:
        return self._history.get(h, 0)

    @property
    def unigram_counts(self) -> Counter:
        counts: Counter = Counter()
        for successors in self.bigrams.values():
            counts.update(successors)
        return counts

    def prob(self, w: str, h: str) -> float:
        c_hw = self.bigrams.get(h, {}).get(w, 0)
        return (c_hw + self.k) / (self.history_count(h) + self.k * len(self.vocab))

    def logprob(self, w: str, h: str) -> float:
        return math.log(self.prob(w, h))

    def sentence_logprob(self, tokens: Sequence[str]) -> float:
        prev, total = BOS, 0.0
        for w in (*tokens, EOS):
            total += self.logprob(w, prev)
            prev = w
        return total

    def to_tsv(self) -> str:
        lines = [f"{LM_HEADER}\tversion={LM_VERSION}\torder={self.order}\tk={self.k!r}"]
        for h in sorted(self.bigrams):
            for w in sorted(self.bigrams[h]):
                lines.append(f"{h}\t{w}\t{self.bigrams[h][w]}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_tsv(cls, lines: Iterable[str]) -> LanguageModel:
        it = iter(lines)
        header = next(it, "").rstrip("\n").split("\t")
        if not header or header[0] != LM_HEADER or f"version={LM_VERSION}" not in header:
            raise ValidationError("not a version 1 language model file")
        opts = dict(h.split("=", 1) for h in header[1:] if "=" in h)
        bigrams: dict[str, Counter] = {}
        for line_no, line in enumerate(it, 2):
            line = line.rstrip("\n")
            if not line:
                continue
            cols = line.split("\t")
            if len(cols) != 3:
                raise ValidationError(f"language model line {line_no}: expected 3 columns")
            bigrams.setdefault(cols[0], Counter())[cols[1]] = int(cols[2])
        vocab = frozenset(w for c in bigrams.values() for w in c)
        return cls(bigrams, float(opts["k"]), vocab)


def train_bigram_lm(sentences: Iterable[Sequence[str]], k: float = 1.0) -> LanguageModel:
    if not k > 0:
        raise ValidationError("add-k constant must be positive")
    bigrams: dict[str, Counter] = {}
    n = 0
    for tokens in sentences:
        n += 1
        prev = BOS
        for w in (*tokens, EOS):
            bigrams.setdefault(prev, Counter())[w] += 1
            prev = w
    if n == 0:
        raise EmptyCorpus("language model corpus")
    vocab = frozenset(w for c in bigrams.values() for w in c)
    return LanguageModel(bigrams, k, vocab)
