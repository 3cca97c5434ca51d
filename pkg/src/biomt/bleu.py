"""Corpus-level BLEU with a single reference per hypothesis."""

from __future__ import annotations

import enum
import json
import math
import unicodedata
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from biomt.errors import EmptyCorpus, PairCountMismatch


class Smoothing(str, enum.Enum):
    none = "none"
    add_one_from_order_2 = "add_one_from_order_2"


def tokenize_eval(text: str, lowercase: bool = False) -> list[str]:
    """NFKC-normalize, split every punctuation character off as its own
    token, then split on whitespace."""
    text = unicodedata.normalize("NFKC", text)
    if lowercase:
        text = text.lower()
    out = []
    for ch in text:
        if unicodedata.category(ch).startswith("P"):
            out.append(f" {ch} ")
        else:
            out.append(ch)
    return "".join(out).split()


@dataclass(frozen=True)
class NgramPrecision:
    order: int
    matched: int
    total: int

    def __post_init__(self):
        if not 0 <= self.matched <= self.total:
            raise ValueError(f"need 0 <= matched <= total, got {self.matched}/{self.total}")


@dataclass(frozen=True)
class BleuReport:
    precisions: tuple[NgramPrecision, ...]
    candidate_length: int
    reference_length: int
    brevity_penalty: float
    score: float
    max_order: int = 4
    smoothing: Smoothing = Smoothing.none

    def to_dict(self) -> dict:
        return {
            "score": round(self.score, 2),
            "brevity_penalty": self.brevity_penalty,
            "candidate_length": self.candidate_length,
            "reference_length": self.reference_length,
            "max_order": self.max_order,
            "smoothing": self.smoothing.value,
            "precisions": [
                {"order": p.order, "matched": p.matched, "total": p.total}
                for p in self.precisions
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def summary(self) -> str:
        ratio = self.candidate_length / self.reference_length if self.reference_length else 0.0
        pn = "/".join(
            f"{100 * p.matched / p.total:.1f}" if p.total else "0.0" for p in self.precisions
        )
        return (f"BLEU = {self.score:.2f} {pn} (BP = {self.brevity_penalty:.3f} "
                f"ratio = {ratio:.3f} hyp_len = {self.candidate_length} "
                f"ref_len = {self.reference_length})")


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def _check_aligned(hypotheses, references):
    if len(hypotheses) != len(references):
        raise PairCountMismatch(len(hypotheses), len(references))


def modified_precision(
    hypotheses: Sequence[Sequence[str]], references: Sequence[Sequence[str]], n: int
) -> NgramPrecision:
    """Clipped n-gram matches and candidate n-gram count, summed over the corpus."""
    _check_aligned(hypotheses, references)
    if n < 1:
        raise ValueError("n-gram order must be >= 1")
    matched = total = 0
    for hyp, ref in zip(hypotheses, references):
        hyp_counts = _ngrams(hyp, n)
        ref_counts = _ngrams(ref, n)
        matched += sum(min(c, ref_counts[g]) for g, c in hyp_counts.items())
        total += max(len(hyp) - n + 1, 0)
    return NgramPrecision(n, matched, total)


def brevity_penalty(c: int, r: int) -> float:
    """1 when the candidate is longer than the reference, else exp(1 - r/c).

    An empty candidate gets 0 against a non-empty reference.
    """
    if c > r:
        return 1.0
    if c == 0:
        return 0.0 if r > 0 else 1.0
    return math.exp(1 - r / c)


def corpus_bleu(
    hypotheses: Sequence[Sequence[str]],
    references: Sequence[Sequence[str]],
    max_order: int = 4,
    smoothing: Smoothing | str = Smoothing.none,
) -> BleuReport:
    """Corpus BLEU on the 0-100 scale over pre-tokenized sentences.

    With ``add_one_from_order_2`` the precisions for orders 2 and up become
    (matched + 1) / (total + 1); unigram precision is never smoothed.
    """
    smoothing = Smoothing(smoothing)
    _check_aligned(hypotheses, references)
    if not hypotheses:
        raise EmptyCorpus("hypothesis list")
    precisions = tuple(modified_precision(hypotheses, references, n)
                       for n in range(1, max_order + 1))
    c = sum(len(h) for h in hypotheses)
    r = sum(len(ref) for ref in references)
    bp = brevity_penalty(c, r)

    log_sum = 0.0
    score = 0.0
    for p in precisions:
        matched, total = p.matched, p.total
        if smoothing is Smoothing.add_one_from_order_2 and p.order > 1:
            matched, total = matched + 1, total + 1
        if matched == 0:
            break
        log_sum += math.log(matched / total)
    else:
        score = 100.0 * bp * math.exp(log_sum / max_order)
    return BleuReport(precisions, c, r, bp, score, max_order, smoothing)


def corpus_bleu_text(hyp_lines: Sequence[str], ref_lines: Sequence[str],
                     lowercase: bool = False, **kw) -> BleuReport:
    hyps = [tokenize_eval(h, lowercase) for h in hyp_lines]
    refs = [tokenize_eval(r, lowercase) for r in ref_lines]
    return corpus_bleu(hyps, refs, **kw)
