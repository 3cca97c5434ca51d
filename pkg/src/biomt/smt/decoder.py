"""Monotone word-by-word beam decoder and baseline evaluation."""

from __future__ import annotations

import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from biomt.bleu import BleuReport, Smoothing, corpus_bleu, tokenize_eval
from biomt.core import SegmentPair
from biomt.errors import EmptyCorpus, ValidationError
from biomt.smt.alignment import TranslationTable
from biomt.smt.lm import BOS, EOS, LanguageModel

PROB_FLOOR = 1e-12
DEFAULT_TOP_K = 10


@dataclass(frozen=True)
class DecoderWeights:
    lambda_tm: float = 1.0
    lambda_lm: float = 1.0
    beam_width: int = 5

    def __post_init__(self):
        if self.lambda_tm < 0 or self.lambda_lm < 0:
            raise ValidationError("decoder weights must be non-negative")
        if not self.lambda_tm + self.lambda_lm > 0:
            raise ValidationError("at least one decoder weight must be positive")
        if isinstance(self.beam_width, bool) or not isinstance(self.beam_width, int) \
                or self.beam_width < 1:
            raise ValidationError("beam_width must be a positive integer")


def _log(p: float) -> float:
    return math.log(max(p, PROB_FLOOR))


def _options(source_tokens, tt: TranslationTable, top_k: int):
    """Per source position: ``(target word, log t)`` choices. Unknown source
    words are copied through with log t = 0."""
    out = []
    for f in source_tokens:
        if f in tt.source_vocab:
            out.append([(e, _log(p)) for e, p in tt.candidates(f, top_k)])
        else:
            out.append([(f, 0.0)])
    return out


def _search(options, lm: LanguageModel, w: DecoderWeights, width: int):
    # states are keyed by the last target word, the only context the bigram LM sees
    beam: dict[str, tuple[float, tuple[str, ...]]] = {BOS: (0.0, ())}
    last = len(options) - 1
    for i, choices in enumerate(options):
        expanded: dict[str, tuple[float, tuple[str, ...]]] = {}
        for prev, (score, words) in beam.items():
            for e, log_t in choices:
                s = score + w.lambda_tm * log_t + w.lambda_lm * _log(lm.prob(e, prev))
                if i == last:
                    s += w.lambda_lm * _log(lm.prob(EOS, e))
                cand = (s, words + (e,))
                best = expanded.get(e)
                if best is None or _better(cand, best):
                    expanded[e] = cand
        ranked = sorted(expanded.items(), key=lambda kv: (-kv[1][0], kv[1][1]))
        beam = dict(ranked[:width])
    return min(beam.values(), key=lambda v: (-v[0], v[1]))


def _better(a, b) -> bool:
    return a[0] > b[0] or (a[0] == b[0] and a[1] < b[1])


def model_score(source_tokens: Sequence[str], target_tokens: Sequence[str],
                tt: TranslationTable, lm: LanguageModel, w: DecoderWeights) -> float:
    """Score of a word-for-word output under the decoder's model."""
    if len(source_tokens) != len(target_tokens):
        raise ValidationError("monotone outputs have one target word per source word")
    score, prev = 0.0, BOS
    for f, e in zip(source_tokens, target_tokens):
        log_t = _log(tt.prob(e, f)) if f in tt.source_vocab else (0.0 if e == f else _log(0.0))
        score += w.lambda_tm * log_t + w.lambda_lm * _log(lm.prob(e, prev))
        prev = e
    if target_tokens:
        score += w.lambda_lm * _log(lm.prob(EOS, prev))
    return score


def decode_scored(source_tokens: Sequence[str], tt: TranslationTable, lm: LanguageModel,
                  w: DecoderWeights, top_k: int = DEFAULT_TOP_K) -> tuple[list[str], float]:
    """Return the best output and its model score.

    Beam search is run at every width up to ``w.beam_width`` and the best
    result kept, so widening the beam can never return a worse score.
    Width 1 is plain greedy search.
    """
    if not source_tokens:
        return [], 0.0
    options = _options(source_tokens, tt, top_k)
    best = None
    for width in range(1, w.beam_width + 1):
        result = _search(options, lm, w, width)
        if best is None or _better(result, best):
            best = result
    return list(best[1]), best[0]


def decode(source_tokens: Sequence[str], tt: TranslationTable, lm: LanguageModel,
           w: DecoderWeights, top_k: int = DEFAULT_TOP_K) -> list[str]:
    return decode_scored(source_tokens, tt, lm, w, top_k)[0]


def _decode_chunk(job):
    sources, tt, lm, w = job
    return [decode(tokens, tt, lm, w) for tokens in sources]


def translate_tokens(sources: Sequence[Sequence[str]], tt, lm, w,
                     workers: int = 1) -> list[list[str]]:
    """Decode each token sequence. With ``workers > 1`` contiguous chunks go
    to a process pool; results come back in input order, so the output is
    the same as a sequential run."""
    if isinstance(workers, bool) or not isinstance(workers, int) or workers < 1:
        raise ValidationError("workers must be a positive integer")
    sources = list(sources)
    if workers == 1 or len(sources) < 2 * workers:
        return _decode_chunk((sources, tt, lm, w))
    size = -(-len(sources) // workers)
    jobs = [(sources[i:i + size], tt, lm, w) for i in range(0, len(sources), size)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return [hyp for chunk in pool.map(_decode_chunk, jobs) for hyp in chunk]


def translate_segments(segments: Sequence[SegmentPair], tt, lm, w,
                       lowercase: bool = False, workers: int = 1) -> list[list[str]]:
    return translate_tokens([tokenize_eval(s.source_text, lowercase) for s in segments],
                            tt, lm, w, workers)


def evaluate_baseline(test_bitext: Sequence[SegmentPair], tt: TranslationTable,
                      lm: LanguageModel, w: DecoderWeights,
                      lowercase: bool = False, workers: int = 1) -> BleuReport:
    if not test_bitext:
        raise EmptyCorpus("test set")
    hyps = translate_segments(test_bitext, tt, lm, w, lowercase, workers)
    refs = [tokenize_eval(s.target_text, lowercase) for s in test_bitext]
    return corpus_bleu(hyps, refs, smoothing=Smoothing.add_one_from_order_2)


def shuffled_control(hypotheses: Sequence[Sequence[str]], references: Sequence[Sequence[str]],
                     seed: int) -> BleuReport:
    """BLEU of the same outputs scored against references in shuffled order."""
    hyps = list(hypotheses)
    random.Random(seed).shuffle(hyps)
    return corpus_bleu(hyps, references, smoothing=Smoothing.add_one_from_order_2)
