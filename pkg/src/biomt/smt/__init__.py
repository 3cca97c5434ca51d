"""Desk-scale statistical baseline: Model 1 alignment, bigram LM, monotone decoder."""

from biomt.smt.alignment import NULL, TranslationTable, ibm1_em, train_ibm1
from biomt.smt.decoder import (
    DecoderWeights,
    decode,
    decode_scored,
    evaluate_baseline,
    model_score,
    shuffled_control,
    translate_segments,
    translate_tokens,
)
from biomt.smt.lm import BOS, EOS, LanguageModel, train_bigram_lm

__all__ = [
    "BOS",
    "EOS",
    "NULL",
    "DecoderWeights",
    "LanguageModel",
    "TranslationTable",
    "decode",
    "decode_scored",
    "evaluate_baseline",
    "ibm1_em",
    "model_score",
    "shuffled_control",
    "train_bigram_lm",
    "train_ibm1",
    "translate_segments",
    "translate_tokens",
]
