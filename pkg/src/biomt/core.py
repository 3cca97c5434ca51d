"""Shared value types: language tags, language pairs, segment pairs and the
captured NMT hyperparameters."""

from __future__ import annotations

import enum
import json
from dataclasses import asdict, dataclass, fields

from biomt.errors import InvalidConfig, InvalidSegment, UnknownLanguage, ValidationError

# UMLS LAT codes -> short labels used in rendered tables
_LANGUAGES: dict[str, str] = {"ENG": "EN", "SPA": "ES", "POR": "PT"}


def register_language(code: str, label: str | None = None) -> None:
    code = code.strip().upper()
    if len(code) != 3 or not code.isalpha():
        raise ValueError(f"language codes are three letters, got {code!r}")
    _LANGUAGES[code] = label or code[:2]


def is_registered(code: str) -> bool:
    return code.strip().upper() in _LANGUAGES


def registered_languages() -> frozenset[str]:
    return frozenset(_LANGUAGES)


@dataclass(frozen=True, order=True)
class LanguageTag:
    code: str

    def __post_init__(self):
        code = str(self.code).strip().upper()
        if code not in _LANGUAGES:
            raise UnknownLanguage(self.code)
        object.__setattr__(self, "code", code)

    @property
    def label(self) -> str:
        return _LANGUAGES[self.code]

    def __str__(self):
        return self.code


def _tag(value) -> LanguageTag:
    return value if isinstance(value, LanguageTag) else LanguageTag(value)


@dataclass(frozen=True, order=True)
class LangPair:
    source: LanguageTag
    target: LanguageTag

    def __post_init__(self):
        object.__setattr__(self, "source", _tag(self.source))
        object.__setattr__(self, "target", _tag(self.target))
        if self.source == self.target:
            raise ValidationError(f"source and target language are both {self.source}")

    @classmethod
    def parse(cls, text: str) -> LangPair:
        """Parse ``ENG-SPA``, ``eng/spa`` or ``EN/ES`` style pair names."""
        for sep in ("-", "/", ">"):
            if sep in text:
                src, tgt = text.split(sep, 1)
                return cls(_from_label(src), _from_label(tgt))
        raise ValidationError(f"cannot parse language pair {text!r}")

    @property
    def label(self) -> str:
        return f"{self.source.label}/{self.target.label}"

    def reversed(self) -> LangPair:
        return LangPair(self.target, self.source)

    def __str__(self):
        return f"{self.source}-{self.target}"


def _from_label(text: str) -> LanguageTag:
    text = text.strip().upper()
    if len(text) == 2:
        for code, label in _LANGUAGES.items():
            if label == text:
                return LanguageTag(code)
    return LanguageTag(text)


@dataclass(frozen=True)
class SegmentPair:
    source_text: str
    target_text: str
    corpus_id: str
    doc_id: str | None = None

    def __post_init__(self):
        for name in ("source_text", "target_text"):
            text = getattr(self, name)
            if not text.strip():
                raise InvalidSegment(f"{name} is empty")
            if "\n" in text or "\r" in text:
                raise InvalidSegment(f"{name} contains a line break")


class EncoderType(str, enum.Enum):
    bidirectional_recurrent = "bidirectional_recurrent"


class DecoderType(str, enum.Enum):
    seq2seq_attention = "seq2seq_attention"


@dataclass(frozen=True)
class NmtConfigCapture:
    """Hyperparameters of the neural system, recorded for reproduction.

    Defaults are the published settings; the network itself is not trained
    here.
    """

    encoder_type: EncoderType = EncoderType.bidirectional_recurrent
    decoder_type: DecoderType = DecoderType.seq2seq_attention
    word_vector_size: int = 600
    layers: int = 4
    rnn_size: int = 800
    batch_size: int = 64
    vocabulary_size: int = 50000

    def __post_init__(self):
        try:
            object.__setattr__(self, "encoder_type", EncoderType(self.encoder_type))
            object.__setattr__(self, "decoder_type", DecoderType(self.decoder_type))
        except ValueError as exc:
            raise InvalidConfig(str(exc)) from None
        for f in fields(self):
            if f.type != "int":
                continue
            value = getattr(self, f.name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise InvalidConfig(f"{f.name} must be an integer, got {value!r}")
            if value <= 0:
                raise InvalidConfig(f"{f.name} must be positive, got {value}")

    @classmethod
    def with_overrides(cls, overrides: dict | None = None) -> NmtConfigCapture:
        overrides = dict(overrides or {})
        known = {f.name for f in fields(cls)}
        unknown = set(overrides) - known
        if unknown:
            raise InvalidConfig(f"unknown NMT config fields: {sorted(unknown)}")
        return cls(**overrides)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["encoder_type"] = self.encoder_type.value
        d["decoder_type"] = self.decoder_type.value
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> NmtConfigCapture:
        return cls.with_overrides(json.loads(text))
