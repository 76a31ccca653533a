"""Normalization of raw bank-transaction descriptions into lemma sequences.

The pipeline runs, in order: abbreviation expansion, symbol/diacritic
folding, number and code removal, whitespace tokenization, stopword
removal and lemmatization. Expansion runs first so dotted acronyms such
as ``E.S.`` are still recognisable before the periods are stripped.
"""
from __future__ import annotations

import hashlib
import json
import re
import unicodedata
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

__all__ = [
    "NormalizationConfig",
    "ProcessedDoc",
    "load_config",
    "default_config",
    "strip_numeric_and_codes",
    "expand_abbreviations",
    "strip_symbols_diacritics",
    "remove_stopwords",
    "lemmatize",
    "preprocess",
    "render",
]

DEFAULT_CODE_PATTERN = r"^(?=[a-z0-9]*[a-z])(?=[a-z0-9]*[0-9])[a-z0-9]{4,}$"

_VOWELS = frozenset("aeo")
_ES_GUARD = frozenset("lnrd")
_ALL_VOWELS = frozenset("aeiou")


@dataclass(frozen=True)
class NormalizationConfig:
    """Immutable preprocessing resources.

    ``lemmas`` maps surface forms to lemmas; ``pos`` optionally tags
    lemmas (``noun``, ``verb``, ``adj``, ``propn``) for term selection.
    """

    acronym_table: Mapping[str, str] = field(default_factory=dict)
    stopword_list: frozenset[str] = frozenset()
    lemma_dictionary: Mapping[str, str] = field(default_factory=dict)
    code_pattern_rules: tuple[str, ...] = (DEFAULT_CODE_PATTERN,)
    pos_tags: Mapping[str, str] = field(default_factory=dict)

    @cached_property
    def _acronym_regex(self) -> re.Pattern | None:
        if not self.acronym_table:
            return None
        alternatives = []
        # longest keys first so "s.a.u." wins over "s.a."
        for key in sorted(self.acronym_table, key=lambda k: (-len(k), k)):
            core = key.lower().rstrip(".")
            body = re.escape(core)
            alternatives.append(rf"{body}(?:\.|(?![a-z0-9]))")
        return re.compile(rf"(?<![a-z0-9.])(?:{'|'.join(alternatives)})", re.IGNORECASE)

    @cached_property
    def _acronym_lookup(self) -> dict[str, str]:
        return {k.lower().rstrip("."): v for k, v in self.acronym_table.items()}

    @cached_property
    def _code_regexes(self) -> tuple[re.Pattern, ...]:
        return tuple(re.compile(p, re.IGNORECASE) for p in self.code_pattern_rules)

    def to_dict(self) -> dict:
        return {
            "acronyms": dict(sorted(self.acronym_table.items())),
            "stopwords": sorted(self.stopword_list),
            "lemmas": dict(sorted(self.lemma_dictionary.items())),
            "pos": dict(sorted(self.pos_tags.items())),
            "code_patterns": list(self.code_pattern_rules),
        }

    @cached_property
    def digest(self) -> str:
        """SHA-256 of the canonical JSON form; embedded in model files."""
        blob = json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    @classmethod
    def from_dict(cls, raw: Mapping) -> "NormalizationConfig":
        return cls(
            acronym_table=dict(raw.get("acronyms", {})),
            stopword_list=frozenset(w.lower() for w in raw.get("stopwords", [])),
            lemma_dictionary=dict(raw.get("lemmas", {})),
            code_pattern_rules=tuple(raw.get("code_patterns", [DEFAULT_CODE_PATTERN])),
            pos_tags=dict(raw.get("pos", {})),
        )


@dataclass(frozen=True)
class ProcessedDoc:
    lemmas: tuple[str, ...]
    source_id: str = ""

    def __len__(self) -> int:
        return len(self.lemmas)

    def __iter__(self):
        return iter(self.lemmas)


def load_config(path: str | Path) -> NormalizationConfig:
    with open(path, encoding="utf-8") as fh:
        return NormalizationConfig.from_dict(json.load(fh))


_DEFAULT: NormalizationConfig | None = None


def default_config() -> NormalizationConfig:
    """The shipped Spanish configuration (cached)."""
    global _DEFAULT
    if _DEFAULT is None:
        text = resources.files("cfxplain.data").joinpath("normalization.json").read_text("utf-8")
        _DEFAULT = NormalizationConfig.from_dict(json.loads(text))
    return _DEFAULT


def expand_abbreviations(text: str, cfg: NormalizationConfig) -> str:
    regex = cfg._acronym_regex
    if regex is None or not text:
        return text
    lookup = cfg._acronym_lookup

    def _sub(m: re.Match) -> str:
        expansion = lookup[m.group(0).lower().rstrip(".")]
        end = m.end()
        if end < len(text) and text[end].isalnum():
            return expansion + " "
        return expansion

    return regex.sub(_sub, text)


def strip_symbols_diacritics(text: str) -> str:
    decomposed = unicodedata.normalize("NFKD", text)
    folded = "".join(ch for ch in decomposed if not unicodedata.combining(ch)).lower()
    folded = re.sub(r"[^a-z0-9\s]", " ", folded)
    return " ".join(folded.split())


def _is_code(token: str, cfg: NormalizationConfig) -> bool:
    return any(rx.search(token) for rx in cfg._code_regexes)


def strip_numeric_and_codes(text: str, cfg: NormalizationConfig) -> str:
    """Drop numbers, digit runs and alphanumeric codes, keeping token order."""
    kept = []
    for token in text.split():
        if _is_code(token, cfg):
            continue
        if not any(ch.isalpha() for ch in token):
            if any(ch.isdigit() for ch in token):
                continue
            kept.append(token)
            continue
        token = re.sub(r"\d+", "", token)
        if token:
            kept.append(token)
    return " ".join(kept)


def remove_stopwords(tokens: Sequence[str], cfg: NormalizationConfig) -> list[str]:
    stop = cfg.stopword_list
    return [t for t in tokens if t not in stop]


def _strip_plural(token: str) -> str:
    n = len(token)
    if n > 4 and token.endswith("ces"):
        return token[:-3] + "z"
    # "-es" after a vowel + l/n/r/d: papeles, trenes, motores, ciudades
    if n > 4 and token.endswith("es") and token[-3] in _ES_GUARD and token[-4] in _ALL_VOWELS:
        return token[:-2]
    if n >= 4 and token.endswith("s") and token[-2] in _VOWELS:
        return token[:-1]
    return token


def lemmatize(tokens: Sequence[str], cfg: NormalizationConfig) -> list[str]:
    table = cfg.lemma_dictionary
    out = []
    for t in tokens:
        lemma = table.get(t)
        out.append(lemma if lemma is not None else _strip_plural(t))
    return out


def preprocess(raw: str, cfg: NormalizationConfig | None = None, source_id: str = "") -> ProcessedDoc:
    """Run the full normalization pipeline on one description."""
    cfg = cfg or default_config()
    text = expand_abbreviations(raw or "", cfg)
    text = strip_symbols_diacritics(text)
    text = strip_numeric_and_codes(text, cfg)
    tokens = remove_stopwords(text.split(), cfg)
    lemmas = lemmatize(tokens, cfg)
    # a lemma can land on a stopword ("unos" -> "uno"); drop it again
    lemmas = [t for t in lemmas if t and t not in cfg.stopword_list]
    return ProcessedDoc(tuple(lemmas), source_id)


def preprocess_many(raws: Iterable[str], cfg: NormalizationConfig | None = None) -> list[ProcessedDoc]:
    cfg = cfg or default_config()
    return [preprocess(r, cfg) for r in raws]


def render(doc: ProcessedDoc) -> str:
    return " ".join(doc.lemmas)
