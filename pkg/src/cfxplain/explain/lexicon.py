"""Enterprise records, enterprise term selection and per-sector word bags."""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from ..corpus import SECTORS, Sector
from ..textprep import NormalizationConfig, ProcessedDoc, default_config, preprocess

MAX_TERMS = 10
NOUNS_PER_ENTERPRISE = 10
VERBS_PER_ENTERPRISE = 5
ENTERPRISES_PER_SECTOR = 6

# tags that disqualify a lemma from being noun-like
_NON_NOUN = frozenset({"verb", "adj", "propn"})


@dataclass(frozen=True)
class EnterpriseRecord:
    name: str
    sector: Sector
    description: str

    def key(self, cfg: NormalizationConfig | None = None) -> tuple[str, ...]:
        """Lemmatized name used for matching against descriptions."""
        return preprocess(self.name, cfg).lemmas


def load_enterprises(path: str | Path | None = None) -> list[EnterpriseRecord]:
    if path is None:
        raw = json.loads(resources.files("cfxplain.data").joinpath("enterprises.json").read_text("utf-8"))
    else:
        raw = json.loads(Path(path).read_text("utf-8"))
    out, seen = [], set()
    for r in raw:
        rec = EnterpriseRecord(r["name"].strip().lower(), Sector.parse(r["sector"]), r.get("description", ""))
        if rec.name in seen:
            raise ValueError(f"duplicate enterprise name {rec.name!r}")
        seen.add(rec.name)
        out.append(rec)
    return out


def _ranked(lemmas: Iterable[str], limit: int) -> list[str]:
    counts = Counter(lemmas)
    return [t for t, _ in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))][:limit]


def _is_noun(lemma: str, cfg: NormalizationConfig) -> bool:
    return cfg.pos_tags.get(lemma) not in _NON_NOUN


def select_enterprise_terms(e: EnterpriseRecord, cfg: NormalizationConfig | None = None) -> list[str]:
    """Up to ten noun-like lemmas of the description, most frequent first."""
    cfg = cfg or default_config()
    if not e.description.strip():
        return []
    lemmas = preprocess(e.description, cfg).lemmas
    return _ranked((t for t in lemmas if _is_noun(t, cfg)), MAX_TERMS)


def select_enterprise_verbs(e: EnterpriseRecord, cfg: NormalizationConfig | None = None) -> list[str]:
    cfg = cfg or default_config()
    lemmas = preprocess(e.description, cfg).lemmas
    return _ranked((t for t in lemmas if cfg.pos_tags.get(t) == "verb"), VERBS_PER_ENTERPRISE)


@dataclass(frozen=True)
class SectorLexicon:
    nouns: Mapping[Sector, tuple[str, ...]]
    verbs: Mapping[Sector, tuple[str, ...]]

    def bag(self, sector: Sector) -> tuple[str, ...]:
        """Nouns then verbs, without repeats."""
        return tuple(dict.fromkeys(self.nouns.get(sector, ()) + self.verbs.get(sector, ())))

    def to_dict(self) -> dict:
        return {s.value: {"nouns": list(self.nouns.get(s, ())), "verbs": list(self.verbs.get(s, ()))} for s in SECTORS}

    @classmethod
    def from_dict(cls, raw: Mapping) -> "SectorLexicon":
        nouns, verbs = {}, {}
        for key, entry in raw.items():
            s = Sector.parse(key)
            nouns[s] = tuple(entry.get("nouns", ()))
            verbs[s] = tuple(entry.get("verbs", ()))
        lex = cls(nouns, verbs)
        for s in SECTORS:
            if not lex.bag(s):
                raise ValueError(f"sector lexicon has no terms for {s.value}")
        return lex


def build_sector_lexicon(
    enterprises: Sequence[EnterpriseRecord], cfg: NormalizationConfig | None = None
) -> SectorLexicon:
    """Ten nouns and five verbs from each of the first six enterprises per sector."""
    cfg = cfg or default_config()
    nouns: dict[Sector, tuple[str, ...]] = {}
    verbs: dict[Sector, tuple[str, ...]] = {}
    for s in SECTORS:
        members = [e for e in enterprises if e.sector is s][:ENTERPRISES_PER_SECTOR]
        n_acc: dict[str, None] = {}
        v_acc: dict[str, None] = {}
        for e in members:
            lemmas = preprocess(e.description, cfg).lemmas
            n_acc.update(dict.fromkeys(_ranked((t for t in lemmas if _is_noun(t, cfg)), NOUNS_PER_ENTERPRISE)))
            v_acc.update(dict.fromkeys(select_enterprise_verbs(e, cfg)))
        nouns[s] = tuple(n_acc)
        verbs[s] = tuple(v_acc)
    return SectorLexicon(nouns, verbs)


def load_lexicon(path: str | Path | None = None) -> SectorLexicon:
    if path is None:
        text = resources.files("cfxplain.data").joinpath("sector_lexicon.json").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    return SectorLexicon.from_dict(json.loads(text))


def match_enterprises(doc: ProcessedDoc | Sequence[str], enterprises: Sequence[EnterpriseRecord],
                      cfg: NormalizationConfig | None = None) -> list[EnterpriseRecord]:
    """Enterprises whose name occurs in the lemmas.

    A name matches as a contiguous lemma run, or when its lemmas glued
    together equal one token or two adjacent tokens glued together
    (``free now`` / ``freenow``).
    """
    lemmas = tuple(doc.lemmas if isinstance(doc, ProcessedDoc) else doc)
    singles = set(lemmas)
    joins = {a + b for a, b in zip(lemmas, lemmas[1:])}
    hits = []
    for e in enterprises:
        key = e.key(cfg)
        if not key:
            continue
        glued = "".join(key)
        k = len(key)
        contiguous = any(lemmas[i:i + k] == key for i in range(len(lemmas) - k + 1))
        if contiguous or glued in singles or glued in joins:
            hits.append(e)
    return hits
