"""Explanations of single predictions: terms, enrichment, verdict, rendering."""
from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from ..classify import TrainedClassifier, decision_scores
from ..corpus import SECTORS, Sector, Transaction
from ..features import transform_counts
from ..textprep import NormalizationConfig, ProcessedDoc, default_config, preprocess
from .lexicon import EnterpriseRecord, SectorLexicon, match_enterprises, select_enterprise_terms
from .similarity import METRICS
from .surrogate import DEFAULT_SAMPLES, fit_local_surrogate, perturb_and_weight

VERDICTS = ("validated", "obvious", "needs_review", "empty")
FIVE_WAY = ("validated", "obvious", "coherent", "empty", "ambiguous")

TEMPLATE_EN = (
    "The classification of transaction {id} into the category {sector} "
    "can be explained by relevant terms: (in decreasing order) {terms}."
)
# "order" is intentional: consumers match this exact wording
TEMPLATE_ES = (
    "La clasificación del movimiento {id} en la categoría {sector} "
    "puede explicarse en order decreciente por los términos relevantes: {terms}."
)
NO_TERMS = {"en": "(no representative terms)", "es": "(sin términos representativos)"}


@dataclass(frozen=True)
class Explanation:
    transaction_id: str
    predicted: Sector
    terms: tuple[tuple[str, float], ...] = ()
    enrichment_terms: tuple[str, ...] = ()
    matched_enterprises: tuple[str, ...] = ()
    similarity_per_sector: Mapping[Sector, float] = field(default_factory=dict)
    verdict: str = "empty"
    fidelity_r2: float | None = None
    rendered: Mapping[str, str] = field(default_factory=dict)

    def term_strings(self) -> list[str]:
        return [t for t, _ in self.terms]

    def to_dict(self) -> dict:
        return {
            "transaction_id": self.transaction_id,
            "predicted": self.predicted.value,
            "terms": [[t, w] for t, w in self.terms],
            "enrichment_terms": list(self.enrichment_terms),
            "matched_enterprises": list(self.matched_enterprises),
            "similarity_per_sector": {s.value: self.similarity_per_sector.get(s, 0.0) for s in SECTORS},
            "verdict": self.verdict,
            "fidelity_r2": self.fidelity_r2,
            "rendered_en": self.rendered.get("en", ""),
            "rendered_es": self.rendered.get("es", ""),
        }


def transaction_seed(master_seed: int, transaction_id: str) -> int:
    """Private stream seed for one transaction, independent of processing order."""
    digest = hashlib.sha256(f"{int(master_seed)}\x1f{transaction_id}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def select_terms(doc: ProcessedDoc, ranked: Sequence[tuple[str, float]], top_k: int) -> list[tuple[str, float]]:
    """Positive-coefficient tokens first, then the rest by |coefficient|,
    plus adjacent-token bigrams of selected tokens weighted by the mean of
    their two tokens; sorted by weight descending and cut to ``top_k``.
    """
    if top_k < 1:
        raise ValueError("top_k must be positive")
    positive = [(t, w) for t, w in ranked if w > 0]
    rest = sorted(((t, w) for t, w in ranked if w <= 0), key=lambda tw: -abs(tw[1]))
    chosen = (positive + rest)[:top_k]
    weight = dict(chosen)
    seen = set(weight)
    bigrams = []
    for a, b in zip(doc.lemmas, doc.lemmas[1:]):
        term = f"{a} {b}"
        if a != b and a in weight and b in weight and term not in seen:
            seen.add(term)
            bigrams.append((term, (weight[a] + weight[b]) / 2.0))
    merged = chosen + bigrams
    # stable: on equal weight unigrams stay ahead of the bigrams built from them
    order = sorted(range(len(merged)), key=lambda i: -merged[i][1])
    return [merged[i] for i in order][:top_k]


def explain_transaction(
    t: Transaction, model: TrainedClassifier, cfg: NormalizationConfig | None = None,
    enterprises: Sequence[EnterpriseRecord] = (), top_k: int = 10, *,
    n_samples: int = DEFAULT_SAMPLES, seed: int = 0, mode: str = "auto",
    doc: ProcessedDoc | None = None, predicted: Sector | None = None,
) -> Explanation:
    """Surrogate-based terms for the model's prediction on ``t``, then enrichment."""
    cfg = cfg or default_config()
    doc = doc if doc is not None else preprocess(t.description, cfg, t.id)
    if predicted is None:
        scores = decision_scores(model, transform_counts(doc, model.feature_space).astype(np.float64))
        predicted = SECTORS[int(np.argmax(scores))]
    if len(doc) == 0:
        return Explanation(t.id, predicted, verdict="empty")
    masks, weights = perturb_and_weight(doc, n_samples, transaction_seed(seed, t.id), mode)
    fit = fit_local_surrogate(doc, model, predicted, masks, weights)
    terms = tuple((term, float(w)) for term, w in select_terms(doc, fit.ranked(), top_k))
    x = Explanation(t.id, predicted, terms=terms, fidelity_r2=fit.fidelity_r2, verdict="needs_review")
    return enrich_explanation(x, doc, enterprises, cfg)


def enrich_explanation(
    x: Explanation, doc: ProcessedDoc | Transaction, enterprises: Sequence[EnterpriseRecord],
    cfg: NormalizationConfig | None = None,
) -> Explanation:
    cfg = cfg or default_config()
    if isinstance(doc, Transaction):
        doc = preprocess(doc.description, cfg, doc.id)
    matched = match_enterprises(doc, enterprises, cfg)
    if not matched:
        return x
    have = set(x.term_strings()) | set(x.enrichment_terms)
    extra = list(x.enrichment_terms)
    for e in matched:
        for term in select_enterprise_terms(e, cfg):
            if term not in have:
                have.add(term)
                extra.append(term)
    names = tuple(dict.fromkeys(x.matched_enterprises + tuple(e.name for e in matched)))
    return replace(x, enrichment_terms=tuple(extra), matched_enterprises=names)


def explanation_tokens(x: Explanation) -> list[str]:
    """Single lemmas of terms (bigrams split) followed by enrichment terms."""
    out: dict[str, None] = {}
    for term, _ in x.terms:
        out.update(dict.fromkeys(term.split()))
    out.update(dict.fromkeys(x.enrichment_terms))
    return list(out)


def validate_explanation(
    x: Explanation, lexicon: SectorLexicon, enterprises: Sequence[EnterpriseRecord] = (),
    metric: str = "proximity",
) -> Explanation:
    """Attach per-sector similarity and the verdict.

    empty: no terms or zero similarity everywhere; obvious: a matched
    enterprise belongs to the predicted sector; validated: the predicted
    sector is the unique most similar one; otherwise needs_review.
    """
    sim_fn = METRICS[metric]
    tokens = explanation_tokens(x)
    if not tokens:
        sims = {s: 0.0 for s in SECTORS}
    else:
        sims = {s: float(sim_fn(tokens, lexicon.bag(s))) for s in SECTORS}
    by_name = {e.name: e.sector for e in enterprises}
    if not tokens or all(v == 0.0 for v in sims.values()):
        verdict = "empty"
    elif any(by_name.get(n) is x.predicted for n in x.matched_enterprises):
        verdict = "obvious"
    else:
        top = max(sims.values())
        leaders = [s for s in SECTORS if sims[s] == top]
        verdict = "validated" if leaders == [x.predicted] else "needs_review"
    return replace(x, similarity_per_sector=sims, verdict=verdict)


def _fmt_terms(x: Explanation, language: str) -> str:
    if not x.terms:
        return NO_TERMS[language]
    return ", ".join(x.term_strings())


def render_template(x: Explanation, language: str = "en") -> str:
    if language == "en":
        return TEMPLATE_EN.format(id=x.transaction_id, sector=x.predicted.display_en, terms=_fmt_terms(x, "en"))
    if language == "es":
        return TEMPLATE_ES.format(id=x.transaction_id, sector=x.predicted.display_es, terms=_fmt_terms(x, "es"))
    raise ValueError(f"unsupported language {language!r}")


def with_rendering(x: Explanation) -> Explanation:
    return replace(x, rendered={"en": render_template(x, "en"), "es": render_template(x, "es")})


def most_similar_sector(x: Explanation) -> Sector:
    sims = x.similarity_per_sector
    return max(SECTORS, key=lambda s: (sims.get(s, 0.0), -s.index))


def sector_confusion(explanations: Sequence[Explanation]) -> np.ndarray:
    """Rows: predicted sector; columns: most similar sector (ties to lower index)."""
    m = np.zeros((len(SECTORS), len(SECTORS)), dtype=np.int64)
    for x in explanations:
        if x.verdict == "empty":
            continue
        if not x.similarity_per_sector:
            raise ValueError(f"explanation {x.transaction_id} has no similarity scores")
        m[x.predicted.index, most_similar_sector(x).index] += 1
    return m


def verdict_summary(explanations: Sequence[Explanation]) -> dict:
    n = len(explanations)
    counts = {v: sum(1 for x in explanations if x.verdict == v) for v in VERDICTS}
    pct = {v: (100.0 * c / n if n else 0.0) for v, c in counts.items()}
    return {"n": n, "counts": counts, "percent": pct}


def load_annotations(path: str | Path) -> dict[str, str]:
    """``transaction_id,judgment`` rows with judgment coherent|ambiguous."""
    out: dict[str, str] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if not reader.fieldnames or not {"transaction_id", "judgment"} <= set(reader.fieldnames):
            raise ValueError("annotations need columns transaction_id,judgment")
        for row in reader:
            j = (row["judgment"] or "").strip().lower()
            if j not in ("coherent", "ambiguous"):
                raise ValueError(f"bad judgment {j!r} on line {reader.line_num}")
            out[row["transaction_id"].strip()] = j
    return out


def five_way_report(explanations: Sequence[Explanation], annotations: Mapping[str, str]) -> dict:
    """Split needs_review into coherent/ambiguous using operator annotations.

    Reviewed items without an annotation are counted as ``unreviewed``.
    """
    counts = dict.fromkeys(FIVE_WAY + ("unreviewed",), 0)
    for x in explanations:
        if x.verdict == "needs_review":
            counts[annotations.get(x.transaction_id, "unreviewed")] += 1
        else:
            counts[x.verdict] += 1
    n = len(explanations)
    return {
        "n": n,
        "counts": counts,
        "percent": {k: (100.0 * v / n if n else 0.0) for k, v in counts.items()},
        "satisfactory_percent": (100.0 * (counts["validated"] + counts["obvious"] + counts["coherent"]) / n) if n else 0.0,
    }


def keyword_rank(x: Explanation, keyword: str) -> int | None:
    """0-based position of the first term containing ``keyword`` as a token."""
    for i, (term, _) in enumerate(x.terms):
        if keyword in term.split():
            return i
    return None


def is_finite_terms(x: Explanation) -> bool:
    return all(math.isfinite(w) for _, w in x.terms)
