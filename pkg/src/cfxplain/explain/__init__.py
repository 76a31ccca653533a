"""Local-surrogate explanations, enterprise enrichment and sector validation."""
from .core import (
    FIVE_WAY, NO_TERMS, VERDICTS, Explanation, enrich_explanation, explain_transaction, explanation_tokens,
    five_way_report, keyword_rank, load_annotations, most_similar_sector, render_template, sector_confusion,
    select_terms, transaction_seed, validate_explanation, verdict_summary, with_rendering,
)
from .lexicon import (
    EnterpriseRecord, SectorLexicon, build_sector_lexicon, load_enterprises, load_lexicon, match_enterprises,
    select_enterprise_terms,
)
from .similarity import jaccard_similarity, proximity_similarity
from .surrogate import SurrogateError, SurrogateFit, fit_local_surrogate, kernel_weights, perturb_and_weight

__all__ = [
    "Explanation", "EnterpriseRecord", "SectorLexicon", "SurrogateFit", "SurrogateError",
    "VERDICTS", "FIVE_WAY", "NO_TERMS",
    "perturb_and_weight", "kernel_weights", "fit_local_surrogate", "select_terms", "explain_transaction",
    "enrich_explanation", "validate_explanation", "render_template", "with_rendering", "explanation_tokens",
    "sector_confusion", "most_similar_sector", "verdict_summary", "five_way_report", "load_annotations",
    "keyword_rank", "transaction_seed",
    "jaccard_similarity", "proximity_similarity",
    "load_enterprises", "load_lexicon", "build_sector_lexicon", "select_enterprise_terms", "match_enterprises",
]
