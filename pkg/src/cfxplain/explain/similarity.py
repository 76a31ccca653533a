"""Set-overlap and edit-proximity similarity between term collections."""
from __future__ import annotations

from typing import Collection, Sequence

from ..corpus import fuzzy_ratio

PROXIMITY_THRESHOLD = 0.8


def jaccard_similarity(A: Collection[str], B: Collection[str]) -> float:
    a, b = set(A), set(B)
    union = a | b
    if not union:
        return 0.0
    return len(a & b) / len(union)


def term_proximity(a: str, b: str, threshold: float = PROXIMITY_THRESHOLD) -> float:
    if a == b:
        return 1.0
    s = fuzzy_ratio(a, b)
    return s if s >= threshold else 0.0


def proximity_similarity(A: Sequence[str], B: Sequence[str], threshold: float = PROXIMITY_THRESHOLD) -> float:
    """Mean over ``a`` in A of the best ``term_proximity(a, b)`` over B."""
    A = list(A)
    if not A:
        raise ValueError("proximity similarity needs at least one term")
    B = list(dict.fromkeys(B))
    if not B:
        return 0.0
    return sum(max(term_proximity(a, b, threshold) for b in B) for a in A) / len(A)


METRICS = {"jaccard": jaccard_similarity, "proximity": proximity_similarity}
