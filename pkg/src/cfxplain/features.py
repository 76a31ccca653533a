"""Wordgram/biwordgram count features with chi-squared percentile selection."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .corpus import Sector
from .textprep import ProcessedDoc

__all__ = [
    "FeatureSpace",
    "doc_terms",
    "fit_vocabulary",
    "transform_counts",
    "transform_many",
    "transform_masked",
    "chi2_scores",
    "select_percentile",
]


@dataclass(frozen=True)
class FeatureSpace:
    """Lexicographically ordered vocabulary plus an optional column selection.

    ``selected`` is a boolean mask over the full vocabulary; ``None`` means
    every column is active.
    """

    terms: tuple[str, ...]
    chi2: np.ndarray | None = None
    selected: np.ndarray | None = None

    @cached_property
    def vocabulary(self) -> dict[str, int]:
        return {t: i for i, t in enumerate(self.terms)}

    @cached_property
    def _column_map(self) -> np.ndarray:
        """Full-vocabulary column -> output position (-1 when unselected)."""
        V = len(self.terms)
        if self.selected is None:
            return np.arange(V, dtype=np.int64)
        out = np.full(V, -1, dtype=np.int64)
        idx = np.flatnonzero(self.selected)
        out[idx] = np.arange(idx.size)
        return out

    @property
    def size(self) -> int:
        return len(self.terms)

    @property
    def dim(self) -> int:
        return self.size if self.selected is None else int(self.selected.sum())

    @cached_property
    def selected_terms(self) -> tuple[str, ...]:
        if self.selected is None:
            return self.terms
        return tuple(t for t, keep in zip(self.terms, self.selected) if keep)

    def column(self, term: str) -> int:
        """Output column for ``term`` or -1 if absent/unselected."""
        i = self.vocabulary.get(term)
        return -1 if i is None else int(self._column_map[i])

    def __eq__(self, other):
        if not isinstance(other, FeatureSpace):
            return NotImplemented
        return (
            self.terms == other.terms
            and _arr_eq(self.chi2, other.chi2)
            and _arr_eq(self.selected, other.selected)
        )

    __hash__ = None


def _arr_eq(a, b) -> bool:
    if a is None or b is None:
        return a is None and b is None
    return a.shape == b.shape and bool(np.array_equal(a, b))


def doc_terms(lemmas: Sequence[str]) -> list[str]:
    """Unigrams followed by adjacent bigrams (joined by one space)."""
    lemmas = list(lemmas)
    return lemmas + [f"{a} {b}" for a, b in zip(lemmas, lemmas[1:])]


def _lemmas(doc) -> Sequence[str]:
    return doc.lemmas if isinstance(doc, ProcessedDoc) else doc


def fit_vocabulary(docs: Sequence[ProcessedDoc]) -> FeatureSpace:
    if not docs:
        raise ValueError("no documents")
    vocab = set()
    for d in docs:
        vocab.update(doc_terms(_lemmas(d)))
    if not vocab:
        raise ValueError("empty vocabulary")
    return FeatureSpace(tuple(sorted(vocab)))


def transform_counts(doc: ProcessedDoc, space: FeatureSpace) -> np.ndarray:
    """Dense count vector of one document over the active columns."""
    out = np.zeros(space.dim, dtype=np.int64)
    for term in doc_terms(_lemmas(doc)):
        col = space.column(term)
        if col >= 0:
            out[col] += 1
    return out


def transform_many(docs: Sequence[ProcessedDoc], space: FeatureSpace) -> sp.csr_matrix:
    rows, cols = [], []
    for r, doc in enumerate(docs):
        for term in doc_terms(_lemmas(doc)):
            col = space.column(term)
            if col >= 0:
                rows.append(r)
                cols.append(col)
    data = np.ones(len(rows), dtype=np.float64)
    X = sp.csr_matrix((data, (rows, cols)), shape=(len(docs), space.dim))
    X.sum_duplicates()
    return X


def transform_masked(
    doc: ProcessedDoc, space: FeatureSpace, keep: np.ndarray
) -> sp.csr_matrix:
    """Count matrix of perturbed copies of ``doc``.

    ``keep`` is an (n_masks, n_distinct_tokens) boolean array; distinct tokens
    are numbered in order of first appearance. Removing a token deletes every
    occurrence, and the surviving neighbours form new bigrams, exactly as if
    the shortened text had been vectorized directly.
    """
    lemmas = list(_lemmas(doc))
    distinct = list(dict.fromkeys(lemmas))
    gid = np.array([distinct.index(t) for t in lemmas], dtype=np.int64)
    keep = np.asarray(keep, dtype=bool)
    n_masks = keep.shape[0]
    present = keep[:, gid]  # (n_masks, L) token-position survival
    L = len(lemmas)
    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    for p in range(L):
        col = space.column(lemmas[p])
        if col >= 0:
            r = np.flatnonzero(present[:, p])
            rows.append(r)
            cols.append(np.full(r.size, col))
    if L > 1:
        # number of surviving tokens strictly between positions p and q
        cum = np.concatenate([np.zeros((n_masks, 1), dtype=np.int64), np.cumsum(present, axis=1)], axis=1)
        for p in range(L - 1):
            for q in range(p + 1, L):
                col = space.column(f"{lemmas[p]} {lemmas[q]}")
                if col < 0:
                    continue
                between = cum[:, q] - cum[:, p + 1]
                active = present[:, p] & present[:, q] & (between == 0)
                r = np.flatnonzero(active)
                rows.append(r)
                cols.append(np.full(r.size, col))
    if rows:
        rr = np.concatenate(rows)
        cc = np.concatenate(cols)
    else:
        rr = cc = np.zeros(0, dtype=np.int64)
    X = sp.csr_matrix((np.ones(rr.size), (rr, cc)), shape=(n_masks, space.dim))
    X.sum_duplicates()
    return X


def chi2_scores(X, y: Sequence[Sector] | np.ndarray) -> np.ndarray:
    """Chi-squared statistic of each column against the class labels.

    O[f, c] is the total count of column f in class c and
    E[f, c] = count(f) * share_c, share_c being class c's fraction of all
    counts in X. Columns that never occur score 0.
    """
    y_idx = _label_indices(y)
    if X.shape[0] != y_idx.size or y_idx.size == 0:
        raise ValueError("X and y must have the same nonzero length")
    classes = np.unique(y_idx)
    Y = sp.csr_matrix(
        (np.ones(y_idx.size), (np.arange(y_idx.size), np.searchsorted(classes, y_idx))),
        shape=(y_idx.size, classes.size),
    )
    Xs = sp.csr_matrix(X, dtype=np.float64)
    observed = np.asarray((Y.T @ Xs).todense())  # (C, V)
    class_tot = observed.sum(axis=1)
    grand = class_tot.sum()
    if grand <= 0:
        return np.zeros(X.shape[1])
    share = class_tot / grand
    feat_tot = observed.sum(axis=0)
    expected = np.outer(share, feat_tot)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(expected > 0, (observed - expected) ** 2 / expected, 0.0)
    scores = terms.sum(axis=0)
    scores[feat_tot == 0] = 0.0
    return scores


def _label_indices(y) -> np.ndarray:
    y = list(y) if not isinstance(y, np.ndarray) else y
    if isinstance(y, np.ndarray) and y.dtype.kind in "iu":
        return y.astype(np.int64)
    return np.array([Sector.parse(v).index for v in y], dtype=np.int64)


def select_percentile(space: FeatureSpace, percentile: int) -> FeatureSpace:
    """Keep the top ``ceil(percentile% * V)`` columns by chi-squared score."""
    if not (0 < percentile <= 100):
        raise ValueError(f"percentile must be in (0, 100], got {percentile}")
    if space.chi2 is None:
        raise ValueError("chi-squared scores not computed")
    V = space.size
    k = math.ceil(percentile / 100 * V)
    # stable sort on -score: equal scores keep the lower column index first
    order = np.argsort(-space.chi2, kind="stable")
    mask = np.zeros(V, dtype=bool)
    mask[order[:k]] = True
    return replace(space, selected=mask)


def fit_selected_space(docs: Sequence[ProcessedDoc], labels, percentile: int = 50) -> FeatureSpace:
    """Vocabulary fit, chi-squared scoring and selection in one step."""
    space = fit_vocabulary(docs)
    X = transform_many(docs, space)
    space = replace(space, chi2=chi2_scores(X, labels))
    return select_percentile(space, percentile)
