"""Local linear surrogate of a classifier around one document.

Tokens of the document are switched off in groups (every occurrence of a
distinct token at once), the model is rescored on each perturbed copy and
a kernel-weighted ridge regression of the target-class score on the
on/off pattern yields one relevance coefficient per distinct token.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..classify import TrainedClassifier, decision_scores
from ..corpus import Sector
from ..features import transform_masked
from ..textprep import ProcessedDoc

KERNEL_WIDTH = 0.25
RIDGE_ALPHA = 1.0
DEFAULT_SAMPLES = 1000
EXHAUSTIVE_LIMIT = 1024


class SurrogateError(ValueError):
    pass


@dataclass(frozen=True)
class SurrogateFit:
    tokens: tuple[str, ...]
    coefficients: np.ndarray
    intercept: float
    fidelity_r2: float
    exhaustive: bool

    def ranked(self) -> list[tuple[str, float]]:
        """Tokens by descending coefficient; ties keep first-appearance order."""
        order = np.argsort(-self.coefficients, kind="stable")
        return [(self.tokens[i], float(self.coefficients[i])) for i in order]


def distinct_tokens(doc: ProcessedDoc) -> tuple[str, ...]:
    return tuple(dict.fromkeys(doc.lemmas))


def kernel_weights(masks: np.ndarray, width: float = KERNEL_WIDTH) -> np.ndarray:
    d = 1.0 - masks.mean(axis=1)
    return np.exp(-(d ** 2) / width ** 2)


def perturb_and_weight(
    doc: ProcessedDoc, n_samples: int = DEFAULT_SAMPLES, seed: int = 0,
    mode: str = "auto", width: float = KERNEL_WIDTH,
) -> tuple[np.ndarray, np.ndarray]:
    """Boolean masks over the distinct tokens and their kernel weights.

    ``mode="auto"`` enumerates all 2**d masks when that is at most 1024 and
    samples otherwise; ``"exhaustive"`` and ``"sampled"`` force a branch.
    Sampled masks are uniform over {0,1}^d, the first row is always all-ones.
    """
    d = len(distinct_tokens(doc))
    if d == 0:
        raise SurrogateError("nothing to explain")
    if mode not in ("auto", "exhaustive", "sampled"):
        raise ValueError(f"unknown perturbation mode {mode!r}")
    exhaustive = mode == "exhaustive" or (mode == "auto" and 2 ** d <= EXHAUSTIVE_LIMIT)
    if exhaustive:
        if d > 20:
            raise SurrogateError(f"exhaustive enumeration of {d} tokens is too large")
        codes = np.arange(2 ** d, dtype=np.int64)
        masks = ((codes[:, None] >> np.arange(d)) & 1).astype(bool)
    else:
        if n_samples < 2:
            raise ValueError("n_samples must be at least 2")
        rng = np.random.default_rng(seed)
        masks = rng.random((n_samples, d)) < 0.5
        masks[0] = True
    return masks, kernel_weights(masks, width)


def fit_local_surrogate(
    doc: ProcessedDoc, model: TrainedClassifier, target: Sector,
    masks: np.ndarray, weights: np.ndarray, alpha: float = RIDGE_ALPHA,
) -> SurrogateFit:
    masks = np.asarray(masks, dtype=bool)
    weights = np.asarray(weights, dtype=np.float64)
    if masks.shape[0] < 2 or np.all(masks == masks[0]):
        raise SurrogateError("degenerate perturbation design: all masks are equal")
    tokens = distinct_tokens(doc)
    X = transform_masked(doc, model.feature_space, masks)
    y = decision_scores(model, X)[:, Sector.parse(target).index]
    Z = masks.astype(np.float64)

    # weighted ridge with an unpenalized intercept: center, solve, recover
    wsum = weights.sum()
    z_bar = weights @ Z / wsum
    y_bar = float(weights @ y / wsum)
    Zc = Z - z_bar
    yc = y - y_bar
    A = Zc.T @ (Zc * weights[:, None]) + alpha * np.eye(Z.shape[1])
    coef = np.linalg.solve(A, Zc.T @ (weights * yc))
    intercept = y_bar - float(z_bar @ coef)

    resid = y - (Z @ coef + intercept)
    ss_res = float(weights @ resid ** 2)
    ss_tot = float(weights @ yc ** 2)
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res == 0 else 0.0)
    return SurrogateFit(tokens, coef, intercept, r2, bool(masks.shape[0] == 2 ** Z.shape[1] and _is_full(masks)))


def _is_full(masks: np.ndarray) -> bool:
    codes = masks.astype(np.int64) @ (1 << np.arange(masks.shape[1], dtype=np.int64))
    return np.unique(codes).size == codes.size
