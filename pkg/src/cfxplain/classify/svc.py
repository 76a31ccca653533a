"""Crammer-Singer multiclass linear SVM trained by seeded subgradient epochs."""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np
import scipy.sparse as sp

from ..features import FeatureSpace
from . import _kernels
from .model import N_CLASSES, ClassifierError, TrainedClassifier, as_csr, label_indices, placeholder_space


@dataclass(frozen=True)
class SvcParams:
    C: float = 0.1
    loss: str = "hinge"
    multiclass: str = "crammer_singer"
    class_weight: str | None = "balanced"
    max_iter: int = 100
    tol: float = 1e-10
    penalty: str = "l2"

    def __post_init__(self):
        if self.C <= 0:
            raise ValueError("C must be positive")
        if self.loss != "hinge" or self.multiclass != "crammer_singer" or self.penalty != "l2":
            raise ValueError("only the L2 / hinge / crammer_singer configuration is implemented")
        if self.class_weight not in (None, "balanced"):
            raise ValueError("class_weight must be None or 'balanced'")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


def compute_class_weights(y) -> dict[int, float]:
    """Balanced weights ``N / (K * N_c)`` keyed by class index."""
    idx = label_indices(y)
    if idx.size == 0:
        raise ClassifierError("no labels")
    classes, counts = np.unique(idx, return_counts=True)
    N, K = idx.size, classes.size
    return {int(c): N / (K * int(n)) for c, n in zip(classes, counts)}


def _augment(X: sp.csr_matrix) -> sp.csr_matrix:
    """Append a constant-1 column that carries the bias."""
    ones = sp.csr_matrix(np.ones((X.shape[0], 1)))
    Xa = sp.hstack([X, ones], format="csr")
    Xa.sum_duplicates()
    Xa.sort_indices()
    return Xa


def svc_objective(Wa: np.ndarray, Xa: sp.csr_matrix, y: np.ndarray, sample_w: np.ndarray, lam: float) -> float:
    """lam/2 * ||Wa||^2 + mean_i w_i * max(0, 1 + max_{c!=y_i} s_c - s_{y_i})."""
    S = np.asarray(Xa @ Wa.T)
    n = S.shape[0]
    own = S[np.arange(n), y]
    S[np.arange(n), y] = -np.inf
    hinge = np.maximum(0.0, 1.0 + S.max(axis=1) - own)
    return float(0.5 * lam * np.sum(Wa * Wa) + np.mean(sample_w * hinge))


def train_linear_svc(
    X, y, p: SvcParams | None = None, seed: int = 0,
    feature_space: FeatureSpace | None = None, norm_digest: str = "",
) -> TrainedClassifier:
    """Fit W (8 x dim) and b by Pegasos steps with a monotone epoch guard.

    After every epoch the full-batch objective is evaluated; an epoch that
    raises it is rolled back (the step counter still advances, so the next
    epoch takes smaller steps). Training stops after ``max_iter`` epochs or
    once an accepted epoch improves the objective by less than ``tol``.
    """
    p = p or SvcParams()
    t0 = time.perf_counter()
    Xc = as_csr(X, None if feature_space is None else feature_space.dim)
    yi = label_indices(y)
    if Xc.shape[0] != yi.size:
        raise ClassifierError(f"{Xc.shape[0]} samples but {yi.size} labels")
    if np.unique(yi).size < 2:
        raise ClassifierError("need at least two classes")
    N, D = Xc.shape
    Xa = _augment(Xc)
    if p.class_weight == "balanced":
        cw = compute_class_weights(yi)
        sample_w = np.array([cw[int(c)] for c in yi])
    else:
        sample_w = np.ones(N)
    lam = 1.0 / (p.C * N)
    data, indices, indptr = Xa.data, Xa.indices.astype(np.int64), Xa.indptr.astype(np.int64)

    rng = np.random.default_rng(seed)
    V = np.zeros((N_CLASSES, D + 1))
    best = V.copy()
    best_obj = svc_objective(best, Xa, yi, sample_w, lam)
    trace = [best_obj]
    t = 0
    for _ in range(p.max_iter):
        order = rng.permutation(N).astype(np.int64)
        V = best.copy()
        scale, t = _kernels.svc_epoch(data, indices, indptr, yi, sample_w, order, V, 1.0, t, lam)
        V *= scale
        obj = svc_objective(V, Xa, yi, sample_w, lam)
        if obj <= best_obj:
            gain = best_obj - obj
            best, best_obj = V, obj
            trace.append(obj)
            if gain < p.tol:
                break
        else:
            trace.append(best_obj)

    return TrainedClassifier(
        kind="svc",
        feature_space=feature_space if feature_space is not None else placeholder_space(D),
        params=asdict(p),
        seed=int(seed),
        W=np.ascontiguousarray(best[:, :D]),
        b=np.ascontiguousarray(best[:, D]),
        norm_digest=norm_digest,
        train_seconds=time.perf_counter() - t0,
        objective_trace=tuple(trace),
    )
