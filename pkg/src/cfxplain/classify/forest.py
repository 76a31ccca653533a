"""Random forest of best-first gini trees with pre-derived per-tree seeds."""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from ..features import FeatureSpace
from . import _kernels
from .model import N_CLASSES, ClassifierError, Forest, TrainedClassifier, as_csr, label_indices, placeholder_space


@dataclass(frozen=True)
class RfParams:
    n_estimators: int = 500
    max_depth: int = 100
    max_leaf_nodes: int = 250
    criterion: str = "gini"
    features_per_split: int | None = None  # None -> floor(sqrt(dim))
    bootstrap: bool = True

    def __post_init__(self):
        if self.criterion != "gini":
            raise ValueError("only the gini criterion is implemented")
        if self.n_estimators < 1 or self.max_depth < 1 or self.max_leaf_nodes < 2:
            raise ValueError("n_estimators, max_depth >= 1 and max_leaf_nodes >= 2 required")


def tree_seeds(seed: int, n: int) -> np.ndarray:
    # numba's np.random.seed takes a 32-bit value
    return np.random.SeedSequence(seed).generate_state(n, dtype=np.uint32).astype(np.int64)


def train_random_forest(
    X, y, p: RfParams | None = None, seed: int = 0, jobs: int = 1,
    feature_space: FeatureSpace | None = None, norm_digest: str = "",
) -> TrainedClassifier:
    """Grow ``n_estimators`` trees; the result does not depend on ``jobs``."""
    p = p or RfParams()
    t0 = time.perf_counter()
    Xc = as_csr(X, None if feature_space is None else feature_space.dim)
    yi = label_indices(y)
    if Xc.shape[0] != yi.size:
        raise ClassifierError(f"{Xc.shape[0]} samples but {yi.size} labels")
    if np.unique(yi).size < 2:
        raise ClassifierError("need at least two classes")
    D = Xc.shape[1]
    if Xc.nnz and Xc.data.min() < 0:
        raise ClassifierError("forest training expects nonnegative count features")
    XT = np.ascontiguousarray(Xc.T.toarray())
    indptr, indices = Xc.indptr.astype(np.int64), Xc.indices.astype(np.int64)
    data = Xc.data
    mtry = p.features_per_split or max(1, math.isqrt(D))
    seeds = tree_seeds(seed, p.n_estimators)

    def grow(s):
        return _kernels.grow_tree(XT, indptr, indices, data, yi, N_CLASSES, s, mtry, p.max_depth, p.max_leaf_nodes, p.bootstrap)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            trees = list(pool.map(grow, seeds))
    else:
        trees = [grow(s) for s in seeds]

    sizes = np.array([tr[0] for tr in trees], dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
    forest = Forest(
        offsets=offsets,
        feature=np.concatenate([tr[1] for tr in trees]).astype(np.int32),
        threshold=np.concatenate([tr[2] for tr in trees]).astype(np.float64),
        left=np.concatenate([tr[3] for tr in trees]).astype(np.int32),
        right=np.concatenate([tr[4] for tr in trees]).astype(np.int32),
        # majority class per node; argmax keeps the lower index on ties
        leaf_class=np.concatenate([np.argmax(tr[5], axis=1) for tr in trees]).astype(np.int32),
        depth=np.concatenate([tr[6] for tr in trees]).astype(np.int32),
    )
    params = asdict(p)
    params["features_per_split"] = mtry
    return TrainedClassifier(
        kind="rf",
        feature_space=feature_space if feature_space is not None else placeholder_space(D),
        params=params,
        seed=int(seed),
        forest=forest,
        norm_digest=norm_digest,
        train_seconds=time.perf_counter() - t0,
    )
