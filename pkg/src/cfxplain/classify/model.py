"""Fitted-model container shared by the SVC and forest trainers."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ..corpus import SECTORS, Sector
from ..features import FeatureSpace
from . import _kernels

N_CLASSES = len(SECTORS)


class ClassifierError(ValueError):
    pass


@dataclass(frozen=True)
class Forest:
    """Flattened trees; tree ``i`` owns nodes ``offsets[i]:offsets[i+1]``.

    Child indices are local to their tree; leaves have ``feature == -1``.
    """

    offsets: np.ndarray
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    leaf_class: np.ndarray
    depth: np.ndarray

    @property
    def n_trees(self) -> int:
        return self.offsets.size - 1

    def tree_depths(self) -> np.ndarray:
        return np.array([self.depth[a:b].max() for a, b in zip(self.offsets[:-1], self.offsets[1:])])

    def tree_leaves(self) -> np.ndarray:
        leaf = self.feature < 0
        return np.array([int(leaf[a:b].sum()) for a, b in zip(self.offsets[:-1], self.offsets[1:])])


@dataclass(frozen=True, eq=False)
class TrainedClassifier:
    kind: str
    feature_space: FeatureSpace
    params: dict
    seed: int
    W: np.ndarray | None = None
    b: np.ndarray | None = None
    forest: Forest | None = None
    norm_digest: str = ""
    train_seconds: float = field(default=0.0, compare=False)
    objective_trace: tuple = field(default=(), compare=False)

    classes: tuple[Sector, ...] = SECTORS

    def __post_init__(self):
        for arr in (self.W, self.b):
            if arr is not None:
                arr.setflags(write=False)


def as_csr(X, dim: int | None = None) -> sp.csr_matrix:
    if sp.issparse(X):
        M = sp.csr_matrix(X, dtype=np.float64)
    else:
        arr = np.asarray(X, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr[None, :]
        M = sp.csr_matrix(arr)
    if dim is not None and M.shape[1] != dim:
        raise ClassifierError(f"dimension mismatch: got {M.shape[1]} columns, model expects {dim}")
    M.sum_duplicates()
    M.eliminate_zeros()
    return M


def label_indices(y) -> np.ndarray:
    if isinstance(y, np.ndarray) and y.dtype.kind in "iu":
        out = y.astype(np.int64)
    else:
        out = np.array([Sector.parse(v).index for v in y], dtype=np.int64)
    if out.size and (out.min() < 0 or out.max() >= N_CLASSES):
        raise ClassifierError("label index out of range")
    return out


def decision_scores(m: TrainedClassifier, x) -> np.ndarray:
    """Per-class scores; shape (8,) for one vector, (n, 8) for a matrix.

    SVC: ``W @ x + b``. Forest: fraction of trees voting for each class.
    """
    single = not sp.issparse(x) and np.ndim(x) == 1
    X = as_csr(x, m.feature_space.dim)
    if m.kind == "svc":
        S = np.asarray(X @ m.W.T) + m.b
    elif m.kind == "rf":
        f = m.forest
        votes = _kernels.forest_votes(
            X.data, X.indices.astype(np.int64), X.indptr.astype(np.int64), X.shape[0],
            f.offsets, f.feature, f.threshold, f.left, f.right, f.leaf_class, N_CLASSES,
        )
        S = votes / f.n_trees
    else:
        raise ClassifierError(f"unknown model kind {m.kind!r}")
    return S[0] if single else S


def predict_many(m: TrainedClassifier, X) -> list[Sector]:
    S = decision_scores(m, as_csr(X))
    # np.argmax returns the first maximum: ties go to the lower class index
    return [SECTORS[i] for i in np.argmax(S, axis=1)]


def predict(m: TrainedClassifier, x) -> Sector:
    return predict_many(m, as_csr(x))[0]


def placeholder_space(dim: int) -> FeatureSpace:
    """Anonymous column names for models trained on raw matrices."""
    return FeatureSpace(tuple(f"f{i:07d}" for i in range(dim)))
