"""Glue between preprocessing, features and classifiers: fit and cross-validate."""
from __future__ import annotations

import time
from typing import Sequence


from .classify import RfParams, SvcParams, TrainedClassifier, predict_many, train_linear_svc, train_random_forest
from .corpus import CorpusError, EvalReport, Sector, Transaction, score_predictions, stratified_folds
from .features import fit_selected_space, transform_many
from .textprep import NormalizationConfig, ProcessedDoc, default_config, preprocess


def preprocess_corpus(corpus: Sequence[Transaction], cfg: NormalizationConfig) -> list[ProcessedDoc]:
    return [preprocess(t.description, cfg, t.id) for t in corpus]


def fit_model(
    docs: Sequence[ProcessedDoc], labels: Sequence[Sector], kind: str = "svc", *,
    percentile: int = 50, seed: int = 0, jobs: int = 1,
    svc_params: SvcParams | None = None, rf_params: RfParams | None = None, norm_digest: str = "",
) -> TrainedClassifier:
    space = fit_selected_space(docs, labels, percentile)
    X = transform_many(docs, space)
    if kind == "svc":
        return train_linear_svc(X, labels, svc_params, seed=seed, feature_space=space, norm_digest=norm_digest)
    if kind == "rf":
        return train_random_forest(X, labels, rf_params, seed=seed, jobs=jobs, feature_space=space, norm_digest=norm_digest)
    raise ValueError(f"unknown classifier {kind!r}")


def cross_validate(
    corpus: Sequence[Transaction], kind: str = "svc", *, k: int = 10, seed: int = 0,
    percentile: int = 50, cfg: NormalizationConfig | None = None, jobs: int = 1,
    svc_params: SvcParams | None = None, rf_params: RfParams | None = None,
) -> EvalReport:
    """Stratified k-fold CV; vocabulary and selection are refit inside each fold."""
    if any(t.label is None for t in corpus):
        raise CorpusError("cross-validation needs a fully labeled corpus")
    cfg = cfg or default_config()
    docs = preprocess_corpus(corpus, cfg)
    labels = [t.label for t in corpus]
    gold_all: list[Sector] = []
    pred_all: list[Sector] = []
    per_fold = []
    total_train = 0.0
    for f, (tr, te) in enumerate(stratified_folds(labels, k, seed)):
        t0 = time.perf_counter()
        model = fit_model(
            [docs[i] for i in tr], [labels[i] for i in tr], kind, percentile=percentile,
            seed=seed, jobs=jobs, svc_params=svc_params, rf_params=rf_params,
        )
        total_train += time.perf_counter() - t0
        pred = predict_many(model, transform_many([docs[i] for i in te], model.feature_space))
        gold = [labels[i] for i in te]
        fold = score_predictions(gold, pred)
        per_fold.append({
            "fold": f, "n_test": len(te), "accuracy": fold.accuracy,
            "macro_precision": fold.macro_precision, "macro_recall": fold.macro_recall,
        })
        gold_all += gold
        pred_all += pred
    report = score_predictions(gold_all, pred_all)
    report.per_fold = per_fold
    report.training_time_s = total_train / k
    return report
