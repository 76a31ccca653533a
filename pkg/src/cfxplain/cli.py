"""Command-line entry point: generate, train, explain, footprint, report.

Exit codes: 0 success, 1 usage or I/O error, 2 gate failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Sequence


from . import carbon
from .classify import RfParams, SvcParams, load_model, predict_many, save_model
from .config import load_pipeline_config
from .corpus import SECTORS, CorpusError, Sector, deduplicate, load_transactions, write_transactions
from .explain import (
    explain_transaction, five_way_report, load_annotations, load_enterprises, load_lexicon, sector_confusion,
    validate_explanation, verdict_summary, with_rendering,
)
from .features import transform_many
from .pipeline import cross_validate, fit_model, preprocess_corpus
from .synthetic import generate_synthetic_corpus
from .textprep import load_config

EXIT_OK, EXIT_ERROR, EXIT_GATE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, indent=1) + "\n"


def _settings(args):
    return load_pipeline_config(
        args.config, seed=args.seed, folds=getattr(args, "folds", None),
        classifier=getattr(args, "classifier", None), percentile=getattr(args, "percentile", None),
        metric=getattr(args, "metric", None), top_k=getattr(args, "top_k", None),
    )


def cmd_generate(args) -> int:
    corpus = generate_synthetic_corpus(args.n, args.seed if args.seed is not None else 7)
    write_transactions(args.out, corpus)
    print(f"wrote {len(corpus)} transactions to {args.out}")
    return EXIT_OK


def cmd_train(args) -> int:
    pc = _settings(args)
    norm = load_config(pc.normalization)
    corpus = load_transactions(args.input)
    if not corpus or any(t.label is None for t in corpus):
        raise CorpusError("training needs a nonempty, fully labeled corpus")
    corpus = deduplicate(corpus, pc.dedup_threshold)
    svc_p, rf_p = SvcParams(**pc.svc), RfParams(**pc.rf)
    report = cross_validate(
        corpus, pc.classifier, k=pc.folds, seed=pc.seed, percentile=pc.percentile, cfg=norm,
        jobs=args.jobs, svc_params=svc_p, rf_params=rf_p,
    )
    docs = preprocess_corpus(corpus, norm)
    model = fit_model(
        docs, [t.label for t in corpus], pc.classifier, percentile=pc.percentile, seed=pc.seed,
        jobs=args.jobs, svc_params=svc_p, rf_params=rf_p, norm_digest=norm.digest,
    )
    save_model(model, args.model)
    out = {
        "config_sha256": pc.digest(),
        "seed": pc.seed,
        "classifier": pc.classifier,
        "n_transactions": len(corpus),
        "folds": pc.folds,
        "percentile": pc.percentile,
        "evaluation": report.to_dict(),
        "final_model_train_seconds": model.train_seconds,
    }
    if args.out:
        Path(args.out).write_text(_dump(out), encoding="utf-8")
    print(f"{pc.classifier}: accuracy {report.accuracy:.4f}  macro-P {report.macro_precision:.4f}  "
          f"macro-R {report.macro_recall:.4f}  mean fold train {report.training_time_s:.3f}s")
    print(f"model written to {args.model}")
    return EXIT_OK


def _load_checked_model(path, norm):
    model = load_model(path)
    if model.norm_digest != norm.digest:
        raise UsageError("model trained under different normalization config")
    return model


def cmd_explain(args) -> int:
    pc = _settings(args)
    norm = load_config(pc.normalization)
    model = _load_checked_model(args.model, norm)
    corpus = load_transactions(args.input)
    enterprises = load_enterprises(pc.enterprises)
    lexicon = load_lexicon(pc.lexicon)
    docs = preprocess_corpus(corpus, norm)
    preds = predict_many(model, transform_many(docs, model.feature_space)) if corpus else []

    def one(i):
        x = explain_transaction(
            corpus[i], model, norm, enterprises, pc.top_k, n_samples=pc.n_samples, seed=pc.seed,
            doc=docs[i], predicted=preds[i],
        )
        return with_rendering(validate_explanation(x, lexicon, enterprises, pc.metric))

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            xs = list(pool.map(one, range(len(corpus))))
    else:
        xs = [one(i) for i in range(len(corpus))]

    digest = pc.digest()
    lines = []
    for x in xs:
        rec = x.to_dict()
        rec["config_sha256"] = digest
        rec["seed"] = pc.seed
        lines.append(json.dumps(rec, sort_keys=True, ensure_ascii=False))
    Path(args.out).write_text("".join(line + "\n" for line in lines), encoding="utf-8")

    summary = {
        "config_sha256": digest,
        "seed": pc.seed,
        "metric": pc.metric,
        "verdicts": verdict_summary(xs),
        "sector_confusion": {"classes": [s.value for s in SECTORS], "matrix": sector_confusion(xs).tolist()},
    }
    if args.annotations:
        summary["five_way"] = five_way_report(xs, load_annotations(args.annotations))
    summary_path = Path(str(args.out) + ".summary.json")
    summary_path.write_text(_dump(summary), encoding="utf-8")
    pct = summary["verdicts"]["percent"]
    print("  ".join(f"{k} {v:.2f}%" for k, v in pct.items()))
    print(f"explanations written to {args.out}; summary to {summary_path}")
    return EXIT_OK


def cmd_footprint(args) -> int:
    pc = _settings(args)
    norm = load_config(pc.normalization)
    params = carbon.load_params(pc.emission_params)
    corpus = load_transactions(args.input)
    docs = preprocess_corpus(corpus, norm)
    if args.model:
        model = _load_checked_model(args.model, norm)
        sectors = predict_many(model, transform_many(docs, model.feature_space)) if corpus else []
    else:
        if any(t.label is None for t in corpus):
            raise UsageError("footprint without --model needs a label for every transaction")
        sectors = [t.label for t in corpus]
    missing = sorted({s.value for s in sectors} - {s.value for s in params.sectors()})
    if missing:
        raise UsageError(f"emission parameters missing for sectors: {', '.join(missing)}")
    estimates = [carbon.estimate_footprint(t, s, d, params) for t, s, d in zip(corpus, sectors, docs)]
    totals_kg = {s.value: 0.0 for s in SECTORS if s is not Sector.WATER_BILL}
    water_l = 0.0
    for e in estimates:
        if e.unit == carbon.LITERS:
            water_l += e.quantity
        else:
            totals_kg[e.sector.value] += e.quantity
    out = {
        "config_sha256": pc.digest(),
        "seed": pc.seed,
        "sector_source": "model" if args.model else "label",
        "estimates": [e.to_dict() for e in estimates],
        "totals_kg_co2": totals_kg,
        "total_kg_co2": sum(totals_kg.values()),
        "water_liters": water_l,
    }
    Path(args.out).write_text(_dump(out), encoding="utf-8")
    print(f"{len(estimates)} estimates: {out['total_kg_co2']:.3f} kg CO2, {water_l:.3f} L water -> {args.out}")
    return EXIT_OK


_GATES = {
    "min_accuracy": ("train", lambda r: r["evaluation"]["accuracy"], ">="),
    "min_macro_precision": ("train", lambda r: r["evaluation"]["macro_precision"], ">="),
    "min_macro_recall": ("train", lambda r: r["evaluation"]["macro_recall"], ">="),
    "min_validated": ("explain", lambda r: r["verdicts"]["percent"]["validated"] / 100, ">="),
    "min_satisfactory": ("explain", lambda r: (r["verdicts"]["percent"]["validated"] + r["verdicts"]["percent"]["obvious"]) / 100, ">="),
    "max_empty": ("explain", lambda r: r["verdicts"]["percent"]["empty"] / 100, "<="),
}


def _parse_gate(text: str) -> tuple[str, float]:
    name, sep, value = text.partition("=")
    if not sep or name not in _GATES:
        raise UsageError(f"bad gate {text!r}; known gates: {', '.join(sorted(_GATES))}")
    try:
        return name, float(value)
    except ValueError:
        raise UsageError(f"bad gate value in {text!r}") from None


def cmd_report(args) -> int:
    gates = [_parse_gate(g) for g in args.gate or []]
    inputs = {}
    for key, path in (("train", args.train_report), ("explain", args.explain_summary), ("footprint", args.footprint)):
        if path:
            inputs[key] = json.loads(Path(path).read_text("utf-8"))
    if not inputs:
        raise UsageError("report needs at least one of --train-report, --explain-summary, --footprint")

    out = ["# cfxplain report", ""]
    out.append("## Classification")
    if "train" in inputs:
        ev = inputs["train"]["evaluation"]
        out += [f"classifier: {inputs['train']['classifier']}  folds: {inputs['train']['folds']}  seed: {inputs['train']['seed']}",
                f"accuracy: {ev['accuracy']:.4f}", f"macro precision: {ev['macro_precision']:.4f}",
                f"macro recall: {ev['macro_recall']:.4f}", f"mean fold training time: {ev['training_time_s']:.3f} s"]
    else:
        out.append("(no training report)")
    out += ["", "## Explanations"]
    if "explain" in inputs:
        v = inputs["explain"]["verdicts"]
        out.append(f"metric: {inputs['explain']['metric']}  n: {v['n']}")
        out += [f"{k}: {p:.2f} %" for k, p in v["percent"].items()]
        if "five_way" in inputs["explain"]:
            out.append("five-way: " + ", ".join(f"{k} {p:.2f} %" for k, p in inputs["explain"]["five_way"]["percent"].items()))
    else:
        out.append("(no explanation summary)")
    out += ["", "## Footprint"]
    if "footprint" in inputs:
        fp = inputs["footprint"]
        out.append(f"transactions: {len(fp['estimates'])}")
        out += [f"{s}: {kg:.3f} kg CO2" for s, kg in fp["totals_kg_co2"].items()]
        out.append(f"total: {fp['total_kg_co2']:.3f} kg CO2; water: {fp['water_liters']:.3f} L")
    else:
        out.append("(no footprint report)")
    out += ["", "## Gates"]
    failed = []
    for name, threshold in gates:
        source, getter, op = _GATES[name]
        if source not in inputs:
            raise UsageError(f"gate {name} needs the {source} input")
        value = getter(inputs[source])
        ok = value >= threshold if op == ">=" else value <= threshold
        out.append(f"{'PASS' if ok else 'FAIL'} {name}: {value:.4f} {op} {threshold}")
        if not ok:
            failed.append(name)
    if not gates:
        out.append("(no gates)")
    text = "\n".join(out) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_GATE if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cfxplain", description="Explainable carbon-footprint estimation from bank transactions.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, model=False, model_required=False):
        sp.add_argument("--config", help="pipeline config JSON (default: $CFXPLAIN_CONFIG, then built-ins)")
        sp.add_argument("--seed", type=int, help="master seed")
        sp.add_argument("--input", required=True, help="transactions CSV")
        sp.add_argument("--out", help="output path")
        sp.add_argument("--jobs", type=int, default=1, help="worker threads (results do not depend on it)")
        if model:
            sp.add_argument("--model", required=model_required, help="CFXP1 model file")

    g = sub.add_parser("generate", help="write the synthetic labeled corpus")
    g.add_argument("--n", type=int, default=2000)
    g.add_argument("--seed", type=int)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    t = sub.add_parser("train", help="cross-validate and train the final model")
    common(t, model=True, model_required=True)
    t.add_argument("--folds", type=int)
    t.add_argument("--classifier", choices=["svc", "rf"])
    t.add_argument("--percentile", type=int)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("explain", help="explain and validate predictions")
    common(e, model=True, model_required=True)
    e.add_argument("--metric", choices=["jaccard", "proximity"])
    e.add_argument("--top-k", type=int, dest="top_k")
    e.add_argument("--annotations", help="CSV transaction_id,judgment (coherent|ambiguous)")
    e.set_defaults(func=cmd_explain)

    f = sub.add_parser("footprint", help="estimate CO2 and water per transaction")
    common(f, model=True)
    f.set_defaults(func=cmd_footprint)

    r = sub.add_parser("report", help="merge outputs into one summary and check gates")
    r.add_argument("--train-report")
    r.add_argument("--explain-summary")
    r.add_argument("--footprint")
    r.add_argument("--gate", action="append", help="e.g. min_validated=0.9 (repeatable)")
    r.add_argument("--out")
    r.set_defaults(func=cmd_report)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for req in ("out",):
        if args.command in ("explain", "footprint") and not getattr(args, req):
            parser.error(f"--{req} is required for {args.command}")
    try:
        return args.func(args)
    except (UsageError, CorpusError, carbon.CarbonError, ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"cfxplain {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
