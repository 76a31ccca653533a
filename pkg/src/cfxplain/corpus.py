"""Transactions, the sector label schema, deduplication and evaluation helpers."""
from __future__ import annotations

import csv
import datetime as dt
import enum
import io
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from rapidfuzz.distance import Levenshtein

__all__ = [
    "Sector",
    "SECTORS",
    "Transaction",
    "CorpusError",
    "EvalReport",
    "load_transactions",
    "write_transactions",
    "fuzzy_ratio",
    "deduplicate",
    "stratified_folds",
    "score_predictions",
]


class CorpusError(ValueError):
    pass


class Sector(str, enum.Enum):
    """The eight activity sectors, in canonical class-index order."""

    GAS_STATIONS = "gas_stations"
    PRIVATE_TRANSPORT = "private_transport"
    PUBLIC_TRANSPORT = "public_transport"
    FLIGHTS = "flights"
    PARCEL_COURIER = "parcel_courier"
    WATER_BILL = "water_bill"
    ELECTRICITY_BILL = "electricity_bill"
    GAS_BILL = "gas_bill"

    @property
    def coicop(self) -> str:
        return _COICOP[self]

    @property
    def index(self) -> int:
        return _INDEX[self]

    @property
    def display_en(self) -> str:
        return _DISPLAY_EN[self]

    @property
    def display_es(self) -> str:
        return _DISPLAY_ES[self]

    @classmethod
    def parse(cls, value: "str | Sector") -> "Sector":
        if isinstance(value, Sector):
            return value
        try:
            return cls(value.strip().lower())
        except ValueError:
            raise CorpusError(f"unknown sector {value!r}") from None

    def __str__(self) -> str:
        return self.value


SECTORS: tuple[Sector, ...] = tuple(Sector)
_INDEX = {s: i for i, s in enumerate(SECTORS)}
_COICOP = {
    Sector.GAS_STATIONS: "7.2",
    Sector.PRIVATE_TRANSPORT: "7.3",
    Sector.PUBLIC_TRANSPORT: "7.3",
    Sector.FLIGHTS: "7.3",
    Sector.PARCEL_COURIER: "8.1",
    Sector.WATER_BILL: "4.4",
    Sector.ELECTRICITY_BILL: "4.5",
    Sector.GAS_BILL: "4.5",
}
_DISPLAY_EN = {
    Sector.GAS_STATIONS: "car and transport - gas stations",
    Sector.PRIVATE_TRANSPORT: "car and transport - private transport",
    Sector.PUBLIC_TRANSPORT: "car and transport - public transport",
    Sector.FLIGHTS: "car and transport - flights",
    Sector.PARCEL_COURIER: "enterprise expenditures - parcel and courier",
    Sector.WATER_BILL: "commodities - water bill",
    Sector.ELECTRICITY_BILL: "commodities - electricity bill",
    Sector.GAS_BILL: "commodities - gas bill",
}
_DISPLAY_ES = {
    Sector.GAS_STATIONS: "automóvil y transporte - gasolineras",
    Sector.PRIVATE_TRANSPORT: "automóvil y transporte - transporte privado",
    Sector.PUBLIC_TRANSPORT: "automóvil y transporte - transporte público",
    Sector.FLIGHTS: "automóvil y transporte - vuelos",
    Sector.PARCEL_COURIER: "gastos de empresa - paquetería y mensajería",
    Sector.WATER_BILL: "suministros - agua",
    Sector.ELECTRICITY_BILL: "suministros - electricidad",
    Sector.GAS_BILL: "suministros - gas",
}


@dataclass(frozen=True)
class Transaction:
    id: str
    description: str
    amount_eur: float
    date: dt.date | None = None
    label: Sector | None = None

    def __post_init__(self):
        if self.amount_eur < 0:
            raise CorpusError(f"negative amount for transaction {self.id}")


CSV_HEADER = ("id", "description", "amount_eur", "date", "label")


def _parse_row(row: dict, line: int) -> Transaction:
    try:
        amount = float(row["amount_eur"])
    except (TypeError, ValueError):
        raise CorpusError(f"invalid amount {row.get('amount_eur')!r}, line {line}") from None
    if amount < 0:
        raise CorpusError(f"negative amount, line {line}")
    raw_date = (row.get("date") or "").strip()
    try:
        date = dt.date.fromisoformat(raw_date) if raw_date else None
    except ValueError:
        raise CorpusError(f"invalid date {raw_date!r}, line {line}") from None
    raw_label = (row.get("label") or "").strip()
    label = None
    if raw_label:
        try:
            label = Sector(raw_label.lower())
        except ValueError:
            raise CorpusError(f"unknown sector {raw_label!r}, line {line}") from None
    tid = (row.get("id") or "").strip()
    if not tid:
        raise CorpusError(f"missing id, line {line}")
    return Transaction(tid, row.get("description") or "", amount, date, label)


def load_transactions(path: str | Path) -> list[Transaction]:
    """Read a corpus CSV with header ``id,description,amount_eur,date,label``.

    Line numbers in error messages are 1-based physical line numbers of the
    file (the header is line 1).
    """
    out: list[Transaction] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in CSV_HEADER if c not in (reader.fieldnames or [])]
        if missing:
            raise CorpusError(f"missing columns {missing}, line 1")
        for row in reader:
            line = reader.line_num
            if None in row or any(v is None for v in row.values()):
                raise CorpusError(f"malformed row (wrong field count), line {line}")
            t = _parse_row(row, line)
            if t.id in seen:
                raise CorpusError(f"duplicate id {t.id!r}, line {line}")
            seen.add(t.id)
            out.append(t)
    return out


def transactions_to_csv(transactions: Iterable[Transaction]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for t in transactions:
        writer.writerow([
            t.id,
            t.description,
            repr(float(t.amount_eur)),
            t.date.isoformat() if t.date else "",
            t.label.value if t.label else "",
        ])
    return buf.getvalue()


def write_transactions(path: str | Path, transactions: Iterable[Transaction]) -> None:
    Path(path).write_text(transactions_to_csv(transactions), encoding="utf-8")


def fuzzy_ratio(a: str, b: str) -> float:
    """Normalized Levenshtein similarity ``1 - dist / max(len)``."""
    if not a and not b:
        return 1.0
    return float(Levenshtein.normalized_similarity(a, b))


def deduplicate(corpus: Sequence[Transaction], threshold: float = 0.90) -> list[Transaction]:
    """Greedy first-seen-wins dedup on raw descriptions.

    A transaction survives iff its similarity to every already-kept
    description is at most ``threshold``.
    """
    if not 0 < threshold <= 1:
        raise ValueError("threshold must lie in (0, 1]")
    kept: list[Transaction] = []
    kept_desc: list[str] = []
    for t in corpus:
        d = t.description
        n = len(d)
        duplicate = False
        for other in kept_desc:
            m = len(other)
            # similarity is bounded by min/max length ratio
            if max(n, m) and min(n, m) / max(n, m) <= threshold:
                continue
            if fuzzy_ratio(d, other) > threshold:
                duplicate = True
                break
        if not duplicate:
            kept.append(t)
            kept_desc.append(d)
    return kept


def stratified_folds(
    labels: Sequence[Sector] | Sequence[Transaction], k: int = 10, seed: int = 0
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Stratified k-fold (train, test) index pairs.

    Each class is shuffled and dealt round-robin; the dealing offset carries
    over between classes so fold sizes stay balanced too.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    ys = []
    for item in labels:
        y = item.label if isinstance(item, Transaction) else item
        if y is None:
            raise CorpusError("stratified folds need every transaction labeled")
        ys.append(Sector.parse(y))
    y_idx = np.array([s.index for s in ys], dtype=np.int64)
    rng = np.random.default_rng(seed)
    fold_of = np.empty(len(ys), dtype=np.int64)
    offset = 0
    for s in SECTORS:
        members = np.flatnonzero(y_idx == s.index)
        if members.size == 0:
            continue
        if members.size < k:
            raise CorpusError(f"class {s.value} has {members.size} members, fewer than k={k}")
        members = rng.permutation(members)
        fold_of[members] = (offset + np.arange(members.size)) % k
        offset = (offset + members.size) % k
    all_idx = np.arange(len(ys))
    return [(all_idx[fold_of != f], all_idx[fold_of == f]) for f in range(k)]


@dataclass
class EvalReport:
    accuracy: float
    macro_precision: float
    macro_recall: float
    confusion: np.ndarray
    per_fold: list[dict] = field(default_factory=list)
    training_time_s: float = 0.0

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "per_fold": self.per_fold,
            "training_time_s": self.training_time_s,
            "confusion": self.confusion.astype(int).tolist(),
            "classes": [s.value for s in SECTORS],
        }


def score_predictions(gold: Sequence[Sector], pred: Sequence[Sector]) -> EvalReport:
    """Accuracy, macro precision/recall over all 8 sectors, confusion matrix.

    Rows of the confusion matrix are gold sectors, columns predictions. An
    undefined per-class precision or recall counts as 0.
    """
    if len(gold) != len(pred):
        raise ValueError(f"length mismatch: {len(gold)} gold vs {len(pred)} predicted")
    if not gold:
        raise ValueError("nothing to score")
    k = len(SECTORS)
    conf = np.zeros((k, k), dtype=np.int64)
    g = np.array([Sector.parse(s).index for s in gold])
    p = np.array([Sector.parse(s).index for s in pred])
    np.add.at(conf, (g, p), 1)
    tp = np.diag(conf).astype(float)
    pred_tot = conf.sum(axis=0)
    gold_tot = conf.sum(axis=1)
    precision = np.divide(tp, pred_tot, out=np.zeros(k), where=pred_tot > 0)
    recall = np.divide(tp, gold_tot, out=np.zeros(k), where=gold_tot > 0)
    return EvalReport(
        accuracy=float(tp.sum() / conf.sum()),
        macro_precision=float(precision.mean()),
        macro_recall=float(recall.mean()),
        confusion=conf,
    )


def transaction_to_dict(t: Transaction) -> dict:
    d = asdict(t)
    d["date"] = t.date.isoformat() if t.date else None
    d["label"] = t.label.value if t.label else None
    return d


from .synthetic import generate_synthetic_corpus  # noqa: E402  (re-export)

__all__.append("generate_synthetic_corpus")
