"""Carbon-footprint and water-consumption estimates from transaction amounts.

Every CO2 formula has the shape ``p / avp * eps``: the amount buys
``p / avp`` physical units (liters, km, kWh) that each emit ``eps`` kg.
Water bills yield liters instead of emissions.
"""
from __future__ import annotations

import datetime as dt
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

from .corpus import Sector, Transaction
from .textprep import ProcessedDoc

__all__ = [
    "CarbonError",
    "ParamEntry",
    "EmissionParams",
    "FootprintEstimate",
    "emission_estimate",
    "water_consumption",
    "monthly_average_price",
    "discriminate_private_transport",
    "estimate_footprint",
    "load_params",
    "default_params",
]

KG_CO2 = "kg CO2"
LITERS = "L"
DEFAULT_TAXI_KEYWORDS = ("taxi", "lic")

FORMULA_ID = {
    Sector.GAS_STATIONS: "eq1",
    Sector.PRIVATE_TRANSPORT: "eq2",
    Sector.PUBLIC_TRANSPORT: "eq3",
    Sector.FLIGHTS: "eq4",
    Sector.PARCEL_COURIER: "eq5",
    Sector.WATER_BILL: "eq6",
    Sector.ELECTRICITY_BILL: "eq7",
    Sector.GAS_BILL: "eq7",
}


class CarbonError(ValueError):
    pass


def emission_estimate(p: float, avp: float, eps: float) -> float:
    if avp <= 0:
        raise CarbonError("invalid price parameter")
    if p < 0:
        raise CarbonError("negative amount")
    return p / avp * eps


def water_consumption(p: float, avp_w: float) -> float:
    """Liters of water bought by amount ``p`` at ``avp_w`` EUR per liter."""
    if avp_w <= 0:
        raise CarbonError("invalid price parameter")
    if p < 0:
        raise CarbonError("negative amount")
    return p / avp_w


def monthly_average_price(kwp: Sequence[float]) -> float:
    if len(kwp) == 0:
        raise CarbonError("empty daily price series")
    if any(v <= 0 for v in kwp):
        raise CarbonError("daily prices must be positive")
    return sum(kwp) / len(kwp)


@dataclass(frozen=True)
class ParamEntry:
    sector: Sector
    avp: float
    avp_unit: str
    epsilon: float | None
    epsilon_unit: str | None
    valid_from: dt.date
    extras: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if not self.avp > 0:
            raise CarbonError(f"{self.sector.value}: avp must be positive")
        if self.sector is not Sector.WATER_BILL and (self.epsilon is None or self.epsilon < 0):
            raise CarbonError(f"{self.sector.value}: epsilon must be nonnegative")
        if self.sector is Sector.PRIVATE_TRANSPORT:
            kws = self.extras.get("taxi_keywords", DEFAULT_TAXI_KEYWORDS)
            if not kws:
                raise CarbonError("taxi keyword list must be nonempty")
            company = self.extras.get("company")
            if company is not None and not (company.get("avp", 0) > 0 and company.get("epsilon", -1) >= 0):
                raise CarbonError("private_transport company profile needs avp > 0 and epsilon >= 0")
        series = self.extras.get("kwp_series")
        if series is not None:
            monthly_average_price(series)

    def to_dict(self) -> dict:
        return {
            "sector": self.sector.value, "avp": self.avp, "avp_unit": self.avp_unit,
            "epsilon": self.epsilon, "epsilon_unit": self.epsilon_unit,
            "valid_from": self.valid_from.isoformat(), "extras": dict(self.extras),
        }


@dataclass(frozen=True)
class EmissionParams:
    entries: tuple[ParamEntry, ...]

    def lookup(self, sector: Sector, date: dt.date | None) -> ParamEntry:
        """Newest entry valid on ``date``; undated transactions take the newest overall."""
        cands = [e for e in self.entries if e.sector is sector and (date is None or e.valid_from <= date)]
        if not cands:
            when = date.isoformat() if date else "any date"
            raise CarbonError(f"no emission parameters for sector {sector.value} valid at {when}")
        return max(cands, key=lambda e: e.valid_from)

    def sectors(self) -> set[Sector]:
        return {e.sector for e in self.entries}

    @classmethod
    def from_list(cls, raw: Sequence[Mapping]) -> "EmissionParams":
        entries = []
        for i, r in enumerate(raw):
            try:
                entries.append(ParamEntry(
                    sector=Sector.parse(r["sector"]),
                    avp=float(r["avp"]),
                    avp_unit=r.get("avp_unit", ""),
                    epsilon=None if r.get("epsilon") is None else float(r["epsilon"]),
                    epsilon_unit=r.get("epsilon_unit"),
                    valid_from=dt.date.fromisoformat(r.get("valid_from", "1970-01-01")),
                    extras=dict(r.get("extras") or {}),
                ))
            except (KeyError, TypeError, ValueError) as exc:
                raise CarbonError(f"emission parameter entry {i}: {exc}") from None
        return cls(tuple(entries))


def load_params(path: str | Path) -> EmissionParams:
    with open(path, encoding="utf-8") as fh:
        return EmissionParams.from_list(json.load(fh))


def default_params() -> EmissionParams:
    text = resources.files("cfxplain.data").joinpath("emission_params.json").read_text("utf-8")
    return EmissionParams.from_list(json.loads(text))


def discriminate_private_transport(doc: ProcessedDoc | Sequence[str], keywords: Sequence[str] = DEFAULT_TAXI_KEYWORDS) -> str:
    lemmas = doc.lemmas if isinstance(doc, ProcessedDoc) else doc
    kws = set(keywords)
    return "taxi" if any(t in kws for t in lemmas) else "company"


@dataclass(frozen=True)
class FootprintEstimate:
    transaction_id: str
    sector: Sector
    quantity: float
    unit: str
    parameters_used: dict
    formula_id: str

    def to_dict(self) -> dict:
        return {
            "transaction_id": self.transaction_id,
            "sector": self.sector.value,
            "quantity": self.quantity,
            "unit": self.unit,
            "parameters_used": self.parameters_used,
            "formula_id": self.formula_id,
        }


def estimate_footprint(
    t: Transaction, predicted: Sector, doc: ProcessedDoc | Sequence[str], params: EmissionParams
) -> FootprintEstimate:
    sector = Sector.parse(predicted)
    entry = params.lookup(sector, t.date)
    p = t.amount_eur
    used = {"valid_from": entry.valid_from.isoformat()}
    if sector is Sector.WATER_BILL:
        used.update(avp=entry.avp, avp_unit=entry.avp_unit)
        qty = water_consumption(p, entry.avp)
        return FootprintEstimate(t.id, sector, qty, LITERS, used, FORMULA_ID[sector])

    avp, eps, avp_unit, eps_unit = entry.avp, entry.epsilon, entry.avp_unit, entry.epsilon_unit
    if sector is Sector.PRIVATE_TRANSPORT:
        keywords = entry.extras.get("taxi_keywords", DEFAULT_TAXI_KEYWORDS)
        profile = discriminate_private_transport(doc, keywords)
        used["profile"] = profile
        if profile == "company":
            company = entry.extras.get("company")
            if company is None:
                raise CarbonError(f"no company profile for sector private_transport valid at {entry.valid_from}")
            avp, eps = float(company["avp"]), float(company["epsilon"])
            avp_unit = company.get("avp_unit", avp_unit)
            eps_unit = company.get("epsilon_unit", eps_unit)
    elif sector in (Sector.ELECTRICITY_BILL, Sector.GAS_BILL) and entry.extras.get("kwp_series"):
        series = entry.extras["kwp_series"]
        avp = monthly_average_price(series)
        used["kwp_days"] = len(series)
    used.update(avp=avp, avp_unit=avp_unit, epsilon=eps, epsilon_unit=eps_unit)
    qty = emission_estimate(p, avp, eps)
    return FootprintEstimate(t.id, sector, qty, KG_CO2, used, FORMULA_ID[sector])
