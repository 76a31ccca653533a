"""Seeded synthetic bank-transaction corpus.

Stand-in for a proprietary data-set: descriptions are assembled from
per-sector templates mixing sector keywords, enterprise names, locations,
generic banking tokens and random numbers/codes. Class shares follow the
reference sector distribution.
"""
from __future__ import annotations

import datetime as dt
import math

import numpy as np

from .corpus import SECTORS, Sector, Transaction

# share of each sector, percent
SECTOR_SHARES: dict[Sector, float] = {
    Sector.GAS_STATIONS: 23.18,
    Sector.PRIVATE_TRANSPORT: 10.84,
    Sector.PUBLIC_TRANSPORT: 9.00,
    Sector.FLIGHTS: 11.34,
    Sector.PARCEL_COURIER: 7.25,
    Sector.WATER_BILL: 16.80,
    Sector.ELECTRICITY_BILL: 16.15,
    Sector.GAS_BILL: 5.38,
}

# lemma forms; each appears in exactly one sector's templates
SECTOR_KEYWORDS: dict[Sector, tuple[str, ...]] = {
    Sector.GAS_STATIONS: ("gasolinera", "carburante", "combustible"),
    Sector.PRIVATE_TRANSPORT: ("taxi", "vtc", "conductor"),
    Sector.PUBLIC_TRANSPORT: ("autobus", "tren", "metro"),
    Sector.FLIGHTS: ("vuelo", "aerolinea", "aeropuerto"),
    Sector.PARCEL_COURIER: ("paquete", "envio", "mensajeria"),
    Sector.WATER_BILL: ("agua", "saneamiento", "alcantarillado"),
    Sector.ELECTRICITY_BILL: ("electricidad", "luz", "potencia"),
    Sector.GAS_BILL: ("gas", "butano", "propano"),
}

# surface spellings used when a keyword is written into a description
_KEYWORD_SURFACE: dict[str, tuple[str, ...]] = {
    "gasolinera": ("GASOLINERA", "GASOLINERAS", "Gasolinera"),
    "carburante": ("CARBURANTE", "CARBURANTES"),
    "combustible": ("COMBUSTIBLE", "COMBUSTIBLES"),
    "taxi": ("TAXI", "TAXIS", "Taxi"),
    "vtc": ("VTC",),
    "conductor": ("CONDUCTOR", "CONDUCTORES"),
    "autobus": ("AUTOBUS", "AUTOBÚS", "AUTOBUSES"),
    "tren": ("TREN", "TRENES"),
    "metro": ("METRO", "Metro"),
    "vuelo": ("VUELO", "VUELOS"),
    "aerolinea": ("AEROLINEA", "AEROLÍNEA", "AEROLINEAS"),
    "aeropuerto": ("AEROPUERTO", "AEROPUERTOS"),
    "paquete": ("PAQUETE", "PAQUETES"),
    "envio": ("ENVIO", "ENVÍO", "ENVIOS"),
    "mensajeria": ("MENSAJERIA", "MENSAJERÍA"),
    "agua": ("AGUA", "AGUAS", "Agua"),
    "saneamiento": ("SANEAMIENTO",),
    "alcantarillado": ("ALCANTARILLADO",),
    "electricidad": ("ELECTRICIDAD", "Electricidad"),
    "luz": ("LUZ", "Luz"),
    "potencia": ("POTENCIA",),
    "gas": ("GAS", "Gas"),
    "butano": ("BUTANO",),
    "propano": ("PROPANO",),
}

# known enterprises (also in enterprises.json) first, then unlisted ones
ENTERPRISES: dict[Sector, tuple[tuple[str, ...], tuple[str, ...]]] = {
    Sector.GAS_STATIONS: (("REPSOL", "CEPSA", "BALLENOIL", "CEDIPSA", "GALP", "PETRONOR"),
                          ("PLENOIL", "PETROPRIX", "AVIA")),
    Sector.PRIVATE_TRANSPORT: (("CABIFY", "UBER", "FREENOW", "BOLT", "RADIOTAXI", "TELETAXI"),
                               ("MOOVECAR", "RIDELY")),
    Sector.PUBLIC_TRANSPORT: (("RENFE", "ALSA", "EMT", "TMB", "AVANZA", "FGC"),
                              ("MONBUS", "AUVASA", "TUSSAM")),
    Sector.FLIGHTS: (("RYANAIR", "IBERIA", "VUELING", "AIR EUROPA", "EASYJET", "VOLOTEA"),
                     ("BINTER", "WIZZAIR")),
    Sector.PARCEL_COURIER: (("CORREOS", "SEUR", "MRW", "DHL", "NACEX", "GLS"),
                            ("TIPSA", "ENVIALIA", "CTT")),
    Sector.WATER_BILL: (("CANAL DE ISABEL II", "AQUALIA", "EMASESA", "EMAYA", "AGBAR", "VIAQUA"),
                        ("HIDROGEA", "AQUONA")),
    Sector.ELECTRICITY_BILL: (("IBERDROLA", "ENDESA", "HOLALUZ", "NEXUS ENERGIA", "LUCERA", "AUDAX"),
                              ("FACTORENERGIA", "PODO")),
    Sector.GAS_BILL: (("NATURGY", "NEDGIA", "REDEXIS", "MADRILEÑA RED DE GAS", "PRIMAGAS", "DISAGAS"),
                      ("VITOGAS", "GASINDUS")),
}

_CITIES = ("MADRID", "VIGO", "BARCELONA", "SEVILLA", "VALENCIA", "BILBAO", "MALAGA", "ZARAGOZA",
           "CORUÑA", "GIJON", "OVIEDO", "MURCIA", "ALICANTE", "TOLEDO", "BURGOS", "LEGANES",
           "VILLENA", "ALBAL", "GETAFE", "PONTEVEDRA", "SANTANDER", "CORDOBA", "GRANADA", "LUGO")
_PREFIXES = ("COMPRA TARJ. {NUM}", "PAGO TARJETA {NUM}", "COMPRA EN", "PAGO MOVIL EN", "ADEUDO",
             "CARGO", "OPERACION {CODE}", "COMPRA", "PAGO")
_NOISE = ("REFERENCIA", "MANDATO", "CLIENTE", "APP", "ONLINE", "WEB", "DEV", "INTERNET", "VIRTUAL",
          "CUENTA", "CARGO", "ORDEN", "SUC", "OFICINA", "CENTRO", "NORTE", "SUR", "PLAZA")

# {E} enterprise, {K} keyword, {C} city, {P} prefix, {N} number, {X} code, {Z} noise token
_TEMPLATES: dict[Sector, tuple[str, ...]] = {
    Sector.GAS_STATIONS: (
        "{E} {C}", "E.S. {E} {C}", "{P} {K} {E} {C}", "{K} {E} {C} {N}", "{P} {E} {K}",
        "ESTACION DE SERVICIO {E} {C}", "{P} E.S. {K} {C}", "{K} {C} {X}", "{E} {K} {Z} {N}",
        "{P} {K} {C} {Z}", "{E} S.L. {K} {C}",
    ),
    Sector.PRIVATE_TRANSPORT: (
        "LIC {N} {K} {C}", "{E} *TRIP {X}", "{P} {E} {C}", "SERVICIO {K} {E}", "{K} {C} {N}",
        "{P} {K} {E} {Z}", "{E} {K} {C}", "{P} {K} {C} LIC {N}", "{E} VIAJE {C} {X}",
    ),
    Sector.PUBLIC_TRANSPORT: (
        "Tj-{E} {Z} {Z}", "{E} BILLETE {C}", "{P} {E} {K}", "BONO {K} {C}", "ABONO TRANSPORTE {E} {N}",
        "{K} {C} {E}", "{P} BILLETE {K} {C} {X}", "{E} VIAJEROS {K} {Z}", "TARJETA {E} {C} {N}",
    ),
    Sector.FLIGHTS: (
        "{P} {E}-{C}", "{E} {K} {X}", "RESERVA {K} {E}", "{P} {E} {K} {C}", "{K} {C}-{C} {X}",
        "{E} ONLINE {K} {N}", "{P} {K} {E} EQUIPAJE", "TASAS {K} {C} {N}",
    ),
    Sector.PARCEL_COURIER: (
        "SE {E} Y TELEGRAFOS S ({C})", "{E} {K} {X}", "{P} {E} {C}", "{K} URGENTE {E}",
        "PAGO {E} {C} {N}", "{P} {K} {C} {X}", "{E} {K} {Z} {N}", "SERVICIO {K} {E} {C}",
    ),
    Sector.WATER_BILL: (
        "RECIBO {K}-{N}-{Z}.", "RECIBO {E} {K} {N}", "{E} CONSUMO {K} {C}", "TASA {K} {C} {N}",
        "ADEUDO RECIBO {E} REFERENCIA {N} MANDATO {X}", "RECIBO {K} {C} {Z} {N}", "{E} {K} {X}",
        "RECIBO {E} {C} PERIODO {N}",
    ),
    Sector.ELECTRICITY_BILL: (
        "RECIBO {E} CLIENTES, S.A.U RECIBO {N}", "{E} {K} REFERENCIA {N} MANDATO {X}",
        "FACTURA {K} {E} {N}", "RECIBO {K} {E} CLIENTES REFERENCIA {N} {C}",
        "ADEUDO RECIBO {E} {K} CONTRATO {X} REFERENCIA {N}", "{E} {K} HOGAR {C} {N}",
        "RECIBO {E} REFERENCIA MANDATO {X}", "FACTURA {E} CLIENTES {K} PERIODO {N}",
    ),
    Sector.GAS_BILL: (
        "FACTURA DE {K} PM {N} {N}", "{E} {K} NATURAL {N}", "RECIBO {E} {K} {X}",
        "BOMBONA {K} {E}", "RECIBO {K} {C} {N}", "{E} FACTURA {K} REFERENCIA {N}",
        "{E} {K} {C} CONTRATO {X}",
    ),
}
_GENERIC_TEMPLATES = ("PAGO TARJETA {N} {C}", "COMPRA {C} {X}", "CARGO {Z} {N}", "OPERACION {X} {Z}")
_GENERIC_RATE = 0.03

_AMOUNT_RANGE: dict[Sector, tuple[float, float]] = {
    Sector.GAS_STATIONS: (15.0, 95.0),
    Sector.PRIVATE_TRANSPORT: (4.0, 45.0),
    Sector.PUBLIC_TRANSPORT: (1.5, 160.0),
    Sector.FLIGHTS: (20.0, 320.0),
    Sector.PARCEL_COURIER: (3.0, 60.0),
    Sector.WATER_BILL: (8.0, 120.0),
    Sector.ELECTRICITY_BILL: (18.0, 210.0),
    Sector.GAS_BILL: (12.0, 150.0),
}


def class_counts(n: int) -> dict[Sector, int]:
    """Largest-remainder allocation of ``n`` rows, at least one per sector."""
    if n < len(SECTORS):
        raise ValueError(f"need n >= {len(SECTORS)}")
    total = sum(SECTOR_SHARES.values())
    spare = n - len(SECTORS)
    raw = {s: spare * SECTOR_SHARES[s] / total for s in SECTORS}
    counts = {s: 1 + math.floor(v) for s, v in raw.items()}
    leftover = n - sum(counts.values())
    order = sorted(SECTORS, key=lambda s: (-(raw[s] - math.floor(raw[s])), s.index))
    for s in order[:leftover]:
        counts[s] += 1
    return counts


def _fill(template: str, sector: Sector | None, rng: np.random.Generator) -> str:
    def pick(seq):
        return seq[int(rng.integers(len(seq)))]

    out = template
    while "{" in out:
        start = out.index("{")
        key = out[start + 1]
        if key == "E":
            known, unknown = ENTERPRISES[sector]
            value = pick(unknown) if rng.random() < 0.2 else pick(known)
        elif key == "K":
            value = pick(_KEYWORD_SURFACE[pick(SECTOR_KEYWORDS[sector])])
        elif key == "C":
            value = pick(_CITIES)
        elif key == "P":
            value = pick(_PREFIXES)
        elif key == "N":
            value = str(int(rng.integers(10, 10 ** int(rng.integers(3, 11)))))
        elif key == "X":
            letters = "".join(chr(65 + int(c)) for c in rng.integers(0, 26, size=int(rng.integers(1, 4))))
            value = letters + str(int(rng.integers(100, 1_000_000)))
        elif key == "Z":
            value = pick(_NOISE)
        else:
            raise AssertionError(key)
        out = out[:start] + value + out[start + 3:]
    return out


def generate_synthetic_corpus(n: int, seed: int) -> list[Transaction]:
    """``n`` labeled transactions with class shares following the reference distribution."""
    rng = np.random.default_rng(seed)
    counts = class_counts(n)
    labels = [s for s in SECTORS for _ in range(counts[s])]
    order = rng.permutation(len(labels))
    base = dt.date(2022, 1, 1)
    out = []
    for i, j in enumerate(order):
        sector = labels[int(j)]
        if rng.random() < _GENERIC_RATE:
            template = _GENERIC_TEMPLATES[int(rng.integers(len(_GENERIC_TEMPLATES)))]
        else:
            tpls = _TEMPLATES[sector]
            template = tpls[int(rng.integers(len(tpls)))]
        text = _fill(template, sector, rng)
        if rng.random() < 0.15:
            text = text.title()
        lo, hi = _AMOUNT_RANGE[sector]
        amount = round(float(np.exp(rng.uniform(np.log(lo), np.log(hi)))), 2)
        date = base + dt.timedelta(days=int(rng.integers(0, 365)))
        out.append(Transaction(str(i + 1), text, amount, date, sector))
    return out
