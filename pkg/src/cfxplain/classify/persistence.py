"""Binary model container.

Layout (all integers little-endian)::

    bytes 0..4   magic b"CFXP1"
    byte  5      format version (uint8, currently 1)
    bytes 6..9   header length H (uint32)
    H bytes      UTF-8 JSON header, keys sorted, no whitespace
    padding      zero bytes up to the next multiple of 8
    data         raw arrays, each starting at a multiple of 8 relative
                 to the start of the data section

The header holds ``kind``, ``classes``, ``norm_config_sha256``,
``params``, ``seed``, ``terms`` (the full vocabulary in column order) and
``arrays``: a list of ``{name, dtype, shape, offset, nbytes}`` where dtype
is a numpy little-endian type string such as ``<f8``. SVC models store
``W`` and ``b``; forests store ``offsets``, ``feature``, ``threshold``,
``left``, ``right``, ``leaf_class`` and ``depth``. ``chi2`` and
``selected`` describe the feature selection when present.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..corpus import SECTORS
from ..features import FeatureSpace
from .model import ClassifierError, Forest, TrainedClassifier

MAGIC = b"CFXP1"
VERSION = 1
_FOREST_FIELDS = ("offsets", "feature", "threshold", "left", "right", "leaf_class", "depth")


class ModelFormatError(ClassifierError):
    pass


def _le(arr: np.ndarray) -> np.ndarray:
    if arr.dtype == np.bool_:
        return np.ascontiguousarray(arr)
    return np.ascontiguousarray(arr, dtype=arr.dtype.newbyteorder("<"))


def model_to_bytes(m: TrainedClassifier) -> bytes:
    arrays: list[tuple[str, np.ndarray]] = []
    if m.kind == "svc":
        arrays += [("W", m.W), ("b", m.b)]
    else:
        arrays += [(name, getattr(m.forest, name)) for name in _FOREST_FIELDS]
    fs = m.feature_space
    if fs.chi2 is not None:
        arrays.append(("chi2", fs.chi2.astype(np.float64)))
    if fs.selected is not None:
        arrays.append(("selected", fs.selected.astype(np.bool_)))

    table, blobs, offset = [], [], 0
    for name, arr in arrays:
        a = _le(np.asarray(arr))
        raw = a.tobytes()
        table.append({"name": name, "dtype": a.dtype.str, "shape": list(a.shape), "offset": offset, "nbytes": len(raw)})
        pad = (-len(raw)) % 8
        blobs.append(raw + b"\0" * pad)
        offset += len(raw) + pad

    header = {
        "kind": m.kind,
        "classes": [s.value for s in m.classes],
        "norm_config_sha256": m.norm_digest,
        "params": m.params,
        "seed": m.seed,
        "terms": list(fs.terms),
        "arrays": table,
    }
    hjson = json.dumps(header, sort_keys=True, ensure_ascii=False, separators=(",", ":")).encode("utf-8")
    prefix = MAGIC + struct.pack("<BI", VERSION, len(hjson)) + hjson
    prefix += b"\0" * ((-len(prefix)) % 8)
    return prefix + b"".join(blobs)


def model_from_bytes(buf: bytes) -> TrainedClassifier:
    if buf[:5] != MAGIC:
        raise ModelFormatError("not a CFXP1 model file")
    version, hlen = struct.unpack_from("<BI", buf, 5)
    if version != VERSION:
        raise ModelFormatError(f"unsupported model format version {version}")
    start = 10 + hlen
    try:
        header = json.loads(buf[10:start].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"corrupt header: {exc}") from None
    data_start = start + (-start) % 8
    arrays = {}
    for entry in header["arrays"]:
        lo = data_start + entry["offset"]
        raw = buf[lo: lo + entry["nbytes"]]
        if len(raw) != entry["nbytes"]:
            raise ModelFormatError(f"truncated array {entry['name']}")
        dt = np.dtype(entry["dtype"])
        arrays[entry["name"]] = np.frombuffer(raw, dtype=dt).reshape(entry["shape"]).astype(dt.newbyteorder("="))
    if header["classes"] != [s.value for s in SECTORS]:
        raise ModelFormatError("model class list does not match the sector schema")
    space = FeatureSpace(tuple(header["terms"]), arrays.get("chi2"), arrays.get("selected"))
    common = dict(
        kind=header["kind"], feature_space=space, params=header["params"],
        seed=header["seed"], norm_digest=header["norm_config_sha256"],
    )
    if header["kind"] == "svc":
        return TrainedClassifier(W=arrays["W"], b=arrays["b"], **common)
    if header["kind"] == "rf":
        return TrainedClassifier(forest=Forest(**{k: arrays[k] for k in _FOREST_FIELDS}), **common)
    raise ModelFormatError(f"unknown model kind {header['kind']!r}")


def save_model(m: TrainedClassifier, path: str | Path) -> None:
    Path(path).write_bytes(model_to_bytes(m))


def load_model(path: str | Path) -> TrainedClassifier:
    return model_from_bytes(Path(path).read_bytes())
