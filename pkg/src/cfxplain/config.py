"""Pipeline configuration: resource paths plus classifier and explainer settings."""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from pathlib import Path
from typing import Any

ENV_VAR = "CFXPLAIN_CONFIG"


def _data_path(name: str) -> str:
    return str(resources.files("cfxplain.data").joinpath(name))


@dataclass
class PipelineConfig:
    normalization: str = ""
    lexicon: str = ""
    enterprises: str = ""
    emission_params: str = ""
    classifier: str = "svc"
    svc: dict = field(default_factory=dict)
    rf: dict = field(default_factory=dict)
    percentile: int = 50
    top_k: int = 10
    n_samples: int = 1000
    metric: str = "proximity"
    seed: int = 0
    folds: int = 10
    dedup_threshold: float = 0.9

    def __post_init__(self):
        self.normalization = self.normalization or _data_path("normalization.json")
        self.lexicon = self.lexicon or _data_path("sector_lexicon.json")
        self.enterprises = self.enterprises or _data_path("enterprises.json")
        self.emission_params = self.emission_params or _data_path("emission_params.json")
        if self.classifier not in ("svc", "rf"):
            raise ValueError(f"classifier must be svc or rf, got {self.classifier!r}")
        if self.metric not in ("jaccard", "proximity"):
            raise ValueError(f"metric must be jaccard or proximity, got {self.metric!r}")
        if not 0 < self.percentile <= 100:
            raise ValueError("percentile must lie in (0, 100]")
        if self.top_k < 1 or self.n_samples < 2 or self.folds < 2:
            raise ValueError("top_k >= 1, n_samples >= 2 and folds >= 2 required")
        for name in ("normalization", "lexicon", "enterprises", "emission_params"):
            if not Path(getattr(self, name)).is_file():
                raise FileNotFoundError(f"{name} file not found: {getattr(self, name)}")

    def digest(self) -> str:
        """SHA-256 over file contents and settings; independent of where files live."""
        h = hashlib.sha256()
        for name in ("normalization", "lexicon", "enterprises", "emission_params"):
            h.update(name.encode())
            h.update(hashlib.sha256(Path(getattr(self, name)).read_bytes()).digest())
        settings = {k: v for k, v in asdict(self).items()
                    if k not in ("normalization", "lexicon", "enterprises", "emission_params")}
        h.update(json.dumps(settings, sort_keys=True).encode())
        return h.hexdigest()


def load_pipeline_config(path: str | Path | None = None, **overrides: Any) -> PipelineConfig:
    """Read a JSON config (``path``, else $CFXPLAIN_CONFIG, else defaults).

    Relative resource paths resolve against the config file's directory.
    ``None``-valued overrides are ignored.
    """
    raw: dict = {}
    path = path or os.environ.get(ENV_VAR) or None
    if path:
        p = Path(path)
        raw = json.loads(p.read_text("utf-8"))
        known = {f.name for f in fields(PipelineConfig)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        for key in ("normalization", "lexicon", "enterprises", "emission_params"):
            if raw.get(key) and not Path(raw[key]).is_absolute():
                raw[key] = str(p.parent / raw[key])
    raw.update({k: v for k, v in overrides.items() if v is not None})
    return PipelineConfig(**raw)
