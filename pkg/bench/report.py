# bench/report.py
"""
TestReport: per-(method, dimension) type-I / type-II rates with the counts
behind them, the seed and a config snapshot.

Written as YAML (schema version 1) plus a flat CSV for plotting. No
timestamps, so identical runs give byte-identical files.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import pandas as pd
import yaml

from kernels.common import OutputExists, SetTestError

SCHEMA_VERSION = 1
CSV_COLUMNS = ["method", "dimension", "type_I", "type_II", "total_error", "repetitions",
               "null_rejections", "null_trials", "alt_acceptances", "alt_trials", "seed"]

SVM_SET = "svm-set"
MMD = "mmd"
F_TEST = "f-test"
T_TEST = "t-test"
METHODS = (SVM_SET, MMD, F_TEST, T_TEST)


@dataclass
class MethodRecord:
    method: str
    dimension: int
    repetitions: int
    null_rejections: int
    null_trials: int
    alt_acceptances: int
    alt_trials: int
    seed: int
    config: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def __post_init__(self):
        if self.repetitions < 1:
            raise SetTestError(f"{self.method}: repetitions must be >= 1")
        if not (0 <= self.null_rejections <= self.null_trials and 0 <= self.alt_acceptances <= self.alt_trials):
            raise SetTestError(f"{self.method}: inconsistent counts")

    @property
    def type_I(self) -> float:
        return self.null_rejections / self.null_trials if self.null_trials else 0.0

    @property
    def type_II(self) -> float:
        return self.alt_acceptances / self.alt_trials if self.alt_trials else 0.0

    @property
    def total_error(self) -> float:
        return self.type_I + self.type_II

    def as_row(self) -> dict:
        return {"method": self.method, "dimension": self.dimension, "type_I": self.type_I,
                "type_II": self.type_II, "total_error": self.total_error, "repetitions": self.repetitions,
                "null_rejections": self.null_rejections, "null_trials": self.null_trials,
                "alt_acceptances": self.alt_acceptances, "alt_trials": self.alt_trials, "seed": self.seed}


@dataclass
class TestReport:
    __test__ = False  # not a pytest class

    protocol: str
    seed: int
    records: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def record(self, method: str, dimension: int) -> MethodRecord:
        for r in self.records:
            if r.method == method and r.dimension == dimension:
                return r
        raise KeyError(f"no record for {method} at dimension {dimension}")

    def methods(self) -> list[str]:
        return list(dict.fromkeys(r.method for r in self.records))

    def dimensions(self) -> list[int]:
        return list(dict.fromkeys(r.dimension for r in self.records))

    # ---------- serialization ----------
    def to_dict(self) -> dict:
        return plain({
            "schema_version": SCHEMA_VERSION,
            "protocol": self.protocol,
            "seed": self.seed,
            "config": self.config,
            "metadata": self.metadata,
            "records": [{**r.as_row(), "config": r.config, "notes": list(r.notes)} for r in self.records],
        })

    def to_yaml(self, path, force: bool = False) -> Path:
        p = writable_path(path, force)
        p.write_text(yaml.safe_dump(self.to_dict(), sort_keys=False, default_flow_style=False))
        return p

    def to_csv(self, path, force: bool = False) -> Path:
        p = writable_path(path, force)
        frame = pd.DataFrame([r.as_row() for r in self.records], columns=CSV_COLUMNS)
        frame.to_csv(p, index=False, float_format="%.17g")
        return p

    @classmethod
    def from_yaml(cls, path) -> "TestReport":
        raw = yaml.safe_load(Path(path).read_text()) or {}
        if raw.get("schema_version") != SCHEMA_VERSION:
            raise SetTestError(f"{path}: unsupported report schema {raw.get('schema_version')!r}")
        records = [MethodRecord(method=r["method"], dimension=int(r["dimension"]),
                                repetitions=int(r["repetitions"]), null_rejections=int(r["null_rejections"]),
                                null_trials=int(r["null_trials"]), alt_acceptances=int(r["alt_acceptances"]),
                                alt_trials=int(r["alt_trials"]), seed=int(r["seed"]),
                                config=r.get("config") or {}, notes=r.get("notes") or [])
                   for r in raw.get("records") or []]
        return cls(protocol=raw["protocol"], seed=int(raw["seed"]), records=records,
                   metadata=raw.get("metadata") or {}, config=raw.get("config") or {})

    # ---------- console ----------
    def summary_lines(self) -> list[str]:
        lines = [f"{'method':<10} {'dim':>6} {'type-I':>9} {'type-II':>9} {'total':>9} {'reps':>5}"]
        for r in self.records:
            lines.append(f"{r.method:<10} {r.dimension:>6} {_pct(r.type_I):>9} {_pct(r.type_II):>9} "
                         f"{_pct(r.total_error):>9} {r.repetitions:>5}")
        return lines


def _pct(x: float) -> str:
    return f"{100 * x:.4g}%"


def writable_path(path, force: bool) -> Path:
    p = Path(path)
    if p.exists() and not force:
        raise OutputExists(f"{p} exists (use --force to overwrite)")
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def plain(obj):
    """Recursively convert numpy scalars / tuples so yaml.safe_dump accepts them."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, Enum):
        return obj.value
    if hasattr(obj, "item") and callable(obj.item):  # numpy scalars
        return obj.item()
    return obj

