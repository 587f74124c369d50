# etl/fixtures.py
"""
Shape-matched expression fixtures, generated on demand into data/fixtures/.

Every dataset in etl/fixtures.yml becomes two CSVs (rows = samples, first
column = sample id, header = gene ids):
  <name>_pos.csv   train + leaveout rows: shared profile + tiny noise
  <name>_neg.csv   negative rows: profile shifted per gene + tiny noise

The classes are separable by construction. SHA-256 of every written file goes
into data/fixtures/MANIFEST.csv and is checked on each later load.

Examples:
python -m etl.fixtures                 # all six
python -m etl.fixtures --names colon,cns --out-dir /tmp/fixtures
"""
from __future__ import annotations

import argparse
import hashlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
import yaml

from etl.data_io import SplitCounts, load_matrix_csv, write_matrix_csv
from etl.rng import make_rng, standard_normal
from kernels.common import SetTestError, setup_logger
from kernels.set_kernel import SampleSet

logger = setup_logger("fixtures")

PROJECT_ROOT = Path(__file__).resolve().parents[1]
FIXTURES_CFG = Path(__file__).resolve().parent / "fixtures.yml"
FIXTURE_DIR = PROJECT_ROOT / "data" / "fixtures"
MANIFEST_NAME = "MANIFEST.csv"
MANIFEST_COLUMNS = ["name", "file", "rows", "cols", "sha256"]


@dataclass(frozen=True)
class FixtureSpec:
    name: str
    title: str
    train: int
    leaveout: int
    negative: int
    set_size: int
    dim: int
    index: int = 0  # position in fixtures.yml, keys the random streams

    @property
    def positives(self) -> int:
        return self.train + self.leaveout

    @property
    def counts(self) -> SplitCounts:
        return SplitCounts(train=self.train, leaveout=self.leaveout, set_size=self.set_size)


@dataclass(frozen=True)
class FixtureSettings:
    seed: int
    noise: float
    shift: float


def load_fixture_specs(path=FIXTURES_CFG) -> tuple[dict[str, FixtureSpec], FixtureSettings]:
    cfg = yaml.safe_load(Path(path).read_text()) or {}
    specs = {}
    for i, (name, row) in enumerate((cfg.get("datasets") or {}).items()):
        specs[name] = FixtureSpec(name=name, title=row.get("title", name), train=int(row["train"]),
                                  leaveout=int(row["leaveout"]), negative=int(row["negative"]),
                                  set_size=int(row["set_size"]), dim=int(row["dim"]), index=i)
    settings = FixtureSettings(seed=int(cfg.get("seed", 0)), noise=float(cfg.get("noise", 1e-11)),
                               shift=float(cfg.get("shift", 0.5)))
    return specs, settings


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def read_manifest(out_dir: Path) -> pd.DataFrame:
    p = Path(out_dir) / MANIFEST_NAME
    if not p.exists():
        return pd.DataFrame(columns=MANIFEST_COLUMNS)
    return pd.read_csv(p, dtype={"sha256": str, "file": str, "name": str})


def _record(out_dir: Path, rows: list[dict]):
    man = read_manifest(out_dir)
    files = {r["file"] for r in rows}
    man = man[~man["file"].isin(files)]
    man = pd.concat([man, pd.DataFrame(rows, columns=MANIFEST_COLUMNS)], ignore_index=True)
    man.sort_values("file").to_csv(Path(out_dir) / MANIFEST_NAME, index=False)


def fixture_paths(name: str, out_dir=FIXTURE_DIR) -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    return out_dir / f"{name}_pos.csv", out_dir / f"{name}_neg.csv"


def generate_fixture(spec: FixtureSpec, settings: FixtureSettings, out_dir=FIXTURE_DIR,
                     force: bool = False) -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    base_rng = make_rng(settings.seed, spec.index, 0)
    profile = np.abs(5.0 + standard_normal(base_rng, spec.dim))
    pos = profile + settings.noise * standard_normal(make_rng(settings.seed, spec.index, 1), (spec.positives, spec.dim))
    neg = (profile + settings.shift
           + settings.noise * standard_normal(make_rng(settings.seed, spec.index, 2), (spec.negative, spec.dim)))

    genes = [f"g{j + 1:05d}" for j in range(spec.dim)]
    pos_path, neg_path = fixture_paths(spec.name, out_dir)
    write_matrix_csv(pos_path, pos, [f"pos{i + 1:03d}" for i in range(pos.shape[0])], genes, force=force)
    write_matrix_csv(neg_path, neg, [f"neg{i + 1:03d}" for i in range(neg.shape[0])], genes, force=force)
    _record(out_dir, [
        {"name": spec.name, "file": p.name, "rows": m.shape[0], "cols": m.shape[1], "sha256": sha256_file(p)}
        for p, m in ((pos_path, pos), (neg_path, neg))
    ])
    logger.info(f"generated fixture '{spec.name}': {pos.shape[0]}+{neg.shape[0]} x {spec.dim}")
    return pos_path, neg_path


def verify_fixture(name: str, out_dir=FIXTURE_DIR) -> bool:
    """True when both files exist and match the manifest; raises on a checksum mismatch."""
    man = read_manifest(out_dir)
    ok = True
    for p in fixture_paths(name, out_dir):
        rec = man[man["file"] == p.name]
        if not p.exists() or rec.empty:
            ok = False
            continue
        digest = sha256_file(p)
        if digest != rec["sha256"].iloc[0]:
            raise SetTestError(f"{p}: checksum {digest[:12]}... does not match manifest "
                               f"{rec['sha256'].iloc[0][:12]}... (delete the file to regenerate)")
    return ok


def ensure_fixture(name: str, out_dir=FIXTURE_DIR, cfg_path=FIXTURES_CFG) -> tuple[Path, Path]:
    specs, settings = load_fixture_specs(cfg_path)
    if name not in specs:
        raise SetTestError(f"unknown fixture '{name}' (known: {', '.join(specs)})")
    if not verify_fixture(name, out_dir):
        return generate_fixture(specs[name], settings, out_dir, force=True)
    return fixture_paths(name, out_dir)


def load_fixture(name: str, out_dir=FIXTURE_DIR, cfg_path=FIXTURES_CFG) -> tuple[FixtureSpec, SampleSet, SampleSet]:
    specs, _ = load_fixture_specs(cfg_path)
    pos_path, neg_path = ensure_fixture(name, out_dir, cfg_path)
    pos = load_matrix_csv(pos_path)
    neg = load_matrix_csv(neg_path)
    spec = specs[name]
    if pos.values.shape != (spec.positives, spec.dim) or neg.values.shape != (spec.negative, spec.dim):
        raise SetTestError(f"fixture '{name}' has shapes {pos.values.shape} / {neg.values.shape}, "
                           f"expected ({spec.positives}, {spec.dim}) / ({spec.negative}, {spec.dim})")
    return spec, SampleSet(pos.values, label=f"{name}_pos"), SampleSet(neg.values, label=f"{name}_neg")


def main():
    ap = argparse.ArgumentParser(description="Generate the shape-matched expression fixtures")
    ap.add_argument("--names", default="", help="comma-separated subset (default: all)")
    ap.add_argument("--out-dir", default=str(FIXTURE_DIR))
    ap.add_argument("--force", action="store_true", help="regenerate even when the manifest matches")
    args = ap.parse_args()

    specs, settings = load_fixture_specs()
    names = [n.strip() for n in args.names.split(",") if n.strip()] or list(specs)
    for name in names:
        if name not in specs:
            raise SystemExit(f"unknown fixture '{name}'")
        if args.force or not verify_fixture(name, args.out_dir):
            generate_fixture(specs[name], settings, args.out_dir, force=True)
    print(f"[fixtures] wrote -> {Path(args.out_dir) / MANIFEST_NAME}")


if __name__ == "__main__":
    main()
