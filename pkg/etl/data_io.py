# etl/data_io.py
"""
Data in and out:
- sample_gaussian: N(mean, sigma^2 I) draws over the Philox + Box-Muller streams of etl/rng.py
- load_matrix_csv / write_matrix_csv: comma-separated numeric matrices, optional header line
  and optional first label column (both auto-detected)
- split_dataset: random train / leave-out split of the positives, negatives passed through

Examples:
python -m etl.data_io --in data/fixtures/colon_pos.csv
python -m etl.data_io --in genes.csv --orientation SamplesAsColumns
"""
from __future__ import annotations

import argparse
import csv
import io
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import NamedTuple

import numpy as np
import pandas as pd

from etl.rng import STREAM_SPLIT, make_rng, standard_normal
from kernels.common import (
    InsufficientData,
    MalformedCsv,
    NonFiniteInput,
    OutputExists,
    ParseError,
    SetTestError,
    setup_logger,
)
from kernels.set_kernel import SampleSet

logger = setup_logger("data_io")

NON_FINITE_TOKENS = {"nan", "+nan", "-nan", "inf", "+inf", "-inf", "infinity", "+infinity", "-infinity"}


class Orientation(str, Enum):
    SAMPLES_AS_ROWS = "SamplesAsRows"
    SAMPLES_AS_COLUMNS = "SamplesAsColumns"


class LoadedMatrix(NamedTuple):
    values: np.ndarray
    sample_labels: list | None
    feature_names: list | None


# ---------- generators ----------
def sample_gaussian(mean, sigma: float, n: int, seed, label: str | None = None) -> SampleSet:
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    if mean.ndim != 1 or mean.size == 0:
        raise SetTestError(f"mean must be a non-empty vector, got shape {mean.shape}")
    if not sigma > 0:
        raise SetTestError(f"sigma must be positive, got {sigma}")
    if n < 1:
        raise InsufficientData(f"n must be >= 1, got {n}")
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    return SampleSet(mean + sigma * standard_normal(rng, (n, mean.size)), label=label)


# ---------- CSV ----------
def _is_number(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def _read_records(text: str) -> list[list[str]]:
    """Tokenize quoted CSV; every record must have the width of the first one."""
    reader = csv.reader(io.StringIO(text), skipinitialspace=True)
    records, width = [], None
    for fields in reader:
        if not fields:
            raise MalformedCsv(reader.line_num, "blank line")
        if width is None:
            width = len(fields)
        elif len(fields) != width:
            raise MalformedCsv(reader.line_num, f"{len(fields)} fields, expected {width}")
        records.append(fields)
    return records


def load_matrix_csv(path, orientation: Orientation | str = Orientation.SAMPLES_AS_ROWS) -> LoadedMatrix:
    p = Path(path)
    orientation = Orientation(orientation)
    text = p.read_text().rstrip()
    if not text:
        raise MalformedCsv(1, "empty file")
    try:
        records = _read_records(text)
    except csv.Error as e:
        raise MalformedCsv(1, str(e)) from e

    cells = pd.DataFrame(records, dtype=str).apply(lambda col: col.str.strip())
    first = cells.iloc[0].tolist()

    # header: every cell of the first line is non-numeric
    has_header = not any(_is_number(c) for c in first)
    body = cells.iloc[1:] if has_header else cells
    if body.empty:
        raise InsufficientData(f"{p}: no data rows")
    # label column: column 0 holds no numbers at all
    has_labels = body.shape[1] > 1 and not any(_is_number(c) for c in body.iloc[:, 0])
    data = body.iloc[:, 1:] if has_labels else body

    raw = data.to_numpy(dtype=str)
    line0, col0 = (2 if has_header else 1), (2 if has_labels else 1)
    try:
        parsed = raw.astype(np.float64)  # correctly rounded, so written reprs reload exactly
    except ValueError:
        coerced = pd.to_numeric(pd.Series(raw.ravel()), errors="coerce").to_numpy(dtype=float)
        suspects = np.flatnonzero(np.isnan(coerced)).tolist() + list(range(raw.size))
        for flat in suspects:
            r, c = divmod(int(flat), raw.shape[1])
            if not _is_number(raw[r, c]):
                raise ParseError(line0 + r, col0 + c, raw[r, c])
        raise ParseError(line0, col0, raw[0, 0])
    bad = np.argwhere(~np.isfinite(parsed))
    if bad.size:
        r, c = bad[0]
        raise NonFiniteInput(f"{p}: line {line0 + r}, column {col0 + c}: {raw[r, c]!r}")

    labels = body.iloc[:, 0].tolist() if has_labels else None
    header = first[1:] if (has_header and has_labels) else (first if has_header else None)
    if orientation == Orientation.SAMPLES_AS_COLUMNS:
        parsed, labels, header = parsed.T.copy(), header, labels
    logger.debug(f"loaded {p}: {parsed.shape[0]} samples x {parsed.shape[1]} features")
    return LoadedMatrix(parsed, labels, header)


def write_matrix_csv(path, values, sample_labels=None, feature_names=None, force: bool = False,
                     label_header: str = "sample") -> Path:
    """Shortest round-trip repr per value, so a reload is value-exact."""
    p = Path(path)
    if p.exists() and not force:
        raise OutputExists(f"{p} exists (use --force to overwrite)")
    if not p.parent.exists():
        raise FileNotFoundError(f"output directory {p.parent} does not exist")
    vals = np.asarray(values, dtype=float)
    if vals.ndim != 2:
        raise SetTestError(f"expected a matrix, got shape {vals.shape}")
    if not np.isfinite(vals).all():
        raise NonFiniteInput("matrix contains NaN or Inf")
    frame = pd.DataFrame([[repr(float(v)) for v in row] for row in vals.tolist()],
                         columns=list(feature_names) if feature_names is not None else None)
    if sample_labels is not None:
        frame.insert(0, label_header, list(sample_labels))
    frame.to_csv(p, index=False, header=feature_names is not None)
    return p


# ---------- splits ----------
@dataclass(frozen=True)
class SplitCounts:
    train: int | None  # None -> all positives not left out
    leaveout: int
    set_size: int

    def __post_init__(self):
        if self.leaveout < 0 or self.set_size < 1 or (self.train is not None and self.train < 1):
            raise SetTestError(f"invalid split counts {self}")


@dataclass(frozen=True, eq=False)
class DatasetSplit:
    train_positive: SampleSet
    leaveout_positive: SampleSet | None
    test_negative: SampleSet
    set_size: int
    seed: int


def split_dataset(positive, negative, counts: SplitCounts, seed: int) -> DatasetSplit:
    pos = positive if isinstance(positive, SampleSet) else SampleSet(positive, label="positive")
    neg = negative if isinstance(negative, SampleSet) else SampleSet(negative, label="negative")
    train = counts.train if counts.train is not None else pos.n - counts.leaveout
    if train < 1 or train + counts.leaveout > pos.n:
        raise InsufficientData(f"split needs {train} train + {counts.leaveout} leave-out positives, "
                               f"only {pos.n} available")
    order = make_rng(seed, STREAM_SPLIT).permutation(pos.n)
    train_rows = np.sort(order[:train])
    left_rows = np.sort(order[train:train + counts.leaveout])
    return DatasetSplit(
        train_positive=pos.subset(train_rows, label="train_positive"),
        leaveout_positive=pos.subset(left_rows, label="leaveout_positive") if counts.leaveout else None,
        test_negative=neg,
        set_size=counts.set_size,
        seed=seed,
    )


def main():
    ap = argparse.ArgumentParser(description="Load a numeric CSV matrix and print its shape")
    ap.add_argument("--in", dest="inp", required=True)
    ap.add_argument("--orientation", choices=[o.value for o in Orientation], default=Orientation.SAMPLES_AS_ROWS.value)
    args = ap.parse_args()
    m = load_matrix_csv(args.inp, args.orientation)
    print(f"[data-io] {args.inp}: n={m.values.shape[0]} d={m.values.shape[1]} "
          f"labels={'yes' if m.sample_labels is not None else 'no'}")


if __name__ == "__main__":
    main()
