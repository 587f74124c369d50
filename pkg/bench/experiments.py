# bench/experiments.py
"""
Benchmark harness: reruns the simulated Gaussian study and the expression study
end to end and aggregates type-I / type-II rates into a TestReport.

Per (dimension, repetition) every consumer draws from its own Philox stream,
so results do not depend on the order or the number of workers.

Examples:
python -m bench.experiments gaussian --preset table1 --reps 5 --out data/reports/table1.yml
python -m bench.experiments expression --fixture colon --reps 5 --out data/reports/colon.yml
"""
from __future__ import annotations

import argparse
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import NamedTuple

import numpy as np
import yaml

from bench.report import F_TEST, METHODS, MMD, SVM_SET, T_TEST, MethodRecord, TestReport, writable_path
from etl.data_io import DatasetSplit, sample_gaussian
from etl.rng import (
    PRNG_NAME,
    STREAM_BASELINE,
    STREAM_DATA_P,
    STREAM_DATA_Q,
    STREAM_MMD,
    STREAM_SVM,
    STREAM_TRIALS,
    child_seed,
    make_rng,
)
from kernels.base_kernel import BaseKernelSpec, median_heuristic_spec
from kernels.common import Decision, InsufficientData, SetTestError, setup_logger
from kernels.mmd_test import bootstrap_threshold, mmd_two_sample_test
from kernels.set_kernel import PointGramCache, SampleSet
from stats.classical_tests import UNION_RULE_NOTE, TestKind, union_reject
from svm.ocsvm import OcsvmConfig, RhoCalibration, decide_many, train

# progress bar (noop fallback if tqdm missing)
try:
    from tqdm import tqdm
except Exception:  # pragma: no cover
    def tqdm(x=None, **k):  # type: ignore
        return x

logger = setup_logger("experiments")

BENCHMARK_CFG = Path(__file__).resolve().parent / "benchmark.yml"
UNION_CELLS = 2_000_000  # floats per union-test batch
TRIALS_NOTE = ("each repetition evaluates `trials` null and `trials` alternative test sets; every test set "
               "is drawn without replacement from the held-out pool, independently per trial")
EXPRESSION_NOTE = ("synthetic shape-matched fixture: SVM and T-test patterns are comparable, "
                   "MMD percentages are not reproducible without the original gene data")


class RepetitionFailed(SetTestError):
    def __init__(self, dim: int, rep: int, cause: Exception):
        super().__init__(f"dimension {dim}, repetition {rep}: {cause}")
        self.dim, self.rep = dim, rep


@dataclass(frozen=True)
class BenchmarkConfig:
    n_train: int = 250
    n_null: int = 1000
    n_alt: int = 1000
    trials: int = 1000
    set_size: int = 7
    alpha: float = 0.05
    bootstrap_iters: int = 100
    svm_sigma: float = 10.0
    mmd_sigma: float | None = None  # None -> median heuristic on the training sample
    methods: tuple = (SVM_SET, MMD, F_TEST)
    svm: OcsvmConfig = field(default_factory=OcsvmConfig)
    workers: int = 1
    trace: int = 0  # MMD trials kept per repetition for later recomputation

    def __post_init__(self):
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise SetTestError(f"unknown methods {sorted(unknown)} (known: {', '.join(METHODS)})")
        if min(self.n_train, self.n_null, self.n_alt, self.trials, self.set_size, self.bootstrap_iters) < 1:
            raise SetTestError("sample sizes, trials, set_size and bootstrap_iters must be >= 1")
        if not 0 < self.alpha < 1:
            raise SetTestError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.svm.set_size != self.set_size:
            object.__setattr__(self, "svm", replace(self.svm, set_size=self.set_size))

    def snapshot(self) -> dict:
        return {
            "n_train": self.n_train, "n_null": self.n_null, "n_alt": self.n_alt, "trials": self.trials,
            "set_size": self.set_size, "alpha": self.alpha, "bootstrap_iters": self.bootstrap_iters,
            "svm_sigma": self.svm_sigma, "mmd_sigma": "median" if self.mmd_sigma is None else self.mmd_sigma,
            "methods": list(self.methods), "svm": self.svm.snapshot(), "workers": self.workers,
        }

    def method_config(self, method: str) -> dict:
        if method == SVM_SET:
            return {"sigma": self.svm_sigma, **self.svm.snapshot()}
        if method == MMD:
            return {"sigma": "median" if self.mmd_sigma is None else self.mmd_sigma,
                    "bootstrap_iters": self.bootstrap_iters, "alpha": self.alpha, "set_size": self.set_size}
        return {"alpha": self.alpha, "rule": "union"}


def load_benchmark_config(section: str, overrides: dict | None = None, path=BENCHMARK_CFG) -> tuple[BenchmarkConfig, dict]:
    """BenchmarkConfig from benchmark.yml[section] with overrides applied; also returns the raw section."""
    raw = (yaml.safe_load(Path(path).read_text()) or {}).get(section) or {}
    o = dict(overrides or {})
    svm_raw = {**(raw.get("svm") or {}), **(o.pop("svm", None) or {})}
    merged = {**raw, **{k: v for k, v in o.items() if v is not None}}
    svm = OcsvmConfig(
        nu=float(svm_raw.get("nu", 0.1)), subset_count=int(svm_raw.get("subset_count", 100)),
        set_size=int(merged.get("set_size", 7)), subset_mode=svm_raw.get("subset_mode", "random"),
        rho_calibration=RhoCalibration(mode=svm_raw.get("rho", "cross_validated"),
                                       target_alpha=float(svm_raw.get("target_alpha", 0.05)),
                                       folds=int(svm_raw.get("folds", 1)),
                                       validation_subsets=int(svm_raw.get("validation_subsets", 200))),
    )
    mmd_sigma = merged.get("mmd_sigma", "median")
    cfg = BenchmarkConfig(
        n_train=int(merged.get("n_train", 250)), n_null=int(merged.get("n_null", 1000)),
        n_alt=int(merged.get("n_alt", 1000)), trials=int(merged.get("trials", 1000)),
        set_size=int(merged.get("set_size", 7)), alpha=float(merged.get("alpha", 0.05)),
        bootstrap_iters=int(merged.get("bootstrap_iters", 100)), svm_sigma=float(merged.get("svm_sigma", 10.0)),
        mmd_sigma=None if mmd_sigma in (None, "median") else float(mmd_sigma),
        methods=tuple(merged.get("methods", (SVM_SET, MMD, F_TEST))), svm=svm,
        workers=int(merged.get("workers", 1)), trace=int(merged.get("trace", 0)),
    )
    return cfg, raw


# ---------- one repetition ----------
class Counts(NamedTuple):
    null_rejections: int
    null_trials: int
    alt_acceptances: int
    alt_trials: int


class RepOutcome(NamedTuple):
    dim: int
    rep: int
    counts: dict  # method -> Counts
    notes: list
    mmd_trace: list


def rep_seed(seed: int, dim: int, rep: int) -> int:
    return child_seed(make_rng(seed, dim, rep))


def draw_test_sets(pool: SampleSet, count: int, set_size: int, rng: np.random.Generator, side: str) -> list[SampleSet]:
    if set_size > pool.n:
        raise InsufficientData(f"{side} pool has {pool.n} points, set size is {set_size}")
    return [pool.subset(rng.choice(pool.n, size=set_size, replace=False), label=f"{side}{t}") for t in range(count)]


def _union_rejections(train: SampleSet, sets: list[SampleSet], base: TestKind, alpha: float) -> int:
    per = max(1, UNION_CELLS // (sets[0].n * sets[0].dim))
    total = 0
    for start in range(0, len(sets), per):
        stack = np.stack([s.points for s in sets[start:start + per]])
        total += int(union_reject(train.points, stack, base, alpha).sum())
    return total


def evaluate_repetition(train_set: SampleSet, null_pool: SampleSet, alt_pool: SampleSet, cfg: BenchmarkConfig,
                        seed: int, dim: int, rep: int, svm_cache: PointGramCache | None = None,
                        mmd_spec: BaseKernelSpec | None = None,
                        mmd_cache: PointGramCache | None = None) -> RepOutcome:
    """Train every method on train_set, then count decisions on fresh null / alternative test sets."""
    trial_rng = make_rng(seed, STREAM_TRIALS)
    null_sets = draw_test_sets(null_pool, cfg.trials, cfg.set_size, trial_rng, "null")
    alt_sets = draw_test_sets(alt_pool, cfg.trials, cfg.set_size, trial_rng, "alt")
    counts, notes, trace = {}, [], []

    if SVM_SET in cfg.methods:
        model = train(train_set, cfg.svm, BaseKernelSpec(cfg.svm_sigma), child_seed(make_rng(seed, STREAM_SVM)),
                      cache=svm_cache)
        if model.rho_fallback:
            notes.append(f"{SVM_SET}: rho fell back to the alpha-weighted mean (dim {dim}, rep {rep})")
        diff_null, _ = decide_many(model, null_sets, svm_cache)
        diff_alt, _ = decide_many(model, alt_sets, svm_cache)
        counts[SVM_SET] = Counts(int(diff_null.sum()), len(null_sets), int((~diff_alt).sum()), len(alt_sets))

    if MMD in cfg.methods:
        spec = mmd_spec or (BaseKernelSpec(cfg.mmd_sigma) if cfg.mmd_sigma is not None
                            else median_heuristic_spec(train_set.points))
        threshold = bootstrap_threshold(train_set, cfg.set_size, cfg.alpha, cfg.bootstrap_iters, spec,
                                        child_seed(make_rng(seed, STREAM_MMD)), cache=mmd_cache)
        test_rng = make_rng(seed, STREAM_BASELINE)
        rejected = {"null": 0, "alt": 0}
        for side, sets in (("null", null_sets), ("alt", alt_sets)):
            for t, Y in enumerate(sets):
                res = mmd_two_sample_test(train_set, Y, threshold, spec, test_rng, cache=mmd_cache)
                rejected[side] += res.decision == Decision.DIFFERENT
                if t < cfg.trace:
                    trace.append({"dim": dim, "rep": rep, "side": side, "sigma": spec.sigma,
                                  "x_ids": res.subset_index.tolist(), "y_ids": Y.row_ids().tolist(),
                                  "statistic": res.statistic})
        counts[MMD] = Counts(rejected["null"], len(null_sets), len(alt_sets) - rejected["alt"], len(alt_sets))

    for method, kind in ((F_TEST, TestKind.F_TEST), (T_TEST, TestKind.T_TEST)):
        if method in cfg.methods:
            r_null = _union_rejections(train_set, null_sets, kind, cfg.alpha)
            r_alt = _union_rejections(train_set, alt_sets, kind, cfg.alpha)
            counts[method] = Counts(r_null, len(null_sets), len(alt_sets) - r_alt, len(alt_sets))

    return RepOutcome(dim, rep, counts, notes, trace)


# ---------- Gaussian study ----------
def gaussian_rep_data(dim: int, sigma1: float, sigma2: float, cfg: BenchmarkConfig, seed: int):
    """(train, null pool, alternative pool); ids of the first two index one P draw."""
    p_draw = sample_gaussian(np.zeros(dim), sigma1, cfg.n_train + cfg.n_null, make_rng(seed, STREAM_DATA_P), "P")
    q_draw = sample_gaussian(np.zeros(dim), sigma2, cfg.n_alt, make_rng(seed, STREAM_DATA_Q), "Q")
    train_set = p_draw.subset(np.arange(cfg.n_train), label="train")
    null_pool = p_draw.subset(np.arange(cfg.n_train, p_draw.n), label="null_pool")
    alt_pool = q_draw.subset(np.arange(q_draw.n), label="alt_pool")
    return train_set, null_pool, alt_pool


def _gaussian_task(args) -> RepOutcome:
    dim, rep, sigma1, sigma2, cfg, seed = args
    s = rep_seed(seed, dim, rep)
    train_set, null_pool, alt_pool = gaussian_rep_data(dim, sigma1, sigma2, cfg, s)
    return evaluate_repetition(train_set, null_pool, alt_pool, cfg, s, dim, rep)


def _run_tasks(tasks: list, fn, workers: int, desc: str) -> list[RepOutcome]:
    outcomes = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(fn, t): t for t in tasks}
            for fut in tqdm(as_completed(futures), total=len(futures), desc=desc):
                dim, rep = futures[fut][:2]
                try:
                    outcomes.append(fut.result())
                except SetTestError as e:
                    raise RepetitionFailed(dim, rep, e) from e
    else:
        for t in tqdm(tasks, desc=desc):
            try:
                outcomes.append(fn(t))
            except SetTestError as e:
                raise RepetitionFailed(t[0], t[1], e) from e
    return sorted(outcomes, key=lambda o: (o.dim, o.rep))


def _aggregate(outcomes: list[RepOutcome], cfg: BenchmarkConfig, dims: list[int], reps: int, seed: int,
               protocol: str, metadata: dict, config: dict) -> TestReport:
    records = []
    for dim in dims:
        mine = [o for o in outcomes if o.dim == dim]
        for method in cfg.methods:
            c = [o.counts[method] for o in mine]
            records.append(MethodRecord(
                method=method, dimension=dim, repetitions=reps,
                null_rejections=sum(x.null_rejections for x in c), null_trials=sum(x.null_trials for x in c),
                alt_acceptances=sum(x.alt_acceptances for x in c), alt_trials=sum(x.alt_trials for x in c),
                seed=seed, config=cfg.method_config(method),
                notes=[n for o in mine for n in o.notes if n.startswith(method)],
            ))
    meta = {**metadata, "prng": PRNG_NAME, "trials_reading": TRIALS_NOTE}
    if any(m in cfg.methods for m in (F_TEST, T_TEST)):
        meta["baseline_rule"] = UNION_RULE_NOTE
    if cfg.trace:
        meta["mmd_trace"] = [e for o in outcomes for e in o.mmd_trace]
    return TestReport(protocol=protocol, seed=seed, records=records, metadata=meta, config=config)


def run_gaussian_benchmark(dims: list[int], sigma1: float, sigma2: float, reps: int,
                           cfg: BenchmarkConfig, seed: int) -> TestReport:
    if reps < 1 or not dims:
        raise SetTestError("need at least one dimension and one repetition")
    tasks = [(dim, rep, sigma1, sigma2, cfg, seed) for dim in dims for rep in range(reps)]
    outcomes = _run_tasks(tasks, _gaussian_task, cfg.workers, "Gaussian reps")
    config = {"dims": list(dims), "sigma1": sigma1, "sigma2": sigma2, "reps": reps, "seed": seed, **cfg.snapshot()}
    report = _aggregate(outcomes, cfg, list(dims), reps, seed, "gaussian", {}, config)
    logger.info(f"Gaussian benchmark done: {len(dims)} dimension(s) x {reps} repetition(s)")
    return report


# ---------- expression study ----------
def run_expression_benchmark(split: DatasetSplit, cfg: BenchmarkConfig, reps: int, seed: int,
                             name: str = "expression") -> TestReport:
    """Trains on the train positives; type-I from leave-out positives, type-II from negatives."""
    if reps < 1:
        raise SetTestError("need at least one repetition")
    if split.leaveout_positive is None:
        raise InsufficientData("expression benchmark needs leave-out positives for the type-I error")
    cfg = replace(cfg, set_size=split.set_size, svm=replace(cfg.svm, set_size=split.set_size))
    parts = (split.train_positive, split.leaveout_positive, split.test_negative)
    universe = SampleSet(np.vstack([p.points for p in parts]), label=name)
    offsets = np.cumsum([0] + [p.n for p in parts])
    train_set, null_pool, alt_pool = (universe.subset(np.arange(offsets[i], offsets[i + 1]), label=lbl)
                                      for i, lbl in enumerate(("train", "null_pool", "alt_pool")))

    svm_cache = PointGramCache(universe, BaseKernelSpec(cfg.svm_sigma)) if SVM_SET in cfg.methods else None
    mmd_spec = mmd_cache = None
    if MMD in cfg.methods:
        mmd_spec = BaseKernelSpec(cfg.mmd_sigma) if cfg.mmd_sigma is not None else median_heuristic_spec(train_set.points)
        mmd_cache = PointGramCache(universe, mmd_spec)

    dim = universe.dim
    outcomes = []
    for rep in tqdm(range(reps), desc=f"{name} reps"):
        try:
            outcomes.append(evaluate_repetition(train_set, null_pool, alt_pool, cfg, rep_seed(seed, dim, rep),
                                                dim, rep, svm_cache, mmd_spec, mmd_cache))
        except SetTestError as e:
            raise RepetitionFailed(dim, rep, e) from e
    config = {"dataset": name, "reps": reps, "seed": seed, "split_seed": split.seed,
              "train_positive": split.train_positive.n, "leaveout_positive": split.leaveout_positive.n,
              "test_negative": split.test_negative.n, **cfg.snapshot()}
    return _aggregate(outcomes, cfg, [dim], reps, seed, f"expression:{name}", {"data": EXPRESSION_NOTE}, config)


def main(argv=None):
    from etl.data_io import split_dataset
    from etl.fixtures import load_fixture

    ap = argparse.ArgumentParser(description="Run the Gaussian or expression benchmark")
    sub = ap.add_subparsers(dest="study", required=True)
    g = sub.add_parser("gaussian")
    g.add_argument("--preset", default="quick")
    g.add_argument("--reps", type=int)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--workers", type=int, default=1)
    g.add_argument("--out", default="data/reports/gaussian.yml")
    e = sub.add_parser("expression")
    e.add_argument("--fixture", default="colon")
    e.add_argument("--reps", type=int, default=5)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--out", default="data/reports/expression.yml")
    for p in (g, e):
        p.add_argument("--force", action="store_true", help="overwrite an existing report")
    args = ap.parse_args(argv)
    out = writable_path(args.out, args.force)

    if args.study == "gaussian":
        cfg, raw = load_benchmark_config("gaussian", {"workers": args.workers})
        preset = (raw.get("presets") or {})[args.preset]
        report = run_gaussian_benchmark(preset["dims"], preset["sigma1"], preset["sigma2"],
                                        args.reps or preset["reps"], cfg, args.seed)
    else:
        cfg, _ = load_benchmark_config("expression")
        spec, pos, neg = load_fixture(args.fixture)
        split = split_dataset(pos, neg, spec.counts, args.seed)
        report = run_expression_benchmark(split, cfg, args.reps, args.seed, args.fixture)
    report.to_yaml(out, force=True)
    print("\n".join(report.summary_lines()))
    print(f"[experiments] wrote -> {out}")


if __name__ == "__main__":
    main()
