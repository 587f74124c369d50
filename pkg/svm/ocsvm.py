# svm/ocsvm.py
"""
Two-sample testing with a one-class SVM on the RKHS of sets.

    1. draw training subsets X_1..X_l of the training sample X
    2. solve the dual over the precomputed Set-Kernel Gram (svm/smo.py)
    3. pick the bias rho
    f(Y) = sign( sum_i a_i K(X_i, Y) - rho ),  ties (score == 0) count as Same

Examples:
python -m svm.ocsvm --train data/sim/p_samples.csv --model-out data/models/p.model --sigma 10 --seed 7
"""
from __future__ import annotations

import argparse
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from etl.rng import make_rng
from kernels.base_kernel import BaseKernelSpec
from kernels.common import Decision, InsufficientData, OutputExists, SetTestError, setup_logger
from kernels.mmd_test import order_statistic_index
from kernels.set_kernel import PointGramCache, SampleSet, SetGram, cross_set_kernel, set_gram
from svm import smo

logger = setup_logger("ocsvm")

MODEL_MAGIC = "# setsvm-model v1"
KKT_DERIVED = "kkt"
CROSS_VALIDATED = "cross_validated"
RANDOM_SUBSETS = "random"
NESTED_SUBSETS = "nested"
MARGIN_SLACK = 1e-7


@dataclass(frozen=True)
class RhoCalibration:
    mode: str = CROSS_VALIDATED
    target_alpha: float = 0.05
    folds: int = 1  # 1 = validation subsets drawn from X and scored by the final model
    validation_subsets: int = 200

    def __post_init__(self):
        if self.mode not in (KKT_DERIVED, CROSS_VALIDATED):
            raise SetTestError(f"unknown rho calibration '{self.mode}'")
        if self.mode == CROSS_VALIDATED:
            if not 0 < self.target_alpha < 1:
                raise SetTestError(f"target_alpha must lie in (0, 1), got {self.target_alpha}")
            if self.folds < 1 or self.validation_subsets < 1:
                raise SetTestError("folds and validation_subsets must be >= 1")


@dataclass(frozen=True)
class OcsvmConfig:
    nu: float = 0.1
    subset_count: int = 100
    set_size: int = 7
    solver_tolerance: float = 1e-6
    max_iterations: int | None = None  # None -> 100000 * l
    rho_calibration: RhoCalibration = field(default_factory=RhoCalibration)
    subset_mode: str = RANDOM_SUBSETS

    def __post_init__(self):
        if self.subset_count < 1 or self.set_size < 1:
            raise SetTestError("subset_count and set_size must be >= 1")
        if self.subset_mode not in (RANDOM_SUBSETS, NESTED_SUBSETS):
            raise SetTestError(f"unknown subset mode '{self.subset_mode}'")
        smo.box_bound(self.nu, self.subset_count)  # raises InfeasibleNu

    @property
    def box(self) -> float:
        return smo.box_bound(self.nu, self.subset_count)

    def snapshot(self) -> dict:
        rc = self.rho_calibration
        return {
            "nu": self.nu, "subset_count": self.subset_count, "set_size": self.set_size,
            "solver_tolerance": self.solver_tolerance,
            "max_iterations": self.max_iterations if self.max_iterations is not None else 100_000 * self.subset_count,
            "subset_mode": self.subset_mode, "rho_mode": rc.mode, "rho_target_alpha": rc.target_alpha,
            "rho_folds": rc.folds, "rho_validation_subsets": rc.validation_subsets,
        }


class DualSolution(NamedTuple):
    alphas: np.ndarray
    objective: float
    iterations: int
    kkt_gap: float


class RhoResult(NamedTuple):
    rho: float
    method: str
    fallback: bool
    validation_scores: np.ndarray | None


@dataclass(frozen=True, eq=False)
class OcsvmModel:
    alphas: np.ndarray
    rho: float
    training_subsets: list
    kernel: BaseKernelSpec
    objective_value: float
    nu: float
    set_size: int
    rho_method: str = CROSS_VALIDATED
    rho_fallback: bool = False

    @property
    def dim(self) -> int:
        return self.training_subsets[0].dim

    def raw_scores(self, sets: Sequence[SampleSet], cache: PointGramCache | None = None) -> np.ndarray:
        """sum_i a_i K(X_i, Y) for every Y, without the bias."""
        K = cross_set_kernel(self.training_subsets, list(sets), self.kernel, cache=cache)
        # row-wise accumulation: every column is summed in the same order
        return (self.alphas[:, None] * K).sum(axis=0)

    def scores(self, sets: Sequence[SampleSet], cache: PointGramCache | None = None) -> np.ndarray:
        return self.raw_scores(sets, cache) - self.rho

    def with_rho(self, rho: float, method: str, fallback: bool = False) -> "OcsvmModel":
        return OcsvmModel(self.alphas, float(rho), self.training_subsets, self.kernel, self.objective_value,
                          self.nu, self.set_size, method, fallback)

    # ---------- persistence ----------
    def save(self, path, force: bool = False) -> Path:
        p = Path(path)
        if p.exists() and not force:
            raise OutputExists(f"{p} exists (use --force to overwrite)")
        lines = [
            MODEL_MAGIC,
            f"nu={self.nu!r}",
            f"l={len(self.alphas)}",
            f"set_size={self.set_size}",
            f"sigma={self.kernel.sigma!r}",
            f"rho={self.rho!r}",
            f"objective={self.objective_value!r}",
            f"rho_method={self.rho_method}",
            f"rho_fallback={int(self.rho_fallback)}",
            f"dim={self.dim}",
            "alphas " + " ".join(repr(float(a)) for a in self.alphas),
        ]
        for s in self.training_subsets:
            lines.append(f"subset {s.n}")
            lines.extend(" ".join(repr(float(v)) for v in row) for row in s.points)
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text("\n".join(lines) + "\n")
        return p

    @classmethod
    def load(cls, path) -> "OcsvmModel":
        p = Path(path)
        lines = p.read_text().splitlines()
        if not lines or lines[0].strip() != MODEL_MAGIC:
            raise SetTestError(f"{p}: not a set-SVM model (missing '{MODEL_MAGIC}' header)")
        head, pos = {}, 1
        while pos < len(lines) and "=" in lines[pos] and not lines[pos].startswith("alphas"):
            k, v = lines[pos].split("=", 1)
            head[k.strip()] = v.strip()
            pos += 1
        if pos >= len(lines) or not lines[pos].startswith("alphas"):
            raise SetTestError(f"{p}: missing alphas line")
        alphas = np.array([float(v) for v in lines[pos].split()[1:]])
        pos += 1
        subsets = []
        while pos < len(lines):
            tag, n = lines[pos].split()
            if tag != "subset":
                raise SetTestError(f"{p}: line {pos + 1}: expected 'subset <n>'")
            n = int(n)
            rows = [[float(v) for v in lines[pos + 1 + r].split()] for r in range(n)]
            subsets.append(SampleSet(np.array(rows), label=f"X{len(subsets) + 1}"))
            pos += 1 + n
        if len(subsets) != len(alphas):
            raise SetTestError(f"{p}: {len(alphas)} alphas but {len(subsets)} subsets")
        return cls(alphas=alphas, rho=float(head["rho"]), training_subsets=subsets,
                   kernel=BaseKernelSpec(sigma=float(head["sigma"])),
                   objective_value=float(head["objective"]), nu=float(head["nu"]),
                   set_size=int(head["set_size"]), rho_method=head.get("rho_method", CROSS_VALIDATED),
                   rho_fallback=bool(int(head.get("rho_fallback", "0"))))


# ---------- subsets ----------
def _as_rng(rng) -> np.random.Generator:
    return rng if isinstance(rng, np.random.Generator) else make_rng(int(rng))


def sample_subsets(X: SampleSet, l: int, set_size: int, rng) -> list[SampleSet]:
    """l independent uniform draws (without replacement) of set_size points.

    rng is a Generator or an integer seed.
    """
    rng = _as_rng(rng)
    if set_size < 1 or l < 1:
        raise SetTestError("l and set_size must be >= 1")
    if set_size > X.n:
        raise InsufficientData(f"set_size {set_size} exceeds the {X.n} available points")
    return [X.subset(rng.choice(X.n, size=set_size, replace=False), label=f"X{i + 1}") for i in range(l)]


def nested_subsets(X: SampleSet, l: int, rng) -> list[SampleSet]:
    """X_1 c X_2 c ... c X_l = X over a random ordering of X."""
    rng = _as_rng(rng)
    if l < 1:
        raise SetTestError("l must be >= 1")
    order = rng.permutation(X.n)
    sizes = [max(1, math.ceil((k + 1) * X.n / l)) for k in range(l)]
    return [X.subset(order[:s], label=f"X{k + 1}") for k, s in enumerate(sizes)]


def make_subsets(X: SampleSet, config: OcsvmConfig, rng: np.random.Generator) -> list[SampleSet]:
    if config.subset_mode == NESTED_SUBSETS:
        return nested_subsets(X, config.subset_count, rng)
    return sample_subsets(X, config.subset_count, config.set_size, rng)


# ---------- dual ----------
def solve_dual(gram: SetGram, config: OcsvmConfig, track_objective: bool = False) -> DualSolution:
    res = smo.solve(gram.values, config.nu, tol=config.solver_tolerance,
                    max_iter=config.max_iterations, track_objective=track_objective)
    return DualSolution(res.alphas, res.objective, res.iterations, res.kkt_gap)


# ---------- rho ----------
def kkt_rho(alphas: np.ndarray, gram: SetGram, nu: float) -> RhoResult:
    C = smo.box_bound(nu, len(alphas))
    scores = gram.values @ alphas
    margin = (alphas > MARGIN_SLACK) & (alphas < C - MARGIN_SLACK)
    if margin.any():
        return RhoResult(float(np.median(scores[margin])), KKT_DERIVED, False, None)
    logger.info("no margin support vectors; rho falls back to the alpha-weighted mean score")
    return RhoResult(float(alphas @ scores), KKT_DERIVED, True, None)


def _fold_count(n: int, set_size: int, folds: int) -> int:
    eff = min(folds, n // set_size) if folds > 1 else 1
    if eff < folds:
        logger.info(f"rho cross-validation: {n} points with set size {set_size} allow {max(eff, 1)} fold(s), not {folds}")
    return max(eff, 1)


def validation_scores(model: OcsvmModel, X: SampleSet, config: OcsvmConfig, seed: int,
                      cache: PointGramCache | None = None) -> np.ndarray:
    rc = config.rho_calibration
    folds = _fold_count(X.n, config.set_size, rc.folds)
    if folds == 1:
        V = sample_subsets(X, rc.validation_subsets, config.set_size, make_rng(seed, 1))
        return model.raw_scores(V, cache)

    order = make_rng(seed, 2).permutation(X.n)
    parts = np.array_split(order, folds)
    counts = [rc.validation_subsets // folds + (f < rc.validation_subsets % folds) for f in range(folds)]
    pooled = []
    for f, (held, count) in enumerate(zip(parts, counts)):
        if count == 0:
            continue
        rest = np.setdiff1d(order, held, assume_unique=True)
        fold_model = fit_alphas(X.subset(np.sort(rest)), config, model.kernel, make_rng(seed, 3, f), cache)
        V = sample_subsets(X.subset(np.sort(held)), count, config.set_size, make_rng(seed, 4, f))
        pooled.append(fold_model.raw_scores(V, cache))
    return np.concatenate(pooled)


def compute_rho(model: OcsvmModel, gram: SetGram, config: OcsvmConfig,
                X: SampleSet | None = None, seed: int = 0, cache: PointGramCache | None = None) -> RhoResult:
    rc = config.rho_calibration
    if rc.mode == KKT_DERIVED:
        return kkt_rho(model.alphas, gram, config.nu)
    if X is None:
        raise SetTestError("cross-validated rho needs the training sample")
    scores = validation_scores(model, X, config, seed, cache)
    k = order_statistic_index(rc.target_alpha, scores.size)
    rho = float(np.sort(scores)[k - 1])
    return RhoResult(rho, CROSS_VALIDATED, False, scores)


# ---------- training / decisions ----------
def fit_alphas(X: SampleSet, config: OcsvmConfig, spec: BaseKernelSpec,
               rng: np.random.Generator, cache: PointGramCache | None = None) -> OcsvmModel:
    subsets = make_subsets(X, config, rng)
    sol = solve_dual(set_gram(subsets, spec, cache), config)
    return OcsvmModel(sol.alphas, 0.0, subsets, spec, sol.objective, config.nu, config.set_size)


def train(X: SampleSet, config: OcsvmConfig, spec: BaseKernelSpec, seed: int,
          cache: PointGramCache | None = None) -> OcsvmModel:
    if X.n < config.set_size:
        raise InsufficientData(f"training sample has {X.n} points, set size is {config.set_size}")
    subsets = make_subsets(X, config, make_rng(seed, 0))
    gram = set_gram(subsets, spec, cache)
    sol = solve_dual(gram, config)
    model = OcsvmModel(sol.alphas, 0.0, subsets, spec, sol.objective, config.nu, config.set_size)
    rr = compute_rho(model, gram, config, X=X, seed=seed, cache=cache)
    logger.debug(f"trained set-SVM: l={len(subsets)} iterations={sol.iterations} rho={rr.rho:.6g} ({rr.method})")
    return model.with_rho(rr.rho, rr.method, rr.fallback)


def decide(model: OcsvmModel, Y: SampleSet) -> tuple[Decision, float]:
    score = float(model.scores([Y])[0])
    return (Decision.SAME if score >= 0 else Decision.DIFFERENT), score


def decide_many(model: OcsvmModel, sets: Sequence[SampleSet],
                cache: PointGramCache | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Boolean 'Different' mask and scores for a batch of test sets."""
    scores = model.scores(sets, cache)
    return ~(scores >= 0), scores


# ---------- CLI ----------
def main(argv=None):
    from etl.data_io import load_matrix_csv

    ap = argparse.ArgumentParser(description="Train a one-class SVM over random subsets (Set-Kernel)")
    ap.add_argument("--train", required=True, help="CSV of training samples (rows = samples)")
    ap.add_argument("--model-out", required=True)
    ap.add_argument("--sigma", type=float, default=10.0)
    ap.add_argument("--nu", type=float, default=0.1)
    ap.add_argument("--subsets", type=int, default=100)
    ap.add_argument("--set-size", type=int, default=7)
    ap.add_argument("--rho", choices=[CROSS_VALIDATED, KKT_DERIVED], default=CROSS_VALIDATED)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--force", action="store_true", help="overwrite an existing model file")
    args = ap.parse_args(argv)

    X = SampleSet(load_matrix_csv(args.train).values, label="train")
    cfg = OcsvmConfig(nu=args.nu, subset_count=args.subsets, set_size=args.set_size,
                      rho_calibration=RhoCalibration(mode=args.rho))
    model = train(X, cfg, BaseKernelSpec(args.sigma), args.seed)
    out = model.save(args.model_out, force=args.force)
    print(f"[ocsvm] wrote model -> {out}")


if __name__ == "__main__":
    main()
