"""Parameter sweeps over the transform-then-classify pipeline.

A sweep evaluates a grid of (variant, p, n, k, noise) points, each
averaged over repeats with a fresh projection matrix per repeat, and
emits figure-ready tables. The canonical baseline (no noise, no
transform) is computed once per sweep and echoed in every report.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import data, svm
from .data import FeatureDataset, SplitSpec
from .reporting import atomic_write_text, records_to_csv_text, to_json_text
from .seeding import check_seed, derive_seed
from .svm import TrainSpec
from .transform import Transform, TransformConfig, build

VARIANTS = ("baseline", "project", "cap")

# stream tags inside one (grid point, repeat) cell
_TAG_NOISE = 0
_TAG_MATRIX = 1
# reserved grid slot for the canonical baseline (real points use gi + 1)
_BASELINE_SLOT = 0


@dataclass(frozen=True)
class SynthSpec:
    """Synthetic stand-in dataset: Gaussian blobs shaped like the
    10-genre, 100-per-class, 433-dimensional benchmark. The default
    scale/noise pair puts the held-out baseline comfortably above 0.9."""

    num_classes: int = 10
    per_class: int = 100
    dim: int = 433
    center_scale: float = 1.5
    noise_sigma: float = 0.3
    seed: int = 7


@dataclass(frozen=True)
class GridPoint:
    """One sweep cell. variant selects the pipeline:

    - "baseline": classify raw features (p, n, k ignored)
    - "project":  projection only, no cap (k ignored)
    - "cap":      projection followed by the k-cap
    noise_sigma is the Gaussian noise added to raw features first.
    """

    variant: str
    p: float | None = None
    n: int | None = None
    k: int | None = None
    noise_sigma: float = 0.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.noise_sigma < 0.0:
            raise ValueError("noise_sigma must be non-negative")
        if self.variant != "baseline":
            if self.p is None or self.n is None:
                raise ValueError(f"variant {self.variant!r} needs p and n")
            if not 0.0 < self.p < 1.0:
                raise ValueError(f"p must lie in (0, 1), got {self.p}")
            if self.n < 1:
                raise ValueError(f"n must be positive, got {self.n}")
        if self.variant == "cap":
            if self.k is None or self.k < 0:
                raise ValueError("cap variant needs k >= 0")


@dataclass(frozen=True)
class SweepSpec:
    """Sweep inputs: dataset source, grid, repeats, split/train recipe."""

    grid: tuple[GridPoint, ...]
    dataset_path: str | None = None
    synth: SynthSpec | None = None
    repeats: int = 5
    split: SplitSpec = SplitSpec(train_fraction=0.8, seed=0, stratified=True)
    train: TrainSpec = TrainSpec()
    seed: int = 42

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple(self.grid))
        if not self.grid:
            raise ValueError("grid must be nonempty")
        if (self.dataset_path is None) == (self.synth is None):
            raise ValueError("exactly one of dataset_path or synth must be given")
        if self.repeats < 1:
            raise ValueError(f"repeats must be >= 1, got {self.repeats}")
        check_seed(self.seed)


@dataclass
class ExperimentReport:
    spec_echo: dict
    baseline: dict
    records: list[dict] = field(default_factory=list)

    def to_json_obj(self) -> dict:
        return {
            "spec": self.spec_echo,
            "baseline": self.baseline,
            "records": self.records,
        }

    def write_json(self, path, header_line: str | None = None) -> None:
        atomic_write_text(path, to_json_text(self.to_json_obj()), header_line)


class SweepError(RuntimeError):
    pass


def _load_source(spec: SweepSpec) -> FeatureDataset:
    if spec.dataset_path is not None:
        return data.load_csv(spec.dataset_path)
    s = spec.synth
    return data.synth_blobs(
        s.num_classes, s.per_class, s.dim, s.center_scale, s.noise_sigma, s.seed
    )


def _run_cell(
    base: FeatureDataset, point: GridPoint, spec: SweepSpec, slot: int, repeat: int
) -> tuple[float, float, float]:
    """One (grid point, repeat) pipeline run.

    Returns (accuracy, train_seconds, nonzero_fraction). All randomness
    is derived from (spec seed, slot, repeat); the split stream is
    shared across grid points of the same repeat so variants are
    compared on identical partitions.
    """
    if point.noise_sigma > 0.0:
        noisy = data.add_noise(
            base, point.noise_sigma, derive_seed(spec.seed, slot, repeat, _TAG_NOISE)
        )
    else:
        noisy = base

    if point.variant == "baseline":
        features = noisy.features
    else:
        cap_k = point.n if point.variant == "project" else min(point.k, point.n)
        config = TransformConfig(
            input_dim=base.dim,
            output_dim=point.n,
            bernoulli_p=point.p,
            cap_k=cap_k,
            seed=derive_seed(spec.seed, slot, repeat, _TAG_MATRIX),
        )
        features = build(config).forward_batch(noisy.features)
    working = FeatureDataset(features, noisy.labels, noisy.class_names)
    sparsity = float(np.mean(working.features != 0.0))

    split_spec = SplitSpec(
        train_fraction=spec.split.train_fraction,
        seed=derive_seed(spec.split.seed, repeat),
        stratified=spec.split.stratified,
    )
    train_set, test_set = data.split(working, split_spec)
    train_z, test_z, _, _ = data.standardize(train_set, test_set)
    train_spec = TrainSpec(
        lambda_=spec.train.lambda_,
        epochs=spec.train.epochs,
        seed=derive_seed(spec.train.seed, slot, repeat),
    )
    started = time.perf_counter()
    model = svm.train(train_z, train_spec)
    train_seconds = time.perf_counter() - started
    return svm.evaluate(model, test_z), train_seconds, sparsity


def _summarize(base, point, spec, slot) -> dict:
    accs, times, sparsities = [], [], []
    for repeat in range(spec.repeats):
        acc, secs, sparsity = _run_cell(base, point, spec, slot, repeat)
        accs.append(acc)
        times.append(secs)
        sparsities.append(sparsity)
    accs = np.array(accs)
    return {
        "p": point.p,
        "n": point.n,
        "k": point.k if point.variant == "cap" else None,
        "sigma": point.noise_sigma,
        "variant": point.variant,
        "acc_mean": float(accs.mean()),
        "acc_std": float(accs.std(ddof=0)),
        "train_seconds": float(np.mean(times)),
        "sparsity": float(np.mean(sparsities)),
    }


def run_sweep(spec: SweepSpec) -> ExperimentReport:
    """Evaluate every grid point; a failing point aborts with context."""
    base = _load_source(spec)
    baseline_point = GridPoint(variant="baseline")
    baseline = _summarize(base, baseline_point, spec, _BASELINE_SLOT)
    records = []
    for gi, point in enumerate(spec.grid):
        try:
            records.append(_summarize(base, point, spec, gi + 1))
        except Exception as exc:
            raise SweepError(f"grid point {gi} ({point}) failed: {exc}") from exc
    return ExperimentReport(
        spec_echo=_spec_echo(spec),
        baseline={"acc_mean": baseline["acc_mean"], "acc_std": baseline["acc_std"]},
        records=records,
    )


def _spec_echo(spec: SweepSpec) -> dict:
    echo = {
        "seed": spec.seed,
        "repeats": spec.repeats,
        "split": {
            "train_fraction": spec.split.train_fraction,
            "seed": spec.split.seed,
            "stratified": spec.split.stratified,
        },
        "train": {
            "lambda": spec.train.lambda_,
            "epochs": spec.train.epochs,
            "seed": spec.train.seed,
        },
        "grid": [
            {
                "variant": g.variant,
                "p": g.p,
                "n": g.n,
                "k": g.k,
                "sigma": g.noise_sigma,
            }
            for g in spec.grid
        ],
    }
    if spec.dataset_path is not None:
        echo["dataset"] = spec.dataset_path
    else:
        s = spec.synth
        echo["synth"] = {
            "num_classes": s.num_classes,
            "per_class": s.per_class,
            "dim": s.dim,
            "center_scale": s.center_scale,
            "noise_sigma": s.noise_sigma,
            "seed": s.seed,
        }
    return echo


_AXIS_KEYS = {"p": "p", "n": "n", "k": "k", "noise": "sigma"}


def fig_tables(report: ExperimentReport, which: str) -> list[dict]:
    """Tidy rows (axis value, variant, acc_mean, acc_std, repeats) for one axis.

    The variant column carries the non-axis parameters that distinguish
    curves, so each (axis value, variant) pair is one plotted point.
    """
    if which not in _AXIS_KEYS:
        raise ValueError(f"unknown axis {which!r}; expected one of {sorted(_AXIS_KEYS)}")
    if not report.records:
        raise ValueError("report has no records")
    key = _AXIS_KEYS[which]
    repeats = report.spec_echo.get("repeats")
    rows = []
    for rec in report.records:
        if rec[key] is None:
            continue
        rows.append(
            {
                which: rec[key],
                "variant": _curve_label(rec, key),
                "acc_mean": rec["acc_mean"],
                "acc_std": rec["acc_std"],
                "repeats": repeats,
            }
        )
    if not rows:
        raise ValueError(f"axis {which!r} absent from report")
    return rows


def _curve_label(rec: dict, axis_key: str) -> str:
    parts = [rec["variant"]]
    if rec["variant"] != "baseline":
        if axis_key != "n" and rec["n"] is not None:
            parts.append(f"n={rec['n']}")
        if axis_key != "p" and rec["p"] is not None:
            parts.append(f"p={rec['p']:g}")
        if axis_key != "k" and rec["k"] is not None:
            parts.append(f"k={rec['k']}")
    return ",".join(parts)


def write_fig_csv(
    report: ExperimentReport, which: str, path, header_line: str | None = None
) -> None:
    rows = fig_tables(report, which)
    columns = [which, "variant", "acc_mean", "acc_std", "repeats"]
    atomic_write_text(path, records_to_csv_text(rows, columns), header_line)
