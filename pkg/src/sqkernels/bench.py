"""Experiment harness: config parsing, validation-accuracy experiments,
hyperparameter grid search, decision grids and the accuracy-table runs."""

from __future__ import annotations

import io
import itertools
import json
import math
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import datasets as ds
from .kernels import FAMILIES, KernelSpec, cross_matrix, gram_matrix, GramMatrix
from .quantum_estimator import estimated_cross_matrix
from .svm import SVMModel, TrainConfig, TrainingError, decision_function, labels_from, train

PI = math.pi
DEFAULT_GRIDS = {
    "c": [0.5, 1.0, 1.5, 2.0],
    "l": [0.25, 0.5, 1.0, 2.0],
    "p": [PI, 2 * PI, 4 * PI],
    "rescale": [0.5, 1.0, 2.0, 4.0],
}
# hyperparameters searched per family when the table runs tune a kernel
TUNED = {
    "squeezing_phase": ("c", "rescale"),
    "coherent_phase": ("c", "rescale"),
    "exp_sine_squared": ("l", "p"),
    "rbf": ("l",),
    "squeezing_amplitude": (),
    "gaussian": (),
}

TABLE1 = {
    ("squeezing_amplitude", "blobs"): 0.915,
    ("squeezing_amplitude", "moons"): 0.95,
    ("squeezing_amplitude", "circles"): 0.795,
    ("gaussian", "blobs"): 0.9,
    ("gaussian", "moons"): 1.0,
    ("gaussian", "circles"): 0.79,
}
TABLE2 = {
    ("coherent_phase", "moons"): 1.0,
    ("coherent_phase", "spiral"): 0.995,
    ("coherent_phase", "sine"): 0.96,
    ("exp_sine_squared", "moons"): 1.0,
    ("exp_sine_squared", "spiral"): 1.0,
    ("exp_sine_squared", "sine"): 0.95,
}


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


# -- configuration -----------------------------------------------------------

@dataclass(frozen=True)
class DatasetBlock:
    name: str
    n: int
    seed: int
    params: dict = field(default_factory=dict)
    train_fraction: float = 0.5
    split_seed: int | None = None


@dataclass(frozen=True)
class KernelBlock:
    """A fixed spec, or a grid when any hyperparameter is given as a list."""

    family: str
    values: dict

    @property
    def is_grid(self) -> bool:
        return any(isinstance(v, list) for v in self.values.values())

    def specs(self) -> list[KernelSpec]:
        keys = sorted(self.values)
        options = [v if isinstance(v, list) else [v] for v in (self.values[k] for k in keys)]
        return [KernelSpec(self.family, **dict(zip(keys, combo))) for combo in itertools.product(*options)]


@dataclass(frozen=True)
class EstimationBlock:
    mode: str = "exact"
    shots: int | None = None
    seed: int | None = None


@dataclass(frozen=True)
class OutputBlock:
    dir: str | None = None
    grid_resolution: int = 200
    bounds: tuple | None = None
    plot: bool = True
    timings: bool = False


@dataclass(frozen=True)
class ExperimentConfig:
    datasets: tuple
    kernels: tuple
    train: TrainConfig = TrainConfig()
    estimation: EstimationBlock = EstimationBlock()
    output: OutputBlock = OutputBlock()
    standardize: bool = False


def _strict(block: dict, allowed: set, where: str, required: set = frozenset()):
    if not isinstance(block, dict):
        raise ConfigError(f"{where}: expected an object")
    unknown = set(block) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    missing = set(required) - set(block)
    if missing:
        raise ConfigError(f"{where}: missing keys {sorted(missing)}")


def _dataset_block(d, where) -> DatasetBlock:
    _strict(d, {"name", "n", "seed", "params", "train_fraction", "split_seed"}, where, {"name", "n", "seed"})
    try:
        ds._params(d["name"], d.get("params"))
    except ValueError as e:
        raise ConfigError(f"{where}: {e}") from None
    return DatasetBlock(
        name=d["name"], n=int(d["n"]), seed=int(d["seed"]), params=dict(d.get("params", {})),
        train_fraction=float(d.get("train_fraction", 0.5)),
        split_seed=None if d.get("split_seed") is None else int(d["split_seed"]),
    )


def _kernel_block(d, where) -> KernelBlock:
    _strict(d, {"family", "c", "l", "p", "rescale"}, where, {"family"})
    if d["family"] not in FAMILIES:
        raise ConfigError(f"{where}: unknown kernel family {d['family']!r}")
    block = KernelBlock(d["family"], {k: v for k, v in d.items() if k != "family"})
    try:
        block.specs()
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{where}: {e}") from None
    return block


def parse_config(text: str) -> ExperimentConfig:
    """Parse a JSON experiment config; unknown keys are rejected."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"line {e.lineno}, column {e.colno}: {e.msg}") from None
    _strict(raw, {"dataset", "kernels", "train", "estimation", "output", "standardize"}, "config",
            {"dataset", "kernels"})
    dsets = raw["dataset"] if isinstance(raw["dataset"], list) else [raw["dataset"]]
    datasets = tuple(_dataset_block(d, f"dataset[{i}]") for i, d in enumerate(dsets))
    if not isinstance(raw["kernels"], list) or not raw["kernels"]:
        raise ConfigError("kernels: expected a nonempty list")
    kernels = tuple(_kernel_block(k, f"kernels[{i}]") for i, k in enumerate(raw["kernels"]))
    try:
        tcfg = TrainConfig.from_dict(raw.get("train", {}))
    except (TypeError, ValueError) as e:
        raise ConfigError(f"train: {e}") from None

    est = raw.get("estimation", {"mode": "exact"})
    _strict(est, {"mode", "shots", "seed"}, "estimation", {"mode"})
    if est["mode"] not in ("exact", "shots"):
        raise ConfigError("estimation.mode must be 'exact' or 'shots'")
    if est["mode"] == "shots" and ("shots" not in est or "seed" not in est):
        raise ConfigError("estimation: shot mode needs 'shots' and an explicit 'seed'")
    if est["mode"] == "shots":
        for i, k in enumerate(kernels):
            if k.family not in ("squeezing_phase", "squeezing_amplitude", "coherent_phase", "gaussian"):
                raise ConfigError(f"kernels[{i}]: {k.family} cannot be shot-estimated")
    estimation = EstimationBlock(est["mode"], est.get("shots"), est.get("seed"))

    out = raw.get("output", {})
    _strict(out, {"dir", "grid_resolution", "bounds", "plot", "timings"}, "output")
    bounds = out.get("bounds")
    if bounds is not None and len(bounds) != 4:
        raise ConfigError("output.bounds must be [x1_min, x1_max, x2_min, x2_max]")
    output = OutputBlock(
        dir=out.get("dir"), grid_resolution=int(out.get("grid_resolution", 200)),
        bounds=None if bounds is None else tuple(float(b) for b in bounds),
        plot=bool(out.get("plot", True)), timings=bool(out.get("timings", False)),
    )
    if output.grid_resolution < 2:
        raise ConfigError("output.grid_resolution must be >= 2")
    return ExperimentConfig(datasets, kernels, tcfg, estimation, output, bool(raw.get("standardize", False)))


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config(fh.read())


# -- experiments -------------------------------------------------------------

def accuracy(predicted, truth) -> float:
    predicted, truth = np.asarray(predicted), np.asarray(truth)
    return float(np.count_nonzero(predicted == truth)) / truth.size


def _standardizer(points):
    mu, sd = points.mean(axis=0), points.std(axis=0)
    sd = np.where(sd > 0, sd, 1.0)
    return lambda X: (np.asarray(X, dtype=float) - mu) / sd


@dataclass
class Fitted:
    spec: KernelSpec
    model: SVMModel | None
    accuracy: float
    error: str | None = None


def fit_and_score(train_set, valid_set, spec: KernelSpec, cfg: TrainConfig, estimation: EstimationBlock | None = None) -> Fitted:
    """Train on ``train_set`` and return validation accuracy.

    In shot mode both the training Gram matrix and the validation kernel rows
    are swap-test estimates.
    """
    Xtr, Xva = train_set.points, valid_set.points
    kernel = None
    if estimation is not None and estimation.mode == "shots":
        s_train, s_valid = np.random.SeedSequence(estimation.seed).spawn(2)
        values = estimated_cross_matrix(spec, Xtr, Xtr, estimation.shots, s_train, symmetric=True)
        gram = GramMatrix(values, spec, is_real_part=spec.is_complex)

        def kernel(A, B):
            return estimated_cross_matrix(spec, A, B, estimation.shots, s_valid)
    else:
        gram = gram_matrix(Xtr, spec, reduce_to_real=True)
    try:
        model = train(gram, train_set.labels, cfg, points=Xtr)
        predicted = labels_from(decision_function(model, Xva, kernel))
    except (TrainingError, ValueError) as e:
        return Fitted(spec, None, float("nan"), str(e))
    return Fitted(spec, model, accuracy(predicted, valid_set.labels))


def grid_search(train_set, valid_set, family: str, grid: dict | list, cfg: TrainConfig | None = None,
                estimation: EstimationBlock | None = None) -> tuple[KernelSpec, float]:
    """Best spec by validation accuracy; ties go to the earliest grid entry.

    ``grid`` is either a list of specs or a mapping from hyperparameter name
    to candidate values (expanded in sorted-key product order).
    """
    best = _grid_search(train_set, valid_set, family, grid, cfg or TrainConfig(), estimation)
    return best.spec, best.accuracy


def _grid_specs(family, grid):
    if isinstance(grid, dict):
        return KernelBlock(family, {k: list(v) for k, v in grid.items()}).specs()
    return list(grid)


def _grid_search(train_set, valid_set, family, grid, cfg, estimation) -> Fitted:
    specs = _grid_specs(family, grid)
    if not specs:
        raise ValueError("empty hyperparameter grid")
    best, failures = None, []
    for spec in specs:
        f = fit_and_score(train_set, valid_set, spec, cfg, estimation)
        if f.model is None:
            failures.append(f"{spec.label()}: {f.error}")
            continue
        if best is None or f.accuracy > best.accuracy:
            best = f
    if best is None:
        raise TrainingError("every grid cell failed: " + "; ".join(failures))
    return best


@dataclass
class Cell:
    dataset: str
    seed: int
    kernel: dict
    accuracy: float
    n_support: int
    converged: bool
    tuned: bool
    wall_time: float
    error: str | None = None
    model: SVMModel | None = field(default=None, repr=False)
    train_set: object = field(default=None, repr=False)
    valid_set: object = field(default=None, repr=False)

    def record(self, timings=False) -> dict:
        out = {
            "dataset": self.dataset, "seed": self.seed, "kernel": self.kernel,
            "accuracy": self.accuracy, "n_support": self.n_support,
            "converged": self.converged, "tuned": self.tuned,
        }
        if self.error:
            out["error"] = self.error
        if timings:
            out["wall_time"] = self.wall_time
        return out


@dataclass
class BenchmarkReport:
    cells: list

    def to_dict(self, timings=False) -> dict:
        return {"cells": [c.record(timings) for c in self.cells]}

    def dumps(self, timings=False) -> str:
        return json.dumps(self.to_dict(timings), indent=1, sort_keys=True) + "\n"

    def table(self) -> str:
        rows = [("dataset", "seed", "kernel", "accuracy", "SVs", "time[s]")]
        for c in self.cells:
            spec = KernelSpec.from_dict(c.kernel).label() if c.kernel else "-"
            acc = "FAILED" if c.error else f"{c.accuracy:.3f}"
            rows.append((c.dataset, str(c.seed), spec, acc, str(c.n_support), f"{c.wall_time:.2f}"))
        return _align(rows)


def _align(rows) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    lines = ["  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip() for r in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _prepare(block: DatasetBlock, standardize: bool):
    data = ds.generate(block.name, block.n, block.seed, block.params)
    split_seed = block.seed if block.split_seed is None else block.split_seed
    tr, va = ds.split(data, block.train_fraction, split_seed)
    if standardize:
        f = _standardizer(tr.points)
        tr = ds.LabeledDataset(f(tr.points), tr.labels, tr.name, tr.seed, tr.params)
        va = ds.LabeledDataset(f(va.points), va.labels, va.name, va.seed, va.params)
    return tr, va


def run_cell(block: DatasetBlock, kernel: KernelBlock, cfg: TrainConfig,
             estimation: EstimationBlock | None = None, standardize: bool = False) -> Cell:
    t0 = time.perf_counter()
    tr, va = _prepare(block, standardize)
    try:
        fitted = _grid_search(tr, va, kernel.family, kernel.specs(), cfg, estimation)
    except TrainingError as e:
        return Cell(block.name, block.seed, {}, float("nan"), 0, False, kernel.is_grid,
                    time.perf_counter() - t0, error=str(e), train_set=tr, valid_set=va)
    m = fitted.model
    return Cell(block.name, block.seed, fitted.spec.to_dict(), fitted.accuracy, m.n_support,
                m.converged, kernel.is_grid, time.perf_counter() - t0, model=m, train_set=tr, valid_set=va)


def _run_cell_args(args):
    return run_cell(*args)


def _map(func, jobs, items):
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(func, items))  # results stay in submission order
    return [func(a) for a in items]


def run_experiment(cfg: ExperimentConfig, jobs: int = 1) -> BenchmarkReport:
    """Generate, split, train and validate every (dataset, kernel) cell."""
    items = [(b, k, cfg.train, cfg.estimation, cfg.standardize) for b in cfg.datasets for k in cfg.kernels]
    return BenchmarkReport(_map(_run_cell_args, jobs, items))


# -- decision grids ----------------------------------------------------------

@dataclass(eq=False)
class DecisionGrid:
    x1: np.ndarray
    x2: np.ndarray
    decision: np.ndarray  # shape (len(x2), len(x1))
    labels: np.ndarray

    @property
    def bounds(self):
        return (float(self.x1[0]), float(self.x1[-1]), float(self.x2[0]), float(self.x2[-1]))

    def rows(self):
        """(x1, x2, decision, label), x2 slowest."""
        for r, b in enumerate(self.x2):
            for c, a in enumerate(self.x1):
                yield a, b, self.decision[r, c], self.labels[r, c]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("x1,x2,decision_value,label\n")
        for a, b, d, lab in self.rows():
            buf.write(f"{a:.6g},{b:.6g},{d:.6g},{int(lab):+d}\n")
        return buf.getvalue()


def padded_bounds(points, pad: float = 0.1):
    points = np.atleast_2d(np.asarray(points, dtype=float))
    lo, hi = points.min(axis=0), points.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    lo, hi = lo - pad * span, hi + pad * span
    return (float(lo[0]), float(hi[0]), float(lo[1]), float(hi[1]))


def decision_grid(model: SVMModel, bounds, resolution: int = 200, kernel=None) -> DecisionGrid:
    """Decision values on a uniform ``resolution`` x ``resolution`` grid."""
    x1_min, x1_max, x2_min, x2_max = (float(b) for b in bounds)
    if not (x1_max > x1_min and x2_max > x2_min) or not all(map(math.isfinite, bounds)):
        raise ValueError(f"degenerate bounds {bounds}")
    if int(resolution) != resolution or resolution < 2:
        raise ValueError("resolution must be an integer >= 2")
    x1 = np.linspace(x1_min, x1_max, int(resolution))
    x2 = np.linspace(x2_min, x2_max, int(resolution))
    g1, g2 = np.meshgrid(x1, x2)
    pts = np.column_stack([g1.ravel(), g2.ravel()])
    d = np.empty(pts.shape[0])
    for start in range(0, pts.shape[0], 4096):  # bound the cross-matrix memory
        d[start:start + 4096] = decision_function(model, pts[start:start + 4096], kernel)
    d = d.reshape(g1.shape)
    return DecisionGrid(x1, x2, d, labels_from(d))


# -- file output -------------------------------------------------------------

def atomic_write(path, data, mode="w"):
    """Write to a temporary sibling, then rename over ``path``."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    umask = os.umask(0)
    os.umask(umask)
    os.chmod(tmp, 0o666 & ~umask)
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_artifacts(report: BenchmarkReport, cfg: ExperimentConfig):
    """Report JSON plus a grid CSV and SVG plot per successful cell."""
    from .plotting import emit_plot

    out = cfg.output
    if out.dir is None:
        return []
    written = [os.path.join(out.dir, "report.json")]
    atomic_write(written[0], report.dumps(out.timings))
    for c in report.cells:
        if c.model is None:
            continue
        stem = os.path.join(out.dir, f"{c.dataset}_s{c.seed}_{c.kernel['family']}")
        everything = np.vstack([c.train_set.points, c.valid_set.points])
        bounds = out.bounds or padded_bounds(everything)
        grid = decision_grid(c.model, bounds, out.grid_resolution)
        atomic_write(stem + ".csv", grid.to_csv())
        written.append(stem + ".csv")
        if out.plot:
            emit_plot(grid, c.valid_set, stem + ".svg", title=KernelSpec.from_dict(c.kernel).label())
            written.append(stem + ".svg")
    return written


# -- accuracy tables ---------------------------------------------------------

def table_cells():
    """(table, family, dataset, published accuracy, tuned) in report order."""
    cells = [("table1", f, d, v, False) for (f, d), v in TABLE1.items()]
    cells += [("table2", f, d, v, True) for (f, d), v in TABLE2.items()]
    return cells


def _table_kernel(family, tuned):
    if not tuned:
        return KernelBlock(family, {})
    return KernelBlock(family, {k: list(DEFAULT_GRIDS[k]) for k in TUNED[family]})


def reproduce_tables(seed_list, n: int = 400, cfg: TrainConfig | None = None, jobs: int = 1,
                     tables=("table1", "table2")) -> dict:
    """Run every table cell over ``seed_list`` and aggregate accuracies."""
    seeds = [int(s) for s in seed_list]
    if not seeds:
        raise ValueError("need at least one seed")
    cfg = cfg or TrainConfig()
    layout = [c for c in table_cells() if c[0] in tables]
    items = [
        (DatasetBlock(dataset, n, s), _table_kernel(family, tuned), cfg, None, False)
        for (_, family, dataset, _, tuned) in layout for s in seeds
    ]
    results = _map(_run_cell_args, jobs, items)
    out = []
    for k, (table, family, dataset, published, tuned) in enumerate(layout):
        cells = results[k * len(seeds):(k + 1) * len(seeds)]
        accs = np.array([c.accuracy for c in cells])
        out.append({
            "table": table, "kernel": family, "dataset": dataset, "published": published, "tuned": tuned,
            "seeds": seeds, "accuracies": accs.tolist(),
            "mean": float(np.mean(accs)), "std": float(np.std(accs)),
            "chosen": [c.kernel for c in cells],
            "failures": [c.error for c in cells if c.error],
        })
    return {"n": n, "train": cfg.to_dict(), "cells": out}


def tables_text(result: dict) -> str:
    rows = [("table", "kernel", "dataset", "published", "mean", "std")]
    for c in result["cells"]:
        rows.append((c["table"], c["kernel"], c["dataset"], f"{c['published']:.3f}",
                     f"{c['mean']:.3f}", f"{c['std']:.3f}"))
    return _align(rows)
