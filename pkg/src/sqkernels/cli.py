"""Command-line interface.

Exit codes: 0 success, 1 configuration or usage error, 2 runtime/training error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import bench, datasets
from .cv_states import SqueezingParam, default_cutoff, squeezed_vacuum_amplitudes
from .kernels import FAMILIES, KernelSpec, evaluate, gram_matrix, psd_report
from .quantum_estimator import (
    DEFAULT_SHOTS,
    swap_test_estimate,
    vacuum_projection_estimate,
)
from .svm import SVMModel, TrainConfig, TrainingError, kkt_report, predict_many, train

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _floats(text):
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _seeds(text):
    """'0-9' or '1,2,5'."""
    if "-" in text.strip("-") and "," not in text:
        lo, hi = text.split("-")
        return list(range(int(lo), int(hi) + 1))
    return [int(v) for v in text.split(",")]


def _kv(text):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    k, v = text.split("=", 1)
    return k, float(v)


def _add_kernel_args(p, required=True):
    p.add_argument("--family", choices=FAMILIES, required=required)
    p.add_argument("--c", type=float)
    p.add_argument("--l", type=float)
    p.add_argument("--p", type=float)
    p.add_argument("--rescale", type=float, default=1.0)


def _spec(args) -> KernelSpec:
    from .kernels import _REQUIRED

    extra = [k for k in ("c", "l", "p") if getattr(args, k) is not None and k not in _REQUIRED[args.family]]
    if extra:
        raise UsageError(f"{args.family} kernel takes no {', '.join('--' + k for k in extra)}")
    try:
        return KernelSpec(args.family, c=args.c, l=args.l, p=args.p, rescale=args.rescale)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _read_dataset(path):
    with open(path) as fh:
        return datasets.loads(fh.read())


def _emit(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        bench.atomic_write(path, text)


# -- subcommands -------------------------------------------------------------

def cmd_datagen(args):
    params = dict(args.param or [])
    try:
        d = datasets.generate(args.name, args.n, args.seed, params)
    except ValueError as e:
        raise UsageError(str(e)) from None
    _emit(datasets.dumps(d), args.out)


def cmd_kernel(args):
    spec = _spec(args)
    if len(args.x) != len(args.x2):
        raise UsageError("--x and --x2 need the same number of features")
    value = complex(evaluate(spec, args.x, args.x2, real=False))
    print(f"{value.real:.12g} {value.imag:.12g}" if spec.is_complex else f"{value.real:.12g}")


def cmd_gram(args):
    spec = _spec(args)
    data = _read_dataset(args.data)
    g = gram_matrix(data, spec, reduce_to_real=not args.complex)
    rep = psd_report(g)
    values = g.values
    lines = []
    for row in values:
        if np.iscomplexobj(values):
            lines.append(",".join(f"{v.real:.12g}{v.imag:+.12g}j" for v in row))
        else:
            lines.append(",".join(f"{v:.12g}" for v in row))
    _emit("\n".join(lines) + "\n", args.out)
    print(f"size {g.size}  min_eigenvalue {rep.min_eigenvalue:.6g}  psd {str(rep.is_psd).lower()}",
          file=sys.stderr if args.out in (None, "-") else sys.stdout)


def cmd_estimate(args):
    z = SqueezingParam(args.r, args.theta)
    z2 = SqueezingParam(args.r2, args.theta2)
    if args.protocol == "swap_test":
        cutoff = args.cutoff or max(default_cutoff(z), default_cutoff(z2))
        est = swap_test_estimate(
            squeezed_vacuum_amplitudes(z, cutoff), squeezed_vacuum_amplitudes(z2, cutoff), args.shots, args.seed
        )
    else:
        est = vacuum_projection_estimate(z, z2, args.shots, args.seed, args.cutoff or 80)
    print(f"{est.estimate:.10f} {est.std_error:.10f}")


def cmd_train(args):
    spec = _spec(args)
    data = _read_dataset(args.data)
    cfg = TrainConfig(C=args.C, tol=args.tol, max_passes=args.max_passes, seed=args.seed)
    g = gram_matrix(data, spec, reduce_to_real=True)
    model = train(g, data.labels, cfg, points=data.points)
    rep = kkt_report(model, g)
    _emit(model.dumps() + "\n", args.out)
    print(
        f"support_vectors {model.n_support}  bias {model.bias:.10g}  converged {str(model.converged).lower()}  "
        f"kkt_max_violation {rep.max_violation:.3g}  ridge {model.ridge:.3g}",
        file=sys.stderr if args.out in (None, "-") else sys.stdout,
    )
    if not model.converged:
        return EXIT_RUNTIME


def _load_model(path) -> SVMModel:
    with open(path) as fh:
        return SVMModel.loads(fh.read())


def cmd_predict(args):
    model = _load_model(args.model)
    data = _read_dataset(args.data)
    labels, decision = predict_many(model, data.points)
    if args.out:
        rows = ["x1,x2,decision_value,label"]
        rows += [f"{a:.6g},{b:.6g},{d:.6g},{int(l):+d}" for (a, b), d, l in zip(data.points, decision, labels)]
        _emit("\n".join(rows) + "\n", args.out)
    print(f"accuracy {bench.accuracy(labels, data.labels):.6f}  n {len(data)}")


def cmd_plot(args):
    from .plotting import emit_plot, plot_kernel_profiles

    if args.kernel_profiles:
        plot_kernel_profiles(args.out)
        return
    if not (args.model and args.data):
        raise UsageError("plot needs --model and --data (or --kernel-profiles)")
    model = _load_model(args.model)
    data = _read_dataset(args.data)
    bounds = args.bounds or bench.padded_bounds(np.vstack([model.train_points, data.points]))
    grid = bench.decision_grid(model, bounds, args.resolution)
    if args.grid_out:
        bench.atomic_write(args.grid_out, grid.to_csv())
    emit_plot(grid, data, args.out, title=model.spec.label() if model.spec else None)


def cmd_bench(args):
    if args.tables:
        if args.seeds is None:
            raise UsageError("bench --tables needs --seeds")
        result = bench.reproduce_tables(args.seeds, n=args.n, jobs=args.jobs)
        print(bench.tables_text(result))
        if args.out:
            bench.atomic_write(args.out, json.dumps(result, indent=1, sort_keys=True) + "\n")
        return
    if not args.config:
        raise UsageError("bench needs --config or --tables")
    cfg = bench.load_config(args.config)
    report = bench.run_experiment(cfg, jobs=args.jobs)
    print(report.table())
    bench.write_artifacts(report, cfg)
    if args.out:
        bench.atomic_write(args.out, report.dumps(cfg.output.timings))
    if any(c.error for c in report.cells):
        return EXIT_RUNTIME


def build_parser():
    parser = _Parser(prog="sqkernels", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("datagen", help="generate a synthetic dataset")
    p.add_argument("--name", required=True, choices=datasets.NAMES)
    p.add_argument("--n", type=int, default=400)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--param", type=_kv, action="append", help="generator parameter key=value")
    p.add_argument("--out")
    p.set_defaults(func=cmd_datagen)

    p = sub.add_parser("kernel", help="evaluate a kernel on one pair of points")
    _add_kernel_args(p)
    p.add_argument("--x", type=_floats, required=True)
    p.add_argument("--x2", type=_floats, required=True)
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("gram", help="Gram matrix of a dataset file")
    _add_kernel_args(p)
    p.add_argument("--data", required=True)
    p.add_argument("--complex", action="store_true", help="keep complex values")
    p.add_argument("--out")
    p.set_defaults(func=cmd_gram)

    p = sub.add_parser("estimate", help="shot-sampled kernel estimation")
    p.add_argument("--protocol", choices=["swap_test", "vacuum_projection"], required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--r2", type=float, required=True)
    p.add_argument("--theta2", type=float, default=0.0)
    p.add_argument("--shots", type=int, default=DEFAULT_SHOTS)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--cutoff", type=int)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("train", help="train an SVM on a dataset file")
    _add_kernel_args(p)
    p.add_argument("--data", required=True)
    p.add_argument("--C", type=float, default=1000.0)
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--max-passes", type=int, default=1000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="score a trained model on a dataset file")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("plot", help="decision-boundary SVG (or kernel profiles)")
    p.add_argument("--model")
    p.add_argument("--data")
    p.add_argument("--out", required=True)
    p.add_argument("--grid-out")
    p.add_argument("--resolution", type=int, default=200)
    p.add_argument("--bounds", type=_floats)
    p.add_argument("--kernel-profiles", action="store_true")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("bench", help="run an experiment config or the accuracy tables")
    p.add_argument("--config")
    p.add_argument("--tables", action="store_true")
    p.add_argument("--seeds", type=_seeds)
    p.add_argument("--n", type=int, default=400)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    try:
        return args.func(args) or EXIT_OK
    except (UsageError, bench.ConfigError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (TrainingError, ValueError, RuntimeError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
