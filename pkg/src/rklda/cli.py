"""Command-line interface.

Subcommands: encode, solve, transform, scatter, diagnose, experiment.
Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

Every file-producing run also writes ``<out>.manifest.json`` recording the
subcommand, resolved flags, 64-bit input/output content digests, seed, tool
version, and timestamps, so an artifact can be reproduced from its manifest.
Output files are written to a temp file and renamed into place; a failing
run leaves no partial outputs.

The only environment overrides are RKLDA_THREADS (worker count when
--threads is not given) and the platform temp directory.
"""

import argparse
import hashlib
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import pinv_oracle, solve_lsqr, ulda_oracle
from .diagnostics import iterations_for_tolerance, run_convergence_study
from .errors import DataError, InvalidData, NumericalError, RkldaError
from .evaluation import ExperimentConfig, project, run_experiment
from .io import (
    FORMAT_VERSION,
    atomic_write_text,
    format_float,
    load_matrix,
    read_labels_file,
    read_rkm1,
    write_csv_rows,
    write_rkm1,
)
from .labels import encode_labels, index_labels
from .matrix import build_centered_view, to_dense_centered
from .rk import SolverConfig, default_iterations, solve_rk
from .scatter import scatter_matrices, scatter_traces

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of exiting, so dispatch controls codes."""

    def error(self, message):
        raise _UsageError(message)


def _digest(path) -> str:
    """First 64 bits of the SHA-256 of the file contents, as 16 hex chars."""
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()[:16]


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


class _Run:
    """Tracks inputs/outputs of one subcommand for the manifest."""

    def __init__(self, subcommand: str, args: argparse.Namespace):
        self.subcommand = subcommand
        self.flags = {
            k: v for k, v in sorted(vars(args).items())
            if k != "func" and v is not None
        }
        self.inputs: dict[str, str] = {}
        self.outputs: list[str] = []
        self.started = _utc_now()

    def track_input(self, path) -> None:
        if path is not None:
            self.inputs[str(path)] = _digest(path)

    def track_output(self, path) -> None:
        self.outputs.append(str(path))

    def write_manifest(self, primary_out) -> None:
        if primary_out is None:
            return
        manifest = {
            "subcommand": self.subcommand,
            "flags": {k: (list(v) if isinstance(v, tuple) else v)
                      for k, v in self.flags.items()},
            "inputs": self.inputs,
            "outputs": {p: _digest(p) for p in self.outputs},
            "seed": self.flags.get("seed"),
            "tool_version": __version__,
            "format_version": FORMAT_VERSION,
            "started_utc": self.started,
            "finished_utc": _utc_now(),
        }
        atomic_write_text(str(primary_out) + ".manifest.json", _json_text(manifest))


def _load_data(run: _Run, args) -> tuple:
    """(matrix, labels-from-csv-or-None) honoring format flags."""
    run.track_input(args.data)
    return load_matrix(
        args.data,
        fmt=getattr(args, "format", "auto"),
        csv_header=getattr(args, "csv_header", False),
        label_column=getattr(args, "label_column", None),
    )


def _load_tokens(run: _Run, args, csv_labels):
    if getattr(args, "labels", None):
        run.track_input(args.labels)
        return read_labels_file(args.labels)
    if csv_labels is not None:
        return csv_labels
    raise _UsageError("labels required: pass --labels FILE or --label-column COL")


def _resolve_threads(args) -> int:
    if getattr(args, "threads", None):
        return args.threads
    env = os.environ.get("RKLDA_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise InvalidData(f"RKLDA_THREADS must be an integer, got {env!r}") from exc
    return os.cpu_count() or 1


def _add_data_flags(p: _Parser, with_labels: bool = True):
    p.add_argument("--data", required=True, help="matrix file (.rkm1/.mtx/.csv)")
    p.add_argument("--format", default="auto", choices=["auto", "rkm1", "mtx", "csv"])
    p.add_argument("--csv-header", action="store_true",
                   help="first CSV row is a header")
    p.add_argument("--label-column",
                   help="CSV column holding labels (excluded from the matrix)")
    if with_labels:
        p.add_argument("--labels", help="label file, one token per line")


def _cmd_encode(args) -> int:
    run = _Run("encode", args)
    csv_labels = None
    if args.data:
        _, csv_labels = _load_data(run, args)
    tokens = _load_tokens(run, args, csv_labels)
    lv = index_labels(tokens)
    Y = encode_labels(lv)
    write_rkm1(args.out, Y.matrix)
    run.track_output(args.out)
    if args.classes_out:
        classes = {
            "classes": [str(c) for c in lv.classes],
            "counts": [int(c) for c in lv.counts],
            "n": lv.n,
        }
        atomic_write_text(args.classes_out, _json_text(classes))
        run.track_output(args.classes_out)
    run.write_manifest(args.out)
    return EXIT_OK


def _cmd_solve(args) -> int:
    run = _Run("solve", args)
    data, csv_labels = _load_data(run, args)
    tokens = _load_tokens(run, args, csv_labels)
    if len(tokens) != data.shape[0]:
        raise InvalidData(f"{data.shape[0]} data rows vs {len(tokens)} labels")
    lv = index_labels(tokens)
    Y = encode_labels(lv)
    view = build_centered_view(data, assume_centered=args.pre_centered)

    trace = None
    if args.method == "rk":
        iters = args.iters or default_iterations(view.n)
        if args.iters_from_kappa:
            eps, eps0, kappa = args.iters_from_kappa
            iters = max(1, iterations_for_tolerance(eps, eps0, kappa))
            print(f"iterations from condition number: {iters}", file=sys.stderr)
        config = SolverConfig(
            max_iters=iters,
            seed=args.seed,
            checkpoint_every=args.checkpoint_every,
            tail_average=args.tail_average,
            sampler_method=args.sampler,
        )
        result = solve_rk(view, Y, config)
        W = result.W
        trace = result.trace
    elif args.method == "lsqr":
        W = solve_lsqr(view, Y, tol=args.tol, max_iters=args.max_iters).matrix
    elif args.method == "pinv":
        W = pinv_oracle(to_dense_centered(view), Y, rank_tol=args.rank_tol).matrix
    else:  # ulda
        raw = view.base.toarray() if view.is_sparse else view.base
        W = ulda_oracle(raw, lv, rank_tol=args.rank_tol).matrix

    write_rkm1(args.out, W)
    run.track_output(args.out)
    if args.means_out:
        write_rkm1(args.means_out, view.column_means.reshape(1, -1))
        run.track_output(args.means_out)
    if args.trace_out and trace:
        write_csv_rows(
            args.trace_out,
            ["iteration", "w_frob", "sampled_row_residual"],
            [(e.iteration, e.w_frob, e.sampled_row_residual) for e in trace],
        )
        run.track_output(args.trace_out)
    run.write_manifest(args.out)
    return EXIT_OK


def _cmd_transform(args) -> int:
    run = _Run("transform", args)
    data, _ = _load_data(run, args)
    run.track_input(args.subspace)
    W = read_rkm1(args.subspace)
    if args.no_center:
        mu = np.zeros(data.shape[1])
    elif args.means:
        run.track_input(args.means)
        mu = read_rkm1(args.means).reshape(-1)
        if mu.shape[0] != data.shape[1]:
            raise InvalidData(f"means length {mu.shape[0]} vs {data.shape[1]} columns")
    else:
        mu = build_centered_view(data).column_means
    if W.shape[0] != data.shape[1]:
        raise InvalidData(f"subspace rows {W.shape[0]} vs {data.shape[1]} data columns")
    Z = project(data, W, mu)
    write_rkm1(args.out, Z)
    run.track_output(args.out)
    run.write_manifest(args.out)
    return EXIT_OK


def _cmd_scatter(args) -> int:
    run = _Run("scatter", args)
    data, csv_labels = _load_data(run, args)
    tokens = _load_tokens(run, args, csv_labels)
    if len(tokens) != data.shape[0]:
        raise InvalidData(f"{data.shape[0]} data rows vs {len(tokens)} labels")
    lv = index_labels(tokens)
    dense = data.toarray() if hasattr(data, "toarray") else data
    trace_w, trace_b = scatter_traces(dense, lv)
    payload = {
        "n": int(data.shape[0]),
        "d": int(data.shape[1]),
        "g": lv.g,
        "trace_w": trace_w,
        "trace_b": trace_b,
        "trace_t": trace_w + trace_b,
    }
    if not args.traces_only:
        ss = scatter_matrices(dense, lv)
        payload.update(
            s_w=ss.s_w.tolist(),
            s_b=ss.s_b.tolist(),
            s_t=ss.s_t.tolist(),
            centroids=ss.centroids.tolist(),
            grand_centroid=ss.grand_centroid.tolist(),
        )
    text = _json_text(payload)
    if args.out:
        atomic_write_text(args.out, text)
        run.track_output(args.out)
        run.write_manifest(args.out)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_diagnose(args) -> int:
    run = _Run("diagnose", args)
    data, csv_labels = _load_data(run, args)
    tokens = _load_tokens(run, args, csv_labels)
    lv = index_labels(tokens)
    Y = encode_labels(lv)
    view = build_centered_view(data, assume_centered=args.pre_centered)
    cadence = args.checkpoint_every or max(1, args.iters // 20)
    config = SolverConfig(max_iters=args.iters, seed=args.seed, checkpoint_every=cadence)
    report = run_convergence_study(
        view, Y, trials=args.trials, config=config, threads=_resolve_threads(args)
    )
    payload = {
        "trials": report.trials,
        "kappa": report.kappa,
        "beta": report.beta,
        "initial_sq_error": report.initial_sq_error,
        "residual_floor": report.residual_floor,
        "consistent": report.consistent,
        "relative_residual": report.relative_residual,
        "checkpoints": [
            {
                "iteration": c.iteration,
                "empirical_mse": c.empirical_mse,
                "bound": c.bound,
                "std_error": c.std_error,
            }
            for c in report.checkpoints
        ],
    }
    atomic_write_text(args.out, _json_text(payload))
    run.track_output(args.out)
    csv_path = args.csv_out or str(Path(args.out).with_suffix(".csv"))
    write_csv_rows(
        csv_path,
        ["k", "empirical", "bound"],
        [(c.iteration, c.empirical_mse, c.bound) for c in report.checkpoints],
    )
    run.track_output(csv_path)
    run.write_manifest(args.out)
    return EXIT_OK


def _cmd_experiment(args) -> int:
    run = _Run("experiment", args)
    data, csv_labels = _load_data(run, args)
    tokens = _load_tokens(run, args, csv_labels)
    config = ExperimentConfig(
        methods=tuple(m.strip() for m in args.methods.split(",") if m.strip()),
        replicates=args.replicates,
        train_fraction=args.train_frac,
        knn_ks=tuple(int(k) for k in args.knn.split(",") if k.strip()),
        seed=args.seed,
        rk_iters=args.rk_iters,
        rk_tail_average=args.rk_tail_average,
        lsqr_tol=args.lsqr_tol,
        timing=args.timing,
        threads=_resolve_threads(args),
    )
    report = run_experiment(data, tokens, config)
    payload = {
        "config": report.config,
        "methods": report.methods,
        "rows": [list(r) for r in report.rows],
    }
    atomic_write_text(args.out, _json_text(payload))
    run.track_output(args.out)
    csv_path = args.csv_out or str(Path(args.out).with_suffix(".csv"))
    write_csv_rows(
        csv_path,
        ["method", "replicate", "k", "accuracy", "seconds"],
        [(m, r, k, acc, sec) for (m, r, k, acc, sec) in report.rows],
    )
    run.track_output(csv_path)
    run.write_manifest(args.out)
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="rklda", description=__doc__)
    parser.add_argument(
        "--version", action="version",
        version=f"rklda {__version__} (matrix format {FORMAT_VERSION})",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("encode", help="recode labels into the indicator matrix")
    p.add_argument("--labels", help="label file, one token per line")
    p.add_argument("--data", help="CSV holding the label column")
    p.add_argument("--label-column", help="CSV column with the labels")
    p.add_argument("--csv-header", action="store_true")
    p.add_argument("--format", default="auto", choices=["auto", "rkm1", "mtx", "csv"])
    p.add_argument("--out", required=True)
    p.add_argument("--classes-out", help="also write the class map as JSON")
    p.set_defaults(func=_cmd_encode)

    p = sub.add_parser("solve", help="compute a reduced-dimension subspace")
    _add_data_flags(p)
    p.add_argument("--method", required=True, choices=["rk", "lsqr", "pinv", "ulda"])
    p.add_argument("--out", required=True)
    p.add_argument("--iters", type=int, help="RK iteration budget (default 20 per row)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tail-average", type=float,
                   help="burn-in fraction; average the iterates after it")
    p.add_argument("--checkpoint-every", type=int, default=0)
    p.add_argument("--trace-out", help="CSV of checkpoint summaries")
    p.add_argument("--iters-from-kappa", nargs=3, type=float,
                   metavar=("EPS", "EPS0", "KAPPA"),
                   help="derive the RK iteration count from a known condition number")
    p.add_argument("--sampler", default="alias", choices=["alias", "cumulative"])
    p.add_argument("--pre-centered", action="store_true",
                   help="treat the stored rows as already column-centered")
    p.add_argument("--means-out", help="write training column means (1 x d RKM1)")
    p.add_argument("--tol", type=float, default=1e-12, help="lsqr stopping tolerance")
    p.add_argument("--max-iters", type=int, help="lsqr iteration cap")
    p.add_argument("--rank-tol", type=float, help="pinv/ulda rank cutoff")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("transform", help="project data through a subspace")
    _add_data_flags(p, with_labels=False)
    p.add_argument("--subspace", required=True, help="d x c RKM1 file")
    p.add_argument("--means", help="1 x d RKM1 of training column means")
    p.add_argument("--no-center", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_transform)

    p = sub.add_parser("scatter", help="scatter matrices / traces as JSON")
    _add_data_flags(p)
    p.add_argument("--traces-only", action="store_true")
    p.add_argument("--out", help="JSON path (stdout when omitted)")
    p.set_defaults(func=_cmd_scatter)

    p = sub.add_parser("diagnose", help="empirical error decay vs the theory bound")
    _add_data_flags(p)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--iters", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--checkpoint-every", type=int, default=0)
    p.add_argument("--pre-centered", action="store_true")
    p.add_argument("--threads", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--csv-out")
    p.set_defaults(func=_cmd_diagnose)

    p = sub.add_parser("experiment", help="split/fit/project/classify protocol")
    _add_data_flags(p)
    p.add_argument("--methods", default="full,rk,lsqr",
                   help="comma list from full,rk,lsqr,pinv,ulda")
    p.add_argument("--replicates", type=int, default=30)
    p.add_argument("--train-frac", type=float, default=0.7)
    p.add_argument("--knn", default="1,5,10", help="comma list of k values")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rk-iters", type=int)
    p.add_argument("--rk-tail-average", type=float)
    p.add_argument("--lsqr-tol", type=float, default=1e-12)
    p.add_argument("--timing", default="wall", choices=["wall", "none"],
                   help="'none' writes zero seconds for byte-reproducible reports")
    p.add_argument("--threads", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--csv-out")
    p.set_defaults(func=_cmd_experiment)
    return parser


def dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --version / --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except RkldaError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"data error: missing file: {exc}", file=sys.stderr)
        return EXIT_DATA


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
