"""Downstream-classification evaluation: repeated random splits, subspace
fits on training data, projection of held-out data, kNN accuracy, timing.

Timing covers subspace fit + projection + classification per (method, k):
the fit and projection cost is shared across the k values of one replicate,
each classifier adds its own classification time on top.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .baselines import Subspace, pinv_oracle, solve_lsqr, ulda_oracle
from .errors import ClassCoverageError, InvalidData, RkldaError
from .labels import LabelVector, encode_labels, index_labels
from .matrix import DENSE_GUARD_ELEMENTS, build_centered_view, to_dense_centered
from .rk import SolverConfig, default_iterations, solve_rk

KNOWN_METHODS = ("full", "rk", "lsqr", "pinv", "ulda")


@dataclass(frozen=True)
class ExperimentConfig:
    methods: tuple[str, ...] = ("full", "rk", "lsqr")
    replicates: int = 30
    train_fraction: float = 0.7
    knn_ks: tuple[int, ...] = (1, 5, 10)
    seed: int = 0
    rk_iters: int | None = None        # default: 20 iterations per training row
    rk_tail_average: float | None = None
    rk_sampler_method: str = "alias"
    lsqr_tol: float = 1e-12
    lsqr_max_iters: int | None = None
    timing: str = "wall"               # "wall" | "none" (report zeros)
    max_dense_elements: int = DENSE_GUARD_ELEMENTS
    threads: int = 1

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise InvalidData(f"train_fraction must be in (0, 1), got {self.train_fraction}")
        if self.replicates < 1:
            raise InvalidData("replicates must be >= 1")
        if not self.knn_ks or any(k < 1 for k in self.knn_ks):
            raise InvalidData("every kNN k must be >= 1")
        unknown = [m for m in self.methods if m not in KNOWN_METHODS]
        if unknown:
            raise InvalidData(f"unknown methods {unknown}; choose from {KNOWN_METHODS}")
        if self.timing not in ("wall", "none"):
            raise InvalidData(f"timing must be 'wall' or 'none', got {self.timing!r}")


@dataclass(frozen=True)
class ExperimentReport:
    methods: dict            # method -> {completed, failures, failed, per_k}
    rows: tuple              # (method, replicate, k, accuracy, seconds)
    config: dict = field(default_factory=dict)


def split(n: int, train_fraction: float, rng: np.random.Generator,
          labels=None, max_resamples: int = 100):
    """Uniform random partition into (train, test) index arrays.

    |train| = round(train_fraction * n), clamped so both sides are nonempty.
    When ``labels`` is given, resamples until every class appears in the
    training set (up to ``max_resamples`` attempts).
    """
    if n < 2:
        raise InvalidData("need at least two observations to split")
    n_train = int(round(train_fraction * n))
    n_train = min(max(n_train, 1), n - 1)
    label_arr = None if labels is None else np.asarray(labels)
    classes = None if label_arr is None else np.unique(label_arr)
    for _ in range(max_resamples):
        perm = rng.permutation(n)
        train = np.sort(perm[:n_train])
        test = np.sort(perm[n_train:])
        if classes is None or len(np.unique(label_arr[train])) == len(classes):
            return train, test
    raise ClassCoverageError(
        f"failed to cover all classes in training after {max_resamples} resamples"
    )


def project(data, B, train_column_means: np.ndarray) -> np.ndarray:
    """Center rows with the *training* column means, then apply B.

    ``B=None`` keeps the full centered rows (no dimension reduction).
    """
    mu = np.asarray(train_column_means, dtype=np.float64)
    if B is None:
        dense = data.toarray() if sp.issparse(data) else np.asarray(data, dtype=np.float64)
        return dense - mu
    M = B.matrix if isinstance(B, Subspace) else np.asarray(B, dtype=np.float64)
    return np.asarray(data @ M) - mu @ M


def knn_classify(train_Z: np.ndarray, train_labels, test_Z: np.ndarray, k: int) -> np.ndarray:
    """Euclidean kNN with fully specified tie-breaking.

    Distance ties are broken by smaller training index; vote ties by the
    class whose nearest member (within the k-neighborhood) is closest, then
    by smaller class index.
    """
    train_Z = np.atleast_2d(np.asarray(train_Z, dtype=np.float64))
    test_Z = np.atleast_2d(np.asarray(test_Z, dtype=np.float64))
    y = np.asarray(train_labels)
    n_train = train_Z.shape[0]
    if n_train == 0:
        raise InvalidData("empty training set")
    if not 1 <= k <= n_train:
        raise InvalidData(f"k must be in [1, {n_train}], got {k}")

    d2 = (
        np.einsum("ij,ij->i", test_Z, test_Z)[:, None]
        - 2.0 * test_Z @ train_Z.T
        + np.einsum("ij,ij->i", train_Z, train_Z)[None, :]
    )
    np.maximum(d2, 0.0, out=d2)
    order = np.argsort(d2, axis=1, kind="stable")[:, :k]

    preds = np.empty(test_Z.shape[0], dtype=y.dtype)
    for t in range(test_Z.shape[0]):
        neigh = order[t]
        votes: dict = {}
        nearest_rank: dict = {}
        for rank, idx in enumerate(neigh):
            cls = y[idx]
            votes[cls] = votes.get(cls, 0) + 1
            nearest_rank.setdefault(cls, rank)
        best = max(votes.values())
        tied = [c for c, v in votes.items() if v == best]
        if len(tied) == 1:
            preds[t] = tied[0]
        else:
            # nearest member first (rank already encodes distance-then-index),
            # by exact distance for the comparison, then smaller class index
            preds[t] = min(
                tied, key=lambda c: (d2[t, neigh[nearest_rank[c]]], c)
            )
    return preds


def accuracy(predicted, truth) -> float:
    predicted = np.asarray(predicted)
    truth = np.asarray(truth)
    if predicted.shape != truth.shape or predicted.size == 0:
        raise InvalidData(
            f"prediction/truth shape mismatch: {predicted.shape} vs {truth.shape}"
        )
    return float(np.mean(predicted == truth))


def _fit_subspace(method: str, view, Y, labels_tr: LabelVector,
                  config: ExperimentConfig, seed: int):
    if method == "full":
        return None
    if method == "rk":
        iters = config.rk_iters or default_iterations(view.n)
        solver = SolverConfig(
            max_iters=iters,
            seed=seed,
            tail_average=config.rk_tail_average,
            sampler_method=config.rk_sampler_method,
        )
        return Subspace(matrix=solve_rk(view, Y, solver).W, origin="RK")
    if method == "lsqr":
        return solve_lsqr(view, Y, tol=config.lsqr_tol, max_iters=config.lsqr_max_iters)
    if method == "pinv":
        return pinv_oracle(
            to_dense_centered(view, config.max_dense_elements), Y,
            max_elements=config.max_dense_elements,
        )
    if method == "ulda":
        raw = view.base.toarray() if view.is_sparse else view.base
        if raw.size > config.max_dense_elements:
            raise InvalidData(f"raw matrix too large for ulda ({raw.size} elements)")
        return ulda_oracle(raw, labels_tr, max_elements=config.max_dense_elements)
    raise InvalidData(f"unknown method {method!r}")


def _replicate(data, tokens, config: ExperimentConfig, replicate: int,
               seed_seq: np.random.SeedSequence):
    """One replicate: split, fit every method, classify for every k.

    Returns (rows, failures) where failures maps method -> error message.
    """
    n = data.shape[0]
    children = seed_seq.spawn(1 + len(config.methods))
    split_rng = np.random.Generator(np.random.PCG64(children[0]))
    all_idx = index_labels(tokens)
    train, test = split(n, config.train_fraction, split_rng, labels=all_idx.indices)

    X_train = data[train]
    X_test = data[test]
    tokens_train = [tokens[i] for i in train]
    labels_tr = index_labels(tokens_train)
    Y = encode_labels(labels_tr)
    truth = np.array([labels_tr.class_index[tokens[i]] for i in test])
    view = build_centered_view(X_train)

    rows = []
    failures = {}
    for m_pos, method in enumerate(config.methods):
        m_seed = int(children[1 + m_pos].generate_state(1, dtype=np.uint64)[0])
        try:
            t0 = time.perf_counter()
            B = _fit_subspace(method, view, Y, labels_tr, config, m_seed)
            Z_train = project(X_train, B, view.column_means)
            Z_test = project(X_test, B, view.column_means)
            shared = time.perf_counter() - t0
            for k in config.knn_ks:
                t1 = time.perf_counter()
                preds = knn_classify(Z_train, labels_tr.indices, Z_test, k)
                seconds = shared + (time.perf_counter() - t1)
                acc = accuracy(preds, truth)
                if config.timing == "none":
                    seconds = 0.0
                rows.append((method, replicate, k, acc, seconds))
        except RkldaError as exc:
            failures[method] = f"{type(exc).__name__}: {exc}"
    return rows, failures


def run_experiment(data, tokens, config: ExperimentConfig) -> ExperimentReport:
    """The full protocol over ``config.replicates`` random splits."""
    tokens = list(tokens)
    if data.shape[0] != len(tokens):
        raise InvalidData(f"{data.shape[0]} rows vs {len(tokens)} labels")
    rep_seqs = np.random.SeedSequence(config.seed).spawn(config.replicates)

    def job(r):
        return _replicate(data, tokens, config, r, rep_seqs[r])

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            results = list(pool.map(job, range(config.replicates)))
    else:
        results = [job(r) for r in range(config.replicates)]

    rows = []
    fail_counts = {m: 0 for m in config.methods}
    for rep_rows, failures in results:
        rows.extend(rep_rows)
        for m in failures:
            fail_counts[m] += 1

    methods_summary = {}
    for method in config.methods:
        per_k = {}
        for k in config.knn_ks:
            accs = [r[3] for r in rows if r[0] == method and r[2] == k]
            secs = [r[4] for r in rows if r[0] == method and r[2] == k]
            if accs:
                per_k[str(k)] = {
                    "accuracy_median": float(np.median(accs)),
                    "accuracy_std": float(np.std(accs, ddof=1)) if len(accs) > 1 else 0.0,
                    "seconds_median": float(np.median(secs)),
                    "seconds_std": float(np.std(secs, ddof=1)) if len(secs) > 1 else 0.0,
                }
        completed = config.replicates - fail_counts[method]
        methods_summary[method] = {
            "completed": completed,
            "failures": fail_counts[method],
            "failed": completed == 0,
            "per_k": per_k,
        }

    config_dict = {
        "methods": list(config.methods),
        "replicates": config.replicates,
        "train_fraction": config.train_fraction,
        "knn_ks": list(config.knn_ks),
        "seed": config.seed,
        "rk_iters": config.rk_iters,
        "rk_tail_average": config.rk_tail_average,
        "lsqr_tol": config.lsqr_tol,
        "timing": config.timing,
    }
    return ExperimentReport(methods=methods_summary, rows=tuple(rows), config=config_dict)
