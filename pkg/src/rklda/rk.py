"""Randomized Kaczmarz solver for the matrix least-squares system Xc W = Y.

Each iteration samples a row index i with probability proportional to the
squared centered row norm and projects the iterate onto the solution set of
that row's equation:

    W <- W + x_i / ||x_i||^2 (y_i^T - x_i^T W)

With W0 = 0 every iterate remains in the row space of Xc, which steers the
solve toward the least-norm solution without explicit regularization.

RNG contract: the generator is NumPy's PCG64 seeded through SeedSequence;
replicate substreams come from SeedSequence.spawn.  Uniforms are consumed
strictly sequentially (two per draw for the alias method, one for the
cumulative method), so equal (seed, config, data) reproduce bit-identical
results.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidData, NumericalDivergence, ZeroRowError
from .labels import as_matrix
from .matrix import CenteredMatrixView
from .sampling import SamplingDistribution, build_sampler, sample_row

DEFAULT_ITERS_PER_ROW = 20


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int
    seed: int
    checkpoint_every: int = 0          # 0 disables the trace
    tail_average: float | None = None  # burn-in fraction in [0, 1)
    w0: np.ndarray | None = None       # must lie in the row space of Xc; zero always does
    sampler_method: str = "alias"
    trace_matrices: bool = False

    def __post_init__(self):
        if self.max_iters < 1:
            raise InvalidData(f"max_iters must be >= 1, got {self.max_iters}")
        if self.tail_average is not None and not 0.0 <= self.tail_average < 1.0:
            raise InvalidData(
                f"tail_average burn-in fraction must be in [0, 1), got {self.tail_average}"
            )
        if self.checkpoint_every < 0:
            raise InvalidData("checkpoint_every must be >= 0")


@dataclass(frozen=True)
class TraceEntry:
    iteration: int
    w_frob: float
    sampled_row_residual: float  # ||y_i^T - x_i^T W|| before the recorded step
    w: np.ndarray | None = None


@dataclass(frozen=True)
class SolveResult:
    W: np.ndarray
    iterations_run: int
    trace: tuple[TraceEntry, ...] | None
    rng_seed: int
    excluded_rows: int = 0  # zero-norm centered rows never sampled

    def __post_init__(self):
        if not np.all(np.isfinite(self.W)):
            raise NumericalDivergence("non-finite entries in solver result")


def default_iterations(n: int) -> int:
    return DEFAULT_ITERS_PER_ROW * n


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def rk_step(W: np.ndarray, view: CenteredMatrixView, Y, i: int) -> np.ndarray:
    """One projection onto the solution set of row i's equation.

    Returns a new matrix; after the step x_i^T W' = y_i^T up to rounding.
    """
    Ym = as_matrix(Y)
    norm_sq = view.centered_row_norms_sq[i]
    if norm_sq <= 0.0:
        raise ZeroRowError(f"row {i} has zero centered norm")
    x = view.centered_row_dense(i)
    r = Ym[i] - x @ W
    return W + np.outer(x, r / norm_sq)


def solve_rk(
    view: CenteredMatrixView,
    Y,
    config: SolverConfig,
    dist: SamplingDistribution | None = None,
    on_checkpoint=None,
) -> SolveResult:
    """Run ``config.max_iters`` randomized projection steps from W0.

    ``on_checkpoint(k, W)`` is invoked at k = 0, every ``checkpoint_every``
    iterations, and at the final iterate (W is the live array; callers must
    copy if they keep it).  With ``tail_average`` set, the returned W is the
    uniform average of the iterates after the burn-in point.
    """
    Ym = as_matrix(Y)
    n, d = view.shape
    if Ym.shape[0] != n:
        raise InvalidData(f"Y has {Ym.shape[0]} rows, data has {n}")
    g = Ym.shape[1]

    if dist is None:
        dist = build_sampler(view)
    if config.w0 is None:
        W = np.zeros((d, g))
    else:
        W = np.asarray(config.w0, dtype=np.float64).copy()
        if W.shape != (d, g):
            raise InvalidData(f"w0 must be {d}x{g}, got {W.shape}")

    rng = make_rng(config.seed)
    K = config.max_iters
    burn = int(math.floor(config.tail_average * K)) if config.tail_average is not None else None
    tail_sum = np.zeros_like(W) if burn is not None else None
    tail_count = 0

    cadence = config.checkpoint_every
    trace: list[TraceEntry] | None = [] if cadence > 0 else None

    def checkpoint(k: int, last_residual: float) -> None:
        if trace is not None:
            trace.append(
                TraceEntry(
                    iteration=k,
                    w_frob=float(np.linalg.norm(W)),
                    sampled_row_residual=last_residual,
                    w=W.copy() if config.trace_matrices else None,
                )
            )
        if on_checkpoint is not None:
            on_checkpoint(k, W)

    norms_sq = view.centered_row_norms_sq
    checkpoint(0, float("nan"))
    for k in range(K):
        i = sample_row(dist, rng, config.sampler_method)
        x = view.centered_row_dense(i)
        r = Ym[i] - x @ W
        if not np.all(np.isfinite(r)):
            raise NumericalDivergence(
                f"non-finite residual at iteration {k + 1}", iteration=k + 1
            )
        W += np.outer(x, r / norms_sq[i])
        if burn is not None and k >= burn:
            tail_sum += W
            tail_count += 1
        done = k + 1
        if done == K or (cadence > 0 and done % cadence == 0):
            checkpoint(done, float(np.linalg.norm(r)))

    out = tail_sum / tail_count if tail_count else W
    return SolveResult(
        W=out,
        iterations_run=K,
        trace=tuple(trace) if trace is not None else None,
        rng_seed=config.seed,
        excluded_rows=n - len(dist.active_rows),
    )
