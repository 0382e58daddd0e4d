"""Data matrix storage with implicit column centering.

The centered matrix Xc = X - 1 mu^T is never materialized for sparse bases;
row access, matrix products, and norm profiles all apply the -mu offset on
the fly.  Per-row centered norms are computed once at construction via

    ||x_i - mu||^2 = ||x_i||^2 - 2 <x_i, mu> + ||mu||^2

which is a single pass over the stored entries.
"""

from dataclasses import dataclass, field
from typing import NamedTuple, Union

import numpy as np
import scipy.sparse as sp

from .errors import InvalidData, TooLarge

# Dense small-scale guard shared by the SVD-based oracles.
DENSE_GUARD_ELEMENTS = 10**7

RawMatrix = Union[np.ndarray, sp.csr_matrix, sp.csr_array]


class SparsePlusOffset(NamedTuple):
    """A centered sparse row: stored entries plus a dense -mu offset."""

    indices: np.ndarray
    values: np.ndarray
    offset: np.ndarray  # the full-length dense offset (-mu)

    def to_dense(self) -> np.ndarray:
        out = self.offset.copy()
        out[self.indices] += self.values
        return out


def validate_raw(base) -> RawMatrix:
    """Coerce to a canonical dense/CSR matrix, rejecting invalid input."""
    if sp.issparse(base):
        mat = sp.csr_array(base, dtype=np.float64)
        mat.sum_duplicates()
        mat.check_format(full_check=True)
        if mat.shape[0] < 1 or mat.shape[1] < 1:
            raise InvalidData(f"matrix must be at least 1x1, got {mat.shape}")
        if mat.nnz and not np.isfinite(mat.data).all():
            raise InvalidData("matrix contains non-finite entries")
        return mat
    arr = np.ascontiguousarray(np.asarray(base, dtype=np.float64))
    if arr.ndim != 2:
        raise InvalidData(f"matrix must be 2-dimensional, got ndim={arr.ndim}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidData(f"matrix must be at least 1x1, got {arr.shape}")
    if not np.isfinite(arr).all():
        raise InvalidData("matrix contains non-finite entries")
    return arr


@dataclass(frozen=True)
class CenteredMatrixView:
    """Immutable view of a data matrix with implicit column centering.

    Safe to share across threads after construction.
    """

    base: RawMatrix
    column_means: np.ndarray
    centered_row_norms_sq: np.ndarray
    frob_norm_sq: float
    is_sparse: bool = field(default=False)

    @property
    def n(self) -> int:
        return self.base.shape[0]

    @property
    def d(self) -> int:
        return self.base.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.base.shape

    def centered_row_dense(self, i: int) -> np.ndarray:
        """Dense centered row x_i - mu (always a fresh or read-only vector)."""
        row = centered_row(self, i)
        if isinstance(row, SparsePlusOffset):
            return row.to_dense()
        return row

    def matmul(self, v: np.ndarray) -> np.ndarray:
        """(X - 1 mu^T) @ v without densifying the base."""
        v = np.asarray(v, dtype=np.float64)
        shift = self.column_means @ v
        return self.base @ v - (shift if v.ndim == 1 else shift[None, :])

    def rmatmul(self, u: np.ndarray) -> np.ndarray:
        """(X - 1 mu^T)^T @ u without densifying the base."""
        u = np.asarray(u, dtype=np.float64)
        col_sums = u.sum(axis=0)
        if u.ndim == 1:
            return self.base.T @ u - self.column_means * col_sums
        return self.base.T @ u - np.outer(self.column_means, col_sums)


def build_centered_view(base, assume_centered: bool = False) -> CenteredMatrixView:
    """Validate the base matrix and precompute the centering profile.

    With ``assume_centered`` the stored rows are taken as already centered
    (mu = 0); useful for synthetic systems built directly in centered form.
    """
    mat = validate_raw(base)
    n, d = mat.shape
    sparse = sp.issparse(mat)

    if assume_centered:
        mu = np.zeros(d)
    elif sparse:
        mu = np.asarray(mat.sum(axis=0)).reshape(-1) / n
    else:
        mu = mat.mean(axis=0)

    if sparse:
        raw_sq = np.asarray(mat.multiply(mat).sum(axis=1)).reshape(-1)
    else:
        raw_sq = np.einsum("ij,ij->i", mat, mat)
    cross = mat @ mu
    norms_sq = raw_sq - 2.0 * np.asarray(cross).reshape(-1) + float(mu @ mu)
    # cancellation can leave tiny negatives for rows that equal the mean
    np.maximum(norms_sq, 0.0, out=norms_sq)
    return CenteredMatrixView(
        base=mat,
        column_means=mu,
        centered_row_norms_sq=norms_sq,
        frob_norm_sq=float(norms_sq.sum()),
        is_sparse=sparse,
    )


def centered_row(view: CenteredMatrixView, i: int):
    """Centered row x_i - mu.

    Dense bases return a vector; sparse bases return a
    :class:`SparsePlusOffset` so callers pay O(nnz(row) + d) only when they
    actually need the dense expansion.
    """
    n = view.n
    if not 0 <= i < n:
        raise IndexError(f"row index {i} out of range [0, {n})")
    if view.is_sparse:
        base = view.base
        start, stop = base.indptr[i], base.indptr[i + 1]
        return SparsePlusOffset(
            indices=base.indices[start:stop],
            values=base.data[start:stop],
            offset=-view.column_means,
        )
    if not view.column_means.any():
        return view.base[i]
    return view.base[i] - view.column_means


def row_norm_profile(view: CenteredMatrixView) -> tuple[np.ndarray, float]:
    """The precomputed (||x_i - mu||^2 per row, total squared Frobenius norm)."""
    return view.centered_row_norms_sq, view.frob_norm_sq


def to_dense_centered(
    view: CenteredMatrixView, max_elements: int = DENSE_GUARD_ELEMENTS
) -> np.ndarray:
    """Materialize the centered matrix for small-scale oracles only."""
    n, d = view.shape
    if n * d > max_elements:
        raise TooLarge(
            f"dense centered matrix would hold {n * d} elements "
            f"(guard: {max_elements})"
        )
    dense = view.base.toarray() if view.is_sparse else np.array(view.base)
    return dense - view.column_means
