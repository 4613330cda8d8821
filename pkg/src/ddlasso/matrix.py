"""Dense matrix primitives: dominance classes, Gram/inverse, Schur reduction.

Matrices are plain float64 :class:`numpy.ndarray` objects. Every function
returns a fresh read-only array, so results can be shared freely.
"""

import enum

import numpy as np
from scipy import linalg

from .errors import ArgumentError, DimensionError, SingularMatrixError

# Cholesky pivots below this fraction of the largest diagonal entry mean
# "numerically singular".
PIVOT_THRESHOLD = 1e-12


class DominanceClass(enum.Enum):
    """Row diagonal dominance, weakest to strongest."""

    NOT_DD = "NotDD"
    DD = "DD"
    IDD = "IDD"
    SDD = "SDD"

    @property
    def is_dd(self):
        """True for DD, IDD and SDD (every class implying DD)."""
        return self is not DominanceClass.NOT_DD

    def __str__(self):
        return self.value


def as_matrix(a, name="matrix"):
    """Validate and freeze `a` as a finite 2-D float array."""
    arr = np.array(a, dtype=float, copy=True)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ArgumentError(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


def as_vector(v, name="vector"):
    arr = np.array(v, dtype=float, copy=True).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise ArgumentError(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


def _frozen(arr):
    arr = np.ascontiguousarray(arr, dtype=float)
    arr.setflags(write=False)
    return arr


def _require_square(h, name="matrix"):
    h = as_matrix(h, name)
    if h.shape[0] != h.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {h.shape}")
    return h


def index_set(indices, dim):
    """Return `indices` as a sorted tuple after validating it against `dim`."""
    idx = tuple(int(i) for i in indices)
    if not idx:
        raise ArgumentError("index set must be nonempty")
    if len(set(idx)) != len(idx):
        raise ArgumentError(f"index set {idx} has duplicates")
    if min(idx) < 0 or max(idx) >= dim:
        raise ArgumentError(f"index set {idx} out of range for dimension {dim}")
    return tuple(sorted(idx))


def dominance_margins(h):
    """Per-row ``h_ii - sum_{j != i} |h_ij|``."""
    h = _require_square(h)
    diag = np.diag(h)
    off = np.abs(h).sum(axis=1) - np.abs(diag)
    return diag - off


def classify_dominance(h, eps=0.0):
    """Classify the row diagonal dominance of a square matrix.

    Parameters
    ----------
    h : array_like, shape (n, n)
    eps : float, optional
        Rounding slack. A row whose margin ``h_ii - sum |h_ij|`` lies in
        ``[-eps, eps]`` is treated as an equality row. With the default 0
        the comparison is exact on the stored floats.

    Returns
    -------
    DominanceClass
        The strongest class that applies. Any negative diagonal entry
        gives ``NOT_DD``.
    """
    h = _require_square(h)
    if np.any(np.diag(h) < 0):
        return DominanceClass.NOT_DD
    margin = dominance_margins(h)
    if not np.all(margin >= -eps):
        return DominanceClass.NOT_DD
    strict = margin > eps
    if np.all(strict):
        return DominanceClass.SDD
    if np.any(strict):
        return DominanceClass.IDD
    return DominanceClass.DD


def gram(a):
    """Return ``A^T A``, symmetrized by averaging with its transpose."""
    a = as_matrix(a, "A")
    g = a.T @ a
    return _frozen(0.5 * (g + g.T))


def _cholesky(g):
    g = _require_square(g)
    scale = np.max(np.abs(np.diag(g)))
    if scale == 0:
        raise SingularMatrixError("matrix has an all-zero diagonal")
    try:
        factor = linalg.cholesky(g, lower=True, check_finite=False)
    except linalg.LinAlgError as exc:
        raise SingularMatrixError(f"matrix is singular or indefinite: {exc}") from None
    pivots = np.diag(factor) ** 2
    worst = int(np.argmin(pivots))
    if pivots[worst] < PIVOT_THRESHOLD * scale:
        raise SingularMatrixError(
            f"numerically singular: pivot {pivots[worst]:.3g} at index {worst} "
            f"below {PIVOT_THRESHOLD:g} x max diagonal {scale:.3g}")
    return factor


def invert_spd(g):
    """Invert a symmetric positive definite matrix via Cholesky.

    Raises :class:`SingularMatrixError` when the matrix is not positive
    definite or a pivot falls below ``1e-12 * max|diag|``.
    """
    factor = _cholesky(g)
    n = factor.shape[0]
    h = linalg.cho_solve((factor, True), np.eye(n), check_finite=False)
    return _frozen(0.5 * (h + h.T))


def solve_spd(g, rhs):
    """Solve ``G x = rhs`` for SPD `G` with the same singularity rules."""
    factor = _cholesky(g)
    return linalg.cho_solve((factor, True), np.asarray(rhs, dtype=float), check_finite=False)


def principal_submatrix(h, indices):
    h = _require_square(h)
    idx = index_set(indices, h.shape[0])
    return _frozen(h[np.ix_(idx, idx)])


def schur_reduce_last(h):
    """Eliminate the last row and column: ``r_ij = h_ij - h_in h_jn / h_nn``.

    For invertible `h` the result equals the inverse of the leading
    ``(n-1) x (n-1)`` block of ``h^{-1}``.
    """
    h = _require_square(h)
    n = h.shape[0]
    if n < 2:
        raise DimensionError("Schur reduction needs n >= 2")
    pivot = h[-1, -1]
    if pivot == 0:
        raise SingularMatrixError("zero pivot h_nn in Schur reduction")
    col = h[:-1, -1]
    row = h[-1, :-1]
    return _frozen(h[:-1, :-1] - np.outer(col, row) / pivot)


def inverse_of_submatrix_inverse(h, indices):
    """Compute ``(principal_submatrix(h^{-1}, S))^{-1}`` without inverting `h`.

    The complement of `S` is permuted to the tail and eliminated one index
    at a time with :func:`schur_reduce_last`. Rows and columns of the result
    follow the sorted order of `S`.
    """
    h = _require_square(h)
    n = h.shape[0]
    keep = index_set(indices, n)
    drop = [i for i in range(n) if i not in keep]
    order = list(keep) + drop
    r = h[np.ix_(order, order)]
    scale = np.max(np.abs(np.diag(h)))
    for _ in drop:
        if abs(r[-1, -1]) <= PIVOT_THRESHOLD * scale:
            raise SingularMatrixError(
                f"vanishing pivot {r[-1, -1]:.3g} while reducing to index set {keep}")
        r = schur_reduce_last(r)
    return _frozen(r)


def normalize_columns(a):
    a = as_matrix(a, "A")
    norms = np.linalg.norm(a, axis=0)
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        raise ArgumentError(f"degenerate (zero) column at index {int(zero[0])}")
    return _frozen(a / norms)


def mutual_coherence(a):
    """Largest absolute inner product between distinct normalized columns."""
    a = as_matrix(a, "A")
    if a.shape[1] < 2:
        raise ArgumentError("mutual coherence needs at least two columns")
    q = normalize_columns(a)
    g = np.abs(q.T @ q)
    np.fill_diagonal(g, 0.0)
    return float(min(1.0, g.max()))
