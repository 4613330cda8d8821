"""Total-variation denoising ``0.5 ||y - x||^2 + lam ||D x||_1`` via a lasso reduction.

With ``u = D x`` and a full-row-rank ``D`` the problem is equivalent to a
lasso in ``u`` with dictionary ``A = D^T (D D^T)^{-1}`` and observation
``z = A D y``. The signal is recovered as
``x = y + D^T (D D^T)^{-1} (u - D y)``.
"""

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .conditions import ConditionReport, dominance_witness
from .errors import ArgumentError, DimensionError, SingularMatrixError
from .homotopy import LassoProblem, eval_path, solve_path
from .matrix import as_matrix, as_vector, classify_dominance, invert_spd
from .textio import fmt

RANK_RTOL = 1e-10


def first_difference_matrix(n):
    """``(n-1) x n`` matrix with 1 on the diagonal and -1 just above it."""
    if int(n) != n or n < 2:
        raise ArgumentError("first difference needs n >= 2")
    n = int(n)
    d = np.zeros((n - 1, n))
    i = np.arange(n - 1)
    d[i, i] = 1.0
    d[i, i + 1] = -1.0
    d.setflags(write=False)
    return d


def _check_full_row_rank(d):
    m, n = d.shape
    if m > n:
        raise DimensionError(f"D is {m}x{n}; need m <= n")
    # pivoted QR of D^T: |R_kk| decreasing, compare against the first
    r = linalg.qr(d.T, mode="r", pivoting=True)[0]
    piv = np.abs(np.diag(r))
    if piv[0] == 0 or piv[-1] <= RANK_RTOL * piv[0]:
        raise SingularMatrixError(f"D is not full row rank (pivot ratio {piv[-1] / max(piv[0], 1e-300):.3g})")


@dataclass(frozen=True, eq=False)
class TVProblem:
    y: np.ndarray
    D: np.ndarray = None

    def __post_init__(self):
        y = as_vector(self.y, "y")
        d = first_difference_matrix(len(y)) if self.D is None else as_matrix(self.D, "D")
        if d.shape[1] != len(y):
            raise DimensionError(f"D has {d.shape[1]} columns but y has length {len(y)}")
        _check_full_row_rank(d)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "D", d)

    @property
    def n(self):
        return self.D.shape[1]

    @property
    def m(self):
        return self.D.shape[0]

    def objective(self, lam, x):
        x = np.asarray(x, dtype=float)
        return 0.5 * float(np.sum((self.y - x) ** 2)) + lam * float(np.abs(self.D @ x).sum())


@dataclass(frozen=True, eq=False)
class TVTransform:
    """The reduced lasso problem plus what is needed to map back to ``x``."""

    problem: LassoProblem
    DDt_inv: np.ndarray


def reformulate(t):
    try:
        ddt_inv = invert_spd(t.D @ t.D.T)
    except SingularMatrixError as exc:
        raise SingularMatrixError(f"D D^T is singular: {exc}") from None
    a = t.D.T @ ddt_inv
    z = a @ (t.D @ t.y)
    return TVTransform(LassoProblem(a, z), ddt_inv)


def recover_x(t, u, transform=None):
    u = np.asarray(u, dtype=float)
    if u.shape != (t.m,):
        raise DimensionError(f"u has shape {u.shape}, expected ({t.m},)")
    ddt_inv = reformulate(t).DDt_inv if transform is None else transform.DDt_inv
    return t.y + t.D.T @ (ddt_inv @ (u - t.D @ t.y))


def check_analysis_gram_dd(d):
    """Is ``D D^T`` diagonally dominant? If so the TV path never loses a jump."""
    d = as_matrix(d, "D")
    _check_full_row_rank(d)
    ddt = d @ d.T
    cls = classify_dominance(ddt)
    witness = None if cls.is_dd else dominance_witness(ddt)
    return ConditionReport("analysis_gram_dd", cls.is_dd, dominance=cls, witness=witness)


@dataclass(frozen=True, eq=False)
class TVPath:
    tv: TVProblem
    lasso_path: object
    x_breakpoints: np.ndarray

    @property
    def lambdas(self):
        return self.lasso_path.lambdas

    @property
    def u_breakpoints(self):
        return self.lasso_path.coefs

    def x_cardinality(self, tol=1e-12):
        """Nonzero count of ``x`` per breakpoint (reported, not audited)."""
        scale = max(1.0, float(np.max(np.abs(self.x_breakpoints))))
        return [int(np.sum(np.abs(x) > tol * scale)) for x in self.x_breakpoints]

    def eval_x(self, lam, transform=None):
        return recover_x(self.tv, eval_path(self.lasso_path, lam), transform)


def solve_tv_path(t, lambda_min=0.0):
    transform = reformulate(t)
    path = solve_path(transform.problem, lambda_min=lambda_min)
    xs = np.array([recover_x(t, bp.u, transform) for bp in path.breakpoints])
    xs.setflags(write=False)
    return TVPath(t, path, xs)


def tv_stationarity_check(t, lam, x, tol=1e-8):
    """Optimality of `x` for the TV problem at `lam`.

    Needs ``y - x = D^T w`` with ``w_i = lam * sign((D x)_i)`` where
    ``(D x)_i != 0`` and ``|w_i| <= lam`` elsewhere.
    """
    x = np.asarray(x, dtype=float)
    ddt = t.D @ t.D.T
    w = np.linalg.solve(ddt, t.D @ (t.y - x))
    if np.max(np.abs(t.D.T @ w - (t.y - x)), initial=0.0) > tol:
        return False
    dx = t.D @ x
    on = np.abs(dx) > tol
    if np.any(np.abs(w[on] - lam * np.sign(dx[on])) > tol):
        return False
    return bool(np.all(np.abs(w[~on]) <= lam + tol))


def format_tv_csv(tvp):
    """``lambda,x_1..x_n,u_1..u_m`` with one row per breakpoint."""
    n, m = tvp.tv.n, tvp.tv.m
    header = ["lambda"] + [f"x_{i + 1}" for i in range(n)] + [f"u_{i + 1}" for i in range(m)]
    lines = [",".join(header)]
    for lam, x, u in zip(tvp.lambdas, tvp.x_breakpoints, tvp.u_breakpoints):
        lines.append(",".join([fmt(lam)] + [fmt(v) for v in x] + [fmt(v) for v in u]))
    return "\n".join(lines) + "\n"
