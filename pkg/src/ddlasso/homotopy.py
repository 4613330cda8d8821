"""Exact solution paths of the l1-penalized least-squares problem.

The objective is ``0.5 * ||y - A u||^2 + lam * ||u||_1``. Its minimizer is
piecewise affine in ``lam``; :func:`solve_path` follows it from
``lam0 = ||A^T y||_inf`` (where ``u = 0``) down to ``lambda_min`` with
both additions to and removals from the active set. :func:`oracle_solve`
is an independent brute-force solver over all sign patterns, used for
cross-checking.
"""

import bisect
import functools
import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import (ArgumentError, CostGuardError, CycleGuardError, DimensionError, OracleError,
                     OutOfRangeError, ParseError, SingularMatrixError)
from .matrix import as_matrix, as_vector, gram, solve_spd
from .textio import fmt

# Candidate events closer than this fraction of lam0 are simultaneous.
EVENT_RTOL = 1e-12
# Direction components below this fraction of max|du/dlam| are treated as zero.
DIRECTION_RTOL = 1e-11


@dataclass(frozen=True, eq=False)
class LassoProblem:
    A: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        a = as_matrix(self.A, "A")
        y = as_vector(self.y, "y")
        if y.shape[0] != a.shape[0]:
            raise DimensionError(f"y has length {y.shape[0]} but A has {a.shape[0]} rows")
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "y", y)

    @property
    def m(self):
        return self.A.shape[0]

    @property
    def n(self):
        return self.A.shape[1]

    @functools.cached_property
    def G(self):
        return gram(self.A)

    @functools.cached_property
    def Aty(self):
        v = self.A.T @ self.y
        v.setflags(write=False)
        return v

    @property
    def lambda_max(self):
        return float(np.max(np.abs(self.Aty)))

    def correlation(self, u):
        """``A^T (y - A u)``."""
        return self.A.T @ (self.y - self.A @ np.asarray(u, dtype=float))

    def objective(self, lam, u):
        u = np.asarray(u, dtype=float)
        r = self.y - self.A @ u
        return 0.5 * float(r @ r) + lam * float(np.abs(u).sum())


@dataclass(frozen=True)
class Event:
    """What happened at a breakpoint.

    `kind` is one of ``start``, ``add``, ``remove``, ``multi``, ``end``.
    Indices are 0-based.
    """

    kind: str
    added: tuple = ()
    removed: tuple = ()

    @classmethod
    def from_changes(cls, added, removed):
        added, removed = tuple(added), tuple(removed)
        if len(added) + len(removed) > 1:
            return cls("multi", added, removed)
        if added:
            return cls("add", added)
        return cls("remove", (), removed)

    def label(self, base=1):
        """Text form used in path CSV files, e.g. ``add:+u_3``."""
        items = [f"-u_{i + base}" for i in self.removed] + [f"+u_{i + base}" for i in self.added]
        return self.kind + (":" + ";".join(items) if items else "")

    @classmethod
    def parse(cls, text, base=1):
        kind, _, rest = text.strip().partition(":")
        if kind not in ("start", "add", "remove", "multi", "end"):
            raise ParseError(f"unknown event {text!r}")
        added, removed = [], []
        for item in filter(None, rest.split(";")):
            if len(item) < 4 or item[0] not in "+-" or item[1:3] != "u_":
                raise ParseError(f"bad event item {item!r} in {text!r}")
            idx = int(item[3:]) - base
            (added if item[0] == "+" else removed).append(idx)
        return cls(kind, tuple(added), tuple(removed))

    def __str__(self):
        return self.label(base=0)


@dataclass(frozen=True, eq=False)
class Breakpoint:
    """Solution at one breakpoint.

    `active` and `signs` describe the working set on the segment that
    starts here (towards smaller lambda), so an index added at this
    breakpoint is active with ``u_i == 0``.
    """

    lam: float
    u: np.ndarray
    active: tuple
    signs: tuple
    event: Event


@dataclass(frozen=True, eq=False)
class SolutionPath:
    problem: LassoProblem
    breakpoints: tuple

    def __len__(self):
        return len(self.breakpoints)

    @property
    def lambdas(self):
        return np.array([bp.lam for bp in self.breakpoints])

    @property
    def coefs(self):
        """Array of shape (n_breakpoints, n)."""
        return np.array([bp.u for bp in self.breakpoints])

    @property
    def events(self):
        return [bp.event for bp in self.breakpoints]

    @property
    def removals(self):
        return [(k, bp.event) for k, bp in enumerate(self.breakpoints) if bp.event.removed]

    def pareto(self):
        """``(||u||_1, ||y - A u||^2)`` at each breakpoint."""
        p = self.problem
        return np.array([(np.abs(bp.u).sum(), float(np.sum((p.y - p.A @ bp.u) ** 2)))
                         for bp in self.breakpoints])


def _active_solve(p, active, rhs):
    if not active:
        return np.zeros((0,) + np.shape(rhs)[1:])
    psi = p.G[np.ix_(active, active)]
    try:
        return solve_spd(psi, rhs)
    except SingularMatrixError as exc:
        raise SingularMatrixError(f"singular active Gram block on {list(active)}: {exc}") from None


def _coefs_at(p, active, signs, lam):
    u = np.zeros(p.n)
    if active:
        u[list(active)] = _active_solve(p, active, p.Aty[list(active)] - lam * np.asarray(signs, float))
    return u


def _drop_misdirected(p, active, signs, entering):
    """Discard entering indices whose coefficient would leave with the wrong sign.

    Only relevant for ties, where several indices reach the boundary at once.
    """
    active, signs = list(active), list(signs)
    while True:
        w = _active_solve(p, active, np.asarray(signs, float))
        scale = max(1.0, float(np.max(np.abs(w)))) if len(w) else 1.0
        worst, worst_val = None, -DIRECTION_RTOL * scale
        for j in entering:
            k = active.index(j)
            if signs[k] * w[k] < worst_val:
                worst, worst_val = k, signs[k] * w[k]
        if worst is None or len(entering) == 1:
            return tuple(active), tuple(signs)
        entering = [j for j in entering if j != active[worst]]
        del active[worst], signs[worst]


def solve_path(p, lambda_min=0.0, max_breakpoints=None):
    """Follow the exact solution path from ``lam0`` down to `lambda_min`.

    On each segment the active coefficients move as
    ``du_on/dlam = -inv(Psi) s_on`` where ``Psi`` is the active block of
    ``A^T A``. A segment ends when an inactive correlation reaches the
    boundary (add) or an active coefficient hits zero (remove).

    Parameters
    ----------
    p : LassoProblem
    lambda_min : float, optional
        Where to stop. Default 0 follows the path to the least-squares fit.
    max_breakpoints : int, optional
        Guard against cycling, default ``10 n + 10``.

    Returns
    -------
    SolutionPath
        Breakpoints in strictly decreasing lambda order.
    """
    if not isinstance(p, LassoProblem):
        raise ArgumentError("solve_path expects a LassoProblem")
    if lambda_min < 0:
        raise ArgumentError("lambda_min must be nonnegative")
    n = p.n
    if max_breakpoints is None:
        max_breakpoints = 10 * n + 10
    if np.any(np.linalg.norm(p.A, axis=0) == 0):
        raise ArgumentError("A has a zero column")

    c0 = p.Aty
    lam0 = p.lambda_max
    if lam0 == 0:
        bp = Breakpoint(0.0, _frozen_vec(np.zeros(n)), (), (), Event("start"))
        return SolutionPath(p, (bp,))

    tol = EVENT_RTOL * lam0
    entering = [int(i) for i in np.flatnonzero(np.abs(c0) >= lam0 - tol)]
    active, signs = _drop_misdirected(p, entering, [float(np.sign(c0[i])) for i in entering], entering)
    started = tuple(i for i in entering if i in active)
    bps = [Breakpoint(lam0, _frozen_vec(np.zeros(n)), active, signs, Event("start", started))]
    if lambda_min >= lam0:
        return SolutionPath(p, tuple(bps))

    lam = lam0
    u = np.zeros(n)
    while True:
        if len(bps) >= max_breakpoints:
            raise CycleGuardError(f"more than {max_breakpoints} breakpoints; path may be cycling")
        idx = list(active)
        w = _active_solve(p, active, np.asarray(signs, float))
        d = -w
        v = p.G[:, idx] @ w if idx else np.zeros(n)
        c = c0 - p.G @ u
        lo = lambda_min

        adds = {}
        inactive = np.setdiff1d(np.arange(n), idx)
        for j in inactive:
            best = None
            for t in (1.0, -1.0):
                den = t - v[j]
                if abs(den) <= 1e-12 * (1.0 + abs(v[j])):
                    continue
                cand = (c[j] - lam * v[j]) / den
                if lo < cand < lam - tol and (best is None or cand > best[0]):
                    best = (cand, t)
            if best is not None:
                adds[int(j)] = best

        removes = {}
        dscale = float(np.max(np.abs(d))) if len(d) else 0.0
        for k, i in enumerate(idx):
            if abs(d[k]) <= DIRECTION_RTOL * dscale:
                continue
            cand = lam - u[i] / d[k]
            if lo < cand < lam - tol:
                removes[i] = cand

        candidates = [a[0] for a in adds.values()] + list(removes.values())
        nxt = max(candidates, default=lo)
        if nxt <= lo + tol:
            u_end = _coefs_at(p, active, signs, lo)
            bps.append(Breakpoint(float(lo), _frozen_vec(u_end), active, signs, Event("end")))
            break

        added = sorted(j for j, (cand, _) in adds.items() if cand >= nxt - tol)
        removed = sorted(i for i, cand in removes.items() if cand >= nxt - tol)
        u = _coefs_at(p, active, signs, nxt)
        u[removed] = 0.0
        keep = [(i, s) for i, s in zip(active, signs) if i not in removed]
        keep += [(j, adds[j][1]) for j in added]
        keep.sort()
        new_active = tuple(i for i, _ in keep)
        new_signs = tuple(s for _, s in keep)
        if len(added) > 1:
            new_active, new_signs = _drop_misdirected(p, new_active, new_signs, added)
            added = [j for j in added if j in new_active]
        active, signs = new_active, new_signs
        lam = float(nxt)
        bps.append(Breakpoint(lam, _frozen_vec(u), active, signs, Event.from_changes(added, removed)))
    return SolutionPath(p, tuple(bps))


def _frozen_vec(u):
    u = np.array(u, dtype=float)
    u.setflags(write=False)
    return u


def subgradient_check(p, lam, u, tol=1e-8):
    """Check the optimality conditions at ``lam > 0``.

    Nonzero coefficients need ``a_i^T (y - A u) = lam * sign(u_i)``, zero
    ones need ``|a_i^T (y - A u)| <= lam``, both up to `tol`.
    """
    if lam <= 0:
        raise ArgumentError("subgradient_check needs lam > 0; use least_squares_check at 0")
    u = np.asarray(u, dtype=float)
    if u.shape != (p.n,):
        raise DimensionError(f"u has shape {u.shape}, expected ({p.n},)")
    r = p.correlation(u)
    on = np.abs(u) > tol
    ok_on = np.abs(r[on] - lam * np.sign(u[on])) <= tol
    ok_off = np.abs(r[~on]) <= lam + tol
    return bool(np.all(ok_on) and np.all(ok_off))


def least_squares_check(p, u, tol=1e-8):
    """Normal equations ``A^T (y - A u) = 0`` up to `tol` (the ``lam = 0`` case)."""
    return bool(np.max(np.abs(p.correlation(u))) <= tol)


def kkt_check(p, lam, u, tol=1e-8):
    if lam > 0:
        return subgradient_check(p, lam, u, tol)
    return least_squares_check(p, u, tol)


def kkt_failures(path, tol=1e-8):
    """Indices of breakpoints where the optimality conditions fail."""
    return [k for k, bp in enumerate(path.breakpoints)
            if not kkt_check(path.problem, bp.lam, bp.u, tol)]


def eval_path(path, lam):
    """Evaluate the path at `lam` by linear interpolation between breakpoints."""
    lams = path.lambdas
    if lam < 0:
        raise ArgumentError("lambda must be nonnegative")
    if lam >= lams[0]:
        return np.zeros(path.problem.n)
    if lam < lams[-1]:
        raise OutOfRangeError(f"lambda {lam} below the last breakpoint {lams[-1]}")
    # lams is strictly decreasing; find k with lams[k] <= lam < lams[k-1]
    k = len(lams) - bisect.bisect_right(lams[::-1], lam)
    k = max(k, 1)
    hi, lo = path.breakpoints[k - 1], path.breakpoints[k]
    if lam == lo.lam:
        return np.array(lo.u)
    t = (lam - lo.lam) / (hi.lam - lo.lam)
    return lo.u + t * (hi.u - lo.u)


def _sign_patterns(k):
    if k == 0:
        return np.zeros((0, 1))
    return np.array(list(itertools.product((-1.0, 1.0), repeat=k))).T


def oracle_solve_grid(p, lams, max_n=14, tol=None):
    """Brute-force minimizers for every lambda in `lams`.

    For each support ``S`` and sign pattern ``s`` on it, solve
    ``Psi u_on = (A^T y)_on - lam s`` and accept when ``sign(u_on) == s``
    and every off-support correlation satisfies ``|c_j| <= lam``. The first
    accepted pattern wins; any other accepted pattern must agree with it.

    Returns an array of shape (len(lams), n).
    """
    n = p.n
    if n > max_n:
        raise CostGuardError(f"oracle enumerates 3^n sign patterns; n={n} exceeds {max_n}")
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    if np.any(lams <= 0):
        raise ArgumentError("oracle lambdas must be positive")
    G, c = np.asarray(p.G), np.asarray(p.Aty)
    scale = max(1.0, float(np.max(np.abs(c))))
    if tol is None:
        tol = 1e-9 * scale
    L = len(lams)
    result = np.full((L, n), np.nan)
    found = np.zeros(L, dtype=bool)
    miss = np.full(L, np.inf)

    for mask in range(1 << n):
        S = [i for i in range(n) if mask >> i & 1]
        off = [i for i in range(n) if not mask >> i & 1]
        signs = _sign_patterns(len(S))
        if S:
            psi = G[np.ix_(S, S)]
            try:
                base = np.linalg.solve(psi, np.column_stack([c[S], signs]))
            except np.linalg.LinAlgError:
                continue
            # U[l, :, q] = u_on for lambda l and sign pattern q
            U = base[None, :, :1] - lams[:, None, None] * base[None, :, 1:]
            sign_viol = np.max(np.maximum(-signs[None] * U, 0.0), axis=1)
            corr = c[off][None, :, None] - np.einsum("ok,lkq->loq", G[np.ix_(off, S)], U)
        else:
            U = np.zeros((L, 0, 1))
            sign_viol = np.zeros((L, 1))
            corr = np.broadcast_to(c[None, :, None], (L, n, 1))
        if off:
            off_viol = np.max(np.maximum(np.abs(corr) - lams[:, None, None], 0.0), axis=1)
        else:
            off_viol = np.zeros_like(sign_viol)
        viol = np.maximum(sign_viol, off_viol)
        miss = np.minimum(miss, viol.min(axis=1))
        ok = viol <= tol
        for l in np.flatnonzero(ok.any(axis=1)):
            for q in np.flatnonzero(ok[l]):
                cand = np.zeros(n)
                cand[S] = U[l, :, q]
                if not found[l]:
                    result[l], found[l] = cand, True
                elif np.max(np.abs(cand - result[l])) > 1e3 * tol:
                    raise OracleError(
                        f"two accepted minimizers at lambda={lams[l]:.6g}; A may be rank deficient")
    if not found.all():
        l = int(np.flatnonzero(~found)[0])
        raise OracleError(f"no sign pattern accepted at lambda={lams[l]:.6g}; "
                          f"nearest miss violates the conditions by {miss[l]:.3g}")
    return result


def oracle_solve(p, lam, max_n=14):
    """Brute-force minimizer at a single positive `lam`."""
    return oracle_solve_grid(p, [lam], max_n=max_n)[0]


@dataclass(frozen=True)
class AuditReport:
    cardinality_monotone: bool
    magnitude_monotone: bool
    failures: tuple = field(default=())

    @property
    def ok(self):
        return self.cardinality_monotone and self.magnitude_monotone

    def summary(self):
        lines = [f"cardinality_monotone={str(self.cardinality_monotone).lower()}",
                 f"magnitude_monotone={str(self.magnitude_monotone).lower()}"]
        lines += [f"failure={f}" for f in self.failures]
        return "\n".join(lines)


def monotonicity_audit(path, tol=1e-9):
    """Check that the support only grows and ``|u_i|`` only grows as lambda decreases.

    Magnitudes are compared segment by segment: on each segment the slope
    ``du_i/dlam`` must not point away from zero relative to ``sign(u_i)``.
    `tol` is relative to the largest coefficient on the path.
    """
    failures = []
    card_ok = True
    bps = path.breakpoints
    for k, bp in enumerate(bps):
        if bp.event.removed:
            card_ok = False
            failures.append(f"breakpoint {k} (lambda={bp.lam:.12g}): {bp.event.label()}")
        elif k and len(bp.active) < len(bps[k - 1].active):
            card_ok = False
            failures.append(f"breakpoint {k} (lambda={bp.lam:.12g}): active set shrank")

    mag_ok = True
    coefs = path.coefs
    scale = max(1.0, float(np.max(np.abs(coefs)))) if coefs.size else 1.0
    for k in range(1, len(bps)):
        hi, lo = bps[k - 1], bps[k]
        width = hi.lam - lo.lam
        if width <= 0:
            continue
        slope = (hi.u - lo.u) / width
        mid = 0.5 * (hi.u + lo.u)
        bad = np.sign(mid) * slope * width > tol * scale
        for i in np.flatnonzero(bad):
            mag_ok = False
            failures.append(f"segment [{lo.lam:.12g}, {hi.lam:.12g}]: |u_{i + 1}| grows with lambda")
    return AuditReport(card_ok, mag_ok, tuple(failures))


def format_path_csv(path):
    """``lambda,event,u_1,...,u_n`` with one row per breakpoint."""
    n = path.problem.n
    lines = [",".join(["lambda", "event"] + [f"u_{i + 1}" for i in range(n)])]
    for bp in path.breakpoints:
        lines.append(",".join([fmt(bp.lam), bp.event.label()] + [fmt(x) for x in bp.u]))
    return "\n".join(lines) + "\n"


def parse_path_csv(text):
    """Return ``(lambdas, events, coefs)`` from :func:`format_path_csv` output."""
    rows = [line for line in text.splitlines() if line.strip() and not line.startswith("#")]
    if not rows:
        raise ParseError("empty path CSV")
    header = rows[0].split(",")
    if header[:2] != ["lambda", "event"]:
        raise ParseError(f"unexpected header {rows[0]!r}")
    n = len(header) - 2
    lams, events, coefs = [], [], []
    for lineno, row in enumerate(rows[1:], start=2):
        cells = row.split(",")
        if len(cells) != n + 2:
            raise ParseError(f"line {lineno}: expected {n + 2} fields, got {len(cells)}")
        try:
            lams.append(float(cells[0]))
            coefs.append([float(x) for x in cells[2:]])
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
        events.append(Event.parse(cells[1]))
    return np.array(lams), events, np.array(coefs).reshape(len(lams), n)


def path_from_csv(text, problem):
    """Rebuild a :class:`SolutionPath` for `problem` from its CSV form.

    Active sets are replayed from the events; signs come from the
    coefficients, or from the correlations where a coefficient is zero.
    """
    lams, events, coefs = parse_path_csv(text)
    if coefs.shape[1] != problem.n:
        raise DimensionError(f"path has {coefs.shape[1]} coefficients, problem has {problem.n}")
    if np.any(np.diff(lams) >= 0):
        raise ParseError("lambda column is not strictly decreasing")
    active = set()
    bps = []
    for lam, ev, u in zip(lams, events, coefs):
        active = (active - set(ev.removed)) | set(ev.added)
        act = tuple(sorted(active))
        r = problem.correlation(u)
        signs = tuple(float(np.sign(u[i]) if u[i] != 0 else np.sign(r[i])) for i in act)
        bps.append(Breakpoint(float(lam), _frozen_vec(u), act, signs, ev))
    return SolutionPath(problem, tuple(bps))
