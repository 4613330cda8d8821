"""Certificates for monotone growth of the lasso active set.

* :func:`check_inverse_gram_dd` - ``(A^T A)^{-1}`` diagonally dominant.
* :func:`check_donoho_kstep` - sparsity bound ``k <= (1 + 1/mu) / 2``.
* :func:`check_coherence_bound` - ``|g_ij| / g_ii <= 1 / (2n - 3)``, which
  forces ``G^{-1}`` to be diagonally dominant.
* :func:`check_positive_cone_exhaustive` - the positive cone condition,
  equivalent to ``(A^T A)^{-1}`` strictly diagonally dominant.
"""

import itertools
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ArgumentError, CostGuardError, HypothesisError, SingularMatrixError
from .matrix import (DominanceClass, as_matrix, classify_dominance, dominance_margins, gram,
                     invert_spd, mutual_coherence)


@dataclass(frozen=True)
class ConditionReport:
    condition: str
    holds: bool
    dominance: DominanceClass = None
    witness: str = None
    mu: float = None
    k_bound: float = None
    ratio: float = None
    ratio_bound: float = None

    def __post_init__(self):
        if not self.holds and not self.witness:
            raise ValueError("a failing ConditionReport needs a witness")

    def to_dict(self):
        d = asdict(self)
        d["dominance"] = None if self.dominance is None else self.dominance.value
        for key in ("ratio", "ratio_bound"):
            if d[key] is None:
                del d[key]
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=False)

    def to_record(self):
        """Flat ``key=value`` lines; absent optional fields are left empty."""
        lines = []
        for key, value in self.to_dict().items():
            if value is None:
                value = ""
            elif isinstance(value, bool):
                value = str(value).lower()
            elif isinstance(value, float):
                value = repr(value)
            lines.append(f"{key}={value}")
        return "\n".join(lines)


def dominance_witness(h, eps=0.0):
    margin = dominance_margins(h)
    i = int(np.argmin(margin))
    off = float(np.abs(h[i]).sum() - abs(h[i, i]))
    return f"row {i}: h_ii={h[i, i]!r} < sum_j|h_ij|={off!r} (margin {margin[i]:.3g})"


def check_inverse_gram_dd(a, allow_underdetermined=False, eps=0.0):
    """Is ``(A^T A)^{-1}`` diagonally dominant?

    When it is, the number of nonzero lasso coefficients can only grow as
    lambda decreases. Requires ``m >= n`` and full column rank; pass
    ``allow_underdetermined=True`` to skip the shape test (rank is still
    required, so ``m < n`` will then fail with a singularity error).
    """
    a = as_matrix(a, "A")
    m, n = a.shape
    if m < n and not allow_underdetermined:
        raise HypothesisError(f"A is {m}x{n}; the condition assumes m >= n")
    h = invert_spd(gram(a))
    cls = classify_dominance(h, eps)
    witness = None if cls.is_dd else dominance_witness(h, eps)
    return ConditionReport("inverse_gram_dd", cls.is_dd, dominance=cls, witness=witness)


def donoho_bound(mu):
    """``(1 + 1/mu) / 2``; infinite for ``mu == 0``.

    Works with :class:`fractions.Fraction` and sympy numbers as well as
    floats, so the boundary can be checked exactly.
    """
    if mu == 0:
        return math.inf
    return (1 + 1 / mu) / 2


def check_donoho_kstep(a, k, rtol=1e-12):
    """Sparsity bound ``k <= (1 + 1/mu) / 2`` with ``mu`` the mutual coherence.

    `rtol` absorbs rounding in ``mu`` so that dictionaries built to sit
    exactly on the bound are accepted.
    """
    if int(k) != k or k < 1:
        raise ArgumentError("k must be a positive integer")
    mu = mutual_coherence(a)
    bound = donoho_bound(mu)
    holds = k <= bound * (1 + rtol)
    witness = None if holds else f"k={int(k)} exceeds (1 + 1/mu)/2 = {bound!r} with mu={mu!r}"
    return ConditionReport("donoho_kstep", bool(holds), witness=witness, mu=mu, k_bound=float(bound))


def check_coherence_bound(g):
    """Row-wise ratio test ``max_{j != i} |g_ij| / g_ii <= 1 / (2n - 3)``.

    `g` must be symmetric positive definite with ``n > 2``. Holding the
    bound guarantees ``g^{-1}`` is diagonally dominant.
    """
    g = as_matrix(g, "G")
    n = g.shape[0]
    if g.shape != (n, n):
        raise ArgumentError(f"G must be square, got {g.shape}")
    if n <= 2:
        raise HypothesisError("coherence bound needs n > 2")
    diag = np.diag(g)
    if np.any(diag <= 0):
        raise HypothesisError("coherence bound needs a positive diagonal")
    if not np.allclose(g, g.T, rtol=0, atol=1e-12 * np.max(diag)):
        raise HypothesisError("coherence bound needs a symmetric G")
    try:
        invert_spd(g)
    except SingularMatrixError as exc:
        raise HypothesisError(f"coherence bound needs a positive definite G: {exc}") from None
    ratios = np.abs(g) / diag[:, None]
    np.fill_diagonal(ratios, 0.0)
    i, j = np.unravel_index(int(np.argmax(ratios)), ratios.shape)
    worst = float(ratios[i, j])
    bound = 1.0 / (2 * n - 3)
    holds = worst <= bound
    witness = None if holds else f"|g_{i}{j}|/g_{i}{i} = {worst!r} > 1/(2n-3) = {bound!r}"
    return ConditionReport("coherence_bound", bool(holds), witness=witness,
                           ratio=worst, ratio_bound=bound)


def _subsets(n):
    subsets = [s for k in range(1, n + 1) for s in itertools.combinations(range(n), k)]
    return sorted(subsets)


def _row_sum_failure(m, tol):
    sums = m.sum(axis=1)
    limit = tol * max(1.0, float(np.max(np.abs(np.diag(m)))))
    bad = np.flatnonzero(sums <= limit)
    return (int(bad[0]), float(sums[bad[0]])) if bad.size else None


def _invert_minor(g, s):
    try:
        return invert_spd(g[np.ix_(s, s)])
    except SingularMatrixError as exc:
        raise SingularMatrixError(f"singular principal minor on {list(s)}: {exc}") from None


def check_positive_cone_exhaustive(a, max_n=10, exhaustive=False, tol=1e-9):
    """Positive cone condition on ``A^T A``.

    Every principal minor of ``B A^T A B`` (``B`` a +-1 diagonal) must have
    an inverse with strictly positive row sums. A row sum counts as
    positive when it exceeds `tol` times the largest diagonal entry of
    that inverse.

    By default each subset ``S`` is checked through the strict diagonal
    dominance of ``inv(Psi_S)``, which covers all sign patterns at once.
    With ``exhaustive=True`` every sign pattern is inverted and summed
    explicitly. ``B`` and ``-B`` produce the same signed minor, so only
    patterns with ``b_0 = +1`` on the subset are enumerated. The reported
    witness is the lexicographically smallest failing ``(S, B)``.
    """
    a = as_matrix(a, "A")
    n = a.shape[1]
    if n > max_n:
        raise CostGuardError(f"positive cone search over n={n} columns exceeds max_n={max_n}")
    g = np.asarray(gram(a))
    for s in _subsets(n):
        r = _invert_minor(g, s)
        if exhaustive:
            for tail in itertools.product((1.0, -1.0), repeat=len(s) - 1):
                b = np.array((1.0,) + tail)
                signed = _invert_minor((b[:, None] * g[np.ix_(s, s)]) * b[None, :], range(len(s)))
                fail = _row_sum_failure(signed, tol)
                if fail:
                    return _cone_failure(s, b, *fail)
        else:
            margins = dominance_margins(r)
            limit = tol * max(1.0, float(np.max(np.abs(np.diag(r)))))
            bad = np.flatnonzero(margins <= limit)
            if bad.size:
                i = int(bad[0])
                # b_i b_j = -sign(r_ij) minimizes row i's sum
                b = -np.sign(r[i])
                b[b == 0] = 1.0
                b[i] = 1.0
                b = b * b[0]
                return _cone_failure(s, b, i, float(margins[i]))
    return ConditionReport("positive_cone", True)


def _cone_failure(s, b, row, value):
    signs = "".join("+" if x > 0 else "-" for x in b)
    return ConditionReport(
        "positive_cone", False,
        witness=f"S={list(s)} B={signs} row {s[row]}: row sum {value!r} is not positive")


def symmetric_sqrt_inverse(h):
    """``A`` symmetric with ``A^T A = h^{-1}`` for positive definite `h`."""
    h = as_matrix(h, "H")
    w, v = np.linalg.eigh(0.5 * (h + h.T))
    if np.any(w <= 0):
        raise SingularMatrixError("square root needs a positive definite matrix")
    a = (v / np.sqrt(w)) @ v.T
    return 0.5 * (a + a.T)


def cone_matches_sdd(h, max_n=10, tol=1e-9):
    """Do "``h`` is SDD" and the exhaustive positive cone test on ``A^T A = h^{-1}`` agree?"""
    h = as_matrix(h, "H")
    if h.shape[0] > max_n:
        raise CostGuardError(f"n={h.shape[0]} exceeds max_n={max_n}")
    a = symmetric_sqrt_inverse(h)
    sdd = classify_dominance(h) is DominanceClass.SDD
    cone = check_positive_cone_exhaustive(a, max_n=max_n, exhaustive=True, tol=tol)
    return sdd == cone.holds
