"""Monte Carlo frequency of ``(A^T A)^{-1}`` being diagonally dominant for random A."""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, HypothesisError, SingularMatrixError
from .matrix import classify_dominance, gram, invert_spd
from .textio import fmt

DISTRIBUTIONS = ("normal", "uniform", "bernoulli")

# Distributions and (m, n) grid used by the default sweep.
SWEEP_DISTRIBUTIONS = (("normal", None), ("uniform", None), ("bernoulli", 0.1), ("bernoulli", 0.5))
SWEEP_N = tuple(range(2, 11))
SWEEP_M_FACTORS = (1, 2, 4)

CSV_HEADER = "distribution,p,m,n,trials,dd,singular,frequency"


@dataclass(frozen=True)
class EnsembleSpec:
    distribution: str
    m: int
    n: int
    trials: int = 1000
    seed: int = 0
    p: float = None

    def __post_init__(self):
        if self.distribution not in DISTRIBUTIONS:
            raise ArgumentError(f"unknown distribution {self.distribution!r}; use one of {DISTRIBUTIONS}")
        if self.m < 1 or self.n < 1:
            raise ArgumentError("m and n must be positive")
        if self.trials < 1:
            raise ArgumentError("trials must be >= 1")
        if self.seed < 0:
            raise ArgumentError("seed must be nonnegative")
        if self.distribution == "bernoulli":
            if self.p is None or not 0 < self.p < 1:
                raise ArgumentError("bernoulli needs p in (0, 1)")
        elif self.p is not None:
            raise ArgumentError(f"p only applies to bernoulli, not {self.distribution}")


@dataclass(frozen=True)
class FrequencyReport:
    spec: EnsembleSpec
    dd_count: int
    not_dd_count: int
    singular_count: int
    caveat: str = None

    @property
    def frequency(self):
        return self.dd_count / self.spec.trials

    def csv_row(self):
        s = self.spec
        p = "" if s.p is None else fmt(s.p)
        return f"{s.distribution},{p},{s.m},{s.n},{s.trials},{self.dd_count},{self.singular_count},{fmt(self.frequency)}"


def trial_rng(seed, trial_index):
    """Generator for one trial, independent of how trials are scheduled."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial_index,)))


def sample_matrix(spec, trial_index):
    rng = trial_rng(spec.seed, trial_index)
    shape = (spec.m, spec.n)
    if spec.distribution == "normal":
        return rng.standard_normal(shape)
    if spec.distribution == "uniform":
        return rng.random(shape)
    return (rng.random(shape) < spec.p).astype(float)


def classify_trial(a):
    """``"dd"``, ``"not_dd"`` or ``"singular"`` for one sampled matrix."""
    try:
        h = invert_spd(gram(a))
    except SingularMatrixError:
        return "singular"
    return "dd" if classify_dominance(h).is_dd else "not_dd"


def _count(spec, start, stop, sampler):
    counts = {"dd": 0, "not_dd": 0, "singular": 0}
    for t in range(start, stop):
        a = sample_matrix(spec, t) if sampler is None else sampler(spec, t)
        counts[classify_trial(a)] += 1
    return counts


def run_frequency_study(spec, workers=1, allow_underdetermined=False, sampler=None):
    """Count how many of ``spec.trials`` random matrices satisfy the DD condition.

    Trials whose Gram matrix is numerically singular are counted
    separately and never as DD. With ``workers > 1`` trials are split into
    contiguous chunks across processes; counts do not depend on the split.
    `sampler`, if given, replaces :func:`sample_matrix` (it must be
    picklable when ``workers > 1``).
    """
    caveat = None
    if spec.m < spec.n:
        if not allow_underdetermined:
            raise HypothesisError(f"m={spec.m} < n={spec.n}; the condition assumes m >= n")
        caveat = "m < n: Gram matrix is rank deficient"
    workers = max(1, min(int(workers), spec.trials))
    bounds = np.linspace(0, spec.trials, workers + 1).astype(int)
    chunks = [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])]
    if workers == 1:
        parts = [_count(spec, 0, spec.trials, sampler)]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_count, [spec] * workers, *zip(*chunks), [sampler] * workers))
    total = {k: sum(part[k] for part in parts) for k in parts[0]}
    return FrequencyReport(spec, total["dd"], total["not_dd"], total["singular"], caveat)


def default_sweep(trials=1000, seed=0):
    """Specs for the four distributions over ``m in {n, 2n, 4n}``, ``n = 2..10``."""
    specs = []
    for dist, p in SWEEP_DISTRIBUTIONS:
        for n in SWEEP_N:
            for factor in SWEEP_M_FACTORS:
                specs.append(EnsembleSpec(dist, factor * n, n, trials, seed, p))
    return specs


def format_reports_csv(reports):
    return "\n".join([CSV_HEADER] + [r.csv_row() for r in reports]) + "\n"
