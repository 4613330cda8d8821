import numpy as np
import pytest

from ddlasso.ensemble import (CSV_HEADER, EnsembleSpec, classify_trial, default_sweep, format_reports_csv,
                              run_frequency_study, sample_matrix)
from ddlasso.errors import ArgumentError, HypothesisError
from ddlasso.matrix import gram
from gen import brute_force_dominance


def orthogonal_sampler(spec, t):
    q, _ = np.linalg.qr(np.random.default_rng(t).standard_normal((spec.m, spec.n)))
    return q


def test_sample_matrix_deterministic():
    spec = EnsembleSpec("normal", 6, 3, seed=11)
    np.testing.assert_array_equal(sample_matrix(spec, 5), sample_matrix(spec, 5))
    assert not np.array_equal(sample_matrix(spec, 5), sample_matrix(spec, 6))
    other = EnsembleSpec("normal", 6, 3, seed=12)
    assert not np.array_equal(sample_matrix(spec, 5), sample_matrix(other, 5))


def test_bernoulli_mean():
    spec = EnsembleSpec("bernoulli", 100, 100, p=0.5)
    a = sample_matrix(spec, 0)
    assert set(np.unique(a)) <= {0.0, 1.0}
    sigma = np.sqrt(0.25 / a.size)
    assert abs(a.mean() - 0.5) <= 3 * sigma


def test_bernoulli_sparse_mean():
    a = np.concatenate([sample_matrix(EnsembleSpec("bernoulli", 10, 10, p=0.1), t).ravel() for t in range(100)])
    assert abs(a.mean() - 0.1) <= 3 * np.sqrt(0.09 / a.size)


def test_uniform_support():
    a = sample_matrix(EnsembleSpec("uniform", 50, 40), 3)
    assert a.min() >= 0 and a.max() <= 1


def test_orthogonal_hook_gives_frequency_one():
    spec = EnsembleSpec("normal", 8, 4, trials=50)
    r = run_frequency_study(spec, sampler=orthogonal_sampler)
    assert r.frequency == 1.0 and r.singular_count == 0
    assert run_frequency_study(spec, workers=3, sampler=orthogonal_sampler) == r


def test_normal_study_reproducible_and_cross_checked():
    spec = EnsembleSpec("normal", 20, 3, trials=1000, seed=7)
    r = run_frequency_study(spec)
    assert r == run_frequency_study(spec)
    assert 0 <= r.frequency <= 1
    assert r.dd_count + r.not_dd_count + r.singular_count == spec.trials
    for t in range(50):
        a = sample_matrix(spec, t)
        h = np.linalg.inv(a.T @ a)
        tag = brute_force_dominance(h.tolist())
        assert (tag != "NotDD") == (classify_trial(a) == "dd")


def test_bernoulli_sparse_has_singular_trials():
    r = run_frequency_study(EnsembleSpec("bernoulli", 10, 8, trials=200, seed=0, p=0.1))
    assert r.singular_count > 0
    assert r.dd_count + r.not_dd_count + r.singular_count == 200


def test_classify_trial_buckets():
    assert classify_trial(np.eye(3)) == "dd"
    assert classify_trial(np.ones((4, 2))) == "singular"
    assert classify_trial(np.zeros((3, 2))) == "singular"
    # inverse Gram of an equicorrelated rho=-0.45 design is not DD
    g = 1.45 * np.eye(3) - 0.45 * np.ones((3, 3))
    a = np.linalg.cholesky(g).T
    np.testing.assert_allclose(gram(a), g, atol=1e-14)
    assert classify_trial(a) == "not_dd"


@pytest.mark.parametrize("workers", [2, 3, 7])
def test_worker_count_invariance(workers):
    spec = EnsembleSpec("uniform", 6, 4, trials=120, seed=3)
    assert run_frequency_study(spec, workers=workers) == run_frequency_study(spec)


@pytest.mark.parametrize("kwargs", [
    dict(distribution="cauchy", m=3, n=2),
    dict(distribution="normal", m=0, n=2),
    dict(distribution="normal", m=3, n=2, trials=0),
    dict(distribution="normal", m=3, n=2, seed=-1),
    dict(distribution="bernoulli", m=3, n=2),
    dict(distribution="bernoulli", m=3, n=2, p=1.0),
    dict(distribution="uniform", m=3, n=2, p=0.5),
])
def test_spec_validation(kwargs):
    with pytest.raises(ArgumentError):
        EnsembleSpec(**kwargs)


def test_underdetermined_needs_override():
    spec = EnsembleSpec("normal", 2, 4, trials=10)
    with pytest.raises(HypothesisError):
        run_frequency_study(spec)
    r = run_frequency_study(spec, allow_underdetermined=True)
    assert r.caveat and r.singular_count == 10 and r.dd_count == 0


def test_sweep_and_csv():
    specs = default_sweep(trials=5)
    assert len(specs) == 4 * 9 * 3
    assert all(s.m >= s.n for s in specs)
    r = run_frequency_study(EnsembleSpec("bernoulli", 4, 2, trials=4, seed=1, p=0.5))
    lines = format_reports_csv([r]).splitlines()
    assert lines[0] == CSV_HEADER
    fields = lines[1].split(",")
    assert fields[:5] == ["bernoulli", "0.5", "4", "2", "4"]
    assert int(fields[5]) == r.dd_count and int(fields[6]) == r.singular_count
