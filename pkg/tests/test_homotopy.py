from pathlib import Path

import numpy as np
import pytest

from ddlasso.errors import (ArgumentError, CostGuardError, CycleGuardError, OutOfRangeError,
                            ParseError, SingularMatrixError)
from ddlasso.homotopy import (Event, LassoProblem, eval_path, format_path_csv, kkt_failures,
                              least_squares_check, monotonicity_audit, oracle_solve, oracle_solve_grid,
                              parse_path_csv, path_from_csv, solve_path, subgradient_check)
from ddlasso.textio import read_matrix, read_vector
from gen import dd_inverse_gram_problem, random_problem

DATA = Path(__file__).parent / "data"


def soft(v, lam):
    return np.sign(v) * np.maximum(np.abs(v) - lam, 0.0)


def orthonormal(n, seed):
    q, _ = np.linalg.qr(np.random.default_rng(seed).standard_normal((n, n)))
    return q


def test_subgradient_check_examples():
    rng = np.random.default_rng(0)
    a, y = rng.standard_normal((5, 3)), rng.standard_normal(5)
    p = LassoProblem(a, y)
    lam0 = p.lambda_max
    assert subgradient_check(p, lam0, np.zeros(3))
    assert subgradient_check(p, 2 * lam0, np.zeros(3))
    assert not subgradient_check(p, 0.5 * lam0, np.zeros(3))
    assert subgradient_check(LassoProblem([[1.0]], [3.0]), 1.0, [2.0])
    assert not subgradient_check(LassoProblem([[1.0]], [3.0]), 1.0, [2.1])
    with pytest.raises(ArgumentError):
        subgradient_check(p, 0.0, np.zeros(3))


def test_scalar_path():
    path = solve_path(LassoProblem([[1.0]], [3.0]))
    assert [bp.lam for bp in path.breakpoints] == [3.0, 0.0]
    assert [bp.event.kind for bp in path.breakpoints] == ["start", "end"]
    np.testing.assert_array_equal(path.coefs, [[0.0], [3.0]])
    for lam in np.linspace(0, 3, 7):
        np.testing.assert_allclose(eval_path(path, lam), [3 - lam])


def test_orthonormal_soft_threshold():
    q = orthonormal(3, 1)
    y = np.array([1.0, -2.0, 0.5])
    p = LassoProblem(q, y)
    path = solve_path(p)
    c = q.T @ y
    np.testing.assert_allclose(path.lambdas[:-1], np.sort(np.abs(c))[::-1], rtol=1e-12)
    assert all(ev.kind in ("start", "add", "end") for ev in path.events)
    for lam in np.linspace(0.01, 2.5, 40):
        np.testing.assert_allclose(eval_path(path, lam), soft(c, lam), atol=1e-12)
        np.testing.assert_allclose(oracle_solve(p, lam), soft(c, lam), atol=1e-12)
    assert monotonicity_audit(path).ok


def test_random_problem_matches_oracle():
    rng = np.random.default_rng(42)
    p = LassoProblem(rng.standard_normal((5, 4)), rng.standard_normal(5))
    path = solve_path(p)
    lams = np.linspace(p.lambda_max, 0, 51)[:-1]
    expected = oracle_solve_grid(p, lams)
    got = np.array([eval_path(path, lam) for lam in lams])
    assert np.max(np.abs(got - expected)) <= 1e-8


def test_eval_path_endpoints_and_midpoints():
    rng = np.random.default_rng(7)
    path = solve_path(LassoProblem(rng.standard_normal((6, 4)), rng.standard_normal(6)))
    bps = path.breakpoints
    for k, bp in enumerate(bps):
        np.testing.assert_array_equal(eval_path(path, bp.lam), bp.u)
        if k:
            mid = 0.5 * (bp.lam + bps[k - 1].lam)
            np.testing.assert_allclose(eval_path(path, mid), 0.5 * (bp.u + bps[k - 1].u), atol=1e-14)
    np.testing.assert_array_equal(eval_path(path, 2 * bps[0].lam), np.zeros(4))


def test_early_stop_and_out_of_range():
    rng = np.random.default_rng(9)
    p = LassoProblem(rng.standard_normal((6, 3)), rng.standard_normal(6))
    lam_min = 0.3 * p.lambda_max
    path = solve_path(p, lambda_min=lam_min)
    assert path.breakpoints[-1].lam == lam_min
    assert path.breakpoints[-1].event.kind == "end"
    assert subgradient_check(p, lam_min, path.breakpoints[-1].u)
    with pytest.raises(OutOfRangeError):
        eval_path(path, 0.5 * lam_min)


def test_oracle_examples():
    np.testing.assert_allclose(oracle_solve(LassoProblem(np.eye(2), [2.0, 1.0]), 1.5), [0.5, 0.0])
    rng = np.random.default_rng(3)
    a, y = rng.standard_normal((4, 4)), rng.standard_normal(4)
    p = LassoProblem(a, y)
    np.testing.assert_array_equal(oracle_solve(p, p.lambda_max * 1.01), np.zeros(4))
    np.testing.assert_allclose(oracle_solve(p, 1e-9), np.linalg.solve(a, y), atol=1e-6)


def test_oracle_guards():
    with pytest.raises(CostGuardError):
        oracle_solve(LassoProblem(np.eye(15), np.ones(15)), 0.1)
    with pytest.raises(ArgumentError):
        oracle_solve(LassoProblem(np.eye(2), [1.0, 1.0]), 0.0)


def test_kkt_everywhere():
    rng = np.random.default_rng(13)
    for _ in range(30):
        p = LassoProblem(*random_problem(rng))
        path = solve_path(p)
        assert kkt_failures(path) == []
        bps = path.breakpoints
        for hi, lo in zip(bps, bps[1:]):
            for lam in rng.uniform(lo.lam, hi.lam, 20):
                if lam > 0:
                    assert subgradient_check(p, lam, eval_path(path, lam), tol=1e-8)


def test_piecewise_linear_between_breakpoints():
    rng = np.random.default_rng(17)
    for _ in range(10):
        p = LassoProblem(*random_problem(rng, n_max=5))
        path = solve_path(p)
        bps = path.breakpoints
        for hi, lo in zip(bps, bps[1:]):
            a, b = max(lo.lam, 1e-6), hi.lam
            lams = [a + 0.25 * (b - a), a + 0.5 * (b - a), a + 0.75 * (b - a)]
            u1, u2, u3 = oracle_solve_grid(p, lams)
            assert np.max(np.abs(u1 - 2 * u2 + u3)) <= 1e-10


def test_least_squares_endpoint():
    rng = np.random.default_rng(21)
    for _ in range(20):
        a, y = random_problem(rng)
        p = LassoProblem(a, y)
        u = solve_path(p).breakpoints[-1].u
        assert least_squares_check(p, u, tol=1e-8)
        np.testing.assert_allclose(u, np.linalg.lstsq(a, y, rcond=None)[0], atol=1e-8)


def test_zero_observation():
    path = solve_path(LassoProblem(np.eye(3), np.zeros(3)))
    assert len(path) == 1
    assert path.breakpoints[0].lam == 0.0
    np.testing.assert_array_equal(path.breakpoints[0].u, np.zeros(3))


def test_tied_start_enters_together():
    path = solve_path(LassoProblem(np.eye(3), [1.0, -1.0, 0.5]))
    start = path.breakpoints[0]
    assert start.event == Event("start", (0, 1))
    assert start.active == (0, 1) and start.signs == (1.0, -1.0)
    assert kkt_failures(path) == []


def test_duplicate_columns_singular():
    a = np.array([[1.0, 1.0], [2.0, 2.0]])
    with pytest.raises(SingularMatrixError, match=r"\[0, 1\]"):
        solve_path(LassoProblem(a, [1.0, 0.0]))


def test_zero_column_rejected():
    with pytest.raises(ArgumentError):
        solve_path(LassoProblem([[1.0, 0.0], [0.0, 0.0]], [1.0, 1.0]))


def test_cycle_guard():
    rng = np.random.default_rng(2)
    p = LassoProblem(rng.standard_normal((8, 6)), rng.standard_normal(8))
    with pytest.raises(CycleGuardError):
        solve_path(p, max_breakpoints=2)


def adversarial():
    return LassoProblem(read_matrix(DATA / "adversarial_A.txt"), read_vector(DATA / "adversarial_y.txt"))


def test_audit_flags_removal():
    path = solve_path(adversarial())
    assert path.removals
    report = monotonicity_audit(path)
    assert not report.cardinality_monotone
    k, ev = path.removals[0]
    assert any(f.startswith(f"breakpoint {k} ") and "remove:-u_4" in f for f in report.failures)
    assert kkt_failures(path) == []


def test_dd_condition_paths_monotone():
    rng = np.random.default_rng(5)
    for _ in range(20):
        a, y, _ = dd_inverse_gram_problem(rng, int(rng.integers(2, 7)))
        report = monotonicity_audit(solve_path(LassoProblem(a, y)))
        assert report.ok, report.failures


def test_signs_match_coefficients():
    rng = np.random.default_rng(19)
    for _ in range(10):
        path = solve_path(LassoProblem(*random_problem(rng)))
        for bp in path.breakpoints:
            for i, s in zip(bp.active, bp.signs):
                if abs(bp.u[i]) > 1e-10:
                    assert s == np.sign(bp.u[i])


def test_pareto_pairs():
    path = solve_path(LassoProblem([[1.0]], [3.0]))
    np.testing.assert_allclose(path.pareto(), [[0.0, 9.0], [3.0, 0.0]])


@pytest.mark.parametrize("event", [Event("start", (0, 2)), Event("add", (4,)), Event("remove", (), (1,)),
                                   Event("multi", (3,), (0,)), Event("end")])
def test_event_label_round_trip(event):
    assert Event.parse(event.label()) == event


def test_event_parse_errors():
    for bad in ("jump", "add:3", "add:+x_3"):
        with pytest.raises(ParseError):
            Event.parse(bad)


def test_path_csv_round_trip():
    p = adversarial()
    path = solve_path(p)
    text = format_path_csv(path)
    assert text.splitlines()[0] == "lambda,event,u_1,u_2,u_3,u_4"
    lams, events, coefs = parse_path_csv(text)
    assert np.array_equal(lams, path.lambdas)
    assert np.array_equal(coefs, path.coefs)
    assert events == path.events
    rebuilt = path_from_csv(text, p)
    assert [bp.active for bp in rebuilt.breakpoints] == [bp.active for bp in path.breakpoints]
    assert kkt_failures(rebuilt) == []
