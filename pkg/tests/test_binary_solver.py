import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sdpi.binary_solver import (
    BinaryProblem, SolverConfig, _grid, _ratios, diagonal_limit, ratio_at, solve_binary,
)
from sdpi.divergence import DivergenceKind, df

from conftest import distributions

KINDS = list(DivergenceKind)
BSC01 = ([0.9, 0.1], [0.1, 0.9])
IDENT = ([1.0, 0.0], [0.0, 1.0])

# Frozen from scripts/dense_grid_oracle.py (4096^2 grid + diagonal scan, plain formulas)
BSC_RATIO_09_01 = 0.5520955864079821
BSC01_ETA_KL = 0.64


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("pq", [(0.2, 0.7), (1.0, 0.4), (0.0, 0.5), (0.9, 0.1)])
def test_ratio_identity_rows_is_one(kind, pq):
    assert ratio_at(BinaryProblem(*IDENT, kind), *pq) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("kind", KINDS)
def test_ratio_equal_rows_is_zero(kind):
    assert ratio_at(BinaryProblem([0.3, 0.7], [0.3, 0.7], kind), 0.8, 0.1) == 0.0


def test_ratio_bsc_oracle_value():
    assert ratio_at(BinaryProblem(*BSC01), 0.9, 0.1) == pytest.approx(BSC_RATIO_09_01, abs=1e-12)


def test_ratio_invalid_points():
    pr = BinaryProblem(*BSC01)
    with pytest.raises(ValueError):
        ratio_at(pr, 0.4, 0.4)
    with pytest.raises(ValueError):
        ratio_at(pr, 0.4, 0.0)  # infinite KL input divergence


def test_diagonal_limit_examples():
    assert diagonal_limit(BinaryProblem(*BSC01), 0.5) == pytest.approx(0.64, abs=1e-12)
    assert diagonal_limit(BinaryProblem(*IDENT), 0.5) == pytest.approx(1.0, abs=1e-12)
    assert diagonal_limit(BinaryProblem([0.2, 0.8], [0.2, 0.8]), 0.3) == 0.0
    with pytest.raises(ValueError):
        diagonal_limit(BinaryProblem(*BSC01, "tv"), 0.5)
    with pytest.raises(ValueError):
        diagonal_limit(BinaryProblem(*BSC01), 0.0)


@pytest.mark.parametrize("kind", ["kl", "chi2", "hellinger2"])
@given(r0=distributions(n=4, full_support=True), r1=distributions(n=4, full_support=True))
def test_ratio_tends_to_diagonal_limit(kind, r0, r1):
    pr = BinaryProblem(r0, r1, kind)
    for q in (0.3, 0.5, 0.7):
        lim = diagonal_limit(pr, q)
        assert abs(ratio_at(pr, q + 1e-5, q) - lim) <= 0.01 * lim + 1e-15


@pytest.mark.parametrize("kind", KINDS)
@given(r0=distributions(n=5), r1=distributions(n=5))
def test_compiled_grid_matches_numpy(kind, r0, r1):
    pr = BinaryProblem(r0, r1, kind)
    ps = np.array([0.0, 1e-7, 0.2, 0.5, 0.5 + 1e-9, 0.99, 1.0])
    qs = np.array([0.0, 1e-3, 0.2, 0.5, 0.77, 1.0])
    a = _grid(pr, ps, qs)
    b = _ratios(pr, ps[:, None], qs[None, :])
    np.testing.assert_array_equal(np.isnan(a), np.isnan(b))
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-15)


def test_solve_trivial():
    assert solve_binary(BinaryProblem([0.3, 0.7], [0.3, 0.7])).eta == 0.0
    assert solve_binary(BinaryProblem(*IDENT)).eta == pytest.approx(1.0, abs=1e-9)


def test_solve_bsc_kl():
    sol = solve_binary(BinaryProblem(*BSC01))
    assert sol.eta == pytest.approx(BSC01_ETA_KL, abs=1e-4)
    assert sol.reached_tol and not sol.budget_exhausted and not sol.anomaly


def test_tv_fast_path_and_generic_agree():
    pr = BinaryProblem([0.6, 0.3, 0.1], [0.2, 0.2, 0.6], "tv")
    fast = solve_binary(pr)
    slow = solve_binary(pr, config=SolverConfig(fast_path=False))
    assert fast.eta == df("tv", pr.row0, pr.row1)
    assert slow.eta == pytest.approx(fast.eta, abs=1e-12)


def test_budget_exhaustion_is_flagged_not_raised():
    sol = solve_binary(BinaryProblem([0.6, 0.3, 0.1], [0.2, 0.2, 0.6]), budget=300_000)
    assert sol.budget_exhausted and not sol.reached_tol
    assert 0 < sol.eta <= 1


def test_bad_arguments():
    with pytest.raises(ValueError):
        BinaryProblem([0.5, 0.5], [1.0])
    with pytest.raises(ValueError):
        solve_binary(BinaryProblem(*BSC01), tol=0)


SMALL = SolverConfig(coarse=96, keep=4, zoom_points=24, diagonal_points=96)


@pytest.mark.parametrize("kind", ["kl", "chi2", "hellinger2"])
@given(seed=st.integers(0, 2**32 - 1))
def test_solver_properties(kind, seed):
    rng = np.random.default_rng(seed)
    r0, r1 = rng.dirichlet(np.ones(int(rng.integers(2, 6))), 2)
    tol = 1e-6
    a = solve_binary(BinaryProblem(r0, r1, kind), tol, config=SMALL)
    b = solve_binary(BinaryProblem(r1, r0, kind), tol, config=SMALL)
    # DPI ceiling over every evaluated ratio
    assert a.max_ratio_seen <= 1 + 1e-9 and b.max_ratio_seen <= 1 + 1e-9
    # monotone refinement
    assert all(x <= y for x, y in zip(a.round_best, a.round_best[1:]))
    # symmetry under (p, q) -> (1 - p, 1 - q)
    assert abs(a.eta - b.eta) <= 2 * tol + 1e-9
    # never below the local chi-square-type ratio
    qs = np.linspace(0.01, 0.99, 99)
    diag = max(diagonal_limit(BinaryProblem(r0, r1, kind), q) for q in qs)
    assert a.eta >= diag - tol
