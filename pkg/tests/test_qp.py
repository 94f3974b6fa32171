import numpy as np
import pytest

from safe_mppi.conic import Infeasible, QpProblem, solve_qp

from oracles import qp_grid_oracle


def test_inactive_row_returns_center():
    u = solve_qp(QpProblem([1.0, 0.0], [([-4.4, 0.0], -8.59)]))
    np.testing.assert_array_equal(u, [1.0, 0.0])


def test_single_halfspace_projection():
    u = solve_qp(QpProblem([0.0, 0.0], [([1.0, 0.0], 2.0)]))
    np.testing.assert_allclose(u, [2.0, 0.0], atol=1e-14)


def test_no_rows():
    np.testing.assert_array_equal(solve_qp(QpProblem([0.3, -1.0], [])), [0.3, -1.0])


def test_infeasible():
    with pytest.raises(Infeasible):
        solve_qp(QpProblem([0.0, 0.0], [([1.0, 0.0], 1.0), ([-1.0, 0.0], 1.0)]))


def test_validation():
    with pytest.raises(ValueError):
        QpProblem([np.nan, 0.0], [])
    with pytest.raises(ValueError):
        QpProblem([0.0, 0.0], [([1.0, 0.0, 0.0], 1.0)])


def test_kkt_random(rng):
    for _ in range(200):
        J = int(rng.integers(1, 5))
        A = rng.normal(size=(J, 2))
        uf = rng.uniform(-3, 3, size=2)
        r = A @ uf - rng.uniform(0, 1, size=J)
        c = rng.uniform(-5, 5, size=2)
        u = solve_qp(QpProblem(c, list(zip(A, r))))
        assert np.all(A @ u - r >= -1e-9)
        # KKT: u - c = A_S^T lam with lam >= 0 on active rows
        act = np.abs(A @ u - r) < 1e-8
        if np.allclose(u, c):
            continue
        lam, *_ = np.linalg.lstsq(A[act].T, u - c, rcond=None)
        np.testing.assert_allclose(A[act].T @ lam, u - c, atol=1e-8)
        assert np.all(lam >= -1e-8)


def test_matches_grid_oracle(rng):
    for _ in range(25):
        J = int(rng.integers(1, 4))
        A = rng.normal(size=(J, 2))
        uf = rng.uniform(-3, 3, size=2)
        r = A @ uf - rng.uniform(0, 1, size=J)
        c = rng.uniform(-5, 5, size=2)
        rows = list(zip(A, r))
        u = solve_qp(QpProblem(c, rows))
        f = float(np.sum((u - c) ** 2))
        ug, fg = qp_grid_oracle(c, rows)
        # no feasible grid point beats the solver, and the grid's best is near it
        assert f <= fg + 1e-4
        assert fg - f <= 2 * np.sqrt(f) * 1e-3 + 1e-6 + 1e-4
        # strong convexity: ||u_grid - u*||^2 <= f_grid - f*
        assert np.linalg.norm(ug - u) <= np.sqrt(max(fg - f, 0.0)) + 1e-4
