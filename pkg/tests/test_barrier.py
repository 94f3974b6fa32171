import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from safe_mppi.barrier import (
    BarrierRow,
    CircularObstacle,
    ClassKappa,
    barrier_row,
    barrier_rows,
    h,
    min_h,
    safe_set_membership,
)
from safe_mppi.dynamics import step, unicycle_model

OBS = CircularObstacle(2.2, 2.0, 0.5)


def test_h_examples():
    assert h(OBS, 0, 0) == pytest.approx(8.59)
    assert h(OBS, 2.2, 2.0) == pytest.approx(-0.25)
    assert h(OBS, 2.7, 2.0) == pytest.approx(0.0, abs=1e-12)


def test_obstacle_radius_positive():
    with pytest.raises(ValueError):
        CircularObstacle(0, 0, 0)


def test_class_kappa():
    assert ClassKappa()(0.0) == 0
    assert ClassKappa("cubic", 1.0)(2.0) == pytest.approx(8.0)
    assert ClassKappa("linear", 3.0)(2.0) == pytest.approx(6.0)
    with pytest.raises(ValueError):
        ClassKappa("quadratic")
    with pytest.raises(ValueError):
        ClassKappa(gamma=0.0)


def _fd_row(model, obs, state, eps=1e-6):
    """Central difference of h along each unit control direction (rate per unit input)."""
    A = np.zeros(2)
    for i in range(2):
        e = np.zeros(2)
        e[i] = 1.0
        xp = step(model, state, e, np.zeros(2), eps)
        xm = step(model, state, -e, np.zeros(2), eps)
        A[i] = (h(obs, xp[0], xp[1]) - h(obs, xm[0], xm[1])) / (2 * eps)
    return A


def test_row_example_against_finite_difference(model):
    row = barrier_row(model, OBS, np.zeros(3), ClassKappa())
    np.testing.assert_allclose(row.A, [-4.4, 0.0], atol=1e-12)
    assert row.b == pytest.approx(-8.59)
    np.testing.assert_allclose(_fd_row(model, OBS, np.zeros(3)), row.A, atol=1e-6)


def test_row_random_states_against_finite_difference(model, rng):
    for _ in range(50):
        s = rng.uniform([-1, -1, -np.pi], [5, 5, np.pi])
        row = barrier_row(model, OBS, s, ClassKappa())
        np.testing.assert_allclose(_fd_row(model, OBS, s), row.A, atol=1e-5)


def test_row_dt_first_order(model, rng):
    # h after a small step with unit speed changes by A * dt + O(dt^2)
    s = np.array([0.3, 0.4, 0.7])
    row = barrier_row(model, OBS, s, ClassKappa())
    errs = []
    for dt in (1e-2, 5e-3):
        x1 = step(model, s, np.array([1.0, 0.0]), np.zeros(2), dt)
        errs.append(abs(h(OBS, x1[0], x1[1]) - h(OBS, s[0], s[1]) - row.A[0] * dt))
    assert errs[1] < errs[0] / 3  # quadratic remainder


def test_tangent_heading_degenerate(model):
    s = np.array([0.0, 0.0, 0.0])
    d = np.array([OBS.cx, OBS.cy]) - s[:2]
    s[2] = np.arctan2(d[1], d[0]) + np.pi / 2
    row = barrier_row(model, OBS, s, ClassKappa())
    np.testing.assert_allclose(row.A, [0, 0], atol=1e-12)
    assert row.degenerate


def test_cubic_alpha_row(model):
    obs = CircularObstacle(0.0, 0.0, 1.0)
    s = np.array([np.sqrt(3.0), 0.0, 0.0])  # h = 2
    row = barrier_row(model, obs, s, ClassKappa("cubic", 1.0))
    assert row.b == pytest.approx(-8.0)


def test_gamma_linearity(model, rng):
    for _ in range(10):
        s = rng.uniform([-1, -1, -3], [5, 5, 3])
        g = rng.uniform(0.1, 5)
        b1 = barrier_row(model, OBS, s, ClassKappa("linear", g)).b
        b2 = barrier_row(model, OBS, s, ClassKappa("linear", 2 * g)).b
        assert b2 - b1 == pytest.approx(-g * h(OBS, s[0], s[1]), rel=1e-12, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(*[st.floats(-20, 20, allow_nan=False)] * 4)
def test_translation_invariance(x, y, tx, ty):
    a = h(OBS, x, y)
    b = h(CircularObstacle(OBS.cx + tx, OBS.cy + ty, OBS.r), x + tx, y + ty)
    assert a == pytest.approx(b, rel=1e-9, abs=1e-9)


def test_batched_rows_match_single(model, rng):
    obstacles = [OBS, CircularObstacle(1.0, 3.0, 0.4)]
    S = rng.uniform([-1, -1, -3], [5, 5, 3], size=(7, 3))
    A, b, hv = barrier_rows(model, obstacles, S, ClassKappa())
    for k in range(7):
        for j, o in enumerate(obstacles):
            r = barrier_row(model, o, S[k], ClassKappa())
            np.testing.assert_allclose(A[k, j], r.A)
            assert b[k, j] == pytest.approx(r.b)
            assert hv[k, j] == pytest.approx(r.h_value)


def test_safe_set_membership():
    assert bool(safe_set_membership([], 2.2, 2.0))
    assert not bool(safe_set_membership([OBS], 2.2, 2.0))
    assert bool(safe_set_membership([OBS], 0.0, 0.0))
    assert np.isinf(min_h([], 0.0, 0.0))


def test_barrier_row_type():
    row = BarrierRow(np.array([1e-12, 0.0]), -1.0, 2.0)
    assert row.degenerate
