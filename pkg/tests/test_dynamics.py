import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from safe_mppi.dynamics import State, rollout, step, unicycle_model

finite = st.floats(-10, 10, allow_nan=False)


def test_input_matrix_heading_zero(model):
    G = model.input_matrix(np.array([0.0, 0.0, 0.0]))
    np.testing.assert_array_equal(G, [[1, 0], [0, 0], [0, 1]])


def test_input_matrix_heading_quarter_turn(model):
    G = model.input_matrix(np.array([0.0, 0.0, np.pi / 2]))
    np.testing.assert_allclose(G, [[0, 0], [1, 0], [0, 1]], atol=1e-12)


def test_driftless(model):
    np.testing.assert_array_equal(model.drift(np.array([1.3, -2.0, 0.4])), [0, 0, 0])


def test_step_examples(model):
    np.testing.assert_allclose(step(model, State(0, 0, 0), (1, 0), (0, 0), 0.05), [0.05, 0, 0])
    np.testing.assert_allclose(
        step(model, State(0, 0, np.pi / 2), (2, 1), (0, 0), 0.05), [0, 0.1, np.pi / 2 + 0.05], atol=1e-12
    )
    np.testing.assert_allclose(step(model, State(0, 0, 0), (1, 0), (0.5, 0), 0.05), [0.075, 0, 0])


def test_step_rejects_bad_input(model):
    with pytest.raises(ValueError):
        step(model, State(0, 0, 0), (1, 0), (0, 0), 0.0)
    with pytest.raises(ValueError):
        step(model, State(np.nan, 0, 0), (1, 0), (0, 0), 0.05)
    with pytest.raises(ValueError):
        step(model, State(0, 0, 0), (np.inf, 0), (0, 0), 0.05)
    with pytest.raises(ValueError):
        step(model, State(0, 0, 0), (1, 0, 0), (0, 0), 0.05)


def test_theta_not_wrapped(model):
    x = step(model, State(0, 0, 3.1), (0, 2), (0, 0), 0.1)
    assert x[2] == pytest.approx(3.3)


def test_control_bounds_clamp_after_noise():
    m = unicycle_model(u_bounds=[[-1, 1], [-2, 2]])
    x = step(m, State(0, 0, 0), (0.8, 0), (0.5, 0), 0.1)
    np.testing.assert_allclose(x, [0.1, 0, 0])


def test_rollout_examples(model):
    x0 = np.zeros(3)
    out = rollout(model, x0, np.zeros((0, 2)), np.zeros((0, 2)), 0.05)
    assert out.shape == (1, 3)
    out = rollout(model, x0, [(1, 0), (1, 0)], np.zeros((2, 2)), 0.05)
    np.testing.assert_allclose(out, [[0, 0, 0], [0.05, 0, 0], [0.1, 0, 0]])
    with pytest.raises(ValueError):
        rollout(model, x0, [(1, 0)], np.zeros((2, 2)), 0.05)


@settings(max_examples=50, deadline=None)
@given(finite, finite, finite, finite, finite, finite, finite)
def test_linear_in_control(x, y, th, v, w, n1, n2):
    model = unicycle_model()
    s = np.array([x, y, th])
    u = np.array([v, w])
    n = np.array([n1, n2])
    dt = 0.05
    lhs = step(model, s, u, n, dt) - step(model, s, np.zeros(2), n, dt)
    rhs = model.input_matrix(s) @ u * dt
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(finite, finite, finite)
def test_zero_input_fixed_point(x, y, th):
    model = unicycle_model()
    s = np.array([x, y, th])
    np.testing.assert_array_equal(step(model, s, np.zeros(2), np.zeros(2), 0.05), s)


def test_noise_equals_shifted_mean(model, rng):
    U = rng.normal(size=(15, 2))
    N = rng.normal(size=(15, 2))
    a = rollout(model, np.array([0.3, -0.1, 0.7]), U, N, 0.05)
    b = rollout(model, np.array([0.3, -0.1, 0.7]), U + N, np.zeros_like(N), 0.05)
    np.testing.assert_allclose(a, b, atol=1e-14)
