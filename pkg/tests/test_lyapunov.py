import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edgeoffload.lyapunov import (decision_cost, drift, drift_bound_B,
                                  drift_plus_penalty, lyapunov_value, snapshot)


def test_value_hand_cases():
    assert lyapunov_value([0, 0, 0]) == 0.0
    assert lyapunov_value([3, 4]) == pytest.approx(12.5)
    assert lyapunov_value([5]) == pytest.approx(12.5)


def test_value_zero_iff_empty():
    assert lyapunov_value([0.0, 0.0]) == 0.0
    assert lyapunov_value([0.0, 1e-9]) > 0.0


def test_value_rejects_negative():
    with pytest.raises(ValueError):
        lyapunov_value([-1.0])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0, 1e6), min_size=1, max_size=12), st.randoms())
def test_value_permutation_invariant(q, pyrandom):
    shuffled = list(q)
    pyrandom.shuffle(shuffled)
    assert lyapunov_value(shuffled) == pytest.approx(lyapunov_value(q), rel=1e-12)


def test_drift_hand_cases():
    assert drift([1, 2], [1, 2]) == 0.0
    assert drift([0], [4]) == pytest.approx(8.0)
    assert drift([4], [0]) == pytest.approx(-8.0)


def test_drift_length_mismatch():
    with pytest.raises(ValueError, match="length mismatch"):
        drift([1, 2], [1, 2, 3])


def test_bound_constant_hand_cases():
    assert drift_bound_B([10.0], [10.0]) == pytest.approx(100.0)
    assert drift_bound_B([0.0, 0.0], [0.0, 0.0]) == 0.0
    assert drift_bound_B([3.0, 4.0], [0.0, 0.0]) == pytest.approx(12.5)


def test_decision_cost_hand_cases():
    assert decision_cost(0.0, 0.5, 100.0, 100.0, 10.0, 3.0) == pytest.approx(30.0)
    assert decision_cost(2.0, 0.5, 4.0, 6.0, 10.0, 3.0) == pytest.approx(40.0)
    assert decision_cost(0.0, 0.5, 4.0, 6.0, 10.0, 0.0) == 0.0


def test_decision_cost_broadcasts():
    e = np.array([[1.0, 2.0]])
    t = np.array([[3.0, 4.0]])
    q = np.array([[5.0, 6.0]])
    a = np.array([[7.0, 8.0]])
    out = decision_cost(2.0, 0.25, e, t, q, a)
    assert out.shape == (1, 2)
    assert out[0, 0] == pytest.approx(2 * 0.25 * 1 + 2 * 0.75 * 3 + 35)


def test_decision_cost_preconditions():
    with pytest.raises(ValueError):
        decision_cost(-1.0, 0.5, 1, 1, 1, 1)
    with pytest.raises(ValueError):
        decision_cost(1.0, 1.5, 1, 1, 1, 1)


def test_drift_plus_penalty_hand_cases():
    assert drift_plus_penalty(8.0, 0.0, 123.0) == pytest.approx(8.0)
    assert drift_plus_penalty(8.0, 10.0, 0.5) == pytest.approx(13.0)
    assert drift_plus_penalty(-3.0, 10.0, 0.0) == pytest.approx(-3.0)


def test_snapshot_bounds_consistent():
    q_now = np.array([10.0, 0.0])
    arrivals = np.array([5.0, 3.0])
    service = np.array([4.0, 0.0])
    q_next = np.maximum(q_now - service, 0) + arrivals
    snap = snapshot(q_now, q_next, arrivals, service, bound_b=50.0, v=2.0, cost=10.0)
    assert snap.value == pytest.approx(50.0)
    assert snap.delta == pytest.approx(lyapunov_value(q_next) - 50.0)
    assert snap.drift_plus_penalty == pytest.approx(snap.delta + 20.0)
    assert snap.drift_bound == pytest.approx(50.0 + 10 * (5 - 4))
    assert snap.dpp_bound == pytest.approx(50.0 + 20.0 + 50.0)
    assert snap.delta <= snap.drift_bound
    assert snap.drift_plus_penalty <= snap.dpp_bound


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_max_form_update_respects_drift_bound(data):
    m = data.draw(st.integers(1, 6))
    f = st.floats(0, 1e3)
    q = np.array(data.draw(st.lists(f, min_size=m, max_size=m)))
    mu_max = np.array(data.draw(st.lists(st.floats(0.1, 1e3), min_size=m, max_size=m)))
    a_max = np.array(data.draw(st.lists(st.floats(0.1, 1e3), min_size=m, max_size=m)))
    mu = mu_max * data.draw(st.floats(0, 1))
    a = a_max * data.draw(st.floats(0, 1))
    q_next = np.maximum(q - mu, 0) + a
    b = drift_bound_B(mu_max, a_max)
    snap = snapshot(q, q_next, a, mu, b, 1.0, 0.0)
    assert snap.delta <= snap.drift_bound + 1e-9 * max(1.0, abs(snap.drift_bound))
