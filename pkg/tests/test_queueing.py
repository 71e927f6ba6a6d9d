import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edgeoffload.queueing import per_service_update, proportional_service, queue_update


def test_update_hand_cases():
    assert queue_update(100, 30, 20) == 90
    assert queue_update(10, 30, 20) == 20  # max(-20, 0) + 20
    assert queue_update(0, 0, 0) == 0


def test_update_integer_exactness():
    out = queue_update(10**15 + 3, 7, 11)
    assert out == 10**15 + 7
    assert isinstance(out, int)


def test_update_capacity_precondition():
    with pytest.raises(ValueError, match="exceeds capacity"):
        queue_update(100, 31, 0, mu_max=30)
    assert queue_update(100, 30, 0, mu_max=30) == 70


def test_update_rejects_negative():
    with pytest.raises(ValueError):
        queue_update(-1, 0, 0)


@settings(max_examples=200, deadline=None)
@given(q=st.integers(0, 10**9), mu=st.integers(0, 10**9), a=st.integers(0, 10**9))
def test_update_props(q, mu, a):
    out = queue_update(q, mu, a)
    assert out >= 0
    assert out >= q + a - mu  # telescoping inequality
    assert out == max(q - mu, 0) + a


def test_proportional_split_hand_case():
    served = proportional_service(np.array([40.0, 60.0]), 50.0)
    assert served.tolist() == [20.0, 30.0]


def test_proportional_split_empty_backlog():
    assert proportional_service(np.zeros(3), 100.0).tolist() == [0.0, 0.0, 0.0]


def test_proportional_never_exceeds_backlog():
    q = np.array([5.0, 15.0])
    served = proportional_service(q, 100.0)
    assert (served <= q).all()
    assert served.sum() == pytest.approx(20.0)


def test_per_service_hand_case():
    q = np.array([40.0, 60.0])
    nxt = per_service_update(q, proportional_service(q, 50.0), np.array([7.0, 3.0]))
    assert nxt.tolist() == [27.0, 33.0]


def test_per_service_all_empty():
    nxt = per_service_update(np.zeros(4), np.zeros(4), np.zeros(4))
    assert (nxt == 0).all()


def test_per_service_single_service_reduces_to_aggregate():
    for q, mu, a in [(100.0, 30.0, 20.0), (10.0, 30.0, 20.0), (0.0, 5.0, 1.0)]:
        nxt = per_service_update(np.array([q]), proportional_service(np.array([q]), mu),
                                 np.array([a]))
        assert nxt[0] == queue_update(q, min(mu, q), a)


def test_per_service_over_service_faults():
    with pytest.raises(ValueError, match="over-service"):
        per_service_update(np.array([1.0]), np.array([5.0]), np.array([1.0]))


def test_per_service_shape_mismatch():
    with pytest.raises(ValueError, match="shape"):
        per_service_update(np.zeros(2), np.zeros(3), np.zeros(2))


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_work_conserving_split_matches_aggregate(data):
    k = data.draw(st.integers(1, 6))
    q = np.array(data.draw(st.lists(st.floats(0, 1e6), min_size=k, max_size=k)))
    a = np.array(data.draw(st.lists(st.floats(0, 1e6), min_size=k, max_size=k)))
    mu = data.draw(st.floats(0, 2e6))
    nxt = per_service_update(q, proportional_service(q, mu), a)
    agg = queue_update(float(q.sum()), mu, float(a.sum()))
    assert nxt.sum() == pytest.approx(agg, rel=1e-9, abs=1e-6)
    assert (nxt >= 0).all()
