"""Quadratic Lyapunov function, drift, drift bound, and drift-plus-penalty.

L(t) = (1/2) * sum_i Q_i(t)^2 measures queue congestion; the per-slot drift is
bounded by the config constant B = sum_i ((mu_i^max)^2 + (A_i^max)^2) / 2 plus
the backlog-weighted net inflow. The per-candidate decision score

    C_i^k = V*theta*E_i^k + V*(1-theta)*T_i^k + Q_i^k * A_i^k

is the greedy key of the scheduler: penalty-weighted local-hosting cost plus
the would-be drift increment of admitting A_i^k bits onto a Q_i^k backlog.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def lyapunov_value(q) -> float:
    """Half the sum of squared per-server backlogs; 0 iff all queues are empty."""
    q = np.asarray(q, dtype=float)
    if np.any(q < 0):
        raise ValueError("backlogs must be nonnegative")
    return 0.5 * float(np.dot(q, q))


def drift(q_now, q_next) -> float:
    """L(t+1) - L(t)."""
    q_now = np.asarray(q_now, dtype=float)
    q_next = np.asarray(q_next, dtype=float)
    if q_now.shape != q_next.shape:
        raise ValueError(f"queue vector length mismatch: {q_now.shape} vs {q_next.shape}")
    return lyapunov_value(q_next) - lyapunov_value(q_now)


def drift_bound_B(mu_max, a_max) -> float:
    """Config constant B = sum_i ((mu_i^max)^2 + (A_i^max)^2) / 2."""
    mu_max = np.asarray(mu_max, dtype=float)
    a_max = np.asarray(a_max, dtype=float)
    if mu_max.shape != a_max.shape:
        raise ValueError("mu_max and a_max must have equal length")
    if np.any(mu_max < 0) or np.any(a_max < 0):
        raise ValueError("rate bounds must be nonnegative")
    return 0.5 * float(np.sum(mu_max ** 2 + a_max ** 2))


def decision_cost(v: float, theta: float, energy, delay, backlog, arrival):
    """Per-candidate greedy score; accepts scalars or broadcastable arrays.

    energy/delay are the candidate's local-hosting (x=1) cost summands,
    backlog/arrival the Q_i^k(t), A_i^k(t) pair in bits.
    """
    if v < 0:
        raise ValueError(f"control parameter must be >= 0, got {v}")
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta out of [0,1]: {theta}")
    return v * theta * np.asarray(energy) + v * (1.0 - theta) * np.asarray(delay) \
        + np.asarray(backlog) * np.asarray(arrival)


def drift_plus_penalty(delta_l: float, v: float, cost: float) -> float:
    """The per-slot control objective: drift + V * cost."""
    if v < 0:
        raise ValueError(f"control parameter must be >= 0, got {v}")
    return delta_l + v * cost


@dataclass(frozen=True)
class LyapunovSnapshot:
    """Per-slot record of the Lyapunov quantities and their proved bounds.

    drift_bound is B + sum_i Q_i(A_i - mu_i); dpp_bound is
    B + V*cost + sum_i Q_i*A_i. Both must dominate every simulated slot.
    """

    value: float  # L(t)
    delta: float  # L(t+1) - L(t)
    drift_plus_penalty: float  # delta + V*cost
    drift_bound: float
    dpp_bound: float


def snapshot(q_now, q_next, arrivals, service, bound_b: float, v: float,
             cost: float) -> LyapunovSnapshot:
    q_now = np.asarray(q_now, dtype=float)
    delta = drift(q_now, q_next)
    qa = float(np.dot(q_now, np.asarray(arrivals, dtype=float)))
    qmu = float(np.dot(q_now, np.asarray(service, dtype=float)))
    return LyapunovSnapshot(
        value=lyapunov_value(q_now),
        delta=delta,
        drift_plus_penalty=drift_plus_penalty(delta, v, cost),
        drift_bound=bound_b + qa - qmu,
        dpp_bound=bound_b + v * cost + qa,
    )
