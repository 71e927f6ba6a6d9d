"""Buffer backlog state and the slot update law.

The aggregate law is Q_i(t+1) = max(Q_i(t) - mu_i(t), 0) + A_i(t): service
applies to the pre-arrival backlog, arrivals land at slot end. Per-service
buckets follow the same max-form at service granularity; with the
backlog-proportional service split below, summing the buckets reproduces the
aggregate law exactly (work conservation).

Note the capacity/headroom chain "sum_k n_i^k b_k <= Q_i^max - Q_i(t) <=
mu_i(t)" couples headroom and service capacity; the engine records the two
inequalities as separate flags and never enforces them jointly.
"""

from __future__ import annotations

import numpy as np


def queue_update(q, mu, a, mu_max=None):
    """One slot of the aggregate law: max(q - mu, 0) + a.

    Exact for integer inputs (no float coercion). mu_max, when given, asserts
    the processing-capacity precondition mu <= mu_max.
    """
    if q < 0 or mu < 0 or a < 0:
        raise ValueError(f"queue_update needs nonnegative inputs, got {(q, mu, a)}")
    if mu_max is not None and mu > mu_max:
        raise ValueError(f"service {mu} exceeds capacity {mu_max}")
    return max(q - mu, 0) + a


def proportional_service(q_k: np.ndarray, mu: float) -> np.ndarray:
    """Split a server's service budget across per-service backlogs.

    Work-conserving, proportional to backlog share; never serves arrivals
    within their own slot (the aggregate max-form discards service beyond the
    pre-arrival backlog). Swappable discipline: any split with
    served_k <= q_k and sum(served) = min(mu, sum(q)) keeps the aggregate law.
    """
    q_k = np.asarray(q_k, dtype=float)
    if mu < 0 or np.any(q_k < 0):
        raise ValueError("negative service budget or backlog")
    total = q_k.sum()
    if total <= 0.0:
        return np.zeros_like(q_k)
    return (min(mu, total) / total) * q_k


def per_service_update(q_k: np.ndarray, served_k: np.ndarray, a_k: np.ndarray) -> np.ndarray:
    """Max-form update per service bucket: max(q_k - served_k, 0) + a_k."""
    q_k = np.asarray(q_k, dtype=float)
    served_k = np.asarray(served_k, dtype=float)
    a_k = np.asarray(a_k, dtype=float)
    if q_k.shape != served_k.shape or q_k.shape != a_k.shape:
        raise ValueError("shape mismatch between backlog, service, and arrivals")
    if np.any(served_k < 0) or np.any(a_k < 0) or np.any(q_k < 0):
        raise ValueError("negative entries in per-service update")
    over = served_k > q_k + a_k
    if np.any(over):
        k = int(np.argmax(over))
        raise ValueError(
            f"over-service at service {k}: {served_k[k]:g} > backlog {q_k[k]:g} + arrivals {a_k[k]:g}")
    return np.maximum(q_k - served_k, 0.0) + a_k
