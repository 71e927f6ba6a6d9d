"""Queue law and Lyapunov machinery on paper-and-pencil numbers.

Walks the building blocks with values small enough to verify by hand: the
max-form backlog update, the quadratic congestion measure, the drift bound
constant, and the per-candidate greedy score.
"""

import numpy as np

from edgeoffload import (decision_cost, drift, drift_bound_B, drift_plus_penalty,
                         lyapunov_value, per_service_update, proportional_service,
                         queue_update)

print("== the backlog update law ==")
for q, mu, a in [(100, 30, 20), (10, 30, 20), (0, 0, 0)]:
    print(f"  Q={q:>4} bits, serve {mu}, receive {a} "
          f"-> next slot {queue_update(q, mu, a)} bits")

print("\n== per-service buckets, proportional service ==")
q = np.array([40.0, 60.0])
served = proportional_service(q, 50.0)
print(f"  backlogs {q} with budget 50 -> served {served}")
nxt = per_service_update(q, served, np.array([5.0, 10.0]))
print(f"  after arrivals (5, 10): {nxt} (sum {nxt.sum():.0f})")
agg = queue_update(100.0, 50.0, 15.0)
print(f"  aggregate law agrees: {agg:.0f}")

print("\n== congestion measure and drift ==")
print(f"  L([3, 4]) = {lyapunov_value([3, 4])}")
print(f"  L([0, 0]) = {lyapunov_value([0, 0])} (zero iff every queue empty)")
print(f"  drift [0] -> [4]: {drift([0], [4])}")
print(f"  drift [4] -> [0]: {drift([4], [0])} (antisymmetric)")

print("\n== drift bound constant ==")
b = drift_bound_B([10.0], [10.0])
print(f"  one server, mu_max = A_max = 10: B = {b}")

print("\n== the greedy score: penalty-weighted cost plus drift increment ==")
c = decision_cost(2.0, 0.5, 4.0, 6.0, 10.0, 3.0)
print(f"  V=2, theta=0.5, E=4, T=6, Q=10, A=3 -> C = {c}")
print(f"  V=0 strips the cost part: {decision_cost(0.0, 0.5, 4.0, 6.0, 10.0, 3.0)}")
print(f"  drift-plus-penalty at dL=8, V=10, cost=0.5: {drift_plus_penalty(8.0, 10.0, 0.5)}")

print("\n== the bound in action on a random sample path ==")
rng = np.random.default_rng(0)
q = np.zeros(3)
mu_max = np.array([60.0, 60.0, 60.0])
a_max = np.array([80.0, 80.0, 80.0])
b = drift_bound_B(mu_max, a_max)
worst = -np.inf
for t in range(200):
    a = rng.uniform(0, a_max)
    mu = rng.uniform(0, mu_max)
    q_next = np.maximum(q - mu, 0) + a
    lhs = drift(q, q_next)
    rhs = b + float(np.dot(q, a - mu))
    worst = max(worst, lhs - rhs)
    q = q_next
print(f"  200 random slots: max (drift - bound) = {worst:.3f} (never positive)")
