"""Offloading decision policies: the drift-plus-penalty greedy matcher (ldso),
an exhaustive enumeration oracle, and four baseline proxies.

Every policy receives the same per-slot MatchInputs and returns an
OffloadDecision whose matrix satisfies the one-host constraint for each
assigned service and the queue-headroom guard Q_i(t) + A_i^k(t) <= Q_i^max on
every selected pair. Candidate feasibility (placement, demand, queue-model
stability) is identical across policies; they differ only in the selection
rule. Ties always break on lowest server id, then lowest service id, so every
policy is deterministic given its inputs (plus the rng for "random").
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

POLICY_NAMES = ("ldso", "oracle", "random", "nearest-capable", "local-first", "cost-only")


@dataclass(frozen=True)
class MatchInputs:
    """Everything a policy may look at in one slot."""

    cost_matrix: np.ndarray  # (M,K) full greedy score C_i^k
    penalty_matrix: np.ndarray  # (M,K) V-weighted cost part only (no queue term)
    feasible: np.ndarray  # (M,K) bool: cached, demanded service, stable queue model
    guard_ok: np.ndarray  # (M,K) bool: headroom guard passes
    bits: np.ndarray  # (M,K) offered A_i^k
    demanded: np.ndarray  # (K,) bool
    hops: np.ndarray  # (M,M) server hop distances, -1 unreachable


@dataclass
class OffloadDecision:
    """Completed matching: matrix entries in {0,1}, one host per assigned service."""

    matrix: np.ndarray  # (M,K) int8
    assigned: np.ndarray  # (K,) host id or -1
    unassigned_services: tuple[int, ...]
    objective: float  # sum of C_i^k over selected pairs
    selections: list[tuple[float, int, int]] = field(default_factory=list)  # greedy order


def _finalize(inputs: MatchInputs, assigned: np.ndarray,
              selections: list[tuple[float, int, int]] | None = None) -> OffloadDecision:
    m, k_count = inputs.cost_matrix.shape
    matrix = np.zeros((m, k_count), dtype=np.int8)
    objective = 0.0
    unassigned = []
    for k in range(k_count):
        if not inputs.demanded[k]:
            continue
        host = int(assigned[k])
        if host < 0:
            unassigned.append(k)
        else:
            matrix[host, k] = 1
            objective += float(inputs.cost_matrix[host, k])
    return OffloadDecision(
        matrix=matrix,
        assigned=assigned.astype(int),
        unassigned_services=tuple(unassigned),
        objective=objective,
        selections=selections or [],
    )


def _candidate_order(score: np.ndarray, mask: np.ndarray) -> list[tuple[int, int]]:
    """Candidates sorted by (score, server id, service id)."""
    ii, kk = np.nonzero(mask)
    order = np.lexsort((kk, ii, score[ii, kk]))
    return [(int(ii[j]), int(kk[j])) for j in order]


def _greedy(inputs: MatchInputs, score: np.ndarray) -> OffloadDecision:
    """Iteratively pop the cheapest remaining candidate; assign if the headroom
    guard passes and the service is still open, else drop that candidate."""
    k_count = inputs.cost_matrix.shape[1]
    assigned = np.full(k_count, -1)
    selections: list[tuple[float, int, int]] = []
    for i, k in _candidate_order(score, inputs.feasible & inputs.demanded[np.newaxis, :]):
        if assigned[k] != -1:
            continue  # column already closed, remaining entries are implicit zeros
        if not inputs.guard_ok[i, k]:
            continue  # candidate rejected, stays 0
        assigned[k] = i
        selections.append((float(score[i, k]), i, k))
    return _finalize(inputs, assigned, selections)


def ldso_match(inputs: MatchInputs) -> OffloadDecision:
    """Greedy matching on the full drift-plus-penalty score C_i^k."""
    return _greedy(inputs, inputs.cost_matrix)


def oracle_match(inputs: MatchInputs, enumeration_limit: int = 10 ** 6) -> OffloadDecision:
    """Exhaustive minimizer of the summed decision cost under the same
    feasibility rules as ldso_match. Refuses instances whose assignment space
    exceeds enumeration_limit."""
    usable = inputs.feasible & inputs.guard_ok
    k_count = inputs.cost_matrix.shape[1]
    open_services = [k for k in range(k_count) if inputs.demanded[k]]
    choices: list[list[int]] = []
    for k in open_services:
        hosts = np.flatnonzero(usable[:, k])
        choices.append([int(h) for h in hosts] if hosts.size else [-1])
    space = 1
    for c in choices:
        space *= len(c)
        if space > enumeration_limit:
            raise ValueError(
                f"assignment space exceeds enumeration limit {enumeration_limit:g}")

    best_cost = np.inf
    best: tuple[int, ...] | None = None
    for combo in itertools.product(*choices):
        total = sum(inputs.cost_matrix[h, k] for h, k in zip(combo, open_services) if h >= 0)
        if total < best_cost:
            best_cost = total
            best = combo
    assigned = np.full(k_count, -1)
    if best is not None:
        for h, k in zip(best, open_services):
            assigned[k] = h
    return _finalize(inputs, assigned)


def _baseline_hosts(inputs: MatchInputs, kind: str,
                    rng: np.random.Generator | None) -> np.ndarray:
    usable = inputs.feasible & inputs.guard_ok
    m, k_count = usable.shape
    hop = inputs.hops.astype(float)
    hop[hop < 0] = m + 1.0  # unreachable ranks after any real path
    assigned = np.full(k_count, -1)
    for k in range(k_count):
        if not inputs.demanded[k]:
            continue
        hosts = np.flatnonzero(usable[:, k])
        if hosts.size == 0:
            continue
        if kind == "random":
            if rng is None:
                raise ValueError("random policy requires an rng")
            assigned[k] = int(hosts[rng.integers(hosts.size)])
        elif kind == "nearest-capable":
            weights = inputs.bits[:, k]
            dist = hop[:, hosts].T @ weights  # demand-weighted hops to each host
            assigned[k] = int(hosts[np.argmin(dist)])
        elif kind == "local-first":
            requester = int(np.argmax(inputs.bits[:, k]))
            if usable[requester, k]:
                assigned[k] = requester
            else:
                weights = inputs.bits[:, k]
                dist = hop[:, hosts].T @ weights
                assigned[k] = int(hosts[np.argmin(dist)])
        else:
            raise ValueError(f"unknown baseline kind: {kind!r}")
    return assigned


def baseline_policy(kind: str, inputs: MatchInputs,
                    rng: np.random.Generator | None = None) -> OffloadDecision:
    """Baselines standing in for external comparison schemes.

    random: uniform feasible host. nearest-capable: fewest demand-weighted hops
    from the requesting servers. local-first: the heaviest requester if it is
    itself capable, else nearest-capable. cost-only: the greedy matcher with the
    queue term removed (pure penalty minimization).
    """
    if kind == "cost-only":
        return _greedy(inputs, inputs.penalty_matrix)
    return _finalize(inputs, _baseline_hosts(inputs, kind, rng))


def match(policy: str, inputs: MatchInputs,
          rng: np.random.Generator | None = None) -> OffloadDecision:
    if policy == "ldso":
        return ldso_match(inputs)
    if policy == "oracle":
        return oracle_match(inputs)
    if policy in ("random", "nearest-capable", "local-first", "cost-only"):
        return baseline_policy(policy, inputs, rng)
    raise ValueError(f"unknown policy {policy!r}; expected one of {POLICY_NAMES}")
