"""Per-slot service demand generation.

Produces the popularity vector P_k(t), per-server request counts n_i^k(t) and
the arrival volumes A_i^k(t) = n_i^k(t)*b_k that drive queueing and cost. Two
sampling modes exist: "expectation" (rng-free, n_i^k = round(n_i * P_k(t)) with
round-half-to-even) and "poisson" (n_i^k ~ Poisson(mean * P_k(t)), where mean
defaults to the server's user count and can be overridden by poisson_mean).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .domain import SystemConfig

REQUEST_MODEL_KINDS = ("static-zipf", "rotating-zipf", "sinusoidal")
SAMPLING_MODES = ("expectation", "poisson")


@dataclass(frozen=True)
class RequestModel:
    """Time-varying request popularity model plus the demand sampling mode.

    rotation_period is the period (in slots) of both the rotating-zipf rank
    shift and the sinusoidal modulation. modulation_depth < 1 keeps the
    sinusoidal weights strictly positive.
    """

    kind: str = "rotating-zipf"
    zipf_exponent: float = 0.8
    rotation_period: int = 200
    modulation_depth: float = 0.5
    sampling: str = "expectation"
    poisson_mean: float | None = None


def _zipf_weights(service_count: int, exponent: float) -> np.ndarray:
    ranks = np.arange(1, service_count + 1, dtype=float)
    w = ranks ** (-exponent)
    return w / w.sum()


def request_probabilities(model: RequestModel, service_count: int, t: int) -> np.ndarray:
    """Popularity vector P_k(t): nonnegative, sums to 1, deterministic in (model, t)."""
    if service_count < 1:
        raise ValueError("service_count must be >= 1")
    base = _zipf_weights(service_count, model.zipf_exponent)
    if model.kind == "static-zipf":
        return base
    if model.kind == "rotating-zipf":
        p = model.rotation_period
        offset = ((t % p) * service_count) // p
        return np.roll(base, offset)
    if model.kind == "sinusoidal":
        phases = 2.0 * np.pi * np.arange(service_count) / service_count
        angle = 2.0 * np.pi * (t % model.rotation_period) / model.rotation_period
        w = base * (1.0 + model.modulation_depth * np.sin(angle + phases))
        return w / w.sum()
    raise ValueError(f"unknown request model kind: {model.kind!r}")


@dataclass(frozen=True)
class SlotDemand:
    """Demand offered to the servers in one slot.

    counts[i, k] = n_i^k(t) requests, bits[i, k] = n_i^k(t)*b_k,
    total_bits[i] = A_i(t) after truncation to A_i^max, rejected_bits[i] =
    volume dropped by that truncation.
    """

    t: int
    probabilities: np.ndarray  # (K,)
    counts: np.ndarray  # (M, K)
    bits: np.ndarray  # (M, K)
    total_bits: np.ndarray  # (M,)
    rejected_bits: np.ndarray  # (M,)


def demand_from_counts(cfg: "SystemConfig", t: int, probabilities: np.ndarray,
                       counts: np.ndarray) -> SlotDemand:
    """Build a SlotDemand from raw request counts, truncating rows to A_i^max.

    Truncation is proportional across services so per-service shares are kept;
    counts become fractional when it fires (bits stay exact: bits = counts*b).
    """
    sizes = np.asarray(cfg.catalog.sizes_bits, dtype=float)
    counts = np.asarray(counts, dtype=float).copy()
    bits = counts * sizes[np.newaxis, :]
    totals = bits.sum(axis=1)
    a_max = np.array([s.max_arrival for s in cfg.servers], dtype=float)
    rejected = np.zeros(len(cfg.servers))
    over = totals > a_max
    if np.any(over):
        scale = np.ones_like(totals)
        scale[over] = a_max[over] / totals[over]
        rejected[over] = totals[over] - a_max[over]
        counts *= scale[:, np.newaxis]
        bits = counts * sizes[np.newaxis, :]
        totals = bits.sum(axis=1)
    return SlotDemand(t=t, probabilities=probabilities, counts=counts, bits=bits,
                      total_bits=totals, rejected_bits=rejected)


def slot_demand(cfg: "SystemConfig", model: RequestModel, t: int,
                rng: np.random.Generator | None = None) -> SlotDemand:
    """Demand for slot t. Poisson sampling draws from rng; expectation mode ignores it."""
    k_count = cfg.catalog.service_count
    probs = request_probabilities(model, k_count, t)
    users = np.array([s.covered_users for s in cfg.servers], dtype=float)
    if model.sampling == "expectation":
        counts = np.round(users[:, np.newaxis] * probs[np.newaxis, :])
    elif model.sampling == "poisson":
        if rng is None:
            raise ValueError("poisson sampling requires an rng")
        mean = users if model.poisson_mean is None else np.full_like(users, model.poisson_mean)
        counts = rng.poisson(mean[:, np.newaxis] * probs[np.newaxis, :]).astype(float)
    else:
        raise ValueError(f"unknown sampling mode: {model.sampling!r}")
    return demand_from_counts(cfg, t, probs, counts)
