"""Energy and delay components of the per-slot system cost.

Conventions shared by every term:

* Sums run over *demanded* (server, service) pairs only — a pair with no
  request volume contributes nothing, so an empty slot costs exactly zero.
* x_i^k = 1 is the local branch (the server hosts the service), x_i^k = 0 the
  collaboration branch, charged for up to H_k forwarding hops.
* Hit/miss probabilities are per server: P_c = (cached types)/K, P_nc = 1-P_c.
* The processing-energy term multiplies, verbatim, the server's whole arrival
  volume A_i(t) inside the per-service sum ("server-total" mode). The
  per-service alternative A_i^k(t) sits behind processing_energy_data =
  "per-service"; both modes keep the candidate-score identity.
* All rate conversions between bits/slot and bits/second go through
  bits_per_slot_to_bps() so slot duration is applied in exactly one place.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import LinkOutageError, OverloadError

if TYPE_CHECKING:
    from .domain import RadioConfig, SystemConfig
    from .workload import SlotDemand


@dataclass(frozen=True)
class CollaborationContext:
    """Static collaboration facts: providers O_k, max hops H_k = max(O_k - 1, 0),
    and per-server cache hit/miss probabilities."""

    providers: np.ndarray  # (K,) O_k
    hops: np.ndarray  # (K,) H_k
    hit_prob: np.ndarray  # (M,) P_c
    miss_prob: np.ndarray  # (M,) P_nc


def build_collaboration_context(cfg: "SystemConfig",
                                demand_mask: np.ndarray | None = None) -> CollaborationContext:
    """Derive O_k/H_k and P_c/P_nc from the placement matrix.

    Scope "providers": O_k counts every server caching k. Scope "hop-radius":
    O_k counts providers within collab_hop_radius hops of at least one
    demanding server (demand_mask, (M,K) boolean; defaults to all servers).
    """
    placement = np.array([s.cached_services for s in cfg.servers], dtype=int)
    k_count = cfg.catalog.service_count
    if cfg.collaboration_scope == "providers":
        providers = placement.sum(axis=0)
    else:
        from .domain import hop_matrix
        hops_ij = hop_matrix(cfg)
        reach = (hops_ij >= 0) & (hops_ij <= cfg.collab_hop_radius)
        if demand_mask is None:
            demand_mask = np.ones_like(placement, dtype=bool)
        providers = np.zeros(k_count, dtype=int)
        for k in range(k_count):
            demanding = np.flatnonzero(demand_mask[:, k])
            if demanding.size == 0:
                providers[k] = placement[:, k].sum()
                continue
            near = reach[demanding, :].any(axis=0)
            providers[k] = int((placement[:, k] & near).sum())
    cached_types = placement.sum(axis=1)
    hit = cached_types / float(k_count)
    return CollaborationContext(
        providers=providers,
        hops=np.maximum(providers - 1, 0),
        hit_prob=hit,
        miss_prob=1.0 - hit,
    )


def bits_per_slot_to_bps(bits_per_slot, slot_duration_s: float):
    if slot_duration_s <= 0:
        raise ValueError("slot duration must be positive")
    return np.asarray(bits_per_slot, dtype=float) / slot_duration_s


# --- energy -----------------------------------------------------------------

def energy_device_to_server(bits: np.ndarray, e_u: float) -> float:
    """Upload energy: e_u per bit received, linear in demand volume."""
    return float(e_u * np.asarray(bits).sum())


def energy_server_to_server(bits: np.ndarray, decision: np.ndarray,
                            ctx: CollaborationContext, e_s: float) -> float:
    """Forwarding energy: bits * e_s * H_k on every collaboration-branch pair."""
    x = np.asarray(decision, dtype=float)
    return float((np.asarray(bits) * e_s * ctx.hops[np.newaxis, :] * (1.0 - x)).sum())


def _processing_volume(bits: np.ndarray, total_bits: np.ndarray, mode: str) -> np.ndarray:
    if mode == "server-total":
        return np.broadcast_to(total_bits[:, np.newaxis], bits.shape)
    if mode == "per-service":
        return np.asarray(bits)
    raise ValueError(f"unknown processing_energy_data mode: {mode!r}")


def energy_processing(bits: np.ndarray, total_bits: np.ndarray, decision: np.ndarray,
                      ctx: CollaborationContext, e_p: float,
                      mode: str = "server-total") -> float:
    """Processing energy over demanded pairs: e_p * volume * (P_c x + P_nc (1-x) H_k)."""
    bits = np.asarray(bits, dtype=float)
    x = np.asarray(decision, dtype=float)
    vol = _processing_volume(bits, np.asarray(total_bits, dtype=float), mode)
    weight = ctx.hit_prob[:, np.newaxis] * x \
        + ctx.miss_prob[:, np.newaxis] * (1.0 - x) * ctx.hops[np.newaxis, :]
    return float((e_p * vol * weight * (bits > 0)).sum())


# --- delay ------------------------------------------------------------------

def channel_rate(radio: "RadioConfig", gain_linear: float, tx_power_w: float) -> float:
    """Shannon-form shared uplink rate in bits/second."""
    snr = tx_power_w * gain_linear / radio.noise_power_w
    if snr < 0:
        raise ValueError(f"negative SNR: {snr}")
    return radio.bandwidth_hz * float(np.log2(1.0 + snr))


def delay_communication(bits: np.ndarray, rate_bps: float) -> float:
    """Upload delay: total demanded bits divided by the shared rate."""
    total = float(np.asarray(bits).sum())
    if total == 0.0:
        return 0.0
    if rate_bps <= 0.0:
        raise LinkOutageError("zero channel rate with pending demand")
    return total / rate_bps


def mm1_wait(service_rate_bps: float, arrival_bps: float) -> float:
    """Mean wait of the single-server queue model: 1 / (mu - arrivals), seconds."""
    if arrival_bps < 0:
        raise ValueError("arrival rate must be nonnegative")
    if arrival_bps >= service_rate_bps:
        raise OverloadError(
            f"arrival rate {arrival_bps:g} >= service rate {service_rate_bps:g}")
    return 1.0 / (service_rate_bps - arrival_bps)


def wait_matrix(cfg: "SystemConfig", service_bits_per_slot: np.ndarray,
                counts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-pair waits t[i,k] plus a stability mask.

    Arrival flow at pair (i,k) is counts * lambda^k * b_k bits/slot (the
    requesting users' ongoing intensity); both flows are converted to bits/s
    here. Unstable pairs (arrivals >= service, including idle servers with a
    zero service realization) get wait = +inf and mask False — the matcher
    treats them as infeasible hosts rather than aborting the slot.
    """
    lam = np.asarray(cfg.catalog.per_user_arrival_intensity, dtype=float)
    sizes = np.asarray(cfg.catalog.sizes_bits, dtype=float)
    arrivals = bits_per_slot_to_bps(
        np.asarray(counts) * lam[np.newaxis, :] * sizes[np.newaxis, :], cfg.slot_duration_s)
    service = bits_per_slot_to_bps(service_bits_per_slot, cfg.slot_duration_s)[:, np.newaxis]
    stable = arrivals < service
    waits = np.full(arrivals.shape, np.inf)
    np.divide(1.0, service - arrivals, out=waits, where=stable)
    return waits, stable


def delay_computation(decision: np.ndarray, waits: np.ndarray, bits: np.ndarray,
                      ctx: CollaborationContext) -> float:
    """Queueing delay over demanded pairs: P_c t x + H_k P_nc t (1-x).

    A local-branch pair waits in its own queue (t = waits[i, k]); a
    collaboration-branch pair waits where the work is actually done, so its t
    is the assigned host's wait for that service — one wait per assigned
    service, which is also what keeps infeasible non-hosts (infinite local
    wait) from contaminating the total. Demanded services with no host in the
    decision column contribute nothing (their data was never admitted).
    """
    x = np.asarray(decision, dtype=float)
    demanded = np.asarray(bits) > 0
    w_local = np.where((x > 0.5) & demanded, waits, 0.0)
    total = float((ctx.hit_prob[:, np.newaxis] * w_local).sum())
    has_host = x.sum(axis=0) > 0.5
    if np.any(has_host):
        k_idx = np.flatnonzero(has_host)
        hosts = np.argmax(x[:, k_idx], axis=0)
        t_k = waits[hosts, k_idx]
        miss_share = (ctx.miss_prob[:, np.newaxis] * demanded[:, k_idx]
                      * (1.0 - x[:, k_idx])).sum(axis=0)
        total += float((ctx.hops[k_idx] * miss_share * t_k).sum())
    return total


# --- aggregation ------------------------------------------------------------

@dataclass(frozen=True)
class CostBreakdown:
    """One slot's cost components plus the theta-weighted scalar and cap flags."""

    e_c1: float
    e_c2: float
    e_p: float
    t_c: float
    t_p: float
    e_total: float
    t_total: float
    cost: float
    energy_cap_exceeded: bool
    delay_cap_exceeded: bool


def slot_cost(e_c1: float, e_c2: float, e_p: float, t_c: float, t_p: float,
              theta: float, energy_cap: float = np.inf,
              delay_cap: float = np.inf) -> CostBreakdown:
    """Weighted scalar cost = theta*E_total + (1-theta)*T_total; cap overruns are flags."""
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta out of [0,1]: {theta}")
    e_total = e_c1 + e_c2 + e_p
    t_total = t_c + t_p
    return CostBreakdown(
        e_c1=e_c1, e_c2=e_c2, e_p=e_p, t_c=t_c, t_p=t_p,
        e_total=e_total, t_total=t_total,
        cost=theta * e_total + (1.0 - theta) * t_total,
        energy_cap_exceeded=bool(e_total > energy_cap),
        delay_cap_exceeded=bool(t_total > delay_cap),
    )


def evaluate_decision(cfg: "SystemConfig", demand: "SlotDemand", decision: np.ndarray,
                      ctx: CollaborationContext, waits: np.ndarray,
                      rate_bps: float) -> CostBreakdown:
    """Full cost of one slot under the realized decision matrix.

    Pairs belonging to unassigned services must already carry x-column zero and
    be excluded by the caller from `demand` accounting; here every demanded
    pair is charged on its realized branch.
    """
    bits = demand.bits
    return slot_cost(
        e_c1=energy_device_to_server(bits, cfg.energy.device_to_server),
        e_c2=energy_server_to_server(bits, decision, ctx, cfg.energy.server_to_server),
        e_p=energy_processing(bits, demand.total_bits, decision, ctx,
                              cfg.energy.processing, cfg.processing_energy_data),
        t_c=delay_communication(bits, rate_bps),
        t_p=delay_computation(decision, waits, bits, ctx),
        theta=cfg.weight_theta,
        energy_cap=cfg.energy_cap,
        delay_cap=cfg.delay_cap,
    )


def local_candidate_terms(cfg: "SystemConfig", demand: "SlotDemand",
                          ctx: CollaborationContext, waits: np.ndarray,
                          rate_bps: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-pair (E_i^k, T_i^k) under the local-hosting hypothesis x_i^k = 1.

    These are the exact (i,k) summands of the slot totals when every demanded
    pair is served locally, which is what makes the greedy score separable:
    summing decision_cost over demanded pairs reproduces V*cost(all-local) +
    sum Q_i^k A_i^k. Computed for every pair (including zero-demand hosts,
    which still pay their processing/wait share when chosen).
    """
    bits = demand.bits
    vol = _processing_volume(bits, demand.total_bits, cfg.processing_energy_data)
    energy = bits * cfg.energy.device_to_server \
        + cfg.energy.processing * vol * ctx.hit_prob[:, np.newaxis]
    if rate_bps <= 0.0 and float(bits.sum()) > 0.0:
        raise LinkOutageError("zero channel rate with pending demand")
    comm = bits / rate_bps if rate_bps > 0.0 else np.zeros_like(bits)
    delay = comm + ctx.hit_prob[:, np.newaxis] * waits
    return energy, delay
