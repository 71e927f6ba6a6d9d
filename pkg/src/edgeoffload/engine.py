"""Slot loop, per-slot metrics, run records, and parameter sweeps.

Pipeline order inside one slot (fixed): demand -> channel/service realization
-> candidate scoring -> policy decision -> cost evaluation on the realized
branches -> queue arrivals (an assigned service's demand lands in its host's
buffer) -> per-service queue update -> Lyapunov snapshot -> metrics row.

A service left unassigned re-enters the next slot's demand at its previous
request counts; its data is neither uploaded, costed, nor queued in the
current slot. Arrivals beyond a host's headroom max(Q^max - max(Q-mu,0), 0)
are dropped and recorded as rejected bits, which is what makes the per-server
queue bound a hard guarantee rather than a hope.

Runs are bit-for-bit reproducible given (config, policy, seed): the demand,
radio, and policy rng streams are split from one seed sequence so decisions
never perturb the workload.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import cost as costmod
from . import lyapunov as lyap
from .domain import SystemConfig, config_to_dict, hop_matrix, validate_config
from .errors import InvariantViolation
from .policies import MatchInputs, match
from .workload import demand_from_counts, slot_demand

REL_TOL = 1e-9

SWEEP_AXES = ("control_v", "poisson_mean", "weight_theta", "q_max")

SCALAR_COLUMNS = (
    "t", "cost", "e_c1", "e_c2", "e_p", "e_total", "t_c", "t_p", "t_total",
    "sum_q", "sum_q_next", "max_q_next", "lyapunov", "drift",
    "drift_plus_penalty", "drift_bound", "dpp_bound",
    "offered_bits", "queued_bits", "served_bits", "deferred_bits",
    "rejected_capacity_bits", "rejected_queue_bits", "unassigned_count",
    "flag_1b", "flag_1c", "flag_1e", "flag_1f",
)


@dataclass(frozen=True)
class SlotMetrics:
    t: int
    cost: float
    e_c1: float
    e_c2: float
    e_p: float
    e_total: float
    t_c: float
    t_p: float
    t_total: float
    sum_q: float  # total backlog at slot start
    sum_q_next: float  # total backlog after the update
    max_q_next: float  # largest per-server backlog after the update
    lyapunov: float
    drift: float
    drift_plus_penalty: float
    drift_bound: float
    dpp_bound: float
    offered_bits: float
    queued_bits: float
    served_bits: float
    deferred_bits: float
    rejected_capacity_bits: float
    rejected_queue_bits: float
    unassigned_count: int
    flag_1b: int
    flag_1c: int
    flag_1e: int
    flag_1f: int
    server_q: tuple[float, ...]  # per-server backlog at slot start


@dataclass
class RunRecord:
    config_hash: str
    seed: int
    policy: str
    slots: list[SlotMetrics]
    summary: dict
    config: dict
    sweep_info: dict | None = None


def config_hash(cfg: SystemConfig) -> str:
    canon = json.dumps(config_to_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def derive_seed(base_seed: int, value_index: int, policy_index: int) -> int:
    """Stable sweep seed: hash of (base seed, axis value index, policy index)."""
    key = f"{base_seed}:{value_index}:{policy_index}".encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big") % (2 ** 63)


def _check(ok: bool, t: int, what: str) -> None:
    if not ok:
        raise InvariantViolation(f"slot {t}: {what}")


def _draw_tx_power(radio, rng: np.random.Generator) -> float:
    p = radio.device_tx_power_w
    if isinstance(p, (tuple, list)):
        return float(rng.uniform(p[0], p[1]))
    return float(p)


def run(cfg: SystemConfig, policy: str, seed: int | None = None,
        strict: bool = True, csv_path: str | Path | None = None,
        keep_slots: bool = True, flush_every: int = 256) -> RunRecord:
    """Simulate cfg.slot_count slots under one policy.

    With csv_path set, rows stream to disk in batches of flush_every (memory
    stays bounded with keep_slots=False). strict keeps the per-slot invariant
    assertions on; a failure aborts with the slot index.
    """
    report = validate_config(cfg)
    if not report.ok:
        raise ValueError(f"invalid config:\n{report}")
    if not keep_slots and csv_path is None:
        raise ValueError("keep_slots=False requires csv_path (rows would be lost)")
    if seed is None:
        seed = cfg.rng_seed

    m = cfg.server_count
    k_count = cfg.catalog.service_count
    demand_rng, radio_rng, policy_rng = [
        np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(3)]

    placement = np.array([s.cached_services for s in cfg.servers], dtype=bool)
    mu_max = np.array([s.max_service_rate for s in cfg.servers], dtype=float)
    a_max = np.array([s.max_arrival for s in cfg.servers], dtype=float)
    q_max = np.array([np.inf if s.max_queue is None else s.max_queue
                      for s in cfg.servers], dtype=float)
    hops_ij = hop_matrix(cfg)
    bound_b = lyap.drift_bound_B(mu_max, a_max)
    tx_power = _draw_tx_power(cfg.radio, radio_rng)
    base_gain = cfg.radio.gain_linear()
    static_ctx = (costmod.build_collaboration_context(cfg)
                  if cfg.collaboration_scope == "providers" else None)

    q = np.zeros((m, k_count))
    carried: np.ndarray | None = None
    deferred_k: tuple[int, ...] = ()

    slots: list[SlotMetrics] = []
    writer = None
    fh = None
    if csv_path is not None:
        fh = open(csv_path, "w", newline="")
        writer = csv.writer(fh)
        writer.writerow(list(SCALAR_COLUMNS) + [f"q{i}" for i in range(m)])
    pending: list[list[str]] = []

    # summary accumulators (kept exactly recomputable from the rows)
    acc = {name: 0.0 for name in ("cost", "sum_q_next", "offered_bits", "queued_bits",
                                  "served_bits", "deferred_bits", "rejected_capacity_bits",
                                  "rejected_queue_bits", "flag_1b", "flag_1c",
                                  "flag_1e", "flag_1f")}
    sum_q_next_series: list[float] = []
    max_offered = 0.0

    try:
        for t in range(cfg.slot_count):
            fresh = slot_demand(cfg, cfg.request_model, t, demand_rng)
            if deferred_k and carried is not None:
                counts = fresh.counts.copy()
                cols = list(deferred_k)
                counts[:, cols] = carried[:, cols]
                demand = demand_from_counts(cfg, t, fresh.probabilities, counts)
            else:
                demand = fresh

            gain = base_gain
            if cfg.radio.fading_sigma_db > 0:
                gain *= 10.0 ** (radio_rng.normal(0.0, cfg.radio.fading_sigma_db) / 10.0)
            rate_bps = costmod.channel_rate(cfg.radio, gain, tx_power)

            q_server = q.sum(axis=1)
            mu = np.minimum(mu_max, q_server + demand.total_bits)

            demanded = demand.bits.sum(axis=0) > 0
            ctx = static_ctx
            if ctx is None:
                ctx = costmod.build_collaboration_context(cfg, demand.bits > 0)

            waits_raw, stable = costmod.wait_matrix(cfg, mu, demand.counts)
            waits = np.where(stable, waits_raw, 0.0)
            e_loc, t_loc = costmod.local_candidate_terms(cfg, demand, ctx, waits, rate_bps)
            c_full = lyap.decision_cost(cfg.control_v, cfg.weight_theta,
                                        e_loc, t_loc, q, demand.bits)
            penalty = lyap.decision_cost(cfg.control_v, cfg.weight_theta,
                                         e_loc, t_loc, 0.0, 0.0)
            feasible = placement & stable & demanded[np.newaxis, :]
            guard_ok = q_server[:, np.newaxis] + demand.bits <= q_max[:, np.newaxis]

            inputs = MatchInputs(cost_matrix=c_full, penalty_matrix=penalty,
                                 feasible=feasible, guard_ok=guard_ok,
                                 bits=demand.bits, demanded=demanded, hops=hops_ij)
            decision = match(policy, inputs, policy_rng)
            x = decision.matrix

            # accounting restricted to assigned services: deferred data is
            # neither uploaded nor processed this slot
            if decision.unassigned_services:
                assigned_cols = decision.assigned >= 0
                counts_assigned = demand.counts * assigned_cols[np.newaxis, :]
                acct = demand_from_counts(cfg, t, demand.probabilities, counts_assigned)
            else:
                acct = demand
            breakdown = costmod.evaluate_decision(cfg, acct, x, ctx, waits, rate_bps)

            arrivals = acct.bits * x
            arrivals_total = arrivals.sum(axis=1)
            headroom = np.maximum(q_max - np.maximum(q_server - mu, 0.0), 0.0)
            over = arrivals_total > headroom
            rejected_queue = 0.0
            if np.any(over):
                scale = np.ones(m)
                scale[over] = np.where(arrivals_total[over] > 0,
                                       headroom[over] / arrivals_total[over], 0.0)
                rejected_queue = float((arrivals_total - arrivals_total * scale)[over].sum())
                arrivals = arrivals * scale[:, np.newaxis]
                arrivals_total = arrivals.sum(axis=1)

            # backlog-proportional service split, vectorized over servers
            # (proportional_service applied row-wise)
            drain = np.minimum(mu, q_server)
            with np.errstate(invalid="ignore"):
                share = np.where(q_server[:, np.newaxis] > 0,
                                 q / np.where(q_server > 0, q_server, 1.0)[:, np.newaxis], 0.0)
            served = drain[:, np.newaxis] * share
            q_next = np.maximum(q - served, 0.0) + arrivals
            q_next_server = q_next.sum(axis=1)

            snap = lyap.snapshot(q_server, q_next_server, arrivals_total, mu,
                                 bound_b, cfg.control_v, breakdown.cost)

            deferred_bits = float(demand.bits[:, list(decision.unassigned_services)].sum()) \
                if decision.unassigned_services else 0.0

            if strict:
                tol = REL_TOL * max(1.0, abs(snap.drift_bound))
                _check(snap.delta <= snap.drift_bound + tol, t, "drift bound exceeded")
                tol2 = REL_TOL * max(1.0, abs(snap.dpp_bound))
                _check(snap.drift_plus_penalty <= snap.dpp_bound + tol2, t,
                       "drift-plus-penalty bound exceeded")
                _check(bool(np.all(q_next_server >= q_server + arrivals_total - mu - 1e-9)),
                       t, "telescoping inequality violated")
                col_sums = x.sum(axis=0)
                _check(bool(np.all(col_sums <= 1)), t, "service assigned to several hosts")
                _check(bool(np.all(col_sums[list(decision.unassigned_services)] == 0))
                       if decision.unassigned_services else True, t,
                       "unassigned service has a host")
                sel_i, sel_k = np.nonzero(x)
                _check(bool(np.all(guard_ok[sel_i, sel_k])), t, "headroom guard violated")
                _check(bool(np.all(q_next >= 0)), t, "negative backlog")
                _check(bool(np.all(q_next_server <= q_max + 1e-6)), t,
                       "per-server queue bound exceeded")
                agg = np.maximum(q_server - mu, 0.0) + arrivals_total
                _check(bool(np.allclose(q_next_server, agg, rtol=1e-9, atol=1e-6)), t,
                       "per-service updates diverge from the aggregate law")

            flag_1b = int(rejected_queue > 0)
            flag_1c = int(bool(np.any(demand.total_bits > q_max - q_server)))
            row = SlotMetrics(
                t=t,
                cost=breakdown.cost,
                e_c1=breakdown.e_c1, e_c2=breakdown.e_c2, e_p=breakdown.e_p,
                e_total=breakdown.e_total,
                t_c=breakdown.t_c, t_p=breakdown.t_p, t_total=breakdown.t_total,
                sum_q=float(q_server.sum()),
                sum_q_next=float(q_next_server.sum()),
                max_q_next=float(q_next_server.max()),
                lyapunov=snap.value,
                drift=snap.delta,
                drift_plus_penalty=snap.drift_plus_penalty,
                drift_bound=snap.drift_bound,
                dpp_bound=snap.dpp_bound,
                offered_bits=float(demand.total_bits.sum()),
                queued_bits=float(arrivals_total.sum()),
                served_bits=float(served.sum()),
                deferred_bits=deferred_bits,
                rejected_capacity_bits=float(demand.rejected_bits.sum()),
                rejected_queue_bits=rejected_queue,
                unassigned_count=len(decision.unassigned_services),
                flag_1b=flag_1b,
                flag_1c=flag_1c,
                flag_1e=int(breakdown.energy_cap_exceeded),
                flag_1f=int(breakdown.delay_cap_exceeded),
                server_q=tuple(float(v) for v in q_server),
            )

            if keep_slots:
                slots.append(row)
            if writer is not None:
                pending.append(_format_row(row))
                if len(pending) >= flush_every:
                    writer.writerows(pending)
                    pending.clear()
                    fh.flush()

            for name in ("cost", "sum_q_next", "offered_bits", "queued_bits",
                         "served_bits", "deferred_bits", "rejected_capacity_bits",
                         "rejected_queue_bits", "flag_1b", "flag_1c", "flag_1e", "flag_1f"):
                acc[name] += getattr(row, name)
            sum_q_next_series.append(row.sum_q_next)
            max_offered = max(max_offered, float(demand.total_bits.max()))

            deferred_k = decision.unassigned_services
            carried = demand.counts if deferred_k else None
            q = q_next
    finally:
        if writer is not None:
            writer.writerows(pending)
            fh.close()

    t_count = cfg.slot_count
    rate_slot_bits = rate_bps * cfg.slot_duration_s
    summary = {
        "slots": t_count,
        "avg_cost": acc["cost"] / t_count,
        "avg_sum_q": acc["sum_q_next"] / t_count,
        "total_offered_bits": acc["offered_bits"],
        "total_offloaded_bits": acc["queued_bits"],
        "total_served_bits": acc["served_bits"],
        "total_deferred_bits": acc["deferred_bits"],
        "total_rejected_capacity_bits": acc["rejected_capacity_bits"],
        "total_rejected_queue_bits": acc["rejected_queue_bits"],
        "violations": {name: int(acc[f"flag_{name}"])
                       for name in ("1b", "1c", "1e", "1f")},
        "stabilization_slot": stabilization_slot(sum_q_next_series),
        "drift_bound_B": bound_b,
        "tx_power_w": tx_power,
        "physics": {
            "link_bits_per_slot": rate_slot_bits,
            "max_offered_bits_per_server_slot": max_offered,
            "link_limited": bool(max_offered > rate_slot_bits),
        },
    }
    return RunRecord(
        config_hash=config_hash(cfg),
        seed=seed,
        policy=policy,
        slots=slots,
        summary=summary,
        config=config_to_dict(cfg),
    )


def stabilization_slot(series, window: int = 50, tolerance: float = 0.10) -> int | None:
    """First slot at which the moving average of the series has changed by less
    than the relative tolerance over one window.

    The moving average uses a growing head window, so a constant series
    settles at exactly `window`. A strictly growing series settles only once
    its relative growth per window falls under the tolerance (never, for a
    linear ramp shorter than about window/tolerance slots). None if the series
    never settles within its length.
    """
    if window < 2:
        raise ValueError("window must be >= 2")
    s = np.asarray(series, dtype=float)
    n = len(s)
    if n <= window:
        return None
    csum = np.concatenate(([0.0], np.cumsum(s)))
    means = np.empty(n)
    for u in range(n):
        lo = max(0, u - window + 1)
        means[u] = (csum[u + 1] - csum[lo]) / (u - lo + 1)
    for u in range(window, n):
        base = means[u - window]
        if abs(means[u] - base) <= tolerance * max(abs(base), 1e-12):
            return u
    return None


def _format_row(row: SlotMetrics) -> list[str]:
    vals = [getattr(row, name) for name in SCALAR_COLUMNS]
    out = []
    for v in vals:
        if isinstance(v, (int, np.integer)):
            out.append(str(int(v)))
        else:
            out.append(repr(float(v)))
    out.extend(repr(float(v)) for v in row.server_q)
    return out


def write_run(record: RunRecord, out_dir: str | Path, name: str | None = None) -> tuple[Path, Path]:
    """Persist a run as <name>.csv (per-slot rows) + <name>.json (metadata).

    The metadata embeds the full effective config, so outputs are
    self-describing; writing is deterministic (sorted keys, repr floats).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if name is None:
        name = f"{record.policy}__s{record.seed}"
        if record.sweep_info:
            name = (f"{record.policy}__{record.sweep_info['axis']}-"
                    f"{record.sweep_info['value']:g}__s{record.seed}")
    csv_file = out / f"{name}.csv"
    with open(csv_file, "w", newline="") as fh:
        writer = csv.writer(fh)
        m = len(record.slots[0].server_q) if record.slots else 0
        writer.writerow(list(SCALAR_COLUMNS) + [f"q{i}" for i in range(m)])
        for row in record.slots:
            writer.writerow(_format_row(row))
    meta_file = out / f"{name}.json"
    from . import __version__
    meta = {
        "engine_version": __version__,
        "config_hash": record.config_hash,
        "seed": record.seed,
        "policy": record.policy,
        "summary": record.summary,
        "config": record.config,
        "sweep": record.sweep_info,
    }
    with open(meta_file, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return csv_file, meta_file


def apply_axis(cfg: SystemConfig, axis: str, value: float) -> SystemConfig:
    """Return cfg with one sweep axis changed."""
    if axis == "control_v":
        return dataclasses.replace(cfg, control_v=float(value))
    if axis == "weight_theta":
        return dataclasses.replace(cfg, weight_theta=float(value))
    if axis == "poisson_mean":
        rm = dataclasses.replace(cfg.request_model, poisson_mean=float(value),
                                 sampling="poisson")
        return dataclasses.replace(cfg, request_model=rm)
    if axis == "q_max":
        q = None if value is None else float(value)
        servers = tuple(dataclasses.replace(s, max_queue=q) for s in cfg.servers)
        return dataclasses.replace(cfg, servers=servers)
    raise ValueError(f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}")


def _sweep_one(args) -> dict:
    from .domain import config_from_dict
    cfg_dict, axis, value, policy, run_seed, base_seed, out_dir = args
    try:
        cfg = apply_axis(config_from_dict(cfg_dict), axis, value)
        record = run(cfg, policy, seed=run_seed)
        record.sweep_info = {"axis": axis, "value": value, "base_seed": base_seed,
                             "base_config_hash": config_hash(config_from_dict(cfg_dict))}
        row = {"axis": axis, "value": value, "policy": policy, "seed": run_seed,
               "base_seed": base_seed, "avg_cost": record.summary["avg_cost"],
               "avg_sum_q": record.summary["avg_sum_q"],
               "total_offloaded_bits": record.summary["total_offloaded_bits"],
               "stabilization_slot": record.summary["stabilization_slot"],
               "error": None}
        if out_dir is not None:
            name = f"{policy}__{axis}-{value:g}__s{base_seed}"
            write_run(record, out_dir, name)
            row["name"] = name
        return row
    except Exception as exc:  # isolate per-run failures; the sweep continues
        return {"axis": axis, "value": value, "policy": policy, "seed": run_seed,
                "base_seed": base_seed, "avg_cost": None, "avg_sum_q": None,
                "total_offloaded_bits": None, "stabilization_slot": None,
                "error": str(exc)}


def sweep(cfg: SystemConfig, axis: str, values, policies, seeds,
          out_dir: str | Path | None = None, jobs: int = 1,
          return_records: bool = False):
    """Cartesian product of runs over axis values x policies x seeds.

    Each run is seeded from (base seed, value index, policy index) so the grid
    is reproducible and extensible. Per-run failures are recorded in the
    result rows and do not stop the sweep. Returns summary rows, or full
    RunRecords when return_records is set (serial mode only).
    """
    if axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}")
    cfg_dict = config_to_dict(cfg)
    tasks = []
    for vi, value in enumerate(values):
        for pi, policy in enumerate(policies):
            for base_seed in seeds:
                tasks.append((cfg_dict, axis, value, policy,
                              derive_seed(base_seed, vi, pi), base_seed, out_dir))

    if return_records:
        records = []
        for task in tasks:
            cfg_i = apply_axis(cfg, task[1], task[2])
            rec = run(cfg_i, task[3], seed=task[4])
            rec.sweep_info = {"axis": axis, "value": task[2], "base_seed": task[5],
                              "base_config_hash": config_hash(cfg)}
            if out_dir is not None:
                write_run(rec, out_dir)
            records.append(rec)
        return records

    rows = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_one, tasks))
    else:
        rows = [_sweep_one(task) for task in tasks]
    rows.sort(key=lambda r: (float(r["value"]), str(r["policy"]), int(r["base_seed"])))
    return rows
