"""Typed system configuration, validation, and topology generation.

All physical and economic parameters of one experiment live here. Values are
immutable after construction; a config that passes validate_config() is
accepted by every other module without further checks.

Units: data in bits, rates in bits/slot, energy in energy-units/bit (the
constants are calibration-scale placeholders, see README), delay in seconds,
distances in meters.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .errors import TopologyError
from .workload import REQUEST_MODEL_KINDS, SAMPLING_MODES, RequestModel

COLLABORATION_SCOPES = ("providers", "hop-radius")
PROCESSING_ENERGY_MODES = ("server-total", "per-service")


@dataclass(frozen=True)
class ServiceCatalog:
    """The K service types: data size b_k (bits) and per-user request intensity
    (requests per slot per user, feeds the M/M/1 wait)."""

    sizes_bits: tuple[float, ...]
    per_user_arrival_intensity: tuple[float, ...]

    @property
    def service_count(self) -> int:
        return len(self.sizes_bits)


@dataclass(frozen=True)
class EdgeServerSpec:
    id: int
    cache_capacity_bits: float  # B_i
    cached_services: tuple[int, ...]  # f_i^k, binary over k
    max_service_rate: float  # mu_i^max, bits/slot
    max_arrival: float  # A_i^max, bits/slot
    max_queue: float | None  # Q_i^max, bits; None = unbounded
    covered_users: int  # n_i
    position: tuple[float, float]


@dataclass(frozen=True)
class RadioConfig:
    """Shared uplink: rate r(t) = bandwidth * log2(1 + P_u*h(t)/noise).

    device_tx_power_w is either a scalar or a (low, high) uniform range sampled
    once per run. channel_gain_db fixes h; fading_sigma_db > 0 adds i.i.d.
    per-slot log-normal fading around it.
    """

    bandwidth_hz: float
    device_tx_power_w: float | tuple[float, float]
    channel_gain_db: float
    noise_power_w: float
    fading_sigma_db: float = 0.0

    def gain_linear(self) -> float:
        return 10.0 ** (self.channel_gain_db / 10.0)


@dataclass(frozen=True)
class EnergyConfig:
    device_to_server: float  # e_u, per bit uploaded
    server_to_server: float  # e_s, per bit per hop
    processing: float  # e_p, per bit processed


@dataclass(frozen=True)
class SystemConfig:
    servers: tuple[EdgeServerSpec, ...]
    catalog: ServiceCatalog
    radio: RadioConfig
    energy: EnergyConfig
    request_model: RequestModel
    control_v: float  # V
    weight_theta: float  # theta, energy weight in the scalar cost
    slot_count: int  # T
    slot_duration_s: float
    rng_seed: int
    energy_cap: float  # E^max per slot
    delay_cap: float  # T^max per slot
    user_sbs_range_m: float
    sbs_sbs_range_m: float
    collaboration_scope: str = "providers"
    collab_hop_radius: int = 1
    processing_energy_data: str = "server-total"

    @property
    def server_count(self) -> int:
        return len(self.servers)


@dataclass(frozen=True)
class Violation:
    path: str
    message: str


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def add(self, path: str, message: str) -> None:
        self.violations.append(Violation(path, message))

    def __str__(self) -> str:
        if self.ok:
            return "config ok"
        return "\n".join(f"{v.path}: {v.message}" for v in self.violations)


def validate_config(cfg: SystemConfig) -> ValidationReport:
    """Check every invariant the other modules assume. Violations are data, not faults."""
    rep = ValidationReport()
    cat = cfg.catalog
    k_count = cat.service_count

    if k_count < 1:
        rep.add("catalog.sizes_bits", "at least one service required")
    if len(cat.per_user_arrival_intensity) != k_count:
        rep.add("catalog.per_user_arrival_intensity",
                f"length {len(cat.per_user_arrival_intensity)} != service count {k_count}")
    for k, b in enumerate(cat.sizes_bits):
        if b <= 0:
            rep.add(f"catalog.sizes_bits[{k}]", f"size must be positive, got {b}")
    for k, lam in enumerate(cat.per_user_arrival_intensity):
        if lam < 0:
            rep.add(f"catalog.per_user_arrival_intensity[{k}]", f"must be >= 0, got {lam}")

    if cfg.server_count < 1:
        rep.add("servers", "at least one server required")
    seen_ids = set()
    for idx, s in enumerate(cfg.servers):
        at = f"servers[{idx}]"
        if s.id in seen_ids:
            rep.add(f"{at}.id", f"duplicate server id {s.id}")
        seen_ids.add(s.id)
        if len(s.cached_services) != k_count:
            rep.add(f"{at}.cached_services", f"length {len(s.cached_services)} != {k_count}")
        elif any(f not in (0, 1) for f in s.cached_services):
            rep.add(f"{at}.cached_services", "entries must be 0 or 1")
        else:
            used = sum(f * b for f, b in zip(s.cached_services, cat.sizes_bits))
            if used > s.cache_capacity_bits:
                rep.add(f"{at}.cached_services",
                        f"cache overflow: {used:g} > {s.cache_capacity_bits:g}")
        if s.max_service_rate <= 0:
            rep.add(f"{at}.max_service_rate", f"must be positive, got {s.max_service_rate}")
        if s.max_arrival <= 0:
            rep.add(f"{at}.max_arrival", f"must be positive, got {s.max_arrival}")
        if s.max_queue is not None and s.max_queue <= 0:
            rep.add(f"{at}.max_queue", f"must be positive or null, got {s.max_queue}")
        if s.covered_users < 0:
            rep.add(f"{at}.covered_users", f"must be >= 0, got {s.covered_users}")
        if len(s.position) != 2:
            rep.add(f"{at}.position", "expected 2-D coordinates")

    if cfg.radio.bandwidth_hz <= 0:
        rep.add("radio.bandwidth_hz", f"must be positive, got {cfg.radio.bandwidth_hz}")
    if cfg.radio.noise_power_w <= 0:
        rep.add("radio.noise_power_w", f"must be positive, got {cfg.radio.noise_power_w}")
    p = cfg.radio.device_tx_power_w
    if isinstance(p, (tuple, list)):
        if len(p) != 2 or p[0] <= 0 or p[1] < p[0]:
            rep.add("radio.device_tx_power_w", f"range must be (low, high) with 0 < low <= high, got {p}")
    elif p <= 0:
        rep.add("radio.device_tx_power_w", f"must be positive, got {p}")
    if cfg.radio.fading_sigma_db < 0:
        rep.add("radio.fading_sigma_db", f"must be >= 0, got {cfg.radio.fading_sigma_db}")

    for name in ("device_to_server", "server_to_server", "processing"):
        if getattr(cfg.energy, name) < 0:
            rep.add(f"energy.{name}", "must be >= 0")

    if not 0.0 <= cfg.weight_theta <= 1.0:
        rep.add("weight_theta", f"weight_theta out of [0,1]: {cfg.weight_theta}")
    if cfg.control_v < 0:
        rep.add("control_v", f"must be >= 0, got {cfg.control_v}")
    if cfg.slot_count < 1:
        rep.add("slot_count", f"must be >= 1, got {cfg.slot_count}")
    if cfg.slot_duration_s <= 0:
        rep.add("slot_duration_s", f"must be positive, got {cfg.slot_duration_s}")
    if cfg.energy_cap <= 0:
        rep.add("energy_cap", f"must be positive, got {cfg.energy_cap}")
    if cfg.delay_cap <= 0:
        rep.add("delay_cap", f"must be positive, got {cfg.delay_cap}")
    if cfg.user_sbs_range_m <= 0:
        rep.add("user_sbs_range_m", f"must be positive, got {cfg.user_sbs_range_m}")
    if cfg.sbs_sbs_range_m <= 0:
        rep.add("sbs_sbs_range_m", f"must be positive, got {cfg.sbs_sbs_range_m}")

    rm = cfg.request_model
    if rm.kind not in REQUEST_MODEL_KINDS:
        rep.add("request_model.kind", f"unknown kind {rm.kind!r}; expected one of {REQUEST_MODEL_KINDS}")
    if rm.zipf_exponent < 0:
        rep.add("request_model.zipf_exponent", f"must be >= 0, got {rm.zipf_exponent}")
    if rm.rotation_period < 1:
        rep.add("request_model.rotation_period", f"must be >= 1, got {rm.rotation_period}")
    if not 0.0 <= rm.modulation_depth < 1.0:
        rep.add("request_model.modulation_depth", f"must be in [0,1), got {rm.modulation_depth}")
    if rm.sampling not in SAMPLING_MODES:
        rep.add("request_model.sampling", f"unknown mode {rm.sampling!r}; expected one of {SAMPLING_MODES}")
    if rm.poisson_mean is not None and rm.poisson_mean <= 0:
        rep.add("request_model.poisson_mean", f"must be positive or null, got {rm.poisson_mean}")

    if cfg.collaboration_scope not in COLLABORATION_SCOPES:
        rep.add("collaboration_scope", f"expected one of {COLLABORATION_SCOPES}, got {cfg.collaboration_scope!r}")
    if cfg.collab_hop_radius < 1:
        rep.add("collab_hop_radius", f"must be >= 1, got {cfg.collab_hop_radius}")
    if cfg.processing_energy_data not in PROCESSING_ENERGY_MODES:
        rep.add("processing_energy_data",
                f"expected one of {PROCESSING_ENERGY_MODES}, got {cfg.processing_energy_data!r}")
    return rep


# ---------------------------------------------------------------------------
# Topology generation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Topology:
    """Server placement fragment: positions, per-server user counts, adjacency.

    hop_counts[i][j] is the unweighted shortest-path hop distance on the
    range-limited server graph, -1 where unreachable.
    """

    positions: tuple[tuple[float, float], ...]
    covered_users: tuple[int, ...]
    adjacency: tuple[tuple[int, ...], ...]
    hop_counts: tuple[tuple[int, ...], ...]
    orphan_users: int

    @property
    def server_count(self) -> int:
        return len(self.positions)


def _bfs_hops(adj: list[list[int]]) -> list[list[int]]:
    m = len(adj)
    hops = [[-1] * m for _ in range(m)]
    for src in range(m):
        hops[src][src] = 0
        frontier = [src]
        d = 0
        while frontier:
            d += 1
            nxt = []
            for u in frontier:
                for v in adj[u]:
                    if hops[src][v] == -1:
                        hops[src][v] = d
                        nxt.append(v)
            frontier = nxt
    return hops


def generate_topology(seed: int, user_intensity: float, server_intensity: float,
                      area_m: tuple[float, float], user_sbs_range_m: float,
                      sbs_sbs_range_m: float, users_per_server: int | None = None,
                      positions: list[tuple[float, float]] | None = None) -> Topology:
    """Sample a homogeneous Poisson point process topology over a rectangle.

    Server count ~ Poisson(server_intensity * area), positions uniform; users
    likewise with user_intensity, attached to their nearest server within
    user_sbs_range_m (users out of range are dropped and counted). Passing
    users_per_server skips the user draw and fixes n_i; passing positions skips
    the server draw (file-loaded deployments). Pure function of its arguments.
    """
    if area_m[0] <= 0 or area_m[1] <= 0:
        raise ValueError("area dimensions must be positive")
    if positions is None and server_intensity <= 0:
        raise ValueError("server_intensity must be positive")
    rng = np.random.default_rng(seed)
    width, height = float(area_m[0]), float(area_m[1])
    area = width * height

    if positions is None:
        m = int(rng.poisson(server_intensity * area))
        if m == 0:
            raise TopologyError(
                "Poisson draw produced zero servers for "
                f"intensity*area = {server_intensity * area:g}; resample with a new seed")
        pos = rng.uniform((0.0, 0.0), (width, height), size=(m, 2))
    else:
        if len(positions) == 0:
            raise TopologyError("empty position list; supply at least one server")
        pos = np.asarray(positions, dtype=float)
        m = len(pos)

    orphans = 0
    if users_per_server is not None:
        users = [int(users_per_server)] * m
    else:
        if user_intensity <= 0:
            raise ValueError("user_intensity must be positive")
        n_users = int(rng.poisson(user_intensity * area))
        upos = rng.uniform((0.0, 0.0), (width, height), size=(n_users, 2))
        users = [0] * m
        for u in range(n_users):
            d = np.hypot(pos[:, 0] - upos[u, 0], pos[:, 1] - upos[u, 1])
            nearest = int(np.argmin(d))
            if d[nearest] <= user_sbs_range_m:
                users[nearest] += 1
            else:
                orphans += 1

    adj: list[list[int]] = [[] for _ in range(m)]
    for i in range(m):
        for j in range(i + 1, m):
            if np.hypot(*(pos[i] - pos[j])) <= sbs_sbs_range_m:
                adj[i].append(j)
                adj[j].append(i)
    hops = _bfs_hops(adj)
    return Topology(
        positions=tuple((float(x), float(y)) for x, y in pos),
        covered_users=tuple(users),
        adjacency=tuple(tuple(a) for a in adj),
        hop_counts=tuple(tuple(h) for h in hops),
        orphan_users=orphans,
    )


def generate_placement(seed: int, server_count: int, catalog: ServiceCatalog,
                       cache_capacity_bits: float,
                       min_providers: int = 1) -> tuple[tuple[int, ...], ...]:
    """Random service placement respecting cache capacity.

    Every service first gets min_providers hosts (round-robin over a shuffled
    server order), then each server fills leftover capacity with extra services
    in random order. Deterministic in (seed, arguments).
    """
    rng = np.random.default_rng(seed)
    k_count = catalog.service_count
    sizes = catalog.sizes_bits
    placed = [[0] * k_count for _ in range(server_count)]
    free = [cache_capacity_bits] * server_count

    order = list(rng.permutation(server_count))
    cursor = 0
    for k in rng.permutation(k_count):
        need = min(min_providers, server_count)
        tries = 0
        while need > 0 and tries < server_count:
            i = order[cursor % server_count]
            cursor += 1
            tries += 1
            if placed[i][k] == 0 and free[i] >= sizes[k]:
                placed[i][k] = 1
                free[i] -= sizes[k]
                need -= 1
        if need > 0:
            raise ValueError(
                f"cannot place service {k} on {min_providers} servers within capacity "
                f"{cache_capacity_bits:g}")
    for i in range(server_count):
        for k in rng.permutation(k_count):
            if placed[i][k] == 0 and free[i] >= sizes[k]:
                placed[i][k] = 1
                free[i] -= sizes[k]
    return tuple(tuple(row) for row in placed)


def hop_matrix(cfg_or_topology) -> np.ndarray:
    """Hop distances between servers via BFS on the range adjacency graph."""
    if isinstance(cfg_or_topology, Topology):
        return np.array(cfg_or_topology.hop_counts, dtype=int)
    cfg: SystemConfig = cfg_or_topology
    m = cfg.server_count
    pos = np.array([s.position for s in cfg.servers], dtype=float)
    adj: list[list[int]] = [[] for _ in range(m)]
    for i in range(m):
        for j in range(i + 1, m):
            if np.hypot(*(pos[i] - pos[j])) <= cfg.sbs_sbs_range_m:
                adj[i].append(j)
                adj[j].append(i)
    return np.array(_bfs_hops(adj), dtype=int)


# ---------------------------------------------------------------------------
# JSON config I/O
# ---------------------------------------------------------------------------

_TOPOLOGY_KEYS = {"seed", "area_m", "server_intensity", "user_intensity",
                  "users_per_server", "positions_file", "placement_seed",
                  "min_providers", "server_defaults"}
_SERVER_DEFAULT_KEYS = {"cache_capacity_bits", "max_service_rate", "max_arrival", "max_queue"}


def _reject_unknown(d: dict, allowed: set[str], at: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise ValueError(f"unknown keys at {at}: {sorted(unknown)}")


def _field_names(cls) -> set[str]:
    return {f.name for f in fields(cls)}


def load_positions_csv(path: str | Path) -> list[tuple[float, float]]:
    """Positions file: CSV with columns id,x,y (the dataset escape hatch)."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or {"id", "x", "y"} - set(reader.fieldnames):
            raise ValueError(f"positions file {path} must have columns id,x,y")
        for row in reader:
            rows.append((int(row["id"]), float(row["x"]), float(row["y"])))
    rows.sort()
    return [(x, y) for _, x, y in rows]


def _expand_topology_block(block: dict, catalog: ServiceCatalog,
                           user_range: float, sbs_range: float) -> tuple[EdgeServerSpec, ...]:
    _reject_unknown(block, _TOPOLOGY_KEYS, "topology")
    defaults = dict(block["server_defaults"])
    _reject_unknown(defaults, _SERVER_DEFAULT_KEYS, "topology.server_defaults")
    positions = None
    if block.get("positions_file"):
        positions = load_positions_csv(block["positions_file"])
    topo = generate_topology(
        seed=block["seed"],
        user_intensity=block.get("user_intensity", 0.0),
        server_intensity=block.get("server_intensity", 0.0),
        area_m=tuple(block["area_m"]),
        user_sbs_range_m=user_range,
        sbs_sbs_range_m=sbs_range,
        users_per_server=block.get("users_per_server"),
        positions=positions,
    )
    placement = generate_placement(
        seed=block.get("placement_seed", block["seed"]),
        server_count=topo.server_count,
        catalog=catalog,
        cache_capacity_bits=defaults["cache_capacity_bits"],
        min_providers=block.get("min_providers", 1),
    )
    return tuple(
        EdgeServerSpec(
            id=i,
            cache_capacity_bits=defaults["cache_capacity_bits"],
            cached_services=placement[i],
            max_service_rate=defaults["max_service_rate"],
            max_arrival=defaults["max_arrival"],
            max_queue=defaults["max_queue"],
            covered_users=topo.covered_users[i],
            position=topo.positions[i],
        )
        for i in range(topo.server_count)
    )


def config_to_dict(cfg: SystemConfig) -> dict:
    """Plain-dict form with field names matching the JSON schema exactly."""
    return {
        "servers": [
            {
                "id": s.id,
                "cache_capacity_bits": s.cache_capacity_bits,
                "cached_services": list(s.cached_services),
                "max_service_rate": s.max_service_rate,
                "max_arrival": s.max_arrival,
                "max_queue": s.max_queue,
                "covered_users": s.covered_users,
                "position": list(s.position),
            }
            for s in cfg.servers
        ],
        "catalog": {
            "sizes_bits": list(cfg.catalog.sizes_bits),
            "per_user_arrival_intensity": list(cfg.catalog.per_user_arrival_intensity),
        },
        "radio": {
            "bandwidth_hz": cfg.radio.bandwidth_hz,
            "device_tx_power_w": list(cfg.radio.device_tx_power_w)
            if isinstance(cfg.radio.device_tx_power_w, (tuple, list))
            else cfg.radio.device_tx_power_w,
            "channel_gain_db": cfg.radio.channel_gain_db,
            "noise_power_w": cfg.radio.noise_power_w,
            "fading_sigma_db": cfg.radio.fading_sigma_db,
        },
        "energy": {
            "device_to_server": cfg.energy.device_to_server,
            "server_to_server": cfg.energy.server_to_server,
            "processing": cfg.energy.processing,
        },
        "request_model": {
            "kind": cfg.request_model.kind,
            "zipf_exponent": cfg.request_model.zipf_exponent,
            "rotation_period": cfg.request_model.rotation_period,
            "modulation_depth": cfg.request_model.modulation_depth,
            "sampling": cfg.request_model.sampling,
            "poisson_mean": cfg.request_model.poisson_mean,
        },
        "control_v": cfg.control_v,
        "weight_theta": cfg.weight_theta,
        "slot_count": cfg.slot_count,
        "slot_duration_s": cfg.slot_duration_s,
        "rng_seed": cfg.rng_seed,
        "energy_cap": cfg.energy_cap,
        "delay_cap": cfg.delay_cap,
        "user_sbs_range_m": cfg.user_sbs_range_m,
        "sbs_sbs_range_m": cfg.sbs_sbs_range_m,
        "collaboration_scope": cfg.collaboration_scope,
        "collab_hop_radius": cfg.collab_hop_radius,
        "processing_energy_data": cfg.processing_energy_data,
    }


def config_from_dict(data: dict) -> SystemConfig:
    """Build a SystemConfig from the JSON schema; unknown keys are rejected.

    Either "servers" (explicit list) or "topology" (generator block expanded
    deterministically at load time) must be present.
    """
    _reject_unknown(data, _field_names(SystemConfig) | {"topology"}, "<root>")
    if ("servers" in data) == ("topology" in data):
        raise ValueError("config needs exactly one of 'servers' or 'topology'")

    cat_d = dict(data["catalog"])
    _reject_unknown(cat_d, {"sizes_bits", "per_user_arrival_intensity"}, "catalog")
    catalog = ServiceCatalog(
        sizes_bits=tuple(float(b) for b in cat_d["sizes_bits"]),
        per_user_arrival_intensity=tuple(float(x) for x in cat_d["per_user_arrival_intensity"]),
    )

    radio_d = dict(data["radio"])
    _reject_unknown(radio_d, _field_names(RadioConfig), "radio")
    power = radio_d["device_tx_power_w"]
    if isinstance(power, list):
        power = tuple(float(p) for p in power)
    radio = RadioConfig(
        bandwidth_hz=float(radio_d["bandwidth_hz"]),
        device_tx_power_w=power,
        channel_gain_db=float(radio_d["channel_gain_db"]),
        noise_power_w=float(radio_d["noise_power_w"]),
        fading_sigma_db=float(radio_d.get("fading_sigma_db", 0.0)),
    )

    energy_d = dict(data["energy"])
    _reject_unknown(energy_d, _field_names(EnergyConfig), "energy")
    energy = EnergyConfig(**{k: float(v) for k, v in energy_d.items()})

    rm_d = dict(data["request_model"])
    _reject_unknown(rm_d, _field_names(RequestModel), "request_model")
    request_model = RequestModel(**rm_d)

    if "servers" in data:
        servers = []
        for idx, s in enumerate(data["servers"]):
            s = dict(s)
            _reject_unknown(s, _field_names(EdgeServerSpec), f"servers[{idx}]")
            servers.append(EdgeServerSpec(
                id=int(s["id"]),
                cache_capacity_bits=float(s["cache_capacity_bits"]),
                cached_services=tuple(int(f) for f in s["cached_services"]),
                max_service_rate=float(s["max_service_rate"]),
                max_arrival=float(s["max_arrival"]),
                max_queue=None if s["max_queue"] is None else float(s["max_queue"]),
                covered_users=int(s["covered_users"]),
                position=tuple(float(x) for x in s["position"]),
            ))
        servers = tuple(servers)
    else:
        servers = _expand_topology_block(
            dict(data["topology"]), catalog,
            float(data["user_sbs_range_m"]), float(data["sbs_sbs_range_m"]))

    return SystemConfig(
        servers=servers,
        catalog=catalog,
        radio=radio,
        energy=energy,
        request_model=request_model,
        control_v=float(data["control_v"]),
        weight_theta=float(data["weight_theta"]),
        slot_count=int(data["slot_count"]),
        slot_duration_s=float(data["slot_duration_s"]),
        rng_seed=int(data["rng_seed"]),
        energy_cap=float(data["energy_cap"]),
        delay_cap=float(data["delay_cap"]),
        user_sbs_range_m=float(data["user_sbs_range_m"]),
        sbs_sbs_range_m=float(data["sbs_sbs_range_m"]),
        collaboration_scope=data.get("collaboration_scope", "providers"),
        collab_hop_radius=int(data.get("collab_hop_radius", 1)),
        processing_energy_data=data.get("processing_energy_data", "server-total"),
    )


def load_config(path: str | Path) -> SystemConfig:
    with open(path) as fh:
        return config_from_dict(json.load(fh))


def save_config(cfg: SystemConfig, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(config_to_dict(cfg), fh, indent=2, sort_keys=True)
        fh.write("\n")
