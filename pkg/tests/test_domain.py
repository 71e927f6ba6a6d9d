import dataclasses
import json

import numpy as np
import pytest

from edgeoffload.domain import (config_from_dict, config_to_dict, generate_placement,
                                generate_topology, hop_matrix, load_positions_csv,
                                validate_config)
from edgeoffload.errors import TopologyError
from edgeoffload.presets import make_reference_config, reference_config_dict

from conftest import make_config


def test_cache_boundary_equality_passes():
    # sum of cached sizes exactly equals capacity
    cfg = make_config(k=2, sizes=[250.0, 250.0])
    assert sum(cfg.servers[0].cached_services[j] * cfg.catalog.sizes_bits[j]
               for j in range(2)) == cfg.servers[0].cache_capacity_bits
    assert validate_config(cfg).ok


def test_theta_out_of_range_is_violation():
    cfg = make_config(theta=1.5)
    report = validate_config(cfg)
    assert not report.ok
    assert any("weight_theta out of [0,1]" in v.message for v in report.violations)


def test_cache_overflow_reported_with_amount():
    # ten services of 100 bits each against a 500-bit cache: 1000 > 500
    cfg = make_config(k=10, sizes=[100.0] * 10)
    server = dataclasses.replace(cfg.servers[0], cache_capacity_bits=500.0)
    cfg = dataclasses.replace(cfg, servers=(server,) + cfg.servers[1:])
    report = validate_config(cfg)
    assert any("cache overflow: 1000 > 500" in v.message for v in report.violations)


def test_violations_carry_field_paths():
    cfg = make_config(control_v=-1.0, slot_count=0)
    report = validate_config(cfg)
    paths = {v.path for v in report.violations}
    assert "control_v" in paths and "slot_count" in paths


def test_topology_deterministic():
    a = generate_topology(42, 0.02, 1e-3, (100, 100), 15, 30)
    b = generate_topology(42, 0.02, 1e-3, (100, 100), 15, 30)
    assert a == b


def test_topology_zero_server_draw_errors():
    with pytest.raises(TopologyError, match="new seed"):
        generate_topology(0, 0.02, 1e-8, (10, 10), 15, 30)


def test_topology_respects_ranges():
    topo = generate_topology(7, 0.05, 2e-3, (100, 100), 15.0, 30.0)
    pos = np.array(topo.positions)
    for i, neighbors in enumerate(topo.adjacency):
        for j in neighbors:
            assert np.hypot(*(pos[i] - pos[j])) <= 30.0


def test_topology_users_attach_within_range_or_drop():
    topo = generate_topology(3, 0.05, 1e-3, (200, 200), 15.0, 30.0)
    # regenerate the user draw by hand to count in-range users
    rng = np.random.default_rng(3)
    m = rng.poisson(1e-3 * 200 * 200)
    pos = rng.uniform((0, 0), (200, 200), size=(m, 2))
    n_users = rng.poisson(0.05 * 200 * 200)
    upos = rng.uniform((0, 0), (200, 200), size=(n_users, 2))
    in_range = 0
    for u in range(n_users):
        d = np.hypot(pos[:, 0] - upos[u, 0], pos[:, 1] - upos[u, 1])
        if d.min() <= 15.0:
            in_range += 1
    assert sum(topo.covered_users) == in_range
    assert topo.orphan_users == n_users - in_range


def test_fixed_users_per_server():
    topo = generate_topology(9, 0.0, 1e-3, (100, 100), 15, 30, users_per_server=50)
    assert all(n == 50 for n in topo.covered_users)


def test_hop_matrix_line_graph(small_config):
    # servers at x = 0, 10, 20 with 12 m range: a path graph
    hops = hop_matrix(small_config)
    assert hops.tolist() == [[0, 1, 2], [1, 0, 1], [2, 1, 0]]


def test_placement_capacity_and_min_providers():
    cat = make_config(k=6, sizes=[10, 20, 30, 40, 50, 60]).catalog
    placed = generate_placement(5, 4, cat, cache_capacity_bits=150.0, min_providers=2)
    placed = np.array(placed)
    assert (placed.sum(axis=0) >= 2).all()
    used = placed @ np.array(cat.sizes_bits)
    assert (used <= 150.0).all()


def test_placement_impossible_raises():
    cat = make_config(k=3, sizes=[100.0, 100.0, 100.0]).catalog
    with pytest.raises(ValueError, match="cannot place"):
        generate_placement(1, 2, cat, cache_capacity_bits=50.0)


def test_config_json_roundtrip(small_config):
    data = config_to_dict(small_config)
    again = config_from_dict(json.loads(json.dumps(data)))
    assert again == small_config


def test_unknown_keys_rejected():
    data = config_to_dict(make_config())
    data["extra_knob"] = 1
    with pytest.raises(ValueError, match="unknown keys"):
        config_from_dict(data)
    data = config_to_dict(make_config())
    data["radio"]["snr"] = 3
    with pytest.raises(ValueError, match="unknown keys at radio"):
        config_from_dict(data)


def test_servers_and_topology_mutually_exclusive():
    data = reference_config_dict()
    data["servers"] = config_to_dict(make_config())["servers"]
    with pytest.raises(ValueError, match="exactly one"):
        config_from_dict(data)


def test_positions_file_escape_hatch(tmp_path):
    path = tmp_path / "pos.csv"
    path.write_text("id,x,y\n1,30.0,0.0\n0,0.0,0.0\n2,60.0,0.0\n")
    assert load_positions_csv(path) == [(0.0, 0.0), (30.0, 0.0), (60.0, 0.0)]
    data = reference_config_dict()
    data["topology"]["positions_file"] = str(path)
    data["topology"]["server_defaults"]["cache_capacity_bits"] = 500.0
    cfg = config_from_dict(data)
    assert cfg.server_count == 3
    assert cfg.servers[1].position == (30.0, 0.0)


def test_reference_preset_valid():
    cfg = make_reference_config()
    assert cfg.server_count == 10
    assert validate_config(cfg).ok
    providers = np.array([s.cached_services for s in cfg.servers]).sum(axis=0)
    assert (providers >= 2).all()
