"""Reference experiment configuration.

make_reference_config() encodes the headline desk-scale setup: 10 service
types, ~10 servers over a 100 m x 100 m field (15 m user range, 30 m
server-server range), 50 users per server, Poisson demand with mean 20
requests per server-slot, 1000 slots of 1 ms, 40 MHz shared link at 20 dB
gain with U[0.01, 1] W device power, theta = 0.5, per-server queue bound 4000.

Data sizes and the per-bit energy constants are calibration-scale placeholders
(abstract units chosen so the queue and penalty terms of the greedy score
actually trade off across V in the low thousands); set them explicitly for
quantitative work in physical units.
"""

from __future__ import annotations

import json
from importlib import resources

from ..domain import SystemConfig, config_from_dict

PRESET_NAMES = ("paper",)


def reference_config_dict(**overrides) -> dict:
    """The reference config as a JSON-shaped dict; keyword overrides replace
    top-level keys (nested dicts are replaced wholesale)."""
    data = {
        "topology": {
            "seed": 95,
            "area_m": [100.0, 100.0],
            "server_intensity": 1.0e-3,
            "users_per_server": 50,
            "placement_seed": 11,
            "min_providers": 2,
            "server_defaults": {
                "cache_capacity_bits": 166.25,
                "max_service_rate": 100.0,
                "max_arrival": 2000.0,
                "max_queue": 4000.0,
            },
        },
        "catalog": {
            "sizes_bits": [25.0, 30.0, 35.0, 40.0, 45.0,
                           50.0, 55.0, 60.0, 65.0, 70.0],
            "per_user_arrival_intensity": [0.05] * 10,
        },
        "radio": {
            "bandwidth_hz": 40.0e6,
            "device_tx_power_w": [0.01, 1.0],
            "channel_gain_db": 20.0,
            "noise_power_w": 1.0,
            "fading_sigma_db": 0.0,
        },
        "energy": {
            "device_to_server": 0.005,
            "server_to_server": 0.005,
            "processing": 2.0,
        },
        "request_model": {
            "kind": "rotating-zipf",
            "zipf_exponent": 0.3,
            "rotation_period": 250,
            "modulation_depth": 0.5,
            "sampling": "poisson",
            "poisson_mean": 20.0,
        },
        "control_v": 1300.0,
        "weight_theta": 0.5,
        "slot_count": 1000,
        "slot_duration_s": 1.0e-3,
        "rng_seed": 7,
        "energy_cap": 1.0e6,
        "delay_cap": 10.0,
        "user_sbs_range_m": 15.0,
        "sbs_sbs_range_m": 30.0,
    }
    data.update(overrides)
    return data


def make_reference_config(**overrides) -> SystemConfig:
    return config_from_dict(reference_config_dict(**overrides))


def load_preset(name: str) -> dict:
    """Bundled preset config by name (the CLI accepts these in place of a path)."""
    if name not in PRESET_NAMES:
        raise ValueError(f"unknown preset {name!r}; expected one of {PRESET_NAMES}")
    text = resources.files("edgeoffload.presets").joinpath(f"{name}.json").read_text()
    return json.loads(text)
