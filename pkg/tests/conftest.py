import numpy as np
import pytest

from edgeoffload.domain import (EdgeServerSpec, EnergyConfig, RadioConfig,
                                ServiceCatalog, SystemConfig)
from edgeoffload.workload import RequestModel


def make_config(m=3, k=3, *, cached=None, users=(10, 10, 10), mu_max=500.0,
                q_max=4000.0, a_max=5000.0, sizes=None, lam=0.05,
                control_v=100.0, theta=0.5, slots=50, sampling="expectation",
                poisson_mean=None, zipf=0.0, **kw):
    """Small hand-built config for unit tests: m servers in a 10 m line, all
    ranges generous enough that the server graph is a path."""
    sizes = tuple(float(s) for s in (sizes or [100.0] * k))
    if cached is None:
        cached = [[1] * k for _ in range(m)]
    servers = tuple(
        EdgeServerSpec(
            id=i,
            cache_capacity_bits=float(sum(sizes)),
            cached_services=tuple(cached[i]),
            max_service_rate=mu_max,
            max_arrival=a_max,
            max_queue=q_max,
            covered_users=users[i] if i < len(users) else 10,
            position=(10.0 * i, 0.0),
        )
        for i in range(m)
    )
    defaults = dict(
        servers=servers,
        catalog=ServiceCatalog(sizes_bits=sizes,
                               per_user_arrival_intensity=tuple([lam] * k)),
        radio=RadioConfig(bandwidth_hz=40.0e6, device_tx_power_w=1.0,
                          channel_gain_db=20.0, noise_power_w=1.0),
        energy=EnergyConfig(device_to_server=0.01, server_to_server=0.01,
                            processing=0.5),
        request_model=RequestModel(kind="static-zipf", zipf_exponent=zipf,
                                   sampling=sampling, poisson_mean=poisson_mean),
        control_v=control_v,
        weight_theta=theta,
        slot_count=slots,
        slot_duration_s=1.0e-3,
        rng_seed=1,
        energy_cap=1.0e9,
        delay_cap=100.0,
        user_sbs_range_m=15.0,
        sbs_sbs_range_m=12.0,
    )
    defaults.update(kw)
    return SystemConfig(**defaults)


@pytest.fixture
def small_config():
    return make_config()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
