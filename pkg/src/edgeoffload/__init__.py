"""Deterministic slot-time simulator and policy library for multi-server
service offloading with drift-plus-penalty scheduling."""

from .cost import (CollaborationContext, CostBreakdown, build_collaboration_context,
                   channel_rate, delay_communication, delay_computation,
                   energy_device_to_server, energy_processing,
                   energy_server_to_server, mm1_wait, slot_cost)
from .domain import (EdgeServerSpec, EnergyConfig, RadioConfig, ServiceCatalog,
                     SystemConfig, Topology, ValidationReport, generate_placement,
                     generate_topology, load_config, save_config, validate_config)
from .engine import (RunRecord, SlotMetrics, run, stabilization_slot, sweep,
                     write_run)
from .errors import (InvariantViolation, LinkOutageError, OverloadError,
                     TopologyError)
from .lyapunov import (LyapunovSnapshot, decision_cost, drift, drift_bound_B,
                       drift_plus_penalty, lyapunov_value)
from .policies import (POLICY_NAMES, MatchInputs, OffloadDecision, baseline_policy,
                       ldso_match, oracle_match)
from .presets import make_reference_config
from .queueing import per_service_update, proportional_service, queue_update
from .workload import RequestModel, SlotDemand, request_probabilities, slot_demand

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
