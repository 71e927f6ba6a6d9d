"""One seeded run of the bundled reference setup, end to end.

Shows config validation, the slot pipeline, the per-slot record fields, and
the run summary including the link-physics feasibility report.
"""

from edgeoffload import run, validate_config
from edgeoffload.presets import make_reference_config

cfg = make_reference_config()
report = validate_config(cfg)
print(f"config: {cfg.server_count} servers, {cfg.catalog.service_count} services, "
      f"{cfg.slot_count} slots of {cfg.slot_duration_s * 1e3:g} ms -> {report}")

record = run(cfg, "ldso", seed=7)

print("\nfirst slots (cost, total backlog after update, drift vs bound):")
for row in record.slots[:5]:
    print(f"  t={row.t}: cost={row.cost:9.1f}  sum_q={row.sum_q_next:8.0f}  "
          f"drift={row.drift:12.1f} <= {row.drift_bound:12.1f}")

mid = record.slots[len(record.slots) // 2]
print(f"\nmid-run slot t={mid.t}: energy ({mid.e_c1:.1f} upload + {mid.e_c2:.1f} "
      f"forwarding + {mid.e_p:.1f} processing), delay {mid.t_total * 1e3:.3f} ms, "
      f"{mid.unassigned_count} services deferred")

s = record.summary
print("\nsummary")
print(f"  time-averaged cost      : {s['avg_cost']:.1f}")
print(f"  time-averaged backlog   : {s['avg_sum_q']:.0f} bits")
print(f"  offloaded volume        : {s['total_offloaded_bits']:.0f} bits "
      f"(served {s['total_served_bits']:.0f})")
print(f"  deferred / rejected     : {s['total_deferred_bits']:.0f} / "
      f"{s['total_rejected_queue_bits']:.0f} bits")
print(f"  backlog settled at slot : {s['stabilization_slot']}")
print(f"  constraint flags        : {s['violations']}")

phys = s["physics"]
print("\nlink physics feasibility")
print(f"  shared link carries {phys['link_bits_per_slot']:.0f} bits/slot; "
      f"peak per-server demand {phys['max_offered_bits_per_server_slot']:.0f} bits/slot; "
      f"link-limited: {phys['link_limited']}")
