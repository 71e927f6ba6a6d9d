"""Exception types shared across the simulator."""


class TopologyError(ValueError):
    """Degenerate topology draw (e.g. a Poisson process produced zero servers)."""


class OverloadError(ValueError):
    """M/M/1 arrival rate at or above the service rate; the queue has no finite wait."""


class LinkOutageError(ValueError):
    """Zero channel rate while demand is pending."""


class InvariantViolation(RuntimeError):
    """A per-slot engine assertion failed; carries the slot index in the message."""
