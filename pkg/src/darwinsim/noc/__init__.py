from .mesh import (
    DIRECTIONS,
    PORT_NAMES,
    DeadlockError,
    Fabric,
    NocError,
    SpikePacket,
    UndeliverableError,
    advance_network,
    expected_latency,
    format_trace_line,
    route_decision,
)

__all__ = [
    "DIRECTIONS",
    "PORT_NAMES",
    "DeadlockError",
    "Fabric",
    "NocError",
    "SpikePacket",
    "UndeliverableError",
    "advance_network",
    "expected_latency",
    "format_trace_line",
    "route_decision",
]
