from .footprint import CoreFootprint, Footprint, capacity_bounds, memory_footprint
from .tables import (
    CASE_ORDER,
    AxonInBlock,
    AxonInTable,
    AxonOutTable,
    ConnectivityError,
    Geometry,
    TableBuilder,
    Tables,
    build_tables,
    candidate_blocks,
    choose_block,
    dump,
    expand_dense,
    lookup_targets,
    resolve_incoming,
)
from .weights import WIDTHS, WeightArray, WeightError, choose_shift

__all__ = [
    "CASE_ORDER",
    "AxonInBlock",
    "AxonInTable",
    "AxonOutTable",
    "ConnectivityError",
    "CoreFootprint",
    "Footprint",
    "Geometry",
    "TableBuilder",
    "Tables",
    "WIDTHS",
    "WeightArray",
    "WeightError",
    "build_tables",
    "candidate_blocks",
    "capacity_bounds",
    "choose_block",
    "choose_shift",
    "dump",
    "expand_dense",
    "lookup_targets",
    "memory_footprint",
    "resolve_incoming",
]
