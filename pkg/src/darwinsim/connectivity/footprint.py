"""Bit-exact memory accounting and capacity bounds."""

from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass, field

from .tables import (
    AXON_IN_LINKER_BITS,
    AXON_IN_INDEX_BITS,
    AXON_OUT_LINKER_BITS,
    NEURON_BITS,
    Tables,
)

POINTER_BITS = 16


@dataclass
class CoreFootprint:
    axon_out_bits: int = 0
    axon_in_bits: int = 0
    weight_bits: int = 0
    synapses: int = 0
    axon_in_linkers: int = 0
    axon_in_entries: int = 0
    # baselines for the same topology
    crossbar_bits: int = 0
    normal_index_bits: int = 0
    normal_index_weight_bits: int = 0
    population_index_bits: int = 0

    @property
    def total_bits(self) -> int:
        return self.axon_out_bits + self.axon_in_bits + self.weight_bits

    def add(self, other: "CoreFootprint") -> None:
        for k, v in asdict(other).items():
            setattr(self, k, getattr(self, k) + v)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["total_bits"] = self.total_bits
        return d


@dataclass
class Footprint:
    cores: dict[int, CoreFootprint] = field(default_factory=dict)
    total: CoreFootprint = field(default_factory=CoreFootprint)


def memory_footprint(tables: Tables) -> Footprint:
    info_bits = 2 * tables.offset_bits + AXON_IN_INDEX_BITS + 1
    result = Footprint()
    for cid in sorted(tables.geometry.cores):
        fp = CoreFootprint()
        out = tables.axon_out[cid]
        fp.axon_out_bits = len(out.linkers) * AXON_OUT_LINKER_BITS + len(out.info) * info_bits
        tbl = tables.axon_in[cid]
        fp.axon_in_linkers = len(tbl.linkers)
        fp.axon_in_bits = len(tbl.linkers) * AXON_IN_LINKER_BITS + sum(b.axon_in_bits() for b in tbl.blocks)
        fp.axon_in_entries = sum(b.entry_count() for b in tbl.blocks)
        fp.weight_bits = sum(r.bits for r in tbl.weight_runs)
        fp.weight_bits += sum(len(b.pairs) * b.width for b in tbl.blocks if b.ctype == "2*")
        fp.weight_bits += 16 * len(tbl.plastic_post)
        # Baselines, from the decoded synapse lists of every source row.
        sources = 0
        max_width = 0
        unique_lists: set[tuple] = set()
        for index, blk in enumerate(tbl.blocks):
            max_width = max(max_width, blk.width)
            for r in range(blk.rows):
                neurons, weights, _ = tbl.resolve(index, blk.base + r)
                k = len(neurons)
                fp.synapses += k
                fp.normal_index_bits += k * (blk.width + NEURON_BITS)
                fp.normal_index_weight_bits += k * blk.width
                sources += 1
                key = (blk.width, tuple(neurons.tolist()), tuple(weights.tolist()))
                if key not in unique_lists:
                    unique_lists.add(key)
                    fp.population_index_bits += k * (blk.width + NEURON_BITS)
                fp.population_index_bits += POINTER_BITS
        fp.crossbar_bits = sources * tbl.neurons * max_width
        result.cores[cid] = fp
        result.total.add(fp)
    return result


def capacity_bounds(D1: int, D2: int, N: int, M: int, R: int | None = None, C: int | None = None) -> dict:
    """Maximum fan-in / fan-out per core and per chip for each connectivity scheme."""
    for name, v in (("D1", D1), ("D2", D2), ("N", N), ("M", M)):
        if v <= 0:
            raise ValueError(f"{name} must be positive")
    R = D1 if R is None else R
    C = D2 if C is None else C
    fan_out = (D2 - N) * N
    if N > D2 or fan_out < 0:
        warnings.warn(f"N={N} exceeds fan-out depth D2={D2}; fan-out bound reported as 0", stacklevel=2)
        fan_out = 0
    return {
        "darwin3": {
            "fan_in_per_core": (D1 - 1) * N,
            "fan_out_per_core": fan_out,
            "fan_in_per_chip": (D1 - 1) * M * N,
            "fan_out_per_chip": fan_out * N,
        },
        "crossbar": {"fan_in_per_core": C, "fan_out_per_core": R},
        "normal_index": {"fan_in_per_core": D1, "fan_out_per_core": D2},
        "synaptic_expansion": {"fan_in_per_core": D1, "fan_out_per_core": D2 * M},
        "population_index": {"fan_in_per_core": D1 * N, "fan_out_per_core": D2},
    }
