"""Mapping metrics: program sizes, memory footprints and per-tick cycle estimates."""

from __future__ import annotations

from ..connectivity.footprint import CoreFootprint, memory_footprint
from ..core.costs import program_cycle_cost
from .mapping import MappedNetwork


def report_metrics(mapped: MappedNetwork) -> dict:
    """Per-core and total metrics of a mapping.

    Memory figures come in three baselines besides the compressed encoding:
    a dense crossbar, a normal index (target id plus weight per synapse) and
    a population index (identical synapse lists stored once).  The cycle
    estimate assumes straight-line programs: every neuron runs the inference
    program once per tick and every plastic synapse runs the learning program.
    """
    fp = memory_footprint(mapped.tables) if mapped.tables is not None and mapped.images else None
    cores = []
    total = CoreFootprint()
    totals = {"neurons": 0, "instructions": 0, "cycles_per_tick": 0, "plastic_synapses": 0}
    for img in mapped.images:
        cfg = img.config
        plastic = len(img.axon_in.plastic_post)
        inf, learn = len(cfg.inference_program), len(cfg.learning_program)
        cycles = cfg.neurons * program_cycle_cost(cfg.inference_program)
        if cfg.mode == "both":
            cycles += plastic * program_cycle_cost(cfg.learning_program)
        f = fp.cores[img.core] if fp else CoreFootprint()
        total.add(f)
        cores.append({
            "core": img.core, "chip": img.chip, "x": img.x, "y": img.y, "population": img.population,
            "neurons": cfg.neurons, "inference_instructions": inf, "learning_instructions": learn,
            "plastic_synapses": plastic, "cycles_per_tick": cycles, "memory": f.as_dict(),
        })
        totals["neurons"] += cfg.neurons
        totals["instructions"] += inf + learn
        totals["cycles_per_tick"] += cycles
        totals["plastic_synapses"] += plastic
    memory = total.as_dict()
    ratio = (memory["normal_index_weight_bits"] / memory["weight_bits"]) if memory["weight_bits"] else 0.0
    return {
        "cores": cores,
        "total": {**totals, "cores": len(cores), "memory": memory, "weight_compression_vs_normal_index": ratio,
                  "max_quantization_error": mapped.quantization.max_error},
    }
