"""Placement of populations onto cores and lowering to core images."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import fixed
from ..connectivity.tables import (
    DEFAULT_OFFSET_BITS,
    ConnectivityError,
    Geometry,
    TableBuilder,
    Tables,
)
from ..core.neuron_core import NREC_COLS, STATE_INDEX, CoreConfig, params_array
from ..models.templates import BANK_SLOTS, get_template, program_writes
from .netdesc import NetworkDescription, conv_kernel, conv_slots, expand, projection_rng
from .quantize import QuantizationReport, quantize_params, quantize_weights


class MappingError(ValueError):
    pass


@dataclass(frozen=True)
class FabricConfig:
    width: int = 24
    height: int = 24
    chips: int = 1
    neurons_per_core: int = 4096
    instruction_depth: int = 256
    axon_in_depth: int = 1 << 13  # linkers, one per axon-in index
    axon_in_entries: int = (1 << 16) - 1
    axon_out_entries: int = (1 << 16) - 1
    weight_bits: int = 1 << 22
    synapse_depth: int = 1 << 16  # plastic synapse slots

    def __post_init__(self):
        if self.width < 1 or self.height < 1 or self.chips < 1:
            raise ValueError("fabric dimensions and chip count must be positive")
        if not 1 <= self.neurons_per_core <= 4096:
            raise ValueError("neurons per core must be in 1..4096")

    @classmethod
    def parse(cls, text: str, **kw) -> "FabricConfig":
        """From ``WxH`` or ``WxH,chips``."""
        try:
            dims, _, chips = text.partition(",")
            w, h = (int(v) for v in dims.lower().split("x"))
            return cls(w, h, int(chips) if chips else 1, **kw)
        except ValueError:
            raise ValueError(f"fabric must look like WxH or WxH,chips (got {text!r})") from None

    def core_slots(self):
        """Usable ``(chip, x, y)`` in placement order; each chip's (0,0) is its management node."""
        for chip in range(self.chips):
            for y in range(self.height):
                for x in range(self.width):
                    if (x, y) != (0, 0):
                        yield chip, x, y

    @property
    def capacity(self) -> int:
        return self.chips * (self.width * self.height - 1)

    def global_coord(self, chip: int, x: int, y: int) -> tuple[int, int]:
        # chips form a row, each attached east of the previous one
        return chip * self.width + x, y


@dataclass(frozen=True)
class PlacedSlice:
    core: int
    chip: int
    x: int
    y: int
    start: int
    count: int


@dataclass
class CoreImage:
    core: int
    chip: int
    x: int
    y: int
    X: int
    Y: int
    population: str
    start: int
    config: CoreConfig
    state: np.ndarray  # (neurons, NREC_COLS) raw
    syn_ls: np.ndarray  # (plastic synapses, 10) raw
    axon_in: object
    axon_out: object

    @property
    def neurons(self) -> int:
        return self.config.neurons

    def build_core(self, strict: bool = False, impl=None):
        from ..core.neuron_core import NeuronCore

        return NeuronCore(self.config, self.axon_in, self.axon_out, coord=(self.X, self.Y), strict=strict,
                          initial_state=self.state, impl=impl, initial_syn_ls=self.syn_ls)


@dataclass
class MappedNetwork:
    fabric: FabricConfig
    placement: dict[str, list[PlacedSlice]]
    images: list[CoreImage]
    offset_bits: int
    frac_bits: int
    quantization: QuantizationReport = field(default_factory=QuantizationReport)
    tables: Tables | None = None

    def locate(self, population: str, index: int) -> tuple[int, int]:
        for s in self.placement[population]:
            if s.start <= index < s.start + s.count:
                return s.core, index - s.start
        raise IndexError(f"{population}[{index}] is not placed")

    def owner(self, core: int, neuron: int) -> tuple[str, int]:
        img = self.images[core]
        return img.population, img.start + neuron


# -- per-population setup (shared with the reference simulator) --------------
@dataclass
class PopulationSetup:
    bank: np.ndarray
    state: np.ndarray
    syn_ls: np.ndarray  # one row, broadcast to every plastic synapse
    inference: tuple[int, ...]
    learning: tuple[int, ...]
    synapse_model: str
    report: QuantizationReport


def population_setup(net: NetworkDescription, name: str) -> PopulationSetup:
    pop = net.populations[name]
    f = net.frac_bits
    tmpl = get_template(pop.template)
    values = tmpl.resolve(pop.params)
    learn = get_template(pop.learning) if pop.learning else None
    learn_values = learn.resolve(pop.learning_params) if learn else {}
    if learn:
        clash = {k for k in learn_values if k in values and k in BANK_SLOTS}
        if clash:
            raise MappingError(f"population {name}: {pop.template} and {pop.learning} both use {sorted(clash)}")
        per_neuron = {k for k in learn_values if k.startswith("TR")}
        writes = program_writes(tmpl.words())
        clobbered = per_neuron & writes
        if clobbered:
            raise MappingError(f"population {name}: {pop.template} overwrites {sorted(clobbered)} "
                               f"that {pop.learning} keeps per neuron")
        for need in learn.requires:
            if need not in writes:
                raise MappingError(f"population {name}: {pop.learning} needs {need!r}, which "
                                   f"{pop.template} does not maintain")
    everything = {**values, **learn_values}
    raw, report = quantize_params(everything, f)
    bank = params_array({k: v for k, v in raw.items() if k in BANK_SLOTS})
    state = np.zeros((pop.size, NREC_COLS), dtype=np.int32)
    state[:, STATE_INDEX["v"]] = raw.get("V0", 0)
    for k, v in raw.items():
        if k in STATE_INDEX:
            state[:, STATE_INDEX[k]] = v
    for var, spec in pop.init.items():
        if var not in STATE_INDEX:
            raise MappingError(f"population {name}: unknown state variable {var!r}")
        col = STATE_INDEX[var]
        items = spec.items() if isinstance(spec, dict) else [("*", spec)]
        for idx, value in sorted(items, key=lambda kv: kv[0] != "*"):
            r = fixed.to_raw(float(value), f, name=f"{name}.{var}")
            if idx == "*":
                state[:, col] = r
            elif 0 <= idx < pop.size:
                state[idx, col] = r
            else:
                raise MappingError(f"population {name}: init.{var}[{idx}] out of range")
    syn_ls = np.zeros(10, dtype=np.int32)
    for k, v in raw.items():
        if k.startswith("LS"):
            syn_ls[int(k[2:])] = v
    inference = tmpl.words()
    learning = learn.words(pop.layer.lower() if pop.layer else None) if learn else ()
    return PopulationSetup(bank, state, syn_ls, inference, learning, tmpl.synapse_model, report)


@dataclass
class ProjectionSynapses:
    src: np.ndarray
    dst: np.ndarray
    raw: np.ndarray
    width: int
    plastic: bool
    error: float
    conv_kernel_raw: np.ndarray | None = None


def projection_synapses(net: NetworkDescription, index: int) -> ProjectionSynapses:
    proj = net.projections[index]
    width = 16 if proj.plastic else proj.width
    if proj.pattern == "conv2d" and not proj.plastic:
        kernel = conv_kernel(proj, projection_rng(net, index))
        kraw, _, err = quantize_weights(kernel.ravel(), width, net.frac_bits, name=proj.name)
        kraw = kraw.reshape(kernel.shape)
        from .netdesc import conv_pairs

        pairs = list(conv_pairs(proj.conv))
        src = np.array([p[0] for p in pairs], dtype=np.int64)
        dst = np.array([p[1] for p in pairs], dtype=np.int64)
        raw = np.array([kraw[p[2], p[3], p[4], p[5]] for p in pairs], dtype=np.int64)
        return ProjectionSynapses(src, dst, raw, width, False, err, kraw)
    triples = expand(net, index)
    src = np.array([t[0] for t in triples], dtype=np.int64)
    dst = np.array([t[1] for t in triples], dtype=np.int64)
    raw, _, err = quantize_weights([t[2] for t in triples], width, net.frac_bits, name=proj.name)
    return ProjectionSynapses(src, dst, raw, width, proj.plastic, err)


# -- placement -----------------------------------------------------------------
def place(net: NetworkDescription, fabric: FabricConfig) -> dict[str, list[PlacedSlice]]:
    npc = fabric.neurons_per_core
    need = sum(-(-p.size // npc) for p in net.populations.values())
    if need > fabric.capacity:
        raise MappingError(f"network needs {need} cores; fabric {fabric.width}x{fabric.height}x{fabric.chips} "
                           f"offers {fabric.capacity}")
    slots = fabric.core_slots()
    placement: dict[str, list[PlacedSlice]] = {}
    core = 0
    for pop in net.populations.values():
        out = []
        for start in range(0, pop.size, npc):
            chip, x, y = next(slots)
            out.append(PlacedSlice(core, chip, x, y, start, min(npc, pop.size - start)))
            core += 1
        placement[pop.name] = out
    return placement


def _offset_bits(fabric: FabricConfig, placement) -> int:
    coords = [fabric.global_coord(s.chip, s.x, s.y) for slices in placement.values() for s in slices]
    if not coords:
        return DEFAULT_OFFSET_BITS
    span = max(max(c[0] for c in coords) - min(c[0] for c in coords),
               max(c[1] for c in coords) - min(c[1] for c in coords))
    bits = DEFAULT_OFFSET_BITS
    while span >= 1 << (bits - 1):
        bits += 1
    return bits


def map_network(net: NetworkDescription, fabric: FabricConfig | None = None) -> MappedNetwork:
    """Place, quantize and lower a description; deterministic for identical input."""
    fabric = fabric or FabricConfig()
    net.validate()
    placement = place(net, fabric)
    offset_bits = _offset_bits(fabric, placement)
    geo = Geometry()
    slice_of: dict[int, tuple[str, PlacedSlice]] = {}
    for name, slices in placement.items():
        for s in slices:
            X, Y = fabric.global_coord(s.chip, s.x, s.y)
            geo.add(s.core, X, Y, s.count)
            slice_of[s.core] = (name, s)
    report = QuantizationReport()
    npc = fabric.neurons_per_core
    builder = TableBuilder(geo, offset_bits)
    for index, proj in enumerate(net.projections):
        syn = projection_synapses(net, index)
        report.errors[f"{proj.name}.weights"] = syn.error
        src_slices, dst_slices = placement[proj.source], placement[proj.target]
        sc = np.array([src_slices[i].core for i in (syn.src // npc)], dtype=np.int64) if len(syn.src) else syn.src
        dc = np.array([dst_slices[i].core for i in (syn.dst // npc)], dtype=np.int64) if len(syn.dst) else syn.dst
        conns = list(zip(sc.tolist(), (syn.src % npc).tolist(), dc.tolist(), (syn.dst % npc).tolist(),
                         syn.raw.tolist()))
        padded = _conv_hints(net, index, syn, placement, npc) if syn.conv_kernel_raw is not None else None
        try:
            builder.add_projection(conns, width=syn.width, plastic=syn.plastic, padded=padded)
        except ConnectivityError as exc:
            raise MappingError(f"projection {proj.name}: {exc}") from None
    try:
        tables = builder.build()
    except ConnectivityError as exc:
        raise MappingError(str(exc)) from None
    images = []
    setups = {}
    for core in sorted(slice_of):
        name, s = slice_of[core]
        if name not in setups:
            setups[name] = population_setup(net, name)
            report.merge(setups[name].report, f"{name}.")
        st = setups[name]
        tin = tables.axon_in[core]
        plastic = len(tin.plastic_post)
        mode = "both" if st.learning and plastic else "inference"
        cfg = CoreConfig(s.count, st.inference, st.learning if mode == "both" else (), mode, st.bank.copy(),
                         net.frac_bits, st.synapse_model)
        img = CoreImage(core, s.chip, s.x, s.y, *fabric.global_coord(s.chip, s.x, s.y), name, s.start, cfg,
                        st.state[s.start:s.start + s.count].copy(),
                        np.tile(st.syn_ls, (plastic, 1)).astype(np.int32), tin, tables.axon_out[core])
        _check_capacity(img, fabric)
        images.append(img)
    return MappedNetwork(fabric, placement, images, offset_bits, net.frac_bits, report, tables)


def _conv_hints(net, index, syn: ProjectionSynapses, placement, npc) -> dict:
    """Per (source, destination core): kernel-ordered slots so equal kernels share one weight run."""
    proj = net.projections[index]
    c = proj.conv
    kraw = syn.conv_kernel_raw
    src_slices, dst_slices = placement[proj.source], placement[proj.target]
    ohw = c.out_height * c.out_width
    hints = {}
    hw = c.height * c.width
    for s in range(c.in_size):
        ci, rem = divmod(s, hw)
        y, x = divmod(rem, c.width)
        slots = list(conv_slots(c, y, x))
        sc = src_slices[s // npc].core
        cores = {dst_slices[(co * ohw + t) // npc].core for co, _, _, t in slots if t is not None}
        for dc in cores:
            lst = []
            for co, ky, kx, t in slots:
                w = int(kraw[co, ci, ky, kx])
                g = None if t is None else co * ohw + t
                if g is not None and dst_slices[g // npc].core == dc:
                    lst.append((g % npc, w))
                else:
                    lst.append((None, w))
            hints[(sc, s % npc, dc)] = lst
    return hints


def _check_capacity(img: CoreImage, fabric: FabricConfig) -> None:
    where = f"core {img.core} at ({img.X},{img.Y})"
    words = len(img.config.inference_program) + len(img.config.learning_program)
    if words > fabric.instruction_depth:
        raise MappingError(f"{where}: instruction memory needs {words} words, depth {fabric.instruction_depth}")
    tin = img.axon_in
    if len(tin.linkers) > fabric.axon_in_depth:
        raise MappingError(f"{where}: axon-in needs {len(tin.linkers)} linkers, depth {fabric.axon_in_depth}")
    entries = sum(b.entry_count() for b in tin.blocks)
    if entries > fabric.axon_in_entries:
        raise MappingError(f"{where}: axon-in needs {entries} entries, depth {fabric.axon_in_entries}")
    if len(img.axon_out.info) > fabric.axon_out_entries:
        raise MappingError(f"{where}: axon-out needs {len(img.axon_out.info)} entries, "
                           f"depth {fabric.axon_out_entries}")
    wbits = sum(r.bits for r in tin.weight_runs) + sum(len(b.pairs) * b.width for b in tin.blocks)
    if wbits > fabric.weight_bits:
        raise MappingError(f"{where}: weight memory needs {wbits} bits, depth {fabric.weight_bits}")
    if len(tin.plastic_post) > fabric.synapse_depth:
        raise MappingError(f"{where}: synapse memory needs {len(tin.plastic_post)} slots, "
                           f"depth {fabric.synapse_depth}")
