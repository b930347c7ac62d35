"""Compressed axon-out / axon-in connectivity tables.

Spikes leave a core through its axon-out table: every local neuron owns a
linker ``{info_address, sub_index}`` that points at a run of info entries
``{dx, dy, axon_in_index, LF}`` terminated by ``LF == 1``.  Neurons with
identical target lists share one run and are told apart by the sub-index
carried in the packet.

At the destination the axon-in index selects a linker ``{address, type}``
and a block describing the local targets.  Sources that reach exactly the
same set of local neurons and sit at consecutive local indices form one
block; a source's row inside the block is ``sub_index - base``.  Block types:

``1*``       every local neuron is a target; one weight row per source.
``2*``       weights do not depend on the source; ``{neuron, weight}`` pairs.
``3*``       one shared index list (valid bit + neuron) and a weight row per source.
``4*``       targets form a contiguous range ``{start, count}``; weight row per source.
``explicit`` per-source lists of ``(neuron, weight)`` pairs.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .weights import WIDTH_CODES, WeightArray, WeightError, choose_shift

CASE_ORDER = ("1*", "4*", "3*", "2*", "explicit")
CASE_CODES = {name: i for i, name in enumerate(CASE_ORDER)}

# Entry field widths in bits.
NEURON_BITS = 12
AXON_IN_INDEX_BITS = 13
COUNT_BITS = 13
ADDR_BITS = 16
WIDTH_CODE_BITS = 3
SHIFT_BITS = 4
CTYPE_BITS = 3
DEFAULT_OFFSET_BITS = 6
NULL_ADDR = (1 << ADDR_BITS) - 1

AXON_OUT_LINKER_BITS = ADDR_BITS + NEURON_BITS
AXON_IN_LINKER_BITS = ADDR_BITS + CTYPE_BITS
ROW_HEADER_BITS = NEURON_BITS + NEURON_BITS + ADDR_BITS + WIDTH_CODE_BITS + SHIFT_BITS


class ConnectivityError(ValueError):
    pass


@dataclass(frozen=True)
class CoreSlot:
    x: int
    y: int
    neurons: int


@dataclass
class Geometry:
    """Global mesh coordinates and neuron counts of every participating core."""

    cores: dict[int, CoreSlot] = field(default_factory=dict)

    def add(self, core: int, x: int, y: int, neurons: int) -> None:
        self.cores[core] = CoreSlot(x, y, neurons)

    def at(self, x: int, y: int) -> int | None:
        for cid, slot in self.cores.items():
            if slot.x == x and slot.y == y:
                return cid
        return None


@dataclass
class AxonInBlock:
    ctype: str
    base: int
    rows: int
    width: int
    signed: bool
    shift: int
    plastic: bool = False
    start: int = 0
    count: int = 0
    index: tuple[int, ...] = ()  # 3*: neuron per slot, -1 marks a null slot
    pairs: tuple[tuple[int, int], ...] = ()  # 2*: (neuron, quantized weight)
    row_neurons: tuple[tuple[int, ...], ...] = ()  # explicit
    weights: tuple[int, ...] = ()  # quantized, row-major (before dedup)
    weight_addr: int = 0  # weight run (static) or first plastic slot
    n_core: int = 0

    def columns(self) -> int:
        if self.ctype == "1*":
            return self.n_core
        if self.ctype == "4*":
            return self.count
        if self.ctype == "3*":
            return len(self.index)
        return 0

    def axon_in_bits(self) -> int:
        t = self.ctype
        if t == "1*":
            return ROW_HEADER_BITS
        if t == "4*":
            return ROW_HEADER_BITS + NEURON_BITS + COUNT_BITS
        if t == "3*":
            return ROW_HEADER_BITS + COUNT_BITS + len(self.index) * (1 + NEURON_BITS)
        if t == "2*":
            return COUNT_BITS + WIDTH_CODE_BITS + SHIFT_BITS + len(self.pairs) * NEURON_BITS
        return ROW_HEADER_BITS + self.rows * COUNT_BITS + sum(len(r) for r in self.row_neurons) * NEURON_BITS

    def weight_count(self) -> int:
        if self.ctype == "2*":
            return len(self.pairs)
        if self.ctype == "explicit":
            return sum(len(r) for r in self.row_neurons)
        return self.rows * self.columns()

    def weight_bits(self) -> int:
        return self.weight_count() * self.width

    def footprint(self) -> int:
        return self.axon_in_bits() + self.weight_bits()

    def entry_count(self) -> int:
        """Number of info entries this block occupies (for linker addresses)."""
        if self.ctype in ("1*", "4*"):
            return 1
        if self.ctype == "3*":
            return 1 + len(self.index)
        if self.ctype == "2*":
            return 1 + len(self.pairs)
        return 1 + sum(len(r) for r in self.row_neurons)


@dataclass
class AxonInTable:
    neurons: int
    linkers: list[tuple[int, int]] = field(default_factory=list)  # (info address, case code)
    blocks: list[AxonInBlock] = field(default_factory=list)
    weight_runs: list[WeightArray] = field(default_factory=list)
    plastic_post: list[int] = field(default_factory=list)  # slot -> local neuron
    plastic_init: list[int] = field(default_factory=list)  # slot -> raw weight
    plastic_pre: list[tuple[int, int]] = field(default_factory=list)  # slot -> (source core, source neuron)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.linkers)

    def resolve(self, index: int, sub: int) -> tuple[np.ndarray, np.ndarray, np.ndarray | None]:
        """``(neurons, raw weights, plastic slots or None)`` for one arriving spike."""
        key = (index, sub)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        if not 0 <= index < len(self.blocks):
            raise ConnectivityError(f"axon-in index {index} not present")
        blk = self.blocks[index]
        row = sub - blk.base
        if blk.ctype != "2*" and not 0 <= row < blk.rows:
            raise ConnectivityError(f"sub-index {sub} outside block {index} (base {blk.base}, rows {blk.rows})")
        if blk.ctype == "2*":
            neurons = np.array([p[0] for p in blk.pairs], dtype=np.int32)
            qw = np.array([p[1] for p in blk.pairs], dtype=np.int64)
            slots = None
        else:
            if blk.ctype == "1*":
                cols = np.arange(blk.n_core, dtype=np.int32)
                offset, ncols = row * blk.n_core, blk.n_core
            elif blk.ctype == "4*":
                cols = np.arange(blk.start, blk.start + blk.count, dtype=np.int32)
                offset, ncols = row * blk.count, blk.count
            elif blk.ctype == "3*":
                cols = np.array(blk.index, dtype=np.int32)
                offset, ncols = row * len(blk.index), len(blk.index)
            else:
                cols = np.array(blk.row_neurons[row], dtype=np.int32)
                offset = sum(len(r) for r in blk.row_neurons[:row])
                ncols = len(cols)
            valid = cols >= 0
            if blk.plastic:
                slots = np.arange(blk.weight_addr + offset, blk.weight_addr + offset + ncols, dtype=np.int64)[valid]
                qw = np.array([self.plastic_init[s] for s in slots], dtype=np.int64)
            else:
                run = self.weight_runs[blk.weight_addr].unpack()
                qw = np.array(run[offset:offset + ncols], dtype=np.int64)[valid]
                slots = None
            neurons = cols[valid]
        weights = (qw << blk.shift).astype(np.int64) if not blk.plastic else qw
        out = (neurons, weights, slots)
        self._cache[key] = out
        return out


@dataclass
class AxonOutTable:
    neurons: int
    linkers: list[tuple[int, int]] = field(default_factory=list)  # (info address or NULL, sub-index)
    info: list[tuple[int, int, int, int]] = field(default_factory=list)  # (dx, dy, axon_in_index, LF)

    def lookup(self, neuron: int) -> list[tuple[int, int, int]]:
        if not 0 <= neuron < len(self.linkers):
            raise ConnectivityError(f"neuron {neuron} has no axon-out linker")
        addr, _ = self.linkers[neuron]
        if addr == NULL_ADDR:
            return []
        out = []
        while True:
            if addr >= len(self.info):
                raise ConnectivityError(f"dangling axon-out info address {addr}")
            dx, dy, idx, lf = self.info[addr]
            out.append((dx, dy, idx))
            if lf:
                return out
            addr += 1


@dataclass
class Tables:
    geometry: Geometry
    axon_out: dict[int, AxonOutTable]
    axon_in: dict[int, AxonInTable]
    offset_bits: int = DEFAULT_OFFSET_BITS


@dataclass
class _Pending:
    src_core: int
    dst_core: int
    sources: tuple[int, ...]
    block: AxonInBlock
    plastic_weights: tuple[int, ...] = ()  # raw weights for plastic blocks


def _quantize(values, width: int, plastic: bool) -> tuple[list[int], int, bool]:
    if plastic:
        return [int(v) for v in values], 0, True
    shift, signed = choose_shift(values, width)
    return [int(v) >> shift for v in values], shift, signed


def candidate_blocks(rows: list[dict[int, int]], base: int, n_core: int, width: int, plastic: bool,
                     ) -> dict[str, AxonInBlock]:
    """Every applicable encoding of one source group (rows share a target set)."""
    targets = sorted(rows[0])
    nrows = len(rows)
    flat = [r[t] for r in rows for t in targets]
    q, shift, signed = _quantize(flat, width, plastic)
    common = dict(base=base, rows=nrows, width=width, signed=signed, shift=shift, plastic=plastic, n_core=n_core)
    out: dict[str, AxonInBlock] = {}
    if targets == list(range(n_core)):
        out["1*"] = AxonInBlock("1*", weights=tuple(q), **common)
    if targets and targets == list(range(targets[0], targets[-1] + 1)):
        out["4*"] = AxonInBlock("4*", start=targets[0], count=len(targets), weights=tuple(q), **common)
    out["3*"] = AxonInBlock("3*", index=tuple(targets), weights=tuple(q), **common)
    ncols = len(targets)
    if not plastic and all(q[i * ncols:(i + 1) * ncols] == q[:ncols] for i in range(nrows)):
        out["2*"] = AxonInBlock("2*", pairs=tuple(zip(targets, q[:ncols])), **common)
    out["explicit"] = AxonInBlock("explicit", row_neurons=tuple(tuple(targets) for _ in range(nrows)),
                                  weights=tuple(q), **common)
    return out


def choose_block(candidates: Mapping[str, AxonInBlock]) -> AxonInBlock:
    """Minimal footprint, ties broken in ``CASE_ORDER``."""
    best = None
    for name in CASE_ORDER:
        blk = candidates.get(name)
        if blk is not None and (best is None or blk.footprint() < best.footprint()):
            best = blk
    assert best is not None
    return best


class TableBuilder:
    """Accumulates projections and emits per-core axon tables."""

    def __init__(self, geometry: Geometry, offset_bits: int = DEFAULT_OFFSET_BITS, dedup: bool = True):
        self.geometry = geometry
        self.offset_bits = offset_bits
        self.dedup = dedup
        self._pending: list[_Pending] = []

    def add_projection(self, connections: Iterable[tuple[int, int, int, int, int]], width: int = 16,
                       plastic: bool = False, padded: Mapping | None = None) -> None:
        """Add ``(src_core, src_neuron, dst_core, dst_neuron, raw_weight)`` connections.

        ``padded`` optionally maps ``(src_core, src_neuron, dst_core)`` to an ordered
        slot list ``[(neuron or None, raw_weight), ...]``.  Such sources become
        single-row ``3*`` blocks using exactly that slot order, so sources whose
        slot weights coincide share one weight run (used for convolutions).
        """
        if plastic and width != 16:
            raise ConnectivityError("plastic projections use 16-bit weights")
        buckets: dict[tuple[int, int], dict[int, dict[int, int]]] = defaultdict(lambda: defaultdict(dict))
        for sc, sn, dc, dn, w in connections:
            for core, idx in ((sc, sn), (dc, dn)):
                if core not in self.geometry.cores:
                    raise ConnectivityError(f"unknown core {core}")
                if not 0 <= idx < self.geometry.cores[core].neurons:
                    raise ConnectivityError(f"neuron {idx} outside core {core}")
            row = buckets[(sc, dc)][sn]
            if dn in row and row[dn] != w:
                raise ConnectivityError(f"conflicting weights for {sc}:{sn} -> {dc}:{dn}")
            row[dn] = int(w)
        padded = padded or {}
        for (sc, dc), rows in sorted(buckets.items()):
            n_core = self.geometry.cores[dc].neurons
            srcs = sorted(rows)
            i = 0
            while i < len(srcs):
                s = srcs[i]
                slot_list = padded.get((sc, s, dc))
                if slot_list is not None:
                    self._pending.append(_Pending(sc, dc, (s,), self._padded_block(s, slot_list, rows[s], width, n_core)))
                    i += 1
                    continue
                tset = set(rows[s])
                j = i + 1
                while (j < len(srcs) and srcs[j] == srcs[j - 1] + 1 and (sc, srcs[j], dc) not in padded
                       and set(rows[srcs[j]]) == tset):
                    j += 1
                group = srcs[i:j]
                try:
                    blk = choose_block(candidate_blocks([rows[g] for g in group], s, n_core, width, plastic))
                except WeightError as exc:
                    raise ConnectivityError(f"{sc}:{s} -> core {dc}: {exc}") from None
                raw = tuple(rows[g][t] for g in group for t in sorted(tset)) if plastic else ()
                self._pending.append(_Pending(sc, dc, tuple(group), blk, raw))
                i = j

    @staticmethod
    def _padded_block(src: int, slots, actual: dict[int, int], width: int, n_core: int) -> AxonInBlock:
        listed = {n: w for n, w in slots if n is not None}
        if listed != actual:
            raise ConnectivityError(f"padded slot list for source {src} does not match its connections")
        q, shift, signed = _quantize([w for _, w in slots], width, False)
        index = tuple(-1 if n is None else n for n, _ in slots)
        return AxonInBlock("3*", base=src, rows=1, width=width, signed=signed, shift=shift,
                           index=index, weights=tuple(q), n_core=n_core)

    def build(self) -> Tables:
        geo = self.geometry
        axon_in = {cid: AxonInTable(slot.neurons) for cid, slot in geo.cores.items()}
        run_ids: dict[int, dict[tuple, int]] = {cid: {} for cid in geo.cores}
        addr_next = {cid: 0 for cid in geo.cores}
        # per source core, per source neuron: ordered (dst_core, axon_in_index)
        fanout: dict[int, dict[int, list[tuple[int, int]]]] = {cid: defaultdict(list) for cid in geo.cores}
        for p in self._pending:
            tbl = axon_in[p.dst_core]
            blk = p.block
            index = len(tbl.blocks)
            if index >= 1 << AXON_IN_INDEX_BITS:
                raise ConnectivityError(f"core {p.dst_core}: axon-in index space exhausted")
            if blk.plastic:
                blk.weight_addr = len(tbl.plastic_post)
                cols = blk.row_neurons[0] if blk.ctype == "explicit" else (
                    tuple(range(blk.n_core)) if blk.ctype == "1*" else
                    tuple(range(blk.start, blk.start + blk.count)) if blk.ctype == "4*" else blk.index)
                for r in range(blk.rows):
                    tbl.plastic_post.extend(cols)
                    tbl.plastic_pre.extend([(p.src_core, p.sources[r])] * len(cols))
                tbl.plastic_init.extend(p.plastic_weights)
            elif blk.ctype != "2*":
                key = (blk.width, blk.signed, blk.weights)
                rid = run_ids[p.dst_core].get(key) if self.dedup else None
                if rid is None:
                    rid = len(tbl.weight_runs)
                    tbl.weight_runs.append(WeightArray.pack(blk.weights, blk.width, blk.signed))
                    run_ids[p.dst_core][key] = rid
                blk.weight_addr = rid
            tbl.linkers.append((addr_next[p.dst_core], CASE_CODES[blk.ctype]))
            addr_next[p.dst_core] += blk.entry_count()
            tbl.blocks.append(blk)
            for s in p.sources:
                fanout[p.src_core][s].append((p.dst_core, index))
        limit = 1 << (self.offset_bits - 1)
        axon_out = {}
        for cid, slot in geo.cores.items():
            out = AxonOutTable(slot.neurons)
            shared: dict[tuple, int] = {}
            for n in range(slot.neurons):
                targets = fanout[cid].get(n)
                if not targets:
                    out.linkers.append((NULL_ADDR, n))
                    continue
                entries = []
                for dc, idx in targets:
                    d = geo.cores[dc]
                    dx, dy = d.x - slot.x, d.y - slot.y
                    if not (-limit <= dx < limit and -limit <= dy < limit):
                        raise ConnectivityError(
                            f"offset ({dx},{dy}) from core {cid} exceeds {self.offset_bits}-bit signed range")
                    entries.append((dx, dy, idx))
                key = tuple(entries)
                addr = shared.get(key)
                if addr is None:
                    addr = len(out.info)
                    for k, (dx, dy, idx) in enumerate(entries):
                        out.info.append((dx, dy, idx, int(k == len(entries) - 1)))
                    shared[key] = addr
                out.linkers.append((addr, n))
            axon_out[cid] = out
        return Tables(geo, axon_out, axon_in, self.offset_bits)


def build_tables(connections, geometry: Geometry, width: int = 16, plastic: bool = False,
                 offset_bits: int = DEFAULT_OFFSET_BITS) -> Tables:
    builder = TableBuilder(geometry, offset_bits)
    builder.add_projection(connections, width=width, plastic=plastic)
    return builder.build()


def resolve_incoming(table: AxonInTable, index: int, sub: int) -> list[tuple[int, int]]:
    neurons, weights, _ = table.resolve(index, sub)
    return [(int(n), int(w)) for n, w in zip(neurons, weights)]


def lookup_targets(table: AxonOutTable, neuron: int) -> list[tuple[tuple[int, int], int]]:
    return [((dx, dy), idx) for dx, dy, idx in table.lookup(neuron)]


def expand_dense(tables: Tables) -> dict[tuple[int, int, int, int], int]:
    """``(src_core, src_neuron, dst_core, dst_neuron) -> raw weight``, summed over blocks."""
    geo = tables.geometry
    dense: dict[tuple[int, int, int, int], int] = defaultdict(int)
    for cid, out in tables.axon_out.items():
        slot = geo.cores[cid]
        for n, (addr, sub) in enumerate(out.linkers):
            if addr == NULL_ADDR:
                continue
            for dx, dy, idx in out.lookup(n):
                dc = geo.at(slot.x + dx, slot.y + dy)
                if dc is None:
                    raise ConnectivityError(f"offset ({dx},{dy}) from core {cid} reaches no core")
                neurons, weights, _ = tables.axon_in[dc].resolve(idx, sub)
                for t, w in zip(neurons.tolist(), weights.tolist()):
                    dense[(cid, n, dc, t)] += w
    return dict(dense)


def dump(tables: Tables) -> str:
    """Human-readable listing, one decoded entry per line."""
    lines = []
    for cid in sorted(tables.axon_out):
        out = tables.axon_out[cid]
        slot = tables.geometry.cores[cid]
        lines.append(f"core {cid} ({slot.x},{slot.y}) neurons={slot.neurons}")
        for n, (addr, sub) in enumerate(out.linkers):
            if addr != NULL_ADDR:
                lines.append(f"  out-linker {n}: addr={addr} sub={sub}")
        for a, (dx, dy, idx, lf) in enumerate(out.info):
            lines.append(f"  out-info {a}: dx={dx:+d} dy={dy:+d} axon_in={idx} lf={lf}")
        tbl = tables.axon_in[cid]
        for i, ((addr, code), blk) in enumerate(zip(tbl.linkers, tbl.blocks)):
            desc = f"  in-linker {i}: addr={addr} case={CASE_ORDER[code]} base={blk.base} rows={blk.rows}"
            if blk.ctype == "4*":
                desc += f" start={blk.start} count={blk.count}"
            elif blk.ctype == "3*":
                desc += f" index={list(blk.index)}"
            elif blk.ctype == "2*":
                desc += f" pairs={list(blk.pairs)}"
            elif blk.ctype == "explicit":
                desc += f" rows={[list(r) for r in blk.row_neurons]}"
            kind = "slot" if blk.plastic else "run"
            desc += f" w{blk.width}{'s' if blk.signed else 'u'}<<{blk.shift} {kind}={blk.weight_addr}"
            lines.append(desc)
        for r, run in enumerate(tbl.weight_runs):
            lines.append(f"  weight-run {r}: w{run.width} {run.unpack()}")
    return "\n".join(lines) + ("\n" if lines else "")
