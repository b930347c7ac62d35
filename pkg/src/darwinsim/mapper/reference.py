"""Direct simulation of a network description without placement or tables.

Each population is advanced as one block of neurons by the same kernels the
cores use, and spikes are delivered projection by projection straight from
the expanded synapse lists.  A spike emitted in tick ``t`` is applied at the
start of tick ``t+1``, which is also how the mapped simulator treats network
delivery, so the two must agree spike for spike.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import _pykernel, kernel
from ..core.costs import decode_table
from ..core.neuron_core import CoreConfig
from .mapping import population_setup, projection_synapses
from .netdesc import NetworkDescription


@dataclass
class _Pop:
    name: str
    size: int
    config: CoreConfig
    inference: tuple
    learning: tuple
    nrec: np.ndarray
    pending: np.ndarray
    fired: np.ndarray
    syn_w: np.ndarray
    syn_post: np.ndarray
    syn_ls: np.ndarray
    pre_flag: np.ndarray
    learn: bool


@dataclass
class _Proj:
    source: str
    target: str
    # CSR by source neuron: targets and either raw weights or plastic slots
    indptr: np.ndarray
    targets: np.ndarray
    weights: np.ndarray
    slots: np.ndarray | None


class ReferenceSimulator:
    def __init__(self, net: NetworkDescription, impl=None):
        net.validate()
        self.net = net
        self.impl = impl or kernel
        self.tick = 0
        self.reward = 0
        self.sops = 0
        self.counters = np.zeros(4, dtype=np.int64)
        self.fault = np.zeros(4, dtype=np.int64)
        self.scratch = np.zeros(_pykernel.SCRATCH_WORDS, dtype=np.int32)
        plastic: dict[str, list] = {name: [] for name in net.populations}
        self.projections: list[_Proj] = []
        for index, proj in enumerate(net.projections):
            syn = projection_synapses(net, index)
            order = np.lexsort((syn.dst, syn.src))
            src, dst, raw = syn.src[order], syn.dst[order], syn.raw[order]
            ns = net.populations[proj.source].size
            indptr = np.zeros(ns + 1, dtype=np.int64)
            np.add.at(indptr, src + 1, 1)
            indptr = np.cumsum(indptr)
            slots = None
            if syn.plastic:
                base = sum(len(p[0]) for p in plastic[proj.target])
                slots = np.arange(base, base + len(dst), dtype=np.int64)
                plastic[proj.target].append((dst, raw))
            self.projections.append(_Proj(proj.source, proj.target, indptr, dst.astype(np.int32), raw, slots))
        self.pops: dict[str, _Pop] = {}
        for name, pop in net.populations.items():
            st = population_setup(net, name)
            cfg = CoreConfig(0, st.inference, st.learning, "both" if st.learning else "inference", st.bank,
                             net.frac_bits, st.synapse_model)
            post = np.concatenate([d for d, _ in plastic[name]]) if plastic[name] else np.zeros(0, np.int64)
            w = np.concatenate([r for _, r in plastic[name]]) if plastic[name] else np.zeros(0, np.int64)
            m = len(post)
            self.pops[name] = _Pop(
                name, pop.size, cfg, decode_table(st.inference), decode_table(st.learning),
                st.state.copy(), np.zeros(pop.size, np.int64), np.zeros(pop.size, np.uint8),
                w.astype(np.int32), post.astype(np.int32), np.tile(st.syn_ls, (m, 1)).astype(np.int32),
                np.zeros(m, np.uint8), bool(st.learning) and m > 0)
        self._last = {name: np.zeros(0, dtype=np.int64) for name in net.populations}

    def _deliver(self) -> None:
        for proj in self.projections:
            fired = self._last[proj.source]
            if not len(fired):
                continue
            tgt = self.pops[proj.target]
            for s in fired.tolist():
                a, b = proj.indptr[s], proj.indptr[s + 1]
                if a == b:
                    continue
                neurons = proj.targets[a:b]
                if proj.slots is not None:
                    sl = proj.slots[a:b]
                    weights = tgt.syn_w[sl].astype(np.int64)
                    tgt.pre_flag[sl] = 1
                else:
                    weights = proj.weights[a:b]
                np.add.at(tgt.pending, neurons, weights)
                self.sops += b - a

    def step(self) -> dict[str, np.ndarray]:
        """Advance one tick; returns fired neuron indices per population."""
        self._deliver()
        out = {}
        for name, p in self.pops.items():
            cfg = p.config
            lo, hi = cfg.exp_range
            table, costs = p.inference
            self.impl.run_inference(table, costs, p.nrec, cfg.params, p.pending,
                                    int(cfg.synapse_model == "cuba_delta"), cfg.frac_bits, cfg.exp_lut, lo, hi,
                                    self.scratch, cfg.budget, p.fired, self.counters, self.fault)
            if p.learn:
                table, costs = p.learning
                self.impl.run_learning(table, costs, p.nrec, cfg.params, p.syn_ls, p.syn_w, p.syn_post,
                                       p.pre_flag, p.fired, self.reward, cfg.frac_bits, cfg.exp_lut, lo, hi,
                                       self.scratch, cfg.budget, self.counters, self.fault)
            else:
                p.pre_flag[:] = 0
            out[name] = np.flatnonzero(p.fired).astype(np.int64)
        self._last = out
        self.tick += 1
        return out

    def run(self, ticks: int) -> list[dict[str, np.ndarray]]:
        return [self.step() for _ in range(ticks)]

    def state(self, population: str, column: int = 0) -> np.ndarray:
        return self.pops[population].nrec[:, column].copy()


def reference_spikes(net: NetworkDescription, ticks: int) -> list[tuple[int, str, int]]:
    """``(tick, population, neuron)`` for every spike, ordered by tick, population, neuron."""
    sim = ReferenceSimulator(net)
    out = []
    for t in range(ticks):
        for name, idx in sim.step().items():
            out.extend((t, name, int(i)) for i in idx)
    return out
