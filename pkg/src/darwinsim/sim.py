"""Lockstep multi-core simulation of mapped core images.

A tick has three phases.  Packets that arrived during the previous tick are
handed to their destination cores, every core then advances once (cores are
independent within a tick, so they may run on a thread pool), and finally
the emitted packets are routed.  With ``noc="cycle"`` routing runs the
cycle-stepped mesh until it drains; ``noc="analytic"`` skips the mesh and
charges the uncongested latency instead.  Either way a packet is consumed at
the start of the next tick, so results do not depend on the routing mode or
on the number of workers.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .mapper.mapping import CoreImage, FabricConfig
from .models.energy import EnergyCoefficients, EnergyReport, estimate_energy
from .noc.mesh import Fabric, SpikePacket, expected_latency, format_trace_line


@dataclass
class NocStats:
    packets: int = 0
    total_latency: int = 0
    max_latency: int = 0
    cycles: int = 0  # summed over ticks: cycles until the mesh drained

    @property
    def mean_latency(self) -> float:
        return self.total_latency / self.packets if self.packets else 0.0

    def as_dict(self) -> dict:
        return {"packets": self.packets, "mean_latency": self.mean_latency, "max_latency": self.max_latency,
                "drain_cycles": self.cycles}


@dataclass
class SimulationResult:
    ticks: int
    trace: list[str] = field(default_factory=list)
    packet_trace: list[str] = field(default_factory=list)
    counters: dict = field(default_factory=dict)
    noc: dict = field(default_factory=dict)
    energy: EnergyReport | None = None
    faults: list[str] = field(default_factory=list)


class Simulator:
    def __init__(self, images: list[CoreImage], fabric: FabricConfig, workers: int = 1, strict: bool = False,
                 noc: str = "cycle", impl=None, record_packets: bool = False):
        if noc not in ("cycle", "analytic"):
            raise ValueError("noc must be 'cycle' or 'analytic'")
        if workers < 1:
            raise ValueError("workers must be positive")
        self.images = images
        self.fabric_config = fabric
        self.workers = workers
        self.strict = strict
        self.noc_mode = noc
        self.record_packets = record_packets
        self.cores = [img.build_core(strict=strict, impl=impl) for img in images]
        self._by_coord = {(img.X, img.Y): i for i, img in enumerate(images)}
        self.mesh = Fabric(fabric.width, fabric.height)
        self.mesh.strict = strict
        for chip in range(1, fabric.chips):
            self.mesh.attach_chip("east", chip - 1)
        self.tick = 0
        self.trace: list[str] = []
        self.packet_trace: list[str] = []
        self.noc_stats = NocStats()
        self.undeliverable: list[str] = []
        self._inbox: list[tuple[int, int, int]] = []
        self._pool = ThreadPoolExecutor(workers) if workers > 1 else None

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def set_reward(self, raw: int) -> None:
        for c in self.cores:
            c.reward = int(raw)

    def step(self) -> list[np.ndarray]:
        """Advance one tick; returns the fired local neurons of every core."""
        for core, index, sub in self._inbox:
            self.cores[core].receive_spike(index, sub)
        self._inbox = []
        if self._pool is None:
            emitted = [c.advance_tick() for c in self.cores]
        else:
            emitted = list(self._pool.map(lambda c: c.advance_tick(), self.cores))
        fired = []
        for img, core in zip(self.images, self.cores):
            idx = np.flatnonzero(core.fired)
            fired.append(idx)
            self.trace.extend(f"{self.tick} {img.chip} {img.x} {img.y} {n}" for n in idx.tolist())
        self._route(emitted)
        self.tick += 1
        return fired

    def _route(self, emitted) -> None:
        stats = self.noc_stats
        if self.noc_mode == "analytic":
            for i, out in enumerate(emitted):
                img = self.images[i]
                for n, dx, dy, idx in out:
                    dst = self._by_coord.get((img.X + dx, img.Y + dy))
                    if dst is None:
                        self._lost(f"tick {self.tick}: no core at offset ({dx},{dy}) from ({img.X},{img.Y})")
                        continue
                    lat = expected_latency(abs(dx) + abs(dy) + 1)
                    stats.packets += 1
                    stats.total_latency += lat
                    stats.max_latency = max(stats.max_latency, lat)
                    self._inbox.append((dst, idx, n))
            return
        mesh = self.mesh
        mesh.reset_clock()
        for i, out in enumerate(emitted):
            img = self.images[i]
            for n, dx, dy, idx in out:
                mesh.inject(SpikePacket(dx, dy, idx, n, src=(img.X, img.Y), tick=self.tick), cycle=0)
        delivered = mesh.run_until_idle()
        stats.cycles += mesh.cycle
        for pkt in delivered:
            dst = self._by_coord.get(pkt.pos)
            if dst is None:
                self._lost(f"tick {self.tick}: packet from {pkt.src} reached {pkt.pos}, which hosts no core")
                continue
            stats.packets += 1
            stats.total_latency += pkt.latency
            stats.max_latency = max(stats.max_latency, pkt.latency)
            if self.record_packets:
                self.packet_trace.append(f"{self.tick} " + format_trace_line(mesh, pkt))
            self._inbox.append((dst, pkt.axon_in, pkt.sub))

    def _lost(self, message: str) -> None:
        from .noc.mesh import UndeliverableError

        self.undeliverable.append(message)
        if self.strict:
            raise UndeliverableError(message)

    def run(self, ticks: int) -> None:
        for _ in range(ticks):
            self.step()

    # -- reporting ----------------------------------------------------------
    @property
    def neurons(self) -> int:
        return sum(img.neurons for img in self.images)

    @property
    def sops(self) -> int:
        return sum(c.sops for c in self.cores)

    def counters(self) -> dict:
        per_core = []
        totals: dict[str, int] = {}
        for img, core in zip(self.images, self.cores):
            d = core.counter_dict()
            per_core.append({"core": img.core, "chip": img.chip, "x": img.x, "y": img.y,
                             "population": img.population, **d})
            for k, v in d.items():
                totals[k] = totals.get(k, 0) + v
        return {"cores": per_core, "total": totals}

    def faults(self) -> list[str]:
        out = [str(f) for c in self.cores for f in c.faults]
        return out + list(self.mesh.faults) + self.undeliverable

    def energy(self, coeffs: EnergyCoefficients | None = None) -> EnergyReport:
        return estimate_energy(coeffs or EnergyCoefficients(), self.neurons, self.sops, float(self.tick))

    def result(self, coeffs: EnergyCoefficients | None = None) -> SimulationResult:
        return SimulationResult(self.tick, list(self.trace), list(self.packet_trace), self.counters(),
                                self.noc_stats.as_dict(), self.energy(coeffs), self.faults())

    def synapse_weights(self) -> list[tuple[int, int, int, int, int]]:
        """Current plastic weights as ``(src_core, src_neuron, dst_core, dst_neuron, raw)``."""
        out = []
        for img, core in zip(self.images, self.cores):
            tin = img.axon_in
            for slot, (sc, sn) in enumerate(tin.plastic_pre):
                out.append((sc, sn, img.core, int(tin.plastic_post[slot]), int(core.syn_w[slot])))
        return out


def run_images(images, fabric: FabricConfig, ticks: int, workers: int = 1, strict: bool = False,
               noc: str = "cycle", coeffs: EnergyCoefficients | None = None,
               record_packets: bool = False) -> SimulationResult:
    with Simulator(images, fabric, workers, strict, noc, record_packets=record_packets) as sim:
        sim.run(ticks)
        return sim.result(coeffs)
