"""Cycle-stepped mesh network with relative-offset XY routing.

Each node owns a router with five input queues (N, S, E, W, local).  A
packet spends ``link_cycles`` on every link, including the injection link
from the source core and the ejection link into the destination core, and
``router_cycles`` inside every router it crosses.  A path through ``N``
routers therefore takes ``router_cycles*N + link_cycles*(N+1)`` cycles when
uncongested.

Chips are tiles of ``width x height`` nodes placed on a chip grid; packets
address nodes by offset only, so crossing a chip edge needs no translation.
Within a cycle every router decides from the state at the start of the cycle
(queue slots freed in cycle ``c`` become usable in ``c+1``), which makes the
result independent of the order routers are visited in.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

N, S, E, W, L = 0, 1, 2, 3, 4
PORT_NAMES = ("N", "S", "E", "W", "L")
_STEP = {N: (0, 1), S: (0, -1), E: (1, 0), W: (-1, 0)}
_OPPOSITE = {N: S, S: N, E: W, W: E}
DIRECTIONS = {"north": N, "south": S, "east": E, "west": W}


class NocError(RuntimeError):
    pass


class UndeliverableError(NocError):
    pass


class DeadlockError(NocError):
    pass


@dataclass
class SpikePacket:
    dx: int
    dy: int
    axon_in: int
    sub: int
    src: tuple[int, int] = (0, 0)  # global node coordinates
    tick: int = 0
    seq: int = 0
    inject_cycle: int = 0
    pos: tuple[int, int] = (0, 0)
    routers: int = 0
    boundary_crossings: int = 0
    deliver_cycle: int = -1

    @property
    def latency(self) -> int:
        return self.deliver_cycle - self.inject_cycle


def route_decision(dx: int, dy: int) -> int:
    """Output port for a packet with remaining offset ``(dx, dy)``: X first, then Y."""
    if dx > 0:
        return E
    if dx < 0:
        return W
    if dy > 0:
        return N
    if dy < 0:
        return S
    return L


def expected_latency(routers: int, link_cycles: int = 2, router_cycles: int = 2) -> int:
    return router_cycles * routers + link_cycles * (routers + 1)


@dataclass
class _Router:
    queues: list = field(default_factory=lambda: [deque() for _ in range(5)])
    occupancy: list = field(default_factory=lambda: [0] * 5)  # queued + in flight towards us
    rr: list = field(default_factory=lambda: [0] * 5)  # per output port: next input to favour


class Fabric:
    def __init__(self, width: int = 24, height: int = 24, queue_depth: int = 4, link_cycles: int = 2,
                 router_cycles: int = 2, stall_budget: int = 10_000):
        if width < 1 or height < 1 or queue_depth < 1:
            raise ValueError("fabric dimensions and queue depth must be positive")
        self.width = width
        self.height = height
        self.queue_depth = queue_depth
        self.link_cycles = link_cycles
        self.router_cycles = router_cycles
        self.stall_budget = stall_budget
        self.chips: dict[int, tuple[int, int]] = {0: (0, 0)}
        self._chip_at: dict[tuple[int, int], int] = {(0, 0): 0}
        self.cycle = 0
        self._routers: dict[tuple[int, int], _Router] = {}
        self._active: set[tuple[int, int]] = set()  # nodes with queued packets
        self._node_chip: dict[tuple[int, int], int | None] = {}
        self._hops: dict = {}  # (node, out) -> (next node, next chip, crosses a chip boundary)
        self._inject: dict[tuple[int, int], deque] = {}
        self._flights: dict[int, list] = {}
        self._frees: list = []
        self._in_network = 0
        self._seq = 0
        self._idle_cycles = 0
        self.faults: list[str] = []
        self.strict = True

    # -- topology ---------------------------------------------------------
    def attach_chip(self, direction: str, from_chip: int = 0) -> int:
        """Place a new chip next to ``from_chip``; returns its id."""
        if direction not in DIRECTIONS:
            raise ValueError(f"unknown direction {direction!r}")
        if from_chip not in self.chips:
            raise NocError(f"no chip {from_chip}")
        sx, sy = _STEP[DIRECTIONS[direction]]
        cx, cy = self.chips[from_chip]
        pos = (cx + sx, cy + sy)
        if pos in self._chip_at:
            raise NocError(f"{direction} of chip {from_chip} is already occupied by chip {self._chip_at[pos]}")
        cid = len(self.chips)
        self.chips[cid] = pos
        self._chip_at[pos] = cid
        self._node_chip.clear()
        self._hops.clear()
        return cid

    def locate(self, X: int, Y: int) -> tuple[int, int, int] | None:
        """Global node -> (chip, local x, local y), or None off the fabric."""
        cid = self._chip_at.get((X // self.width, Y // self.height))
        if cid is None:
            return None
        return cid, X % self.width, Y % self.height

    def global_coord(self, chip: int, x: int, y: int) -> tuple[int, int]:
        cx, cy = self.chips[chip]
        return cx * self.width + x, cy * self.height + y

    def has_node(self, X: int, Y: int) -> bool:
        return self.locate(X, Y) is not None

    def is_management(self, X: int, Y: int) -> bool:
        loc = self.locate(X, Y)
        return loc is not None and loc[1] == 0 and loc[2] == 0

    # -- traffic ----------------------------------------------------------
    def _router(self, node) -> _Router:
        r = self._routers.get(node)
        if r is None:
            r = self._routers[node] = _Router()
        return r

    def inject(self, packet: SpikePacket, cycle: int | None = None) -> SpikePacket:
        """Queue a packet at its source node's injection port."""
        if not self.has_node(*packet.src):
            raise NocError(f"source node {packet.src} is not on the fabric")
        packet.inject_cycle = self.cycle if cycle is None else cycle
        packet.pos = packet.src
        packet.seq = self._seq
        self._seq += 1
        self._inject.setdefault(packet.src, deque()).append(packet)
        self._in_network += 1
        return packet

    @property
    def busy(self) -> bool:
        return self._in_network > 0

    def _fault(self, message: str, exc=NocError):
        self.faults.append(message)
        if self.strict:
            raise exc(message)

    def _chip_of(self, node) -> int | None:
        try:
            return self._node_chip[node]
        except KeyError:
            loc = self.locate(*node)
            chip = self._node_chip[node] = None if loc is None else loc[0]
            return chip

    def _hop(self, node, out):
        key = (node, out)
        try:
            return self._hops[key]
        except KeyError:
            sx, sy = _STEP[out]
            nxt = (node[0] + sx, node[1] + sy)
            chip = self._chip_of(nxt)
            hop = self._hops[key] = (nxt, chip, chip is not None and chip != self._chip_of(node))
            return hop

    def step(self) -> list[SpikePacket]:
        """Advance one cycle; returns packets delivered in this cycle."""
        c = self.cycle
        delivered = []
        moved = False
        routers, active, flights = self._routers, self._active, self._flights
        link, depth = self.link_cycles, self.queue_depth
        for node, port, pkt in flights.pop(c, ()):
            if port is None:
                pkt.deliver_cycle = c
                delivered.append(pkt)
                self._in_network -= 1
                continue
            routers[node].queues[port].append((c + self.router_cycles, pkt))
            active.add(node)
        # injection: core -> local input link, bounded by the local queue depth
        for node in sorted(self._inject):
            q = self._inject[node]
            if q and q[0].inject_cycle <= c:
                r = self._router(node)
                if r.occupancy[L] < depth:
                    pkt = q.popleft()
                    r.occupancy[L] += 1
                    flights.setdefault(c + link, []).append((node, L, pkt))
                    moved = True
            if not q:
                del self._inject[node]
        frees = []
        for node in sorted(active):
            r = routers[node]
            queues = r.queues
            ready = []
            for port in range(5):
                q = queues[port]
                if q:
                    t, head = q[0]
                    if t <= c:
                        ready.append((port, route_decision(head.dx, head.dy)))
            if not ready:
                continue
            # every input holds one head and so contends for exactly one output
            if len(ready) == 1:
                groups = ((ready[0][1], (ready[0][0],)),)
            else:
                groups = []
                for out in sorted({o for _, o in ready}):
                    start = r.rr[out]
                    groups.append((out, sorted((p for p, o in ready if o == out), key=lambda p: (p - start) % 5)))
            for out, contenders in groups:
                for inp in contenders:
                    pkt = queues[inp][0][1]
                    if out == L:
                        queues[inp].popleft()
                        frees.append((r, inp))
                        pkt.routers += 1
                        flights.setdefault(c + link, []).append((node, None, pkt))
                    else:
                        nxt, next_chip, crosses = self._hop(node, out)
                        if next_chip is None:
                            queues[inp].popleft()
                            frees.append((r, inp))
                            self._in_network -= 1
                            moved = True
                            self._fault(
                                f"undeliverable packet {pkt.seq}: no node at {nxt} (remaining offset {pkt.dx},{pkt.dy})",
                                UndeliverableError,
                            )
                            break
                        nr = self._router(nxt)
                        in_port = _OPPOSITE[out]
                        if nr.occupancy[in_port] >= depth:
                            continue
                        queues[inp].popleft()
                        frees.append((r, inp))
                        nr.occupancy[in_port] += 1
                        if crosses:
                            pkt.boundary_crossings += 1
                        sx, sy = _STEP[out]
                        pkt.dx -= sx
                        pkt.dy -= sy
                        pkt.pos = nxt
                        pkt.routers += 1
                        flights.setdefault(c + link, []).append((nxt, in_port, pkt))
                    r.rr[out] = (inp + 1) % 5
                    moved = True
                    break
            if not any(queues):
                active.discard(node)
        for r, port in frees:
            r.occupancy[port] -= 1
        if delivered:
            moved = True
        self.cycle += 1
        if self._in_network and not moved and not flights:
            self._idle_cycles += 1
            if self._idle_cycles > self.stall_budget:
                self._fault(f"deadlock: {self._in_network} packets stalled for {self._idle_cycles} cycles",
                            DeadlockError)
                self._idle_cycles = 0
        else:
            self._idle_cycles = 0
        return delivered

    def _next_event(self) -> int:
        """Earliest cycle at which anything can happen; cycles before it are pure waiting."""
        if self.cycle in self._flights:
            return self.cycle
        t = min(self._flights, default=self.cycle)
        for q in self._inject.values():
            if q:
                t = min(t, q[0].inject_cycle)
        for node in self._active:
            for q in self._routers[node].queues:
                if q:
                    t = min(t, q[0][0])
        return t

    def run_until_idle(self, max_cycles: int | None = None) -> list[SpikePacket]:
        out = []
        start = self.cycle
        while self._in_network:
            nxt = self._next_event()
            if nxt > self.cycle:
                self.cycle = nxt
            if max_cycles is not None and self.cycle - start >= max_cycles:
                raise NocError(f"network not idle after {max_cycles} cycles")
            out.extend(self.step())
        return out

    def reset_clock(self) -> None:
        """Restart cycle numbering; only valid when the network is idle."""
        if self._in_network:
            raise NocError("cannot reset the clock with packets in flight")
        self.cycle = 0
        self._flights.clear()


def advance_network(fabric: Fabric) -> list[SpikePacket]:
    return fabric.step()


def format_trace_line(fabric: Fabric, pkt: SpikePacket, neuron: int | None = None) -> str:
    sc, sx, sy = fabric.locate(*pkt.src)
    dc, dx, dy = fabric.locate(*pkt.pos)
    nrn = pkt.sub if neuron is None else neuron
    return f"{pkt.deliver_cycle} {sc}/{sx}/{sy}/{nrn} {dc}/{dx}/{dy} {pkt.axon_in}"
