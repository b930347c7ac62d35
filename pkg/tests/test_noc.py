import itertools

import pytest

import harness
from darwinsim.noc import (
    DeadlockError,
    Fabric,
    NocError,
    SpikePacket,
    UndeliverableError,
    expected_latency,
    format_trace_line,
    route_decision,
)
from darwinsim.noc.mesh import E, L, N, S, W


def send(fab, src, dst, **kw):
    p = fab.inject(SpikePacket(dst[0] - src[0], dst[1] - src[1], 0, 0, src=src), **kw)
    return p


def test_route_decision_is_dimension_ordered():
    assert route_decision(2, -1) == E
    assert route_decision(-1, 5) == W
    assert route_decision(0, -1) == S
    assert route_decision(0, 3) == N
    assert route_decision(0, 0) == L


def test_path_order_x_then_y():
    fab = Fabric(8, 8)
    p = send(fab, (1, 3), (3, 2))
    visited = []
    while fab.busy:
        fab.step()
        if not visited or visited[-1] != p.pos:
            visited.append(p.pos)
    assert visited == [(1, 3), (2, 3), (3, 3), (3, 2)]


@pytest.mark.parametrize("routers,cycles", [(1, 6), (3, 14), (5, 22)])
def test_latency_formula(routers, cycles):
    assert expected_latency(routers) == cycles
    fab = Fabric(8, 8)
    p = send(fab, (1, 1), (1 + routers - 1, 1))
    fab.run_until_idle()
    assert p.routers == routers
    assert p.latency == cycles


def test_latency_all_pairs_8x8():
    fab = Fabric(24, 24)
    nodes = list(itertools.product(range(1, 9), range(8)))
    for src, dst in itertools.product(nodes, nodes):
        p = send(fab, src, dst)
        fab.run_until_idle()
        hops = abs(dst[0] - src[0]) + abs(dst[1] - src[1])
        assert p.latency == expected_latency(hops + 1), (src, dst)


def test_contention_costs_one_slot():
    fab = Fabric(8, 8)
    a = send(fab, (1, 1), (2, 1))
    b = send(fab, (2, 0), (2, 1))
    fab.run_until_idle()
    assert sorted([a.latency, b.latency]) == [10, 11]
    # round-robin: the pointer moves past the last input served (W), so S is favoured next
    assert b.latency < a.latency
    assert fab._routers[(2, 1)].rr[L] == (W + 1) % 5


def test_chip_boundary_crossing():
    fab = Fabric(24, 24)
    assert fab.attach_chip("east") == 1
    src = fab.global_coord(0, 23, 5)
    dst = fab.global_coord(1, 0, 5)
    p = send(fab, src, dst)
    fab.run_until_idle()
    assert p.boundary_crossings == 1
    assert p.latency == expected_latency(2)
    assert fab.locate(*p.pos) == (1, 0, 5)
    with pytest.raises(NocError, match="occupied"):
        fab.attach_chip("east")


def test_unattached_edge_is_undeliverable():
    fab = Fabric(24, 24)
    send(fab, (23, 5), (24, 5))
    with pytest.raises(UndeliverableError):
        fab.run_until_idle()
    lenient = Fabric(24, 24)
    lenient.strict = False
    send(lenient, (23, 5), (24, 5))
    assert lenient.run_until_idle() == []
    assert len(lenient.faults) == 1 and not lenient.busy


def test_two_chip_all_pairs_delivered_once():
    fab = Fabric(3, 2)
    fab.attach_chip("east")
    nodes = list(itertools.product(range(6), range(2)))
    pkts = [send(fab, s, d) for s, d in itertools.product(nodes, nodes)]
    got = fab.run_until_idle()
    assert sorted(id(p) for p in got) == sorted(id(p) for p in pkts)
    assert all(p.dx == 0 and p.dy == 0 for p in pkts)


def test_deterministic_schedule():
    def run():
        fab = Fabric(6, 6, queue_depth=2)
        for i in range(200):
            s = (i * 7 % 6, i * 5 % 6)
            d = (i * 11 % 6, i * 13 % 6)
            fab.inject(SpikePacket(d[0] - s[0], d[1] - s[1], i, i, src=s))
        return [(p.sub, p.deliver_cycle) for p in fab.run_until_idle()]

    assert run() == run()


def test_stress_delivers_exactly_once():
    ok, faults, _ = harness.noc_stress(10_000, seed=1)
    assert ok and faults == []


def test_stall_watchdog():
    fab = Fabric(4, 4, stall_budget=5)
    fab._router((2, 0)).occupancy[W] = fab.queue_depth  # phantom traffic holds the port
    send(fab, (1, 0), (3, 0))
    with pytest.raises(DeadlockError):
        for _ in range(100):
            fab.step()


def test_trace_line_and_errors():
    fab = Fabric(4, 4)
    p = send(fab, (1, 0), (2, 0))
    fab.run_until_idle()
    assert format_trace_line(fab, p) == f"{p.deliver_cycle} 0/1/0/0 0/2/0 0"
    with pytest.raises(NocError):
        send(fab, (9, 9), (0, 0))
    with pytest.raises(ValueError):
        fab.attach_chip("up")
    assert fab.is_management(0, 0) and not fab.is_management(1, 0)
