from pathlib import Path

import pytest

from darwinsim.mapper import FabricConfig, map_network
from darwinsim.mapper.netdesc import load_netdesc
from darwinsim.mapper.reference import reference_spikes
from darwinsim.models import EnergyCoefficients
from darwinsim.sim import Simulator, run_images

DEMOS = Path(__file__).resolve().parents[1] / "demos"


def mapped(name, fabric=FabricConfig(4, 4)):
    return map_network(load_netdesc(DEMOS / name), fabric)


def test_zero_ticks_gives_empty_trace():
    m = mapped("ring.net")
    res = run_images(m.images, m.fabric, 0)
    assert res.ticks == 0 and res.trace == [] and res.faults == []
    assert res.energy.sops == 0


def test_ring_trace_matches_reference():
    m = mapped("ring.net")
    net = load_netdesc(DEMOS / "ring.net")
    res = run_images(m.images, m.fabric, 250)
    ref = reference_spikes(net, 250)
    assert [tuple(map(int, line.split()))[::4] for line in res.trace] == [(t, i) for t, _, i in ref]
    assert [t for t, _, _ in ref] == list(range(250))
    assert [i for _, _, i in ref][:102] == list(range(100)) + [0, 1]


def test_energy_uses_neurons_and_sops():
    m = mapped("energy.net")
    c = EnergyCoefficients(P_I=1.0, P_B=2.0, P_N=0.5, P_S=0.25)
    res = run_images(m.images, m.fabric, 10, coeffs=c)
    # 16 always-firing sources, 32 targets each; spikes of the last tick are never delivered
    assert res.counters["total"]["spikes"] == 160
    assert res.energy.sops == 16 * 32 * 9
    assert res.energy.total == pytest.approx((1 + 2 + 0.5 * 48) * 10 + 0.25 * 16 * 32 * 9)


def test_workers_do_not_change_results():
    m = mapped("conv.net")
    one = run_images(m.images, m.fabric, 30, workers=1)
    four = run_images(m.images, m.fabric, 30, workers=4)
    assert one.trace == four.trace
    assert one.counters == four.counters


def test_analytic_noc_matches_cycle_noc_on_spikes():
    m = mapped("conv.net")
    cyc = run_images(m.images, m.fabric, 20, noc="cycle")
    ana = run_images(m.images, m.fabric, 20, noc="analytic")
    assert cyc.trace == ana.trace
    assert cyc.noc["packets"] == ana.noc["packets"]


def test_packet_trace_recorded_on_request():
    m = mapped("energy.net")
    res = run_images(m.images, m.fabric, 3, record_packets=True)
    assert res.packet_trace and all(line.split()[0] in "012" for line in res.packet_trace)
    assert run_images(m.images, m.fabric, 3).packet_trace == []


def test_simulator_argument_checks():
    m = mapped("ring.net")
    with pytest.raises(ValueError):
        Simulator(m.images, m.fabric, workers=0)
    with pytest.raises(ValueError):
        Simulator(m.images, m.fabric, noc="wormhole")
