"""Acceptance suite: one check per criterion, each printing a single pass/fail line.

A criterion passes only when its check holds and it finishes inside its time
budget.  Run with ``pytest tests/test_acceptance.py -v`` or directly as a script.
"""

import itertools
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))
import harness  # noqa: E402
from darwinsim import fixed  # noqa: E402
from darwinsim.connectivity import Geometry, build_tables, candidate_blocks, expand_dense  # noqa: E402
from darwinsim.isa import Illegal, Opcode, assemble, decode, encode, is_legal  # noqa: E402
from darwinsim.mapper import FabricConfig, map_network, report_metrics  # noqa: E402
from darwinsim.mapper.netdesc import Conv2D, NetworkDescription  # noqa: E402
from darwinsim.maze import bfs_distances, path_is_valid, random_maze, solve  # noqa: E402
from darwinsim.models import EnergyCoefficients, estimate_energy, get_template  # noqa: E402
from darwinsim.models.energy import marginal_energy_per_sop  # noqa: E402
from darwinsim.models.naive import density_table  # noqa: E402
from darwinsim.noc import Fabric, SpikePacket, expected_latency  # noqa: E402
from darwinsim.sim import Simulator  # noqa: E402

GOLDEN = {"lif": 2, "qif": 4, "expif": 6, "izhikevich": 5, "stdp": 4, "triplet_stdp": 6, "rstdp": 5, "sdsp": 13,
          "stp": 5}
_cache: dict = {}


def report(number: int, title: str, budget: float, check):
    t0 = time.perf_counter()
    ok, detail = check()
    elapsed = time.perf_counter() - t0
    ok = bool(ok) and elapsed < budget
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail} ({elapsed:.2f} s, limit {budget:g} s)"
    print(line, flush=True)
    return ok, line


# -- checks ---------------------------------------------------------------------
def isa_goldens():
    counts = {name: len(assemble(get_template(name).listing).words) for name in GOLDEN}
    upt = [decode(w) for w in assemble(get_template("triplet_stdp").listing).words]
    upt = [i for i in upt if not isinstance(i, Illegal) and i.op is Opcode.UPTWT]
    low = [encode(i) & 0x7FF for i in upt]
    terms = [(i["m"], i.hot("n")) for i in upt]
    want_terms = [(0, ("LS0", "LS5", "LS6")), (1, ("LS2", "LS3", "LS6")), (2, ("LS2", "LS4", "LS6"))]
    ok = counts == GOLDEN and low == [0x10C, 0x264, 0x454] and terms == want_terms
    return ok, f"counts {counts == GOLDEN}, UPTWT words {[hex(x) for x in low]}"


def isa_roundtrip():
    bad = 0
    legal = 0
    for w in range(1 << 16):
        d = decode(w)
        if isinstance(d, Illegal):
            bad += (w >> 11) not in (30, 31)
        elif is_legal(w):
            legal += 1
            bad += encode(d) != w
    return bad == 0, f"{legal} legal words re-encode exactly, {bad} mismatches"


def dynamics_fidelity():
    ticks = 100
    bound = 2.0 ** (1 - fixed.DEFAULT_FRAC_BITS) * ticks
    worst, sats = 0.0, 0
    for i in range(100):
        err, s = harness.neuron_fidelity("adlif" if i % 2 == 0 else "coba", 1000 + i)
        worst, sats = max(worst, err), sats + s
    plastic = all(harness.plasticity_match(rule, seed) for rule in ("stdp", "triplet_stdp", "rstdp")
                  for seed in range(4))
    ok = worst <= bound and sats == 0 and plastic
    return ok, f"max error {worst:.4f} <= {bound:g}, saturations {sats}, plasticity bit-exact {plastic}"


def connectivity_equivalence():
    identity = minimal = 0
    for seed in range(500):
        a, b = harness.check_topology(seed)
        identity += a
        minimal += b
    return identity == minimal == 500, f"identity {identity}/500, minimal {minimal}/500"


def compression():
    net = NetworkDescription(seed=5)
    net.add_population("inp", 64, "lif")
    net.add_population("out", 144, "lif")
    net.add_projection("conv", "inp", "out", "conv2d", conv=Conv2D(1, 8, 8, kernel=3, stride=1, channels=4),
                       width=8, weights=("uniform", -1.0, 1.0))
    mapped = map_network(net, FabricConfig(4, 4))
    synapses = len(expand_dense(mapped.tables))
    weight_bits = report_metrics(mapped)["total"]["memory"]["weight_bits"]
    ratio = synapses * 8 / weight_bits

    geo = Geometry()
    geo.add(0, 1, 0, 1)
    geo.add(1, 2, 0, 4096)
    conns = [(0, 0, 1, t, 1 + t % 5) for t in range(4096)]
    tbl = build_tables(conns, geo, width=4).axon_in[1]
    explicit = candidate_blocks([{c[3]: c[4] for c in conns}], 0, 4096, 4, False)["explicit"]
    entries = sum(len(r) for r in explicit.row_neurons)
    ok = synapses == 1296 and ratio >= 5 and len(tbl.linkers) == 1 and entries == 4096 * len(tbl.linkers)
    return ok, f"conv ratio {ratio:.1f}x over {synapses} synapses, one-to-all linkers {len(tbl.linkers)}"


def noc_latency():
    fab = Fabric(8, 8)
    wrong = 0
    nodes = list(itertools.product(range(8), range(8)))
    for src, dst in itertools.product(nodes, nodes):
        p = fab.inject(SpikePacket(dst[0] - src[0], dst[1] - src[1], 0, 0, src=src))
        fab.run_until_idle()
        n = abs(dst[0] - src[0]) + abs(dst[1] - src[1]) + 1
        wrong += p.latency != expected_latency(n) or p.latency != 2 * n + 2 * (n + 1)
    once, faults, _ = harness.noc_stress(100_000, seed=11)
    ok = wrong == 0 and once and not faults
    return ok, f"{len(nodes) ** 2 - wrong}/{len(nodes) ** 2} pairs exact, 1e5 packets delivered once {once}"


def _networks():
    if "nets" not in _cache:
        _cache["nets"] = [harness.random_network(seed) for seed in range(20)]
    return _cache["nets"]


def mapping_equivalence():
    matches, traces = 0, []
    for net in _networks():
        ok, trace = harness.mapped_vs_reference(net, ticks=100)
        matches += ok
        traces.append(trace)
    _cache["traces"] = traces
    sizes = [sum(p.size for p in net.populations.values()) for net in _networks()]
    return matches == 20, f"{matches}/20 networks spike-for-spike ({min(sizes)}..{max(sizes)} neurons)"


def energy():
    c = EnergyCoefficients(P_I=1, P_B=2, P_N=0.5, P_S=0.1)
    closed = estimate_energy(c, 10, 100).total == (1 + 2 + 0.5 * 10) + 0.1 * 100 == 18
    zero = estimate_energy(c, 0, 0).total == c.P_I + c.P_B
    marginal = marginal_energy_per_sop(EnergyCoefficients(), n=1000, s=10 ** 6)
    ok = closed and zero and abs(marginal - 5.47) < 1e-9
    return ok, f"closed form {closed and zero}, marginal {marginal:.4g} pJ/SOP"


def maze():
    agree = valid = unreachable = 0
    cases = [(15, s) for s in range(100)] + [(63, s) for s in range(10)]
    for size, seed in cases:
        m = random_maze(size, seed)
        res = solve(m)
        reachable = m.goal in bfs_distances(m)
        agree += res.reachable == reachable
        valid += (not res.reachable) or path_is_valid(m, res.path)
        unreachable += not res.reachable
    n = len(cases)
    return agree == valid == n, f"reachability {agree}/{n}, valid paths {valid}/{n}, unreachable {unreachable}"


def code_density():
    table = density_table()
    ok = all(row["darwin"] == GOLDEN[name] and 2 * row["darwin"] <= row["naive"] for name, row in table.items())
    ok = ok and set(table) == set(GOLDEN)
    worst = min(row["naive"] / row["darwin"] for row in table.values())
    return ok, f"smallest naive/compact ratio {worst:.2f}x over {len(table)} models"


def _mapped_trace(mapped, workers):
    with Simulator(mapped.images, mapped.fabric, workers=workers) as sim:
        sim.run(100)
        return "".join(line + "\n" for line in sim.trace).encode()


def determinism():
    # criterion 7 already ran every network with one worker; reuse its traces when present
    ones = _cache.get("traces")
    ones = ["".join(line + "\n" for line in t).encode() for t in ones] if ones else None
    same = 0
    for i, net in enumerate(_networks()):
        mapped = map_network(net, FabricConfig(6, 6, neurons_per_core=256))
        one = ones[i] if ones else _mapped_trace(mapped, 1)
        same += one == _mapped_trace(mapped, 4)
    return same == 20, f"{same}/20 traces byte-identical for workers 1 and 4"


CRITERIA = [
    (1, "ISA goldens", 1, isa_goldens),
    (2, "encode/decode roundtrip", 1, isa_roundtrip),
    (3, "dynamics fidelity", 10, dynamics_fidelity),
    (4, "connectivity equivalence", 30, connectivity_equivalence),
    (5, "compression", 5, compression),
    (6, "NoC latency", 60, noc_latency),
    (7, "mapping equivalence", 60, mapping_equivalence),
    (8, "energy model", 1, energy),
    (9, "maze", 120, maze),
    (10, "code density", 1, code_density),
    (11, "determinism", 60, determinism),
]


@pytest.mark.parametrize("number,title,budget,check", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_criterion(number, title, budget, check, capsys):
    with capsys.disabled():
        ok, line = report(number, title, budget, check)
    assert ok, line


if __name__ == "__main__":
    results = [report(*c)[0] for c in CRITERIA]
    print(f"{sum(results)}/{len(results)} criteria pass")
    sys.exit(0 if all(results) else 1)
