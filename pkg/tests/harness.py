"""Drivers shared by the module tests and the acceptance suite."""

from __future__ import annotations

import numpy as np

from darwinsim import fixed
from darwinsim.core.neuron_core import STATE_INDEX, CoreConfig, NeuronCore, params_array
from darwinsim.mapper import FabricConfig, NetworkDescription, ReferenceSimulator, map_network
from darwinsim.models import oracles
from darwinsim.models.templates import get_template
from darwinsim.sim import Simulator

F = fixed.DEFAULT_FRAC_BITS


def q(x: float) -> float:
    """Nearest representable value, so oracles see the same parameters as the core."""
    return fixed.to_float(fixed.to_raw(x, F), F)


# -- neuron dynamics ---------------------------------------------------------
_SLOT = {"p0": "IP0", "p1": "IP1", "p2": "IP2", "p3": "IP3", "p4": "IP4", "p5": "IP5", "p6": "IP6",
         "p7": "IP7", "p8": "IP8", "c0": "IC0", "c1": "IC1", "c2": "IC2", "v0": "V0"}


def random_neuron_config(model: str, rng: np.random.Generator) -> tuple[dict, dict, np.ndarray]:
    """``(params, initial state, inputs)`` kept well inside the Q8.8 range.

    Thresholds are out of reach: a spike decision that flips on one rounding
    step is a discontinuity, not accumulated error, and is covered by the
    reset-branch tests instead.
    """
    u = rng.uniform
    p = {"p0": u(0.5, 0.9), "p1": u(0.0, 1.0), "c0": u(-0.2, 0.2), "v0": 0.0}
    if model == "adlif":
        p.update(p2=u(-0.3, 0.0), p3=u(0.5, 0.9), p4=u(0.0, 0.1), c1=u(-0.1, 0.1), c2=0.25)
    else:
        # conductance stays in [0, 2], so the effective leak p0 + p1*g stays in [0, 0.9]
        p.update(p1=u(-0.25, 0.0), p5=u(0.5, 0.75), p6=u(0.0, 0.25), p7=u(-2.0, 0.0), p8=u(0.2, 0.5))
    p = {k: q(v) for k, v in p.items()}
    state = {"v": q(u(-1, 1)), "g": 0.0, "I": 0.0, "h": 0.0, "v_adp": q(u(-0.5, 0.5)), "v_th": 100.0}
    lo = -1.0 if model == "adlif" else 0.0  # conductance drive is excitatory
    inputs = np.array([q(x) for x in rng.uniform(lo, 1.0, 100)])
    return p, state, inputs


def run_neuron_core(model: str, params: dict, state: dict, inputs) -> tuple[list[dict], int]:
    tmpl = get_template(model)
    bank = params_array({_SLOT[k]: fixed.to_raw(v, F) for k, v in params.items()})
    cfg = CoreConfig(1, tmpl.words(), params=bank, synapse_model=tmpl.synapse_model)
    core = NeuronCore(cfg)
    for name, v in state.items():
        core.nrec[0, STATE_INDEX[name]] = fixed.to_raw(v, F)
    out = []
    for x in inputs:
        core.pending[0] = fixed.to_raw(x, F)
        core.advance_tick()
        out.append({k: fixed.to_float(int(core.nrec[0, STATE_INDEX[k]]), F) for k in ("v", "g", "I", "h", "v_adp")})
    return out, core.saturations


def run_neuron_oracle(model: str, params: dict, state: dict, inputs) -> list[dict]:
    s = dict(state)
    out = []
    for x in inputs:
        s = oracles.ref_adlif_step(s, params, x) if model == "adlif" else oracles.ref_coba_lif_step(s, params, x)
        out.append(s)
    return out


def run_neuron_oracle_izh(params: dict, state: dict, inputs) -> list[dict]:
    s = dict(state)
    out = []
    for x in inputs:
        s = oracles.ref_izhikevich_step(s, params, x)
        out.append(s)
    return out


def neuron_fidelity(model: str, seed: int) -> tuple[float, int]:
    """``(max absolute error over all state variables and ticks, saturation events)``."""
    rng = np.random.default_rng(seed)
    params, state, inputs = random_neuron_config(model, rng)
    core, sats = run_neuron_core(model, params, state, inputs)
    ref = run_neuron_oracle(model, params, state, inputs)
    keys = ("v", "v_adp") if model == "adlif" else ("v", "g", "I", "h")
    err = max(abs(c[k] - r[k]) for c, r in zip(core, ref) for k in keys)
    return err, sats


# -- plasticity ----------------------------------------------------------------
_RULE = {  # terms of Eq. 6 each rule evaluates, and whether it updates the reward trace
    "stdp": ((0, 1), False),
    "triplet_stdp": ((0, 1, 2), False),
    "rstdp": ((0, 1), True),
}
_TRACE_LS = {"x0": 0, "y0": 3, "y1": 4, "r0": 6}


def plasticity_match(rule: str, seed: int, ticks: int = 100) -> bool:
    """Kernel learning against :func:`oracles.ref_plasticity_fixed`, bit for bit."""
    from darwinsim.core import kernel
    from darwinsim.core.costs import decode_table
    from darwinsim.core.neuron_core import default_exp_lut

    rng = np.random.default_rng(seed)
    terms, update_reward = _RULE[rule]
    raw = {f"P{i}": int(rng.integers(-64, 65)) for i in range(3)}
    raw.update({f"P{i}": int(rng.integers(128, 256)) for i in range(3, 7)})
    raw.update({f"C{i}": int(rng.integers(64, 512)) for i in range(4)})
    bank = params_array({**{f"LP{i}": raw[f"P{i}"] for i in range(7)}, **{f"LC{i}": raw[f"C{i}"] for i in range(4)}})
    table, costs = decode_table(get_template(rule).words())
    m = 8
    syn_ls = np.zeros((m, 10), np.int32)
    if not update_reward:
        syn_ls[:, 6] = 1 << F  # modulation held at one
    syn_w = rng.integers(-2000, 2000, m).astype(np.int32)
    post = np.arange(m, dtype=np.int32)
    nrec = np.zeros((m, 14), np.int32)
    traces = [{k: int(syn_ls[s, i]) for k, i in _TRACE_LS.items()} for s in range(m)]
    weights = [int(w) for w in syn_w]
    counters, fault, lut = np.zeros(4, np.int64), np.zeros(4, np.int64), default_exp_lut(F)
    for _ in range(ticks):
        pre = (rng.random(m) < 0.3).astype(np.uint8)
        fired = (rng.random(m) < 0.3).astype(np.uint8)
        reward = int(rng.integers(-256, 257)) if update_reward else 0
        x2, y2 = pre.copy(), fired.copy()
        kernel.run_learning(table, costs, nrec, bank, syn_ls, syn_w, post, pre, fired, reward, F, lut,
                            -1024, 1024, np.zeros(32, np.int32), 256, counters, fault)
        for s in range(m):
            traces[s], weights[s] = oracles.ref_plasticity_fixed(
                traces[s], raw, int(x2[s]), int(y2[s]), reward, weights[s], F, terms, update_reward)
        for s in range(m):
            got = {k: int(syn_ls[s, i]) for k, i in _TRACE_LS.items()}
            want = dict(traces[s])
            if rule != "triplet_stdp":
                got.pop("y1")
                want.pop("y1")
            if got != want or int(syn_w[s]) != weights[s]:
                return False
    return not fault[3]


# -- random networks -------------------------------------------------------------
_NEURON_TEMPLATES = {
    "lif": {"bias": (0.0, 0.3), "decay": (0.6, 0.95)},
    "adlif": {"bias": (0.0, 0.3), "adapt_gain": (0.0, 0.2)},
    "qif": {"bias": (0.0, 0.2)},
    "expif": {"bias": (0.0, 0.3)},
    "izhikevich": {"bias": (0.8, 1.6)},
    "coba": {"bias": (0.0, 0.3)},
}
_LEARNING = {"lif": ("stdp", "triplet_stdp", "rstdp"), "adlif": ("stdp", "sdsp"), "qif": ("stdp",),
             "expif": ("rstdp",), "izhikevich": ("stdp",), "coba": ("stdp",)}


def random_network(seed: int, max_neurons: int = 1000) -> NetworkDescription:
    """Mixed templates, patterns and learning rules; at most ``max_neurons`` neurons."""
    rng = np.random.default_rng(seed)
    net = NetworkDescription(seed=seed)
    names = []
    budget = max_neurons
    for i in range(int(rng.integers(2, 6))):
        tmpl = str(rng.choice(list(_NEURON_TEMPLATES)))
        size = int(rng.integers(4, max(5, min(300, budget // 2))))
        if size > budget:
            break
        budget -= size
        params = {k: float(rng.uniform(*r)) for k, r in _NEURON_TEMPLATES[tmpl].items()}
        learning = str(rng.choice(_LEARNING[tmpl])) if rng.random() < 0.5 else None
        init = {"v": {int(j): float(rng.uniform(0, 1.2)) for j in rng.choice(size, min(size, 5), replace=False)}}
        net.add_population(f"p{i}_{tmpl}", size, tmpl, params=params, init=init, learning=learning)
        names.append(f"p{i}_{tmpl}")
    for k in range(int(rng.integers(len(names), 2 * len(names) + 2))):
        src, dst = (str(x) for x in rng.choice(names, 2))
        ns, nt = net.populations[src].size, net.populations[dst].size
        plastic = net.populations[dst].learning is not None and rng.random() < 0.7
        width = 16 if plastic else int(rng.choice([1, 2, 4, 8, 16]))
        pattern = str(rng.choice(["all_to_all", "one_to_all", "explicit", "one_to_one"]))
        if pattern == "one_to_one" and ns != nt:
            pattern = "explicit"
        kw = {"weights": ("uniform", -0.2, 0.6), "width": width, "plastic": plastic}
        if pattern == "explicit":
            count = int(rng.integers(1, min(400, ns * nt) + 1))
            pairs = {(int(rng.integers(ns)), int(rng.integers(nt))) for _ in range(count)}
            kw["connections"] = [(s, t, float(rng.uniform(-0.2, 0.6))) for s, t in sorted(pairs)]
        if pattern == "all_to_all" and ns * nt > 20000:
            pattern = "one_to_all" if nt < 200 else "explicit"
            if pattern == "explicit":
                kw["connections"] = [(int(s), int(rng.integers(nt)), 0.3) for s in range(ns)]
        net.add_projection(f"j{k}", src, dst, pattern, **kw)
    return net


def mapped_vs_reference(net: NetworkDescription, ticks: int = 100, workers: int = 1,
                        fabric: FabricConfig | None = None) -> tuple[bool, list[str]]:
    """Runs both simulators; returns ``(spike-for-spike agreement, mapped trace)``."""
    fabric = fabric or FabricConfig(6, 6, neurons_per_core=256)
    mapped = map_network(net, fabric)
    ref = ReferenceSimulator(net)
    ok = True
    with Simulator(mapped.images, mapped.fabric, workers=workers) as sim:
        for _ in range(ticks):
            a = ref.step()
            b = sim.step()
            ra = sorted((p, int(i)) for p, idx in a.items() for i in idx)
            rb = sorted(mapped.owner(c, int(n)) for c, idx in enumerate(b) for n in idx)
            ok &= ra == rb
        trace = list(sim.trace)
    return ok, trace


# -- connectivity tables -------------------------------------------------------
def random_topology(seed: int, max_cores: int = 4, max_neurons: int = 64):
    """``(geometry, connections, width, plastic)`` mixing every connection shape."""
    from darwinsim.connectivity import Geometry

    rng = np.random.default_rng(seed)
    geo = Geometry()
    ncores = int(rng.integers(1, max_cores + 1))
    spots = rng.permutation(16)[:ncores]
    for c, spot in enumerate(spots):
        geo.add(c, int(spot % 4) + 1, int(spot // 4), int(rng.integers(1, max_neurons + 1)))
    plastic = bool(rng.random() < 0.25)
    width = 16 if plastic else int(rng.choice([1, 2, 4, 8, 16]))
    signed = bool(rng.random() < 0.5) and width > 1
    lo, hi = (-(1 << (width - 1)), (1 << (width - 1)) - 1) if signed else (0, (1 << width) - 1)
    hi = min(hi, 2000)
    lo = max(lo, -2000)
    shift = int(rng.integers(0, 16 - width + 1)) if width < 16 else 0
    if shift and hi << shift > 32767:
        shift = 0

    def weight():
        return int(rng.integers(lo, hi + 1)) << shift

    conns = {}
    for _ in range(int(rng.integers(1, 2 * ncores + 1))):
        sc, dc = (int(x) for x in rng.integers(0, ncores, 2))
        ns, nd = geo.cores[sc].neurons, geo.cores[dc].neurons
        shape = rng.choice(["sparse", "full", "range", "shared", "one"])
        srcs = sorted({int(x) for x in rng.integers(0, ns, int(rng.integers(1, ns + 1)))})
        if shape == "sparse":
            for s in srcs:
                for t in {int(x) for x in rng.integers(0, nd, int(rng.integers(1, nd + 1)))}:
                    conns[(sc, s, dc, t)] = weight()
        elif shape in ("full", "range", "shared"):
            a = int(rng.integers(0, nd))
            b = nd if shape == "full" else int(rng.integers(a + 1, nd + 1))
            a = 0 if shape == "full" else a
            row = {t: weight() for t in range(a, b)}
            for s in srcs:
                for t in range(a, b):
                    conns[(sc, s, dc, t)] = row[t] if shape == "shared" else weight()
        else:
            for s in srcs:
                conns[(sc, s, dc, s % nd)] = weight()
    return geo, [(*k, w) for k, w in sorted(conns.items())], width, plastic


def applicable_cases(rows: list[dict[int, int]], n_core: int, plastic: bool) -> set[str]:
    """Which encodings can represent a group of rows sharing one target set."""
    targets = sorted(rows[0])
    cases = {"3*", "explicit"}
    if targets == list(range(n_core)):
        cases.add("1*")
    if targets and targets == list(range(targets[0], targets[-1] + 1)):
        cases.add("4*")
    if not plastic and all([r[t] for t in targets] == [rows[0][t] for t in targets] for r in rows):
        cases.add("2*")
    return cases


def check_topology(seed: int) -> tuple[bool, bool]:
    """``(dense expansion is the identity, every block is footprint-minimal)``."""
    from darwinsim.connectivity import build_tables, candidate_blocks, expand_dense

    geo, conns, width, plastic = random_topology(seed)
    tables = build_tables(conns, geo, width=width, plastic=plastic)
    want = {(sc, sn, dc, dn): w for sc, sn, dc, dn, w in conns}
    got = expand_dense(tables)
    if plastic:
        # plastic weights live in the synapse memory, not in the weight runs
        got = {}
        for dc, tbl in tables.axon_in.items():
            for slot, post in enumerate(tbl.plastic_post):
                sc, sn = tbl.plastic_pre[slot]
                got[(sc, sn, dc, post)] = tbl.plastic_init[slot]
    identity = got == want
    rows_of: dict[tuple[int, int], dict[int, dict[int, int]]] = {}
    for sc, sn, dc, dn, w in conns:
        rows_of.setdefault((sc, dc), {}).setdefault(sn, {})[dn] = w
    feeds: dict[tuple[int, int], list[tuple[int, int]]] = {}  # (dst core, axon-in index) -> sources
    for sc, out in tables.axon_out.items():
        slot = geo.cores[sc]
        for n in range(len(out.linkers)):
            for dx, dy, idx in out.lookup(n):
                feeds.setdefault((geo.at(slot.x + dx, slot.y + dy), idx), []).append((sc, n))
    minimal = True
    for dc, tbl in tables.axon_in.items():
        for index, blk in enumerate(tbl.blocks):
            srcs = sorted(feeds[(dc, index)])
            rows = [rows_of[(sc, dc)][sn] for sc, sn in srcs]
            cands = candidate_blocks(rows, blk.base, geo.cores[dc].neurons, width, plastic)
            minimal &= set(cands) == applicable_cases(rows, geo.cores[dc].neurons, plastic)
            minimal &= blk.footprint() == min(c.footprint() for c in cands.values())
    return identity, minimal



# -- network on chip -------------------------------------------------------------
def noc_stress(packets: int, seed: int, size: int = 8, wave: int = 2000, queue_depth: int = 4):
    """Random all-to-all traffic in injection waves; returns ``(exactly once, faults, fabric)``."""
    from darwinsim.noc import Fabric, SpikePacket

    rng = np.random.default_rng(seed)
    fab = Fabric(size, size, queue_depth=queue_depth)
    seen = np.zeros(packets, dtype=np.int64)
    sent = 0
    while sent < packets:
        k = min(wave, packets - sent)
        src = rng.integers(0, size, (k, 2))
        dst = rng.integers(0, size, (k, 2))
        for i in range(k):
            p = SpikePacket(int(dst[i, 0] - src[i, 0]), int(dst[i, 1] - src[i, 1]), 0, sent + i,
                            src=(int(src[i, 0]), int(src[i, 1])))
            p.expect = (int(dst[i, 0]), int(dst[i, 1]))
            fab.inject(p)
        for p in fab.run_until_idle():
            seen[p.sub] += 1 if p.pos == p.expect else 1000
        sent += k
    return bool((seen == 1).all()), list(fab.faults), fab
