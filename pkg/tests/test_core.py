import numpy as np
import pytest

from darwinsim import fixed
from darwinsim.connectivity import AxonInTable
from darwinsim.core import (
    CoreConfig,
    CoreFault,
    NeuronCore,
    NeuronRecord,
    execute_instruction,
    generate_spike,
    params_array,
    program_cycle_cost,
)
from darwinsim.core.neuron_core import STATE_INDEX
from darwinsim.isa import Instruction, Opcode, assemble
from darwinsim.models import get_template

ONE = 256


def lif_core(n=4, impl=None, **params):
    bank = params_array({"IP0": 224, "IP1": ONE, **params})
    cfg = CoreConfig(n, get_template("lif").words(), params=bank)
    core = NeuronCore(cfg, impl=impl)
    core.nrec[:, STATE_INDEX["v_th"]] = ONE
    return core


def test_uptvm_weighted_sum():
    rec = NeuronRecord(S=(256, 0, 64, 0, 0, 0))
    bank = params_array({"IP0": 128, "IP1": 256})
    out, fired, sats = execute_instruction(rec, bank, Instruction.make(Opcode.UPTVM, nhvm=0xD))
    assert out.S[0] == 192  # 0.5*1.0 + 1.0*0.25
    assert not fired and sats == 0


def test_uptvm_saturates_and_counts():
    rec = NeuronRecord(S=(fixed.RAW_MAX, 0, fixed.RAW_MAX, 0, 0, 0))
    bank = params_array({"IP0": ONE, "IP1": ONE})
    out, _, sats = execute_instruction(rec, bank, Instruction.make(Opcode.UPTVM, nhvm=0xC))
    assert out.S[0] == fixed.RAW_MAX
    assert sats == 1


def test_gsprs_fire_only_fires_unconditionally():
    rec = NeuronRecord(S=(-500, 0, 0, 0, 0, 1000))
    out, fired = generate_spike(rec, 0x8)
    assert fired and out.S == rec.S


def test_gsprs_compare_reset_and_adapt():
    bank = params_array({"V0": -64, "IC2": 32})
    rec = NeuronRecord(S=(300, 0, 0, 0, 10, 256))
    out, fired = generate_spike(rec, 0xF, bank)
    assert fired
    assert out.S[0] == -64 and out.S[4] == 42
    below, fired = generate_spike(NeuronRecord(S=(256, 0, 0, 0, 0, 256)), 0xF, bank)
    assert not fired and below.S[0] == 256  # equal to threshold is not above it


def test_lif_integrates_fires_and_resets(impl):
    core = lif_core(1, impl)
    seen = []
    for _ in range(8):
        core.pending[0] = 96  # 0.375 per tick
        core.advance_tick()
        seen.append((int(core.nrec[0, 0]), int(core.fired[0])))
    v, expect = 0, []
    for _ in range(8):
        v = (224 * v >> 8) + 96
        fired = v > ONE
        expect.append((0 if fired else v, int(fired)))
        v = 0 if fired else v
    assert seen == expect
    assert seen[:4] == [(96, 0), (180, 0), (253, 0), (0, 1)]
    assert core.spikes == 2


def test_pending_input_is_additive(impl):
    core = lif_core(2, impl, IP0=0)
    core.nrec[:, STATE_INDEX["v_th"]] = 100 * ONE
    core.pending[1] = 2
    core.pending[1] += 5
    core.advance_tick()
    assert core.nrec[1, 0] == 7
    assert core.nrec[0, 0] == 0
    assert not core.pending.any()


def test_spike_delivery_via_axon_in(impl):
    from darwinsim.connectivity import AxonInBlock

    blk = AxonInBlock(ctype="2*", base=0, rows=1, width=8, signed=False, shift=0, pairs=((1, 40), (3, 60)))
    tin = AxonInTable(4, [(0, 2)], [blk])
    core = NeuronCore(lif_core(4).config, axon_in=tin, impl=impl)
    core.nrec[:, STATE_INDEX["v_th"]] = 100 * ONE
    core.receive_spike(0, 0)
    core.receive_spike(0, 0)
    core.advance_tick()
    assert core.nrec[:, 0].tolist() == [0, 80, 0, 120]
    assert core.sops == 4


def test_bad_axon_in_index_records_fault():
    core = NeuronCore(lif_core(2).config, axon_in=AxonInTable(2))
    core.receive_spike(7, 0)
    assert len(core.faults) == 1
    assert "axon-in" in str(core.faults[0])
    strict = NeuronCore(lif_core(2).config, axon_in=AxonInTable(2), strict=True)
    with pytest.raises(CoreFault):
        strict.receive_spike(7, 0)


def test_illegal_instruction_suppresses_neuron(impl):
    words = assemble("UPTVM 0xD").words + [31 << 11]
    cfg = CoreConfig(3, words, params=params_array({"IP0": ONE, "IC0": 10}))
    core = NeuronCore(cfg, impl=impl)
    core.nrec[:, 0] = 5
    core.advance_tick()
    assert core.nrec[:, 0].tolist() == [5, 5, 5]  # not written back
    assert not core.fired.any()
    assert core.faults and core.faults[0].code == 1
    with pytest.raises(CoreFault, match="illegal"):
        NeuronCore(cfg, strict=True, impl=impl).advance_tick()


def test_runaway_program_hits_cycle_budget(impl):
    words = assemble("top: ADDI TR0, 1\nJMP.AL top").words
    cfg = CoreConfig(1, words, budget=64)
    core = NeuronCore(cfg, impl=impl)
    core.advance_tick()
    assert core.faults[0].code == 2


def test_learning_mode_skips_inference():
    core = NeuronCore(CoreConfig(2, get_template("lif").words(), mode="learning",
                                 params=params_array({"IC0": ONE})))
    core.pending[:] = 99
    core.advance_tick()
    assert not core.nrec.any() and not core.pending.any()


def test_config_validation():
    with pytest.raises(ValueError):
        CoreConfig(5000)
    with pytest.raises(ValueError):
        CoreConfig(1, mode="sleep")
    with pytest.raises(ValueError):
        CoreConfig(1, synapse_model="gap")


def test_cycle_cost_counts_products():
    assert program_cycle_cost(get_template("lif").words()) > 0
    assert program_cycle_cost([]) == 0


@pytest.mark.parametrize("model", ["lif", "adlif", "qif", "expif", "izhikevich", "coba"])
def test_kernels_agree(model):
    from darwinsim.core import kernel

    impls = kernel.implementations()
    if len(impls) < 2:
        pytest.skip("compiled kernel not built")
    rng = np.random.default_rng(3)
    tmpl = get_template(model)
    bank = params_array({k: int(rng.integers(-300, 300)) for k in ("IP0", "IP1", "IP2", "IC0", "IC1", "IP5")})
    cfg = CoreConfig(64, tmpl.words(), params=bank, synapse_model=tmpl.synapse_model)
    init = rng.integers(-400, 400, (64, 14)).astype(np.int32)
    cores = {name: NeuronCore(cfg, initial_state=init, impl=mod) for name, mod in impls.items()}
    for _ in range(30):
        drive = rng.integers(-200, 200, 64)
        for c in cores.values():
            c.pending[:] = drive
            c.advance_tick()
    a, b = cores.values()
    assert np.array_equal(a.nrec, b.nrec)
    assert np.array_equal(a.counters, b.counters)
    assert [f.code for f in a.faults] == [f.code for f in b.faults]
