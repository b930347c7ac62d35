"""A neuron core: spike intake, per-tick program execution and spike output."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import fixed
from ..connectivity.tables import AxonInTable, AxonOutTable, ConnectivityError
from ..isa.encoding import Instruction, encode
from ..isa.opcodes import NUM_PARAMS, PARAM_NAMES, Opcode
from . import _pykernel, kernel
from .costs import decode_table

MAX_NEURONS = 4096
DEFAULT_BUDGET = 256
PARAM_INDEX = {name: i for i, name in PARAM_NAMES.items()}
STATE_NAMES = ("v", "g", "I", "h", "v_adp", "v_th")
STATE_INDEX = {name: i for i, name in enumerate(STATE_NAMES)}
STATE_INDEX.update({f"S{i}": i for i in range(6)})
STATE_INDEX.update({f"TR{i}": 6 + i for i in range(8)})
NREC_COLS = 14
MODES = ("inference", "learning", "both")
SYNAPSE_MODELS = ("cuba_delta", "coba")


class CoreFault(RuntimeError):
    def __init__(self, coord, code: int, index: int, pc: int, what: str = "neuron"):
        self.coord, self.code, self.index, self.pc = coord, code, index, pc
        super().__init__(f"core {coord}: {kernel.FAULT_NAMES.get(code, code)} at {what} {index}, pc {pc}")


def default_exp_lut(frac_bits: int = fixed.DEFAULT_FRAC_BITS, lo: float = -4.0, hi: float = 4.0) -> np.ndarray:
    """64 samples of exp over ``[lo, hi]``, saturated into the Q format."""
    xs = np.linspace(lo, hi, 64)
    top = fixed.max_value(frac_bits)
    return np.array([fixed.to_raw(min(math.exp(x), top), frac_bits) for x in xs], dtype=np.int32)


def params_array(values: dict[str, int] | None = None) -> np.ndarray:
    """Raw parameter bank from a ``{name: raw}`` mapping (unnamed slots are 0)."""
    bank = np.zeros(NUM_PARAMS, dtype=np.int32)
    for name, raw in (values or {}).items():
        key = name.upper()
        if key not in PARAM_INDEX:
            raise KeyError(f"unknown parameter {name!r}")
        bank[PARAM_INDEX[key]] = raw
    return bank


@dataclass
class CoreConfig:
    neurons: int
    inference_program: tuple[int, ...] = ()
    learning_program: tuple[int, ...] = ()
    mode: str = "inference"
    params: np.ndarray = field(default_factory=lambda: np.zeros(NUM_PARAMS, dtype=np.int32))
    frac_bits: int = fixed.DEFAULT_FRAC_BITS
    synapse_model: str = "cuba_delta"
    exp_lut: np.ndarray | None = None
    exp_range: tuple[int, int] | None = None  # raw bounds of the LUT domain
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if not 0 <= self.neurons <= MAX_NEURONS:
            raise ValueError(f"logical neuron count {self.neurons} outside 0..{MAX_NEURONS}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.synapse_model not in SYNAPSE_MODELS:
            raise ValueError(f"synapse model must be one of {SYNAPSE_MODELS}")
        self.params = np.ascontiguousarray(self.params, dtype=np.int32)
        if self.exp_lut is None:
            self.exp_lut = default_exp_lut(self.frac_bits)
        self.exp_lut = np.ascontiguousarray(self.exp_lut, dtype=np.int32)
        if self.exp_range is None:
            self.exp_range = (fixed.to_raw(-4.0, self.frac_bits), fixed.to_raw(4.0, self.frac_bits))
        if self.exp_range[1] <= self.exp_range[0]:
            raise ValueError("empty EXP LUT domain")


class NeuronCore:
    """Owns the memories of one core and advances them tick by tick."""

    def __init__(self, config: CoreConfig, axon_in: AxonInTable | None = None,
                 axon_out: AxonOutTable | None = None, coord=(0, 0), strict: bool = False,
                 initial_state: np.ndarray | None = None, impl=None, initial_syn_ls: np.ndarray | None = None):
        self.config = config
        self.coord = coord
        self.strict = strict
        self.axon_in = axon_in
        self.axon_out = axon_out
        self._impl = impl or kernel
        n = config.neurons
        self.nrec = np.zeros((n, NREC_COLS), dtype=np.int32)
        if initial_state is not None:
            self.nrec[:] = initial_state
        self.pending = np.zeros(n, dtype=np.int64)
        self.fired = np.zeros(n, dtype=np.uint8)
        m = len(axon_in.plastic_post) if axon_in is not None else 0
        self.syn_post = np.array(axon_in.plastic_post if m else [], dtype=np.int32)
        self.syn_w = np.array(axon_in.plastic_init if m else [], dtype=np.int32)
        self.syn_ls = np.zeros((m, 10), dtype=np.int32)
        if initial_syn_ls is not None and m:
            self.syn_ls[:] = initial_syn_ls
        self.pre_flag = np.zeros(m, dtype=np.uint8)
        self.scratch = np.zeros(_pykernel.SCRATCH_WORDS, dtype=np.int32)
        self.reward = 0
        self.counters = np.zeros(4, dtype=np.int64)
        self.fault = np.zeros(4, dtype=np.int64)
        self.faults: list[CoreFault] = []
        self.fault_events = 0
        self.sops = 0
        self.spikes = 0
        self.ticks = 0
        self._inf = decode_table(config.inference_program)
        self._learn = decode_table(config.learning_program)

    # -- intake -----------------------------------------------------------
    def receive_spike(self, axon_in_index: int, sub: int) -> None:
        if self.axon_in is None:
            self._report(CoreFault(self.coord, 0, axon_in_index, -1, "axon-in index"))
            return
        try:
            neurons, weights, slots = self.axon_in.resolve(axon_in_index, sub)
        except ConnectivityError as exc:
            fault = CoreFault(self.coord, 0, axon_in_index, -1, "axon-in index")
            fault.args = (f"core {self.coord}: {exc}",)
            self._report(fault)
            return
        if slots is not None:
            weights = self.syn_w[slots].astype(np.int64)
            self.pre_flag[slots] = 1
        np.add.at(self.pending, neurons, weights)
        self.sops += len(neurons)

    def _report(self, fault: CoreFault) -> None:
        self.faults.append(fault)
        if self.strict:
            raise fault

    # -- tick -------------------------------------------------------------
    def advance_tick(self) -> list[tuple[int, int, int, int]]:
        """Run one tick; returns ``(neuron, dx, dy, axon_in_index)`` in emission order."""
        cfg = self.config
        lo, hi = cfg.exp_range
        self.ticks += 1
        if cfg.neurons == 0:
            return []
        if cfg.mode in ("inference", "both"):
            table, costs = self._inf
            self._impl.run_inference(table, costs, self.nrec, cfg.params, self.pending,
                                     int(cfg.synapse_model == "cuba_delta"), cfg.frac_bits, cfg.exp_lut, lo, hi,
                                     self.scratch, cfg.budget, self.fired, self.counters, self.fault)
        else:
            self.fired[:] = 0
            self.pending[:] = 0
        self._check_faults("neuron")
        if cfg.mode in ("learning", "both") and len(self.syn_w):
            table, costs = self._learn
            self._impl.run_learning(table, costs, self.nrec, cfg.params, self.syn_ls, self.syn_w, self.syn_post,
                                    self.pre_flag, self.fired, self.reward, cfg.frac_bits, cfg.exp_lut, lo, hi,
                                    self.scratch, cfg.budget, self.counters, self.fault)
            self._check_faults("synapse")
        else:
            self.pre_flag[:] = 0
        out = []
        for n in np.flatnonzero(self.fired).tolist():
            self.spikes += 1
            if self.axon_out is not None:
                for dx, dy, idx in self.axon_out.lookup(n):
                    out.append((n, dx, dy, idx))
        return out

    def _check_faults(self, what: str) -> None:
        count = int(self.fault[3])
        if count:
            code, index, pc = (int(v) for v in self.fault[:3])
            self.fault[:] = 0
            self.fault_events += count
            self._report(CoreFault(self.coord, code, index, pc, what))

    # -- inspection -------------------------------------------------------
    @property
    def saturations(self) -> int:
        return int(self.counters[_pykernel.C_SAT])

    def counter_dict(self) -> dict[str, int]:
        return {
            "saturations": int(self.counters[0]),
            "lut_clamps": int(self.counters[1]),
            "cycles": int(self.counters[2]),
            "instructions": int(self.counters[3]),
            "faults": self.fault_events + sum(f.pc < 0 for f in self.faults),
            "spikes": self.spikes,
            "sops": self.sops,
        }

    def state(self, name: str) -> np.ndarray:
        return self.nrec[:, STATE_INDEX[name]].copy()


@dataclass
class NeuronRecord:
    """One logical neuron's register view: S0..S5, LS0..LS9, TR0..TR7, W and FLAG (raw values)."""

    S: tuple[int, ...] = (0,) * 6
    LS: tuple[int, ...] = (0,) * 10
    TR: tuple[int, ...] = (0,) * 8
    W: int = 0
    FLAG: int = 0


def _registers(rec: NeuronRecord, bank) -> list[int]:
    R = [0] * 64
    R[_pykernel.TR0:_pykernel.TR0 + 8] = list(rec.TR)
    R[_pykernel.S0:_pykernel.S0 + 6] = list(rec.S)
    R[_pykernel.LS0:_pykernel.LS0 + 10] = list(rec.LS)
    R[_pykernel.W] = rec.W
    R[_pykernel.FLAG] = rec.FLAG
    R[_pykernel.PB:_pykernel.PB + NUM_PARAMS] = [int(b) for b in bank]
    return R


def execute_instruction(rec: NeuronRecord, bank, instr: Instruction, frac_bits: int = fixed.DEFAULT_FRAC_BITS,
                        exp_lut=None, exp_range=None) -> tuple[NeuronRecord, bool, int]:
    """Apply one instruction; returns ``(record, fired, saturation events)``.

    Jumps are meaningless for a single instruction and leave the record unchanged.
    """
    bank = [int(b) for b in bank]
    table, costs = decode_table([encode(instr)])
    if instr.op is Opcode.JMP:
        table = table.copy()
        table[0, 0] = int(Opcode.NOP)
    lut = [int(v) for v in (default_exp_lut(frac_bits) if exp_lut is None else exp_lut)]
    lo, hi = exp_range or (fixed.to_raw(-4.0, frac_bits), fixed.to_raw(4.0, frac_bits))
    R = _registers(rec, bank)
    ctx = _pykernel._Ctx()
    nrow = list(rec.S)
    lsrow = list(rec.LS)
    code, pc, fired = _pykernel._execute(R, [tuple(int(v) for v in table[0])], [int(costs[0])], bank, frac_bits,
                                         1 << frac_bits, lut, lo, hi, [0] * 32, DEFAULT_BUDGET, ctx, nrow, lsrow)
    if code:
        raise CoreFault((0, 0), code, 0, pc)
    out = NeuronRecord(
        S=tuple(R[_pykernel.S0:_pykernel.S0 + 6]),
        LS=tuple(R[_pykernel.LS0:_pykernel.LS0 + 10]),
        TR=tuple(R[_pykernel.TR0:_pykernel.TR0 + 8]),
        W=R[_pykernel.W],
        FLAG=R[_pykernel.FLAG],
    )
    return out, bool(fired), ctx.sat


def generate_spike(rec: NeuronRecord, nhsp: int, bank=None, frac_bits: int = fixed.DEFAULT_FRAC_BITS,
                   ) -> tuple[NeuronRecord, bool]:
    bank = np.zeros(NUM_PARAMS, dtype=np.int32) if bank is None else bank
    out, fired, _ = execute_instruction(rec, bank, Instruction.make(Opcode.GSPRS, nhsp=nhsp), frac_bits)
    return out, fired


__all__ = [
    "CoreConfig",
    "CoreFault",
    "NeuronCore",
    "NeuronRecord",
    "default_exp_lut",
    "execute_instruction",
    "generate_spike",
    "params_array",
]
