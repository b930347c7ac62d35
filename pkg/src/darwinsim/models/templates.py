"""Library of neuron and plasticity programs addressable by name.

Each template carries two texts.  ``listing`` is the program as published
for the model and is what the instruction-count goldens are checked
against.  ``source`` is the program the simulator runs: the same instruction
count, with operands chosen so that every field means what the model needs
under this package's operand layout.

Parameters are named with friendly aliases mapped onto a *slot*.  Slots in
the parameter bank (``IP0``, ``LC2``, ``V0`` ...) are shared by the whole
core; every other slot (``v_th``, ``TR2``, ``LS6`` ...) is per neuron or,
for plasticity templates, per synapse.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources

from ..isa.assembler import AssemblyProgram, assemble
from ..isa.encoding import Illegal, decode
from ..isa.opcodes import PARAM_NAMES, REG_S0, WORKING_NAMES, Opcode

BANK_SLOTS = frozenset(PARAM_NAMES.values())
_STATE_SLOTS = {"v", "g", "I", "h", "v_adp", "v_th"} | {f"TR{i}" for i in range(8)}
_SYN_SLOTS = {f"LS{i}" for i in range(10)}


class TemplateError(KeyError):
    pass


@dataclass(frozen=True)
class ParamSpec:
    slot: str
    default: float
    role: str

    @property
    def scope(self) -> str:
        if self.slot in BANK_SLOTS:
            return "core"
        if self.slot in _SYN_SLOTS:
            return "synapse"
        return "neuron"


@dataclass(frozen=True)
class ModelTemplate:
    name: str
    kind: str  # "neuron" or "learning"
    listing_file: str | None
    source: str
    params: dict[str, ParamSpec]
    synapse_model: str = "cuba_delta"
    entries: tuple[str, ...] = ()
    description: str = ""
    requires: tuple[str, ...] = field(default=())  # post-neuron state the rule reads

    @cached_property
    def listing(self) -> str:
        """Published listing, or the executable source for templates without one."""
        if self.listing_file is None:
            return self.source
        return resources.files(__package__).joinpath("listings", self.listing_file).read_text()

    @cached_property
    def program(self) -> AssemblyProgram:
        return assemble(self.source)

    def words(self, entry: str | None = None) -> tuple[int, ...]:
        """Executable words, optionally starting at a section label."""
        prog = self.program
        start = prog.entry(entry) if entry else 0
        return tuple(prog.words[start:])

    @property
    def instruction_count(self) -> int:
        return len(assemble(self.listing).words)

    def resolve(self, values: dict[str, float] | None = None) -> dict[str, float]:
        """Map friendly or slot names to ``{slot: value}``, defaults filled in."""
        out = {spec.slot: spec.default for spec in self.params.values()}
        for key, value in (values or {}).items():
            if key in self.params:
                out[self.params[key].slot] = float(value)
            elif key in BANK_SLOTS or key in _STATE_SLOTS or key in _SYN_SLOTS:
                out[key] = float(value)
            else:
                raise TemplateError(f"template {self.name!r} has no parameter {key!r}")
        return out

    def slots(self) -> set[str]:
        return {spec.slot for spec in self.params.values()}


def _spec(slot: str, default: float, role: str) -> ParamSpec:
    return ParamSpec(slot, default, role)


_NEURON_COMMON = {
    "v_th": _spec("v_th", 1.0, "firing threshold"),
    "v_reset": _spec("V0", 0.0, "reset potential"),
    "h_decay": _spec("IP8", 0.0, "synaptic input decay"),
}

TEMPLATES: dict[str, ModelTemplate] = {}


def _register(t: ModelTemplate) -> None:
    TEMPLATES[t.name] = t


_register(ModelTemplate(
    "lif", "neuron", "lif.asm",
    "UPTVM 0xD\nGSPRS 0xD\n",
    {
        "decay": _spec("IP0", 0.875, "membrane leak factor"),
        "gain": _spec("IP1", 1.0, "input gain"),
        "bias": _spec("IC0", 0.0, "constant drive"),
        **_NEURON_COMMON,
    },
    description="leaky integrate-and-fire",
))

_register(ModelTemplate(
    "adlif", "neuron", None,
    "UPTIS ohis=v_adp, nhip=IP3|IP4|IC1\nUPTVM 0xF\nGSPRS 0xF\n",
    {
        "decay": _spec("IP0", 0.875, "membrane leak factor"),
        "gain": _spec("IP1", 1.0, "input gain"),
        "coupling": _spec("IP2", -0.5, "adaptation to membrane coupling"),
        "bias": _spec("IC0", 0.0, "constant drive"),
        "adapt_decay": _spec("IP3", 0.875, "adaptation leak factor"),
        "adapt_gain": _spec("IP4", 0.0, "subthreshold adaptation"),
        "adapt_bias": _spec("IC1", 0.0, "adaptation drive"),
        "adapt_jump": _spec("IC2", 0.25, "adaptation increment per spike"),
        **_NEURON_COMMON,
    },
    description="adaptive LIF",
))

_register(ModelTemplate(
    "coba", "neuron", None,
    "UPTIS ohis=I|g, nhip=IP5|IP6|IP7|IC1\nUPTVM 0xD\nGSPRS 0xD\n",
    {
        "decay": _spec("IP0", 0.875, "membrane leak factor"),
        "gain": _spec("IP1", -0.25, "conductance to membrane gain"),
        "bias": _spec("IC0", 0.0, "constant drive"),
        "g_decay": _spec("IP5", 0.75, "conductance decay"),
        "g_gain": _spec("IP6", 0.5, "input to conductance gain"),
        "reversal": _spec("IP7", -2.0, "minus the reversal potential"),
        **_NEURON_COMMON,
        "h_decay": _spec("IP8", 0.5, "synaptic input decay"),
    },
    synapse_model="coba",
    description="LIF with dual-exponential conductance input",
))

_register(ModelTemplate(
    "qif", "neuron", "qif.asm",
    "UPTTS k=0, l=3, m=0, n=1\nMOV P0, TR0\nUPTVM 0xD\nGSPRS 0xD\n",
    {
        "quad": _spec("IP3", 0.25, "quadratic coefficient"),
        "lin": _spec("IC1", 0.875, "linear coefficient"),
        "gain": _spec("IP1", 1.0, "input gain"),
        "bias": _spec("IC0", 0.0, "constant term"),
        **_NEURON_COMMON,
    },
    description="quadratic integrate-and-fire; v' = (quad*v + lin)*v + gain*I + bias",
))

_register(ModelTemplate(
    "expif", "neuron", "expif.asm",
    "UPTTS k=0, l=5, m=0, n=1\nEXP TR1, TR0\nMUL TR1, TR2\nADD C0, TR1\nUPTVM 0xD\nGSPRS 0xD\n",
    {
        "decay": _spec("IP0", 0.875, "membrane leak factor"),
        "gain": _spec("IP1", 1.0, "input gain"),
        "bias": _spec("IC0", 0.0, "leak reversal drive"),
        "inv_slope": _spec("IP5", 4.0, "1 / slope factor"),
        "exp_offset": _spec("IC1", -2.4, "-(rheobase / slope factor)"),
        "exp_scale": _spec("TR2", 0.03125, "slope factor * dt / tau (per neuron)"),
        **_NEURON_COMMON,
    },
    description="exponential integrate-and-fire",
))

_register(ModelTemplate(
    "izhikevich", "neuron", "izhikevich.asm",
    "UPTTS k=0, l=5, m=0, n=1\nMOV P0, TR0\nUPTIS ohis=v_adp, nhip=IP3|IP4\nUPTVM 0xF\nGSPRS 0xF\n",
    {
        "quad": _spec("IP5", 4.0, "quadratic coefficient"),
        "lin": _spec("IC1", 6.0, "linear coefficient"),
        "gain": _spec("IP1", 1.0, "input gain"),
        "recovery_coupling": _spec("IP2", -1.0, "recovery to membrane coupling"),
        "bias": _spec("IC0", 1.4, "constant term"),
        "u_decay": _spec("IP3", 0.98, "1 - a*dt"),
        "u_gain": _spec("IP4", 0.004, "a*b*dt"),
        "u_jump": _spec("IC2", 0.08, "recovery increment d"),
        "v_th": _spec("v_th", 0.3, "spike cut-off"),
        "v_reset": _spec("V0", -0.65, "reset potential c"),
        "h_decay": _spec("IP8", 0.0, "synaptic input decay"),
    },
    description="Izhikevich neuron with membrane in units of 100 mV and dt = 1 ms",
))

_TRACE_PARAMS = {
    "pre_decay": _spec("LP3", 0.875, "presynaptic trace decay"),
    "pre_jump": _spec("LC0", 1.0, "presynaptic trace increment"),
    "post_decay": _spec("LP4", 0.875, "postsynaptic trace decay"),
    "post_jump": _spec("LC1", 1.0, "postsynaptic trace increment"),
}

_register(ModelTemplate(
    "stdp", "learning", "stdp.asm",
    "UPTLS k=0, l=3, m=0, n=0\nUPTLS k=3, l=4, m=3, n=1\nUPTWT m=0, n=LS0|LS5\nUPTWT m=1, n=LS2|LS3\n",
    {
        "a_plus": _spec("LP0", 0.0625, "potentiation rate"),
        "a_minus": _spec("LP1", -0.0625, "depression rate"),
        **_TRACE_PARAMS,
    },
    description="pair-based STDP",
))

_register(ModelTemplate(
    "triplet_stdp", "learning", "triplet_stdp.asm",
    "UPTLS k=0, l=3, m=0, n=0\nUPTLS k=3, l=4, m=3, n=1\nUPTLS k=4, l=5, m=4, n=2\n"
    "UPTWT 0x10C\nUPTWT 0x264\nUPTWT 0x454\n",
    {
        "a_pre": _spec("LP0", 0.0625, "potentiation rate"),
        "a_post0": _spec("LP1", -0.03125, "fast depression rate"),
        "a_post1": _spec("LP2", -0.03125, "slow depression rate"),
        **_TRACE_PARAMS,
        "slow_decay": _spec("LP5", 0.9375, "slow postsynaptic trace decay"),
        "slow_jump": _spec("LC2", 1.0, "slow postsynaptic trace increment"),
        "modulation": _spec("LS6", 1.0, "constant modulation factor (per synapse)"),
    },
    description="triplet STDP; the modulation trace is held constant",
))

_register(ModelTemplate(
    "rstdp", "learning", "rstdp.asm",
    "UPTLS k=0, l=3, m=0, n=0\nUPTLS k=3, l=4, m=3, n=1\nUPTLS k=6, l=6, m=6, n=3\n"
    "UPTWT 0x10C\nUPTWT 0x264\n",
    {
        "a_plus": _spec("LP0", 0.25, "potentiation rate"),
        "a_minus": _spec("LP1", -0.25, "depression rate"),
        **_TRACE_PARAMS,
        "reward_decay": _spec("LP6", 0.75, "reward trace decay"),
        "reward_gain": _spec("LC3", 1.0, "reward trace gain"),
    },
    description="reward-modulated STDP",
))

# Calcium is the post neuron's adaptation variable; LS1 holds the jump size
# gated by the presynaptic flag, so synapses without a presynaptic spike
# add or subtract zero.
_register(ModelTemplate(
    "sdsp", "learning", "sdsp.asm",
    """\
        UPTLS k=1, l=7, m=1, n=0
        CMP TR0, S0
        JMP Keep
        CMP TR1, S4
        JMP Keep
        CMP S4, TR3
        JMP Keep
        CMP S4, TR2
        JMP Up
        SUB W, LS1
        JMP.AL Keep
    Up: ADD W, LS1
    Keep: NOP
    """,
    {
        "jump": _spec("LC0", 0.0625, "weight step per presynaptic spike"),
        "hold": _spec("LP7", 0.0, "step register decay (keep 0)"),
        "v_gate": _spec("TR0", 0.25, "minimum membrane potential for any change"),
        "ca_low": _spec("TR1", 0.125, "calcium lower bound"),
        "ca_mid": _spec("TR2", 0.5, "calcium potentiation threshold"),
        "ca_high": _spec("TR3", 2.0, "calcium upper bound"),
    },
    requires=("v_adp",),
    description="spike-driven synaptic plasticity",
))

_register(ModelTemplate(
    "stp", "learning", "stp.asm",
    """\
    LayerH:
        UPTTS k=0, l=2, m=0, n=3
        MOV LP0, TR0
        UPTWT m=0, n=LS2
        JMP.AL End
    LayerO:
        UPTWT m=1, n=LS2|LS8
    End:
    """,
    {
        "hidden_rate": _spec("IP2", 0.0625, "hidden layer: step per unit of post potential"),
        "output_rate": _spec("LP1", 0.125, "output layer: step per unit of reward"),
    },
    entries=("layerh", "layero"),
    description="layer-scoped plasticity with a hidden and an output section",
))


def get_template(name: str) -> ModelTemplate:
    try:
        return TEMPLATES[name.lower()]
    except KeyError:
        raise TemplateError(f"unknown template {name!r}; known: {', '.join(sorted(TEMPLATES))}") from None


GOLDEN_COUNTS = {
    "lif": 2, "qif": 4, "expif": 6, "izhikevich": 5, "stdp": 4,
    "triplet_stdp": 6, "rstdp": 5, "sdsp": 13, "stp": 5,
}


# -- static register analysis ---------------------------------------------
_STATE_BY_REG = {f"S{i}": n for i, n in enumerate(("v", "g", "I", "h", "v_adp", "v_th"))}


def _working(code: int) -> str | None:
    name = WORKING_NAMES.get(code)
    return _STATE_BY_REG.get(name, name)


def _name(p: int, code: int) -> str | None:
    return PARAM_NAMES.get(code) if p else _working(code)


def program_reads(words) -> set[str]:
    """Registers whose incoming value a program can observe.

    A register counts when it is read before any write to it in program
    order.  Neuron state registers are reported by their state names
    (``v``, ``v_th`` ...).
    """
    return program_access(words)[0]


def program_writes(words) -> set[str]:
    """Registers a program may write, named as in :func:`program_reads`."""
    return program_access(words)[1]


def program_access(words) -> tuple[set[str], set[str]]:
    reads: set[str] = set()
    written: set[str] = set()

    def use(name):
        if name is None:
            return
        if name not in written:
            reads.add(name)

    for w in words:
        ins = decode(w)
        if isinstance(ins, Illegal):
            continue
        op = ins.op
        if op is Opcode.UPTVM:
            nh = ins["nhvm"]
            for bit, regs in ((8, ("IP0", "v_m")), (4, ("IP1", "I")), (2, ("IP2", "v_adp")), (1, ("IC0",))):
                if nh & bit:
                    for r in regs:
                        use("v" if r == "v_m" else r)
            written.add("v")
        elif op is Opcode.GSPRS:
            nh = ins["nhsp"]
            if nh & 4:
                use("v")
                use("v_th")
            if nh & 2:
                use("IC2")
            if nh & 1:
                use("V0")
        elif op is Opcode.UPTIS:
            gates = set(ins.hot("nhip"))
            for target in ins.hot("ohis"):
                if target == "g":
                    for r, s in (("IP5", "g"), ("IP6", "h")):
                        if r in gates:
                            use(r)
                            use(s)
                    written.add("g")
                elif target == "I":
                    if "IC1" in gates:
                        use("g")
                        use("v")
                    if "IP7" in gates:
                        use("IP7")
                        use("g")
                    written.add("I")
                else:
                    for r, s in (("IP3", "v_adp"), ("IP4", "v")):
                        if r in gates:
                            use(r)
                            use(s)
                    if "IC1" in gates:
                        use("IC1")
                    written.add("v_adp")
        elif op is Opcode.UPTLS:
            use(f"LP{ins['l']}")
            use(f"LS{ins['m']}")
            use(f"LC{ins['n']}")
            written.add(f"LS{ins['k']}")
        elif op is Opcode.UPTWT:
            use(f"LP{ins['m']}")
            n = ins["n"]
            for i in range(9):
                if n & (256 >> i):
                    use(f"LS{i}")
            use("W")
        elif op is Opcode.UPTTS:
            use(f"IP{ins['l']}")
            if ins["m"] < 6:
                use(_working(REG_S0 + ins["m"]))
            if ins["n"] < 3:
                use(f"IC{ins['n']}")
            written.add(f"TR{ins['k']}")
        elif op in (Opcode.ADD, Opcode.SUB, Opcode.MUL, Opcode.DIV, Opcode.CMP):
            use(_name(ins["p"], ins["a"]))
            use(_working(ins["b"]))
            if op is not Opcode.CMP:
                written.add(_name(ins["p"], ins["a"]))
        elif op in (Opcode.MOV, Opcode.EXP, Opcode.WMOV):
            use(_working(ins["b"]))
            if op is Opcode.WMOV:
                use("W")
            written.add(_name(ins["p"], ins["a"]))
    written.discard(None)
    return reads, written


# Registers the core fills in before a run, so programs may read them freely.
RUNTIME_PROVIDED = frozenset(
    {"v", "g", "I", "h", "v_adp", "W", "LS2", "LS5", "LS8", "FLAG"}
    | {f"LS{i}" for i in (0, 1, 3, 4, 6, 7, 9)}
)


def uncovered_reads(template: ModelTemplate) -> set[str]:
    """Registers a template's program reads that neither its schema nor the core supplies."""
    reads = program_reads(template.words())
    return {r for r in reads if r not in template.slots() and r not in RUNTIME_PROVIDED}


__all__ = [
    "GOLDEN_COUNTS",
    "ModelTemplate",
    "ParamSpec",
    "TEMPLATES",
    "TemplateError",
    "get_template",
    "program_access",
    "program_reads",
    "program_writes",
    "uncovered_reads",
]
