"""Opcode numbering, operand layouts and register naming.

Every instruction is a 16-bit word: a 5-bit opcode in the top bits and an
11-bit operand.  Operand sub-fields are packed MSB-first in the order listed
in :data:`FORMATS`.  Hot-code fields index their register sets MSB-first, so
the first register of a set sits at the field's most significant bit.
"""

from __future__ import annotations

from enum import IntEnum

OPCODE_BITS = 5
OPERAND_BITS = 11
WORD_MASK = 0xFFFF
OPERAND_MASK = (1 << OPERAND_BITS) - 1


class Opcode(IntEnum):
    # neuromorphic
    LSIS = 0
    LDIP = 1
    LSLS = 2
    LDLP = 3
    UPTIS = 4
    UPTVM = 5
    UPTLS = 6
    UPTWT = 7
    UPTTS = 8
    GSPRS = 9
    # extended (RISC-like)
    ADD = 10
    SUB = 11
    MUL = 12
    ADDI = 13
    SHIFT = 14
    LOGIC = 15
    MOV = 16
    WMOV = 17
    CMP = 18
    JMP = 19
    SA = 20
    TS = 21
    LOAD = 22
    STORE = 23
    PUSH = 24
    POP = 25
    SP = 26
    DIV = 27
    EXP = 28
    NOP = 29


NEUROMORPHIC = frozenset(op for op in Opcode if op <= Opcode.GSPRS)
EXTENDED = frozenset(op for op in Opcode if op > Opcode.GSPRS)

# (field name, width) MSB-first.  Fields named "rsv" must be zero in canonical words.
FORMATS: dict[Opcode, tuple[tuple[str, int], ...]] = {
    Opcode.LSIS: (("ls", 1), ("rsv", 4), ("nhis", 6)),
    Opcode.LDIP: (("nhip", 8), ("nhic", 3)),
    Opcode.LSLS: (("ls", 1), ("nhls", 10)),
    Opcode.LDLP: (("nhlp", 7), ("nhlc", 4)),
    Opcode.UPTIS: (("rsv", 2), ("ohis", 3), ("nhip", 6)),
    Opcode.UPTVM: (("rsv", 7), ("nhvm", 4)),
    Opcode.UPTLS: (("k", 3), ("l", 3), ("m", 3), ("n", 2)),
    Opcode.UPTWT: (("m", 2), ("n", 9)),
    Opcode.UPTTS: (("k", 3), ("l", 3), ("m", 3), ("n", 2)),
    Opcode.GSPRS: (("rsv", 7), ("nhsp", 4)),
    Opcode.ADD: (("p", 1), ("a", 5), ("b", 5)),
    Opcode.SUB: (("p", 1), ("a", 5), ("b", 5)),
    Opcode.MUL: (("p", 1), ("a", 5), ("b", 5)),
    Opcode.ADDI: (("p", 1), ("a", 5), ("imm", 5)),
    Opcode.SHIFT: (("p", 1), ("a", 5), ("dir", 1), ("amt", 4)),
    Opcode.LOGIC: (("a", 4), ("b", 4), ("mode", 3)),
    Opcode.MOV: (("p", 1), ("a", 5), ("b", 5)),
    Opcode.WMOV: (("p", 1), ("a", 5), ("b", 5)),
    Opcode.CMP: (("p", 1), ("a", 5), ("b", 5)),
    Opcode.JMP: (("cond", 3), ("off", 8)),
    Opcode.SA: (("index", 11),),
    Opcode.TS: (("index", 11),),
    Opcode.LOAD: (("p", 1), ("a", 5), ("addr", 5)),
    Opcode.STORE: (("p", 1), ("a", 5), ("addr", 5)),
    Opcode.PUSH: (("p", 1), ("a", 5), ("rsv", 5)),
    Opcode.POP: (("p", 1), ("a", 5), ("rsv", 5)),
    Opcode.SP: (("rsv", 6), ("value", 5)),
    Opcode.DIV: (("p", 1), ("a", 5), ("b", 5)),
    Opcode.EXP: (("p", 1), ("a", 5), ("b", 5)),
    Opcode.NOP: (("rsv", 11),),
}

assert all(sum(w for _, w in fmt) == OPERAND_BITS for fmt in FORMATS.values())

SIGNED_FIELDS = {(Opcode.ADDI, "imm"), (Opcode.JMP, "off")}

# Register sets addressed by each hot-code field, MSB first.
S_NAMES = ("S0", "S1", "S2", "S3", "S4", "S5")
LS_NAMES = tuple(f"LS{i}" for i in range(10))
IP_NAMES = tuple(f"IP{i}" for i in range(9))
IC_NAMES = ("IC0", "IC1", "IC2")
LP_NAMES = tuple(f"LP{i}" for i in range(8))
LC_NAMES = tuple(f"LC{i}" for i in range(8))
TR_NAMES = tuple(f"TR{i}" for i in range(8))

HOT_FIELDS: dict[tuple[Opcode, str], tuple[str, ...]] = {
    (Opcode.LSIS, "nhis"): S_NAMES,
    (Opcode.LDIP, "nhip"): IP_NAMES[:8],
    (Opcode.LDIP, "nhic"): IC_NAMES,
    (Opcode.LSLS, "nhls"): LS_NAMES,
    (Opcode.LDLP, "nhlp"): LP_NAMES[:7],
    (Opcode.LDLP, "nhlc"): LC_NAMES[:4],
    (Opcode.UPTIS, "ohis"): ("I", "g", "v_adp"),
    (Opcode.UPTIS, "nhip"): ("IP3", "IP4", "IP5", "IP6", "IP7", "IC1"),
    (Opcode.UPTVM, "nhvm"): ("v_m", "I", "v_adp", "IC0"),
    (Opcode.UPTWT, "n"): LS_NAMES[:9],
    (Opcode.GSPRS, "nhsp"): ("fire", "compare", "adaptive", "reset"),
}

# Semantic aliases of the state registers.
STATE_ALIASES = {"S0": "v_m", "S1": "g", "S2": "I", "S3": "h", "S4": "v_adp", "S5": "v_th"}

# --- register file layout used by the interpreter --------------------------
# Working space (p=0 codes 0..31) and parameter space (p=1, offset 32).
REG_TR0 = 0
REG_S0 = 8
REG_LS0 = 14
REG_W = 24
REG_FLAG = 25
PARAM_BASE = 32
REG_IP0 = PARAM_BASE + 0
REG_IC0 = PARAM_BASE + 9
REG_LP0 = PARAM_BASE + 12
REG_LC0 = PARAM_BASE + 20
REG_V0 = PARAM_BASE + 28
NUM_REGS = 64
NUM_PARAMS = 29  # IP0-8, IC0-2, LP0-7, LC0-7, V0

WORKING_NAMES: dict[int, str] = {}
for _i in range(8):
    WORKING_NAMES[REG_TR0 + _i] = f"TR{_i}"
for _i in range(6):
    WORKING_NAMES[REG_S0 + _i] = f"S{_i}"
for _i in range(10):
    WORKING_NAMES[REG_LS0 + _i] = f"LS{_i}"
WORKING_NAMES[REG_W] = "W"
WORKING_NAMES[REG_FLAG] = "FLAG"

PARAM_NAMES: dict[int, str] = {}
for _i in range(9):
    PARAM_NAMES[_i] = f"IP{_i}"
for _i in range(3):
    PARAM_NAMES[9 + _i] = f"IC{_i}"
for _i in range(8):
    PARAM_NAMES[12 + _i] = f"LP{_i}"
for _i in range(8):
    PARAM_NAMES[20 + _i] = f"LC{_i}"
PARAM_NAMES[28] = "V0"

# name -> (p, code); accepts the spellings used in program listings.
REGISTER_CODES: dict[str, tuple[int, int]] = {}
for _code, _name in WORKING_NAMES.items():
    REGISTER_CODES[_name] = (0, _code)
for _code, _name in PARAM_NAMES.items():
    REGISTER_CODES[_name] = (1, _code)
for _i in range(8):
    REGISTER_CODES[f"RT{_i}"] = (0, REG_TR0 + _i)
for _i in range(9):
    REGISTER_CODES[f"P{_i}"] = (1, _i)
for _i in range(3):
    REGISTER_CODES[f"C{_i}"] = (1, 9 + _i)
for _s, _alias in STATE_ALIASES.items():
    REGISTER_CODES[_alias.upper()] = REGISTER_CODES[_s]
REGISTER_CODES["VM"] = REGISTER_CODES["S0"]
REGISTER_CODES["VTH"] = REGISTER_CODES["S5"]
REGISTER_CODES["WT"] = REGISTER_CODES["W"]
del _i, _code, _name, _s, _alias

LOGIC_MODES = ("AND", "OR", "XOR", "NOT", "NAND", "NOR", "XNOR", "ANDN")

# JMP condition mask bits: LT, EQ, GT (MSB first).  Bare "JMP" means GT.
JMP_CONDITIONS = {
    "NV": 0b000,
    "GT": 0b001,
    "EQ": 0b010,
    "GE": 0b011,
    "LT": 0b100,
    "NE": 0b101,
    "LE": 0b110,
    "AL": 0b111,
}
JMP_DEFAULT = JMP_CONDITIONS["GT"]
JMP_NAMES = {v: k for k, v in JMP_CONDITIONS.items()}


def register_name(p: int, code: int) -> str | None:
    return (PARAM_NAMES if p else WORKING_NAMES).get(code)
